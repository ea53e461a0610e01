#pragma once

#include <optional>
#include <string>
#include <vector>

#include "measinf/sequences.hpp"

namespace measinf {

/// Product of closed intervals prod_i [a_i, b_i]. Open and closed endpoints
/// carry the same measure, so only the closed form is represented.
class Parallelepiped {
public:
    /// Throws InvalidArgument when some a_i > b_i (or when that cannot be
    /// excluded for a non-opaque tail), RepresentationOverflow when the side
    /// lengths leave the descriptor algebra.
    Parallelepiped(TailedSequence lower, TailedSequence upper);

    static Parallelepiped unit_cube();                    // [0,1]^inf
    static Parallelepiped cube(const TailedSequence& centre, double side);
    static Parallelepiped from_lengths(const TailedSequence& lower, const TailedSequence& lengths);

    const TailedSequence& lower() const noexcept { return lower_; }
    const TailedSequence& upper() const noexcept { return upper_; }
    const TailedSequence& lengths() const noexcept { return lengths_; }
    TailedSequence centre() const;

private:
    TailedSequence lower_;
    TailedSequence upper_;
    TailedSequence lengths_;
};

MeasureValue volume(const Parallelepiped& box, double tol = kDefaultTol);

Parallelepiped translate(const Parallelepiped& box, const TailedSequence& shift);

/// Coordinatewise intersection; empty optional when some coordinate
/// intersection is empty.
std::optional<Parallelepiped> intersect(const Parallelepiped& p, const Parallelepiped& q);

/// prod_{i<=d} (b_i - a_i).
double truncated_volume(const Parallelepiped& box, std::size_t d);

/// N such that |l_i - 1| < eps for every i >= N. Requires a Finite positive
/// volume (NotFinitePositive otherwise).
std::size_t tail_deviation_index(const Parallelepiped& box, double eps, double tol = kDefaultTol);

/// sum_i 2^-i l_i / (1 + l_i).
Bounded rho_diameter(const Parallelepiped& box, double tol = kDefaultTol);

/// Is `inner` contained in `outer` coordinatewise?
Tri contains(const Parallelepiped& outer, const Parallelepiped& inner);

/// Diagnostic for one candidate cover.
struct CoverCandidate {
    bool accepted = false;
    double bound = 0.0;  ///< sum of element volume upper bounds (inf when some element is Infinite)
    std::string reason;  ///< why a cover was rejected
};

struct CoverEstimate {
    std::vector<CoverCandidate> covers;
    double best_bound = 0.0;
    std::size_t best_index = 0;
    std::optional<double> diameter_cap;
};

/// Certified upper bound on the measure of the union of `targets` from
/// finitely many candidate covers. A target counts as covered when it sits
/// inside a single cover element; anything undecidable rejects the cover.
/// Throws CapViolated(index of the cover) or NoValidCover.
CoverEstimate cover_upper_bound(const std::vector<Parallelepiped>& targets,
                                const std::vector<std::vector<Parallelepiped>>& covers,
                                std::optional<double> diameter_cap = std::nullopt, double tol = kDefaultTol);

/// The 2J slabs covering the faces {x_j in {0,1}}, j <= J, of the unit cube;
/// the j-th pair has thin side 2^(-j-1) eps.
std::vector<Parallelepiped> boundary_cover(double eps, std::size_t count);

/// Faces {x_j = 0} and {x_j = 1} of the unit cube for j <= J.
std::vector<Parallelepiped> unit_cube_faces(std::size_t count);

} // namespace measinf
