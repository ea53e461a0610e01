#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "measinf/jessen.hpp"
#include "measinf/parallelepiped.hpp"
#include "measinf/sequences.hpp"

namespace measinf {

/// Threshold below which a finite product of per-coordinate factors counts
/// as a zero certificate.
inline constexpr double kZeroThreshold = 1e-10;

// ---------------------------------------------------------------------------
// delta-cores
// ---------------------------------------------------------------------------

/// core_delta(base) = { x : exists D, |x_i - c_i| <= delta * l_i / 2 for all i > D }.
struct CoreSpec {
    Parallelepiped base;
    double delta = 0.5;
};

/// Validates delta in [0,1] and a Finite positive base volume (NotFiniteBase).
CoreSpec make_core_spec(Parallelepiped base, double delta, double tol = kDefaultTol);

/// prod_{i<=D} l_i * prod_{D<i<=d} delta * l_i.
double core_truncated_volume(const CoreSpec& spec, std::size_t D, std::size_t d);

struct CoreMembership {
    Tri answer = Tri::Unknown;
    std::size_t from = 0;  ///< Yes: the D that works
    std::size_t depth = 0; ///< Unknown: search depth used
    std::string reason;
};

CoreMembership in_core(const TailedSequence& x, const CoreSpec& spec, std::size_t depth);

/// delta * l / 2 - |x - c|; negative exactly where x leaves the core tube.
TailedSequence core_slack(const TailedSequence& x, const CoreSpec& spec);

// ---------------------------------------------------------------------------
// Density along shrinking families
// ---------------------------------------------------------------------------

/// Stage m keeps the centre of `base` and multiplies sides 1..m by eta.
struct ShrinkFamily {
    Parallelepiped base;
    double eta = 0.5;

    static ShrinkFamily around(const TailedSequence& centre, double side, double eta = 0.5);

    Parallelepiped stage(std::size_t m) const;
};

struct ZeroWitness {
    std::size_t set_index = 0;             ///< which parallelepiped of the union / cover
    std::vector<std::size_t> coordinates;  ///< witness coordinates
    std::vector<double> factors;           ///< certified per-coordinate factor bounds
    std::vector<double> observed;          ///< actual per-coordinate factors (same coordinates)
    double bound = 0.0;                    ///< product of factors
};

struct DensityStage {
    std::size_t m = 0;
    MeasureValue volume;
    double average = 0.0;
    double bound = 0.0; ///< absolute error bound on average
};

struct DensityReport {
    enum class Verdict { Converged, Oscillating, ZeroCertificate };

    std::vector<DensityStage> stages;
    Verdict verdict = Verdict::Converged;
    double limit = 0.0;   ///< Converged
    double liminf = 0.0;  ///< Oscillating
    double limsup = 0.0;  ///< Oscillating
    std::vector<ZeroWitness> witnesses; ///< ZeroCertificate
    bool certified = true; ///< false when some stage fell back to truncated estimates
};

const char* to_string(DensityReport::Verdict v) noexcept;

inline constexpr std::size_t kConvergenceWindow = 8;

/// Density of a finite union of parallelepipeds (inclusion-exclusion, at
/// most 16 sets) along the family, stages 1..stages.
DensityReport density_sequence(const std::vector<Parallelepiped>& sets, const ShrinkFamily& fam, std::size_t stages,
                               double tol = kDefaultTol);

/// Averages of a closed-class function along the family.
DensityReport density_sequence(const ProductFunction& f, const ShrinkFamily& fam, std::size_t stages,
                               double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// The one-dimensional oscillating density
// ---------------------------------------------------------------------------

using Rational = boost::multiprecision::cpp_rational;

/// f = indicator of the union over even n >= 0 of (2^-(n+1), 2^-n].
struct Oscillation1dRow {
    std::size_t k = 0;
    Rational half_width; ///< 2^-k
    Rational average;    ///< average of f over [-2^-k, 2^-k]
};

struct Oscillation1d {
    Rational integral_unit;       ///< integral over [0,1]
    Rational normalized_symmetric; ///< integral over [-1,1] divided by 2
    std::vector<Oscillation1dRow> rows;
    Rational liminf;
    Rational limsup;
    bool oscillating = false;
};

/// Integral of f over [0, t] for dyadic t = 2^-k.
Rational oscillating_mass(std::size_t k);

Oscillation1d oscillating_density_1d(std::size_t m_max);

// ---------------------------------------------------------------------------
// Non-density
// ---------------------------------------------------------------------------

/// Length of [-l/2, l/2] ∩ [offset - 1/2, offset + 1/2] for l in [7/8, 9/8]
/// and offset >= l/4; never above 25/32.
double overlap_bound(double l, double offset);

/// Overlap without the precondition.
double interval_overlap(double l, double offset);

inline constexpr double kOverlapCap = 25.0 / 32.0;

/// For x outside every half-core of the cover, certificates that the unit
/// cube centred at x meets each cover element in a null set.
DensityReport non_density_check(const std::vector<Parallelepiped>& support_cover, const TailedSequence& x,
                                double tol = kDefaultTol, std::size_t depth = 1000);

// ---------------------------------------------------------------------------
// Lebesgue points at continuity points
// ---------------------------------------------------------------------------

struct LebesgueCertificate {
    Parallelepiped neighbourhood;
    double side = 0.0;             ///< cube side (coordinates 1..)
    double deviation_bound = 0.0;  ///< sup of |f - f(x)| on the neighbourhood
    MeasureValue volume;
    std::string note;
};

LebesgueCertificate lebesgue_point_at_continuity(const ProductFunction& f, const TailedSequence& x, double eps);

} // namespace measinf
