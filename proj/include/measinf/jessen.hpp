#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "measinf/parallelepiped.hpp"
#include "measinf/sequences.hpp"

namespace measinf {

// ---------------------------------------------------------------------------
// Functions on the unit cube I^inf (uniform product measure).
// ---------------------------------------------------------------------------

/// g(x_J) for a finite, sorted set J of 1-based coordinates.
struct FiniteCylinder {
    struct Monomial {
        double coef = 0.0;
        std::vector<unsigned> powers; ///< one exponent per index in J
    };
    using Polynomial = std::vector<Monomial>;

    /// Piecewise constant on a `cells`^|J| grid of [0,1]^J, row-major with
    /// the first index of J slowest. Zero outside [0,1]^J.
    struct Table {
        std::size_t cells = 1;
        std::vector<double> values;
    };

    /// Evaluable only; cannot be integrated in closed form.
    using Callable = std::function<double(std::span<const double>)>;

    std::vector<std::size_t> indices;
    std::variant<Polynomial, Table, Callable> form;
};

/// offset + sum_i w_i x_i with certifiably summable weights.
struct LinearTail {
    TailedSequence weights;
    double offset = 0.0;
};

/// scale * 1[x in box].
struct Indicator {
    Parallelepiped box;
    double scale = 1.0;
};

struct OpaqueFunction {
    std::function<double(const TailedSequence&)> eval;
    std::optional<double> sup_bound;
    std::string label = "opaque";
};

using ProductFunction = std::variant<FiniteCylinder, LinearTail, Indicator, OpaqueFunction>;

FiniteCylinder make_polynomial(std::vector<std::size_t> indices, FiniteCylinder::Polynomial terms);
FiniteCylinder make_table(std::vector<std::size_t> indices, std::size_t cells, std::vector<double> values);
LinearTail make_linear_tail(TailedSequence weights, double offset = 0.0);

/// limsup_i x_i, decidable on descriptor tails.
OpaqueFunction limsup_function();

double evaluate(const ProductFunction& f, const TailedSequence& x);

/// f_d(x) = integral of f over the coordinates beyond d.
struct TailIntegral {
    std::size_t d = 0;
    ProductFunction function;
    bool exact = true;
};

TailIntegral tail_integrate(const ProductFunction& f, std::size_t d, double tol = kDefaultTol);

/// Integral of f over I^inf in closed form.
Bounded integrate_cube(const ProductFunction& f, double tol = kDefaultTol);

/// (1 / vol(box)) * integral over box ∩ I^inf of f.
Bounded average_over(const ProductFunction& f, const Parallelepiped& box, double tol = kDefaultTol);

struct ConvergenceRow {
    std::size_t d = 0;
    double f_d = 0.0;
    double gap = 0.0;
};

std::vector<ConvergenceRow> jessen_convergence(const ProductFunction& f, const TailedSequence& x,
                                               const std::vector<std::size_t>& dims);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;  ///< 99% normal-approximation interval
    double ci_high = 0.0;
    std::size_t samples = 0;

    bool contains(double v) const { return ci_low <= v && v <= ci_high; }
};

/// Monte Carlo f_d(x): coordinates d+1..truncation_depth uniform, later
/// coordinates fixed at 1/2. Deterministic for a seed, independent of
/// `threads`.
McEstimate mc_tail_integrate(const ProductFunction& f, std::span<const double> x_prefix, std::size_t d,
                             std::size_t n_samples, std::uint64_t seed, std::size_t truncation_depth = 2048,
                             unsigned threads = 1);

struct FubiniReport {
    double truncated = 0.0; ///< integral of f_d over I^d
    double full = 0.0;      ///< integral of f over I^inf
    double difference = 0.0;
};

FubiniReport fubini_check(const ProductFunction& f, std::size_t d, double tol = kDefaultTol);

struct OscillationReport {
    enum class Verdict { PassAt, FailWitness };
    Verdict verdict = Verdict::PassAt;
    std::size_t d = 0;
    double sampled_sup = 0.0;
    std::optional<double> certified_bound; ///< closed-form sup bound when the class has one
    std::optional<std::pair<TailedSequence, TailedSequence>> witness;
};

/// Samples pairs agreeing on the first d coordinates. The first pairs are the
/// extreme tails (all-0 vs all-1, and the reverse); the rest are uniform up to
/// truncation_depth with 1/2 beyond.
OscillationReport slowly_oscillating_test(const ProductFunction& f, double eps, std::size_t d, std::size_t n_pairs,
                                          std::uint64_t seed, std::size_t truncation_depth = 2048);

struct SupportLevel {
    std::size_t n = 0;
    double level = 0.0;        ///< 1/n
    double volume_bound = 0.0; ///< certified bound on vol{f > 1/n}, never above n
    bool representable = false;
    std::vector<Parallelepiped> cover;
};

/// Super-level sets {f > 1/n} of a density (integral 1) for n <= n_levels.
std::vector<SupportLevel> sigma_finite_support_cover(const ProductFunction& f, std::size_t n_levels,
                                                     double tol = kDefaultTol);

/// As above, but throws SuperLevelNotRepresentable instead of falling back to
/// bound-only levels.
std::vector<SupportLevel> sigma_finite_support_cover_strict(const ProductFunction& f, std::size_t n_levels,
                                                            double tol = kDefaultTol);

/// A point of `box` (sides [0, a_i], a_i > 1) outside every supplied unit cube:
/// coordinate j dodges cube j.
TailedSequence unit_cube_escape_witness(const Parallelepiped& box, const std::vector<Parallelepiped>& unit_cubes);

/// Claimed continuity data: |f(x0) - f(y)| < f(x0)/2 on
/// prod_{i<=d} (lower_i, upper_i) x R^tail.
struct ContinuityClaim {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct ContradictionCertificate {
    double f_at_x0 = 0.0;
    double epsilon = 0.0;          ///< f(x0)/2
    double base_volume = 0.0;      ///< prod of the d claimed sides
    MeasureValue neighbourhood_volume; ///< always Infinite
    MeasureValue integral_lower_bound; ///< eps * vol, Infinite > 1
    std::optional<TailedSequence> refuting_point; ///< y in V' where the claim fails, when found
    std::string note;
};

ContradictionCertificate continuous_density_contradiction(const ProductFunction& f, const TailedSequence& x0,
                                                          const ContinuityClaim& claim);

} // namespace measinf
