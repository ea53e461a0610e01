#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "measinf/error.hpp"

namespace measinf {

inline constexpr double kDefaultTol = 1e-12;

/// Hard cap on explicitly evaluated terms (products, scans, materialisation).
inline constexpr std::size_t kWindowCap = std::size_t{1} << 20;

// ---------------------------------------------------------------------------
// Tail descriptors. Every formula uses the absolute index i >= 1, so growing
// the explicit prefix never changes what the tail means.
// ---------------------------------------------------------------------------

struct Constant {
    double value = 0.0;
};

/// term_i = base + a * i^(-p), p > 1.
struct PowerDrift {
    double a = 0.0;
    double p = 2.0;
    double base = 1.0;
};

/// term_i = base + a * q^i, 0 < |q| < 1.
struct GeometricDrift {
    double a = 0.0;
    double q = 0.5;
    double base = 1.0;
};

/// cycle[(i - 1) mod size], non-empty.
struct Periodic {
    std::vector<double> cycle;
};

/// Black-box tail. `log_tail_bound(N)` must bound sum_{i>N} |log term_i|
/// from above when it is present; without it no product over this tail is
/// ever classified as Finite or Zero.
struct Opaque {
    std::function<double(std::size_t)> term;
    std::function<double(std::size_t)> log_tail_bound;
    std::string label = "opaque";
};

using TailDescriptor = std::variant<Constant, PowerDrift, GeometricDrift, Periodic, Opaque>;

PowerDrift make_power_drift(double a, double p, double base = 1.0);
GeometricDrift make_geometric_drift(double a, double q, double base = 1.0);
Periodic make_periodic(std::vector<double> cycle);

/// Infinite real sequence: explicit prefix for i <= prefix.size(), tail
/// descriptor beyond it.
class TailedSequence {
public:
    TailedSequence();
    TailedSequence(std::vector<double> prefix, TailDescriptor tail);

    static TailedSequence constant(double c) { return {{}, Constant{c}}; }

    double operator()(std::size_t i) const;

    const std::vector<double>& prefix() const noexcept { return prefix_; }
    const TailDescriptor& tail() const noexcept { return tail_; }
    bool is_opaque() const noexcept { return std::holds_alternative<Opaque>(tail_); }

    /// Same sequence with the prefix extended (explicitly evaluated) to
    /// length `n` when shorter.
    TailedSequence materialized(std::size_t n) const;

    /// Same sequence with a different value at index i (prefix extended as needed).
    TailedSequence with_term(std::size_t i, double value) const;

private:
    std::vector<double> prefix_;
    TailDescriptor tail_;
};

double eval(const TailedSequence& seq, std::size_t i);

/// Value with a certified absolute error bound.
struct Bounded {
    double value = 0.0;
    double err = 0.0;
};

/// Result of an infinite product (alias MeasureValue for volumes).
struct ProductValue {
    enum class Kind { Zero, Finite, Infinite, Undefined };

    Kind kind = Kind::Undefined;
    double value = 0.0;
    double err = 0.0;

    static ProductValue zero() { return {Kind::Zero, 0.0, 0.0}; }
    static ProductValue finite(double v, double e) { return {Kind::Finite, v, e}; }
    static ProductValue infinite() { return {Kind::Infinite, 0.0, 0.0}; }
    static ProductValue undefined() { return {Kind::Undefined, 0.0, 0.0}; }

    bool is_zero() const noexcept { return kind == Kind::Zero; }
    bool is_finite() const noexcept { return kind == Kind::Finite; }
    bool is_infinite() const noexcept { return kind == Kind::Infinite; }
    bool is_undefined() const noexcept { return kind == Kind::Undefined; }

    /// Certified lower/upper bounds on the true value (Zero gives [0,0]).
    double lower() const noexcept { return kind == Kind::Finite ? value - err : 0.0; }
    double upper() const noexcept { return kind == Kind::Finite ? value + err : 0.0; }
};

using MeasureValue = ProductValue;

const char* to_string(ProductValue::Kind kind) noexcept;
std::string to_string(const ProductValue& v);

/// Certified classification of prod_i seq(i). Throws NegativeTerm for a
/// negative term and WindowCapExceeded when tol needs more than kWindowCap
/// terms.
ProductValue infinite_product(const TailedSequence& seq, double tol = kDefaultTol);

/// Product-topology metric sum_i 2^-i |x_i - y_i| / (1 + |x_i - y_i|).
Bounded rho_distance(const TailedSequence& x, const TailedSequence& y, double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// Descriptor algebra. Results stay inside the closed family or throw
// RepresentationOverflow. Opaque operands compose into Opaque results.
// ---------------------------------------------------------------------------

TailedSequence operator+(const TailedSequence& x, const TailedSequence& y);
TailedSequence operator-(const TailedSequence& x, const TailedSequence& y);
TailedSequence operator*(double k, const TailedSequence& x);
TailedSequence operator+(const TailedSequence& x, double c);
TailedSequence operator-(const TailedSequence& x, double c);
TailedSequence max(const TailedSequence& x, const TailedSequence& y);
TailedSequence min(const TailedSequence& x, const TailedSequence& y);

/// Sign structure of a sequence: where (if anywhere) it is negative.
struct SignProfile {
    enum class Kind {
        FinitelyNegative,   ///< negative at finitely many indices (possibly none)
        InfinitelyNegative, ///< negative at infinitely many indices
        Unknown,
    };
    Kind kind = Kind::Unknown;
    std::size_t first_negative = 0; ///< 0 when none known
    std::size_t last_negative = 0;  ///< FinitelyNegative only; 0 when none
};

SignProfile sign_profile(const TailedSequence& seq);

/// Up to `count` indices i > from with seq(i) < 0, in increasing order
/// (searches at most kWindowCap indices).
std::vector<std::size_t> negative_indices(const TailedSequence& seq, std::size_t from, std::size_t count);

enum class Tri { No, Yes, Unknown };

/// Is seq(i) >= 0 for every i?
Tri all_nonnegative(const TailedSequence& seq);

/// Certified bounds [inf, sup] over all indices; empty for Opaque tails.
std::optional<std::pair<double, double>> range_bounds(const TailedSequence& seq);

/// Upper bound on sum_{i>n} |seq(i)|; empty when not certifiably summable.
std::optional<double> abs_tail_sum(const TailedSequence& seq, std::size_t n);

/// sum_{i>n} w(i) x(i) with an error bound; empty when the series is not
/// certifiably summable. Closed forms are used where the tails allow it.
std::optional<Bounded> dot_tail(const TailedSequence& w, const TailedSequence& x, std::size_t n);

/// Smallest N such that |seq(i) - target| < eps for all i >= N; empty when
/// undecidable (or no such N exists).
std::optional<std::size_t> settle_index(const TailedSequence& seq, double target, double eps);

} // namespace measinf
