#pragma once

#include <cmath>
#include <limits>

// Outward rounding by ulp stepping. We never touch the FPU rounding mode, so
// every bound below assumes the library call it wraps is accurate to within
// `kLibmUlps` ulps (true for glibc exp/log/log1p/pow on doubles).

namespace measinf::rounding {

inline constexpr int kLibmUlps = 4;
inline constexpr double kUnit = std::numeric_limits<double>::epsilon() / 2;

inline double up(double x, int ulps = 1) {
    for (int k = 0; k < ulps; ++k) x = std::nextafter(x, std::numeric_limits<double>::infinity());
    return x;
}

inline double down(double x, int ulps = 1) {
    for (int k = 0; k < ulps; ++k) x = std::nextafter(x, -std::numeric_limits<double>::infinity());
    return x;
}

/// Closed interval [lo, hi] with outward-rounded arithmetic.
struct Enclosure {
    double lo = 0.0;
    double hi = 0.0;

    static Enclosure point(double x) { return {x, x}; }
    static Enclosure around(double x, int ulps = kLibmUlps) { return {down(x, ulps), up(x, ulps)}; }

    double mid() const { return 0.5 * (lo + hi); }
};

inline Enclosure operator+(Enclosure a, Enclosure b) { return {down(a.lo + b.lo), up(a.hi + b.hi)}; }
inline Enclosure operator-(Enclosure a, Enclosure b) { return {down(a.lo - b.hi), up(a.hi - b.lo)}; }

/// Product for non-negative enclosures only; that is all the ledger needs.
inline Enclosure mul_nonneg(Enclosure a, Enclosure b) { return {down(a.lo * b.lo), up(a.hi * b.hi)}; }

/// Quotient for positive enclosures.
inline Enclosure div_pos(Enclosure a, Enclosure b) { return {down(a.lo / b.hi), up(a.hi / b.lo)}; }

inline Enclosure log(Enclosure a) {
    return {down(std::log(a.lo), kLibmUlps), up(std::log(a.hi), kLibmUlps)};
}

inline Enclosure exp(Enclosure a) {
    return {down(std::exp(a.lo), kLibmUlps), up(std::exp(a.hi), kLibmUlps)};
}

/// (1 - t/p)^m for t/p in (0, 1), evaluated as exp(m * log1p(-t/p)).
inline Enclosure pow_one_minus(Enclosure t, double p, double m) {
    const double lo_frac = down(t.lo / p);
    const double hi_frac = up(t.hi / p);
    // Larger t gives a smaller base.
    const double log_lo = down(std::log1p(-hi_frac), kLibmUlps);
    const double log_hi = up(std::log1p(-lo_frac), kLibmUlps);
    // log values are negative, m >= 0: m*log_lo is the smaller.
    return exp(Enclosure{down(m * log_lo), up(m * log_hi)});
}

/// Certified `a <= b` on enclosures.
inline bool certainly_le(Enclosure a, Enclosure b) { return a.hi <= b.lo; }
inline bool certainly_lt(Enclosure a, Enclosure b) { return a.hi < b.lo; }

} // namespace measinf::rounding
