#include "measinf/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "measinf/rounding.hpp"

namespace measinf {

namespace {

using rounding::down;
using rounding::up;

constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kMaxCycle = 4096;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Unified view of Constant / PowerDrift / GeometricDrift: base + a * g(i).
struct Affine {
    enum class Kind { None, Power, Geometric };
    Kind kind = Kind::None;
    double param = 0.0;
    double base = 0.0;
    double a = 0.0;

    double g(std::size_t i) const {
        switch (kind) {
        case Kind::None: return 0.0;
        case Kind::Power: return std::pow(static_cast<double>(i), -param);
        case Kind::Geometric: return std::pow(param, static_cast<double>(i));
        }
        return 0.0;
    }
    double at(std::size_t i) const { return kind == Kind::None ? base : base + a * g(i); }
};

std::optional<Affine> as_affine(const TailDescriptor& t) {
    return std::visit(overloaded{
                          [](const Constant& c) -> std::optional<Affine> {
                              return Affine{Affine::Kind::None, 0.0, c.value, 0.0};
                          },
                          [](const PowerDrift& d) -> std::optional<Affine> {
                              if (d.a == 0.0) return Affine{Affine::Kind::None, 0.0, d.base, 0.0};
                              return Affine{Affine::Kind::Power, d.p, d.base, d.a};
                          },
                          [](const GeometricDrift& d) -> std::optional<Affine> {
                              if (d.a == 0.0) return Affine{Affine::Kind::None, 0.0, d.base, 0.0};
                              return Affine{Affine::Kind::Geometric, d.q, d.base, d.a};
                          },
                          [](const Periodic& p) -> std::optional<Affine> {
                              if (std::all_of(p.cycle.begin(), p.cycle.end(),
                                              [&](double v) { return v == p.cycle.front(); }))
                                  return Affine{Affine::Kind::None, 0.0, p.cycle.front(), 0.0};
                              return std::nullopt;
                          },
                          [](const Opaque&) -> std::optional<Affine> { return std::nullopt; },
                      },
                      t);
}

TailDescriptor from_affine(const Affine& f) {
    if (f.kind == Affine::Kind::None || f.a == 0.0) return Constant{f.base};
    if (f.kind == Affine::Kind::Power) return PowerDrift{f.a, f.param, f.base};
    return GeometricDrift{f.a, f.param, f.base};
}

// Smallest i >= 1 with amp * |g(j)| < margin for every j >= i. kNoIndex when
// that index is astronomically large.
std::size_t first_index_below(const Affine& f, double amp, double margin) {
    if (amp == 0.0 || f.kind == Affine::Kind::None) return 1;
    if (margin <= 0.0) return kNoIndex;
    const auto holds = [&](std::size_t i) { return amp * std::abs(f.g(i)) < margin; };
    double guess;
    if (f.kind == Affine::Kind::Power) {
        guess = std::pow(amp / margin, 1.0 / f.param);
    } else {
        guess = std::log(margin / amp) / std::log(std::abs(f.param));
    }
    if (!(guess < 1e15)) return kNoIndex;
    auto i = static_cast<std::size_t>(std::max(1.0, std::floor(guess)));
    while (i > 1 && holds(i - 1)) --i;
    while (!holds(i)) ++i;
    return i;
}

// Periodic or constant tail as an explicit cycle.
std::optional<std::vector<double>> as_cycle(const TailDescriptor& t) {
    if (const auto* p = std::get_if<Periodic>(&t)) return p->cycle;
    if (const auto f = as_affine(t); f && f->kind == Affine::Kind::None) return std::vector<double>{f->base};
    return std::nullopt;
}

TailDescriptor normalize_cycle(std::vector<double> cycle) {
    if (std::all_of(cycle.begin(), cycle.end(), [&](double v) { return v == cycle.front(); }))
        return Constant{cycle.front()};
    return Periodic{std::move(cycle)};
}

double cycle_at(const std::vector<double>& cycle, std::size_t i) { return cycle[(i - 1) % cycle.size()]; }

enum class Op { Add, Sub, Max, Min };

double apply(Op op, double x, double y) {
    switch (op) {
    case Op::Add: return x + y;
    case Op::Sub: return x - y;
    case Op::Max: return std::max(x, y);
    case Op::Min: return std::min(x, y);
    }
    return 0.0;
}

[[noreturn]] void overflow(const std::string& why) { throw Error(ErrorCode::RepresentationOverflow, why); }

// Descriptor for op(x, y) valid from index `valid_from` on.
struct TailResult {
    TailDescriptor tail;
    std::size_t valid_from;
};

TailResult combine_cycles(const std::vector<double>& cx, const std::vector<double>& cy, Op op, std::size_t from) {
    const std::size_t len = std::lcm(cx.size(), cy.size());
    if (len > kMaxCycle) overflow("combined period exceeds " + std::to_string(kMaxCycle));
    std::vector<double> out(len);
    for (std::size_t r = 0; r < len; ++r) out[r] = apply(op, cx[r % cx.size()], cy[r % cy.size()]);
    return {normalize_cycle(std::move(out)), from};
}

bool compatible(const Affine& x, const Affine& y) {
    return x.kind == Affine::Kind::None || y.kind == Affine::Kind::None ||
           (x.kind == y.kind && x.param == y.param);
}

TailResult combine_affine(const Affine& x, const Affine& y, Op op, std::size_t from, const TailDescriptor& tx,
                          const TailDescriptor& ty) {
    if (op == Op::Add || op == Op::Sub) {
        if (!compatible(x, y)) overflow("sum of drifts with different decay");
        Affine r = x.kind != Affine::Kind::None ? x : y;
        const double sign = op == Op::Add ? 1.0 : -1.0;
        r.base = x.base + sign * y.base;
        r.a = (x.kind != Affine::Kind::None ? x.a : 0.0) + sign * (y.kind != Affine::Kind::None ? y.a : 0.0);
        return {from_affine(r), from};
    }
    // max / min: decide which side eventually dominates.
    const bool want_max = op == Op::Max;
    std::size_t settle;
    bool x_wins;
    if (compatible(x, y)) {
        Affine d = x.kind != Affine::Kind::None ? x : y;
        d.base = x.base - y.base;
        d.a = (x.kind != Affine::Kind::None ? x.a : 0.0) - (y.kind != Affine::Kind::None ? y.a : 0.0);
        if (d.base != 0.0) {
            settle = first_index_below(d, std::abs(d.a), std::abs(d.base));
            x_wins = (d.base > 0.0) == want_max;
        } else if (d.a == 0.0 || d.kind == Affine::Kind::None) {
            return {tx, from};
        } else if (d.kind == Affine::Kind::Geometric && d.param < 0.0) {
            overflow("max/min of drifts whose difference alternates in sign");
        } else {
            settle = 1;
            x_wins = (d.a > 0.0) == want_max;
        }
    } else {
        const double gap = x.base - y.base;
        if (gap == 0.0) overflow("max/min of equal-base drifts with different decay");
        settle = std::max(first_index_below(x, std::abs(x.a), std::abs(gap) / 2),
                          first_index_below(y, std::abs(y.a), std::abs(gap) / 2));
        x_wins = (gap > 0.0) == want_max;
    }
    if (settle == kNoIndex || settle > kWindowCap) overflow("dominance settles beyond the window cap");
    return {x_wins ? tx : ty, std::max(from, settle)};
}

TailResult combine_cycle_affine(const std::vector<double>& cycle, const Affine& f, Op op, bool cycle_is_x,
                                std::size_t from, const TailDescriptor& tcycle, const TailDescriptor& taff) {
    if (op == Op::Add || op == Op::Sub) overflow("sum of periodic and drifting tails");
    double margin = std::numeric_limits<double>::infinity();
    bool all_above = true, all_below = true;
    for (double c : cycle) {
        margin = std::min(margin, std::abs(c - f.base));
        all_above = all_above && c > f.base;
        all_below = all_below && c < f.base;
    }
    if (!(all_above || all_below)) overflow("periodic tail straddles a drifting tail");
    const std::size_t settle = first_index_below(f, std::abs(f.a), margin);
    if (settle == kNoIndex || settle > kWindowCap) overflow("dominance settles beyond the window cap");
    const bool cycle_wins = all_above == (op == Op::Max);
    (void)cycle_is_x;
    return {cycle_wins ? tcycle : taff, std::max(from, settle)};
}

TailedSequence combine(const TailedSequence& x, const TailedSequence& y, Op op) {
    const std::size_t m = std::max(x.prefix().size(), y.prefix().size());
    if (x.is_opaque() || y.is_opaque()) {
        std::vector<double> prefix(m);
        for (std::size_t i = 1; i <= m; ++i) prefix[i - 1] = apply(op, x(i), y(i));
        Opaque o;
        o.term = [x, y, op](std::size_t i) { return apply(op, x(i), y(i)); };
        o.label = "composed";
        return {std::move(prefix), std::move(o)};
    }
    const std::size_t from = m + 1;
    TailResult r{Constant{0.0}, from};
    const auto cx = as_cycle(x.tail());
    const auto cy = as_cycle(y.tail());
    const auto fx = as_affine(x.tail());
    const auto fy = as_affine(y.tail());
    if (cx && cy) {
        r = combine_cycles(*cx, *cy, op, from);
    } else if (fx && fy) {
        r = combine_affine(*fx, *fy, op, from, x.tail(), y.tail());
    } else if (cx && fy) {
        r = combine_cycle_affine(*cx, *fy, op, true, from, x.tail(), y.tail());
    } else if (fx && cy) {
        // Max/min are symmetric; only which descriptor wins matters.
        r = combine_cycle_affine(*cy, *fx, op, false, from, y.tail(), x.tail());
    } else {
        overflow("unsupported descriptor combination");
    }
    std::vector<double> prefix(r.valid_from - 1);
    for (std::size_t i = 1; i < r.valid_from; ++i) prefix[i - 1] = apply(op, x(i), y(i));
    return {std::move(prefix), std::move(r.tail)};
}

// ---------------------------------------------------------------------------
// Products
// ---------------------------------------------------------------------------

// Running product with an exact per-step rounding error (via fma).
struct TrackedProduct {
    double value = 1.0;
    double err = 0.0;

    void mul(double t) {
        const double r = value * t;
        const double e = std::fma(value, t, -r);
        if (err == 0.0 && e == 0.0) { // exact step, nothing to widen
            value = r;
            return;
        }
        err = up(up(err * t) + std::abs(e));
        value = r;
    }
};

// Neumaier-compensated sum of logs with a running bound on sum |log t|.
struct LogSum {
    double sum = 0.0;
    double comp = 0.0;
    double abs_sum = 0.0;
    std::size_t count = 0;

    void add(double l) {
        const double t = sum + l;
        if (std::abs(sum) >= std::abs(l))
            comp += (sum - t) + l;
        else
            comp += (l - t) + sum;
        sum = t;
        abs_sum += std::abs(l);
        ++count;
    }
    double value() const { return sum + comp; }
    double rounding_bound() const {
        const double u = rounding::kUnit;
        return up(rounding::kLibmUlps * 2 * u * abs_sum + 2 * u * std::abs(value()) +
                  4.0 * static_cast<double>(count) * u * u * abs_sum);
    }
};

ProductValue finite_from(const TrackedProduct& prefix, const LogSum& logs, double remainder) {
    const double s = logs.value();
    const double ds = up(logs.rounding_bound() + remainder);
    const double v = prefix.value * std::exp(s);
    const double lo = down(down(prefix.value - prefix.err) * down(std::exp(s - ds), rounding::kLibmUlps));
    const double hi = up(up(prefix.value + prefix.err) * up(std::exp(s + ds), rounding::kLibmUlps));
    const double err = up(std::max(v - lo, hi - v));
    if (!(v - err > 0.0)) return ProductValue::undefined();
    return ProductValue::finite(v, err);
}

[[noreturn]] void negative_at(std::size_t i) {
    throw Error(ErrorCode::NegativeTerm, "term " + std::to_string(i) + " is negative", i);
}

// Remainder bound R(N) >= sum_{i>N} |log(1 + a g(i))|; infinity when invalid.
double drift_log_remainder(const Affine& f, std::size_t n) {
    const double amp = std::abs(f.a);
    const double next = amp * std::abs(f.g(n + 1));
    if (!(next < 1.0)) return std::numeric_limits<double>::infinity();
    double tail;
    if (f.kind == Affine::Kind::Power) {
        tail = std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), 1.0 - f.param) / (f.param - 1.0);
        if (n == 0) tail += 1.0;
    } else {
        const double q = std::abs(f.param);
        tail = std::pow(q, static_cast<double>(n + 1)) / (1.0 - q);
    }
    return up(up(amp * tail, 4) / down(1.0 - next, 2), 2);
}

ProductValue drift_product(const TailedSequence& seq, const Affine& f, double tol) {
    const std::size_t start = seq.prefix().size() + 1;
    // Negative / zero scan over the unsettled range.
    if (f.base < 0.0) {
        for (std::size_t i = start;; ++i) {
            if (seq(i) < 0.0) negative_at(i);
            if (i > kWindowCap) throw Error(ErrorCode::WindowCapExceeded, "negative term search");
        }
    }
    if (f.base == 0.0) {
        const bool alternating = f.kind == Affine::Kind::Geometric && f.param < 0.0;
        if (f.a < 0.0 || (alternating && f.a != 0.0)) {
            for (std::size_t i = start;; ++i)
                if (seq(i) < 0.0) negative_at(i);
        }
        return ProductValue::zero();
    }
    const std::size_t settled = first_index_below(f, std::abs(f.a), f.base / 2);
    if (settled == kNoIndex || settled > kWindowCap)
        throw Error(ErrorCode::WindowCapExceeded, "drift does not settle within the window cap");
    bool has_zero = false;
    for (std::size_t i = start; i < settled; ++i) {
        const double t = seq(i);
        if (t < 0.0) negative_at(i);
        if (t == 0.0) has_zero = true;
    }
    if (has_zero) return ProductValue::zero();
    if (f.base < 1.0) return ProductValue::zero();
    if (f.base > 1.0) return ProductValue::infinite();

    TrackedProduct prefix;
    for (double t : seq.prefix()) prefix.mul(t);
    LogSum logs;
    std::size_t n = seq.prefix().size();
    for (;;) {
        const double rem = drift_log_remainder(f, n);
        if (std::isfinite(rem)) {
            const double v_est = prefix.value * std::exp(logs.value());
            if (up(v_est * std::expm1(rem)) <= tol / 2) return finite_from(prefix, logs, rem);
        }
        if (n >= kWindowCap)
            throw Error(ErrorCode::WindowCapExceeded,
                        "tolerance needs more than " + std::to_string(kWindowCap) + " terms");
        ++n;
        logs.add(std::log1p(f.a * f.g(n)));
    }
}

ProductValue opaque_product(const TailedSequence& seq, const Opaque& o, double tol) {
    if (!o.log_tail_bound) return ProductValue::undefined();
    TrackedProduct prefix;
    for (double t : seq.prefix()) prefix.mul(t);
    LogSum logs;
    std::size_t n = seq.prefix().size();
    for (;;) {
        const double rem = o.log_tail_bound(n);
        if (std::isfinite(rem) && rem >= 0.0) {
            const double v_est = prefix.value * std::exp(logs.value());
            if (up(v_est * std::expm1(rem)) <= tol / 2) return finite_from(prefix, logs, rem);
        }
        if (n >= kWindowCap)
            throw Error(ErrorCode::WindowCapExceeded,
                        "tolerance needs more than " + std::to_string(kWindowCap) + " terms");
        ++n;
        const double t = o.term(n);
        if (t < 0.0) negative_at(n);
        if (t == 0.0) return ProductValue::zero();
        logs.add(std::log(t));
    }
}

double power_tail_sum_euler_maclaurin(double p, std::size_t k, double& err) {
    // sum_{i>k} i^-p = k^(1-p)/(p-1) - k^-p/2 + p k^(-p-1)/12 + R,
    // |R| <= p(p+1)(p+2) k^(-p-3)/720 (f is completely monotone).
    const double kk = static_cast<double>(k);
    const double v = std::pow(kk, 1.0 - p) / (p - 1.0) - 0.5 * std::pow(kk, -p) + p * std::pow(kk, -p - 1.0) / 12.0;
    err = up(p * (p + 1) * (p + 2) * std::pow(kk, -p - 3.0) / 720.0 + 8 * rounding::kUnit * std::abs(v));
    return v;
}

// sum_{i>n} i^-p with error bound.
Bounded power_tail_sum(double p, std::size_t n) {
    constexpr std::size_t kExplicit = 1000;
    double explicit_part = 0.0;
    std::size_t k = n;
    if (k < kExplicit) {
        for (std::size_t i = kExplicit; i > n; --i) explicit_part += std::pow(static_cast<double>(i), -p);
        k = kExplicit;
    }
    double err;
    const double tail = power_tail_sum_euler_maclaurin(p, k, err);
    const double v = explicit_part + tail;
    err = up(err + 2.0 * static_cast<double>(kExplicit) * rounding::kUnit * std::abs(v));
    return {v, err};
}

// sum_{i>n} of an Affine tail with base 0; empty when not summable.
std::optional<Bounded> affine_zero_base_sum(const Affine& f, std::size_t n) {
    if (f.base != 0.0) return std::nullopt;
    if (f.kind == Affine::Kind::None || f.a == 0.0) return Bounded{0.0, 0.0};
    if (f.kind == Affine::Kind::Geometric) {
        const double v = f.a * std::pow(f.param, static_cast<double>(n + 1)) / (1.0 - f.param);
        return Bounded{v, up(8 * rounding::kUnit * std::abs(v))};
    }
    const Bounded s = power_tail_sum(f.param, n);
    return Bounded{f.a * s.value, up(std::abs(f.a) * s.err + 2 * rounding::kUnit * std::abs(f.a * s.value))};
}

} // namespace

// ---------------------------------------------------------------------------
// Construction and evaluation
// ---------------------------------------------------------------------------

PowerDrift make_power_drift(double a, double p, double base) {
    if (!(p > 1.0)) throw Error(ErrorCode::InvalidArgument, "PowerDrift needs p > 1");
    if (!std::isfinite(a) || !std::isfinite(base)) throw Error(ErrorCode::InvalidArgument, "non-finite drift");
    return {a, p, base};
}

GeometricDrift make_geometric_drift(double a, double q, double base) {
    if (!(std::abs(q) < 1.0) || q == 0.0) throw Error(ErrorCode::InvalidArgument, "GeometricDrift needs 0 < |q| < 1");
    if (!std::isfinite(a) || !std::isfinite(base)) throw Error(ErrorCode::InvalidArgument, "non-finite drift");
    return {a, q, base};
}

Periodic make_periodic(std::vector<double> cycle) {
    if (cycle.empty()) throw Error(ErrorCode::InvalidArgument, "Periodic cycle must be non-empty");
    return {std::move(cycle)};
}

TailedSequence::TailedSequence() : tail_(Constant{0.0}) {}

TailedSequence::TailedSequence(std::vector<double> prefix, TailDescriptor tail)
    : prefix_(std::move(prefix)), tail_(std::move(tail)) {
    std::visit(overloaded{
                   [](const Constant&) {},
                   [](const PowerDrift& d) { (void)make_power_drift(d.a, d.p, d.base); },
                   [](const GeometricDrift& d) { (void)make_geometric_drift(d.a, d.q, d.base); },
                   [](const Periodic& p) {
                       if (p.cycle.empty()) throw Error(ErrorCode::InvalidArgument, "empty Periodic cycle");
                   },
                   [](const Opaque& o) {
                       if (!o.term) throw Error(ErrorCode::InvalidArgument, "Opaque tail without evaluator");
                   },
               },
               tail_);
}

double TailedSequence::operator()(std::size_t i) const {
    if (i == 0) throw Error(ErrorCode::InvalidArgument, "sequence indices start at 1");
    if (i <= prefix_.size()) return prefix_[i - 1];
    return std::visit(overloaded{
                          [](const Constant& c) { return c.value; },
                          [i](const PowerDrift& d) { return d.base + d.a * std::pow(static_cast<double>(i), -d.p); },
                          [i](const GeometricDrift& d) {
                              return d.base + d.a * std::pow(d.q, static_cast<double>(i));
                          },
                          [i](const Periodic& p) { return cycle_at(p.cycle, i); },
                          [i](const Opaque& o) { return o.term(i); },
                      },
                      tail_);
}

TailedSequence TailedSequence::materialized(std::size_t n) const {
    if (n <= prefix_.size()) return *this;
    std::vector<double> p = prefix_;
    p.reserve(n);
    for (std::size_t i = prefix_.size() + 1; i <= n; ++i) p.push_back((*this)(i));
    return {std::move(p), tail_};
}

TailedSequence TailedSequence::with_term(std::size_t i, double value) const {
    TailedSequence out = materialized(i);
    out.prefix_[i - 1] = value;
    return out;
}

double eval(const TailedSequence& seq, std::size_t i) { return seq(i); }

const char* to_string(ProductValue::Kind kind) noexcept {
    switch (kind) {
    case ProductValue::Kind::Zero: return "Zero";
    case ProductValue::Kind::Finite: return "Finite";
    case ProductValue::Kind::Infinite: return "Infinite";
    case ProductValue::Kind::Undefined: return "Undefined";
    }
    return "?";
}

std::string to_string(const ProductValue& v) {
    if (!v.is_finite()) return to_string(v.kind);
    std::ostringstream os;
    os.precision(17);
    os << "Finite(" << v.value << ", err=" << v.err << ")";
    return os.str();
}

// ---------------------------------------------------------------------------
// Infinite products and the metric
// ---------------------------------------------------------------------------

ProductValue infinite_product(const TailedSequence& seq, double tol) {
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
    bool prefix_zero = false;
    for (std::size_t i = 1; i <= seq.prefix().size(); ++i) {
        if (seq(i) < 0.0) negative_at(i);
        if (seq(i) == 0.0) prefix_zero = true;
    }
    const std::size_t start = seq.prefix().size() + 1;
    TrackedProduct prefix;
    for (double t : seq.prefix()) prefix.mul(t);

    if (const auto* o = std::get_if<Opaque>(&seq.tail())) {
        if (prefix_zero) return ProductValue::zero();
        return opaque_product(seq, *o, tol);
    }
    if (const auto* p = std::get_if<Periodic>(&seq.tail()); p && !as_affine(seq.tail())) {
        for (std::size_t i = start; i < start + p->cycle.size(); ++i)
            if (cycle_at(p->cycle, i) < 0.0) negative_at(i);
        if (prefix_zero) return ProductValue::zero();
        if (std::find(p->cycle.begin(), p->cycle.end(), 0.0) != p->cycle.end()) return ProductValue::zero();
        TrackedProduct per_cycle;
        for (double t : p->cycle) per_cycle.mul(t);
        if (per_cycle.value - per_cycle.err > 1.0) return ProductValue::infinite();
        if (per_cycle.value + per_cycle.err < 1.0) return ProductValue::zero();
        // Cycle product indistinguishable from 1 with non-unit terms: the
        // partial products oscillate.
        return ProductValue::undefined();
    }
    const Affine f = *as_affine(seq.tail());
    if (f.kind == Affine::Kind::None) {
        if (f.base < 0.0) negative_at(start);
        if (prefix_zero || f.base == 0.0 || f.base < 1.0) return ProductValue::zero();
        if (f.base > 1.0) return ProductValue::infinite();
        return ProductValue::finite(prefix.value, prefix.err);
    }
    const ProductValue tail = drift_product(seq, f, tol);
    if (prefix_zero) return ProductValue::zero();
    return tail;
}

Bounded rho_distance(const TailedSequence& x, const TailedSequence& y, double tol) {
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
    // Each summand is below 2^-i, so stopping at N leaves at most 2^-N.
    std::size_t n = 1;
    while (std::ldexp(1.0, -static_cast<int>(n)) > tol / 2) ++n;
    double sum = 0.0;
    for (std::size_t i = n; i >= 1; --i) {
        const double d = std::abs(x(i) - y(i));
        sum += std::ldexp(d / (1.0 + d), -static_cast<int>(i));
    }
    const double err = up(std::ldexp(1.0, -static_cast<int>(n)) + 4.0 * static_cast<double>(n) * rounding::kUnit * sum);
    return {sum, err};
}

// ---------------------------------------------------------------------------
// Algebra
// ---------------------------------------------------------------------------

TailedSequence operator+(const TailedSequence& x, const TailedSequence& y) { return combine(x, y, Op::Add); }
TailedSequence operator-(const TailedSequence& x, const TailedSequence& y) { return combine(x, y, Op::Sub); }
TailedSequence max(const TailedSequence& x, const TailedSequence& y) { return combine(x, y, Op::Max); }
TailedSequence min(const TailedSequence& x, const TailedSequence& y) { return combine(x, y, Op::Min); }
TailedSequence operator+(const TailedSequence& x, double c) { return x + TailedSequence::constant(c); }
TailedSequence operator-(const TailedSequence& x, double c) { return x - TailedSequence::constant(c); }

TailedSequence operator*(double k, const TailedSequence& x) {
    std::vector<double> prefix = x.prefix();
    for (double& v : prefix) v *= k;
    TailDescriptor tail = std::visit(overloaded{
                                         [k](const Constant& c) -> TailDescriptor { return Constant{k * c.value}; },
                                         [k](const PowerDrift& d) -> TailDescriptor {
                                             return from_affine({Affine::Kind::Power, d.p, k * d.base, k * d.a});
                                         },
                                         [k](const GeometricDrift& d) -> TailDescriptor {
                                             return from_affine({Affine::Kind::Geometric, d.q, k * d.base, k * d.a});
                                         },
                                         [k](const Periodic& p) -> TailDescriptor {
                                             std::vector<double> c = p.cycle;
                                             for (double& v : c) v *= k;
                                             return normalize_cycle(std::move(c));
                                         },
                                         [k, &x](const Opaque&) -> TailDescriptor {
                                             Opaque o;
                                             o.term = [k, x](std::size_t i) { return k * x(i); };
                                             o.label = "scaled";
                                             return o;
                                         },
                                     },
                                     x.tail());
    return {std::move(prefix), std::move(tail)};
}

// ---------------------------------------------------------------------------
// Sign and range analysis
// ---------------------------------------------------------------------------

SignProfile sign_profile(const TailedSequence& seq) {
    SignProfile out;
    for (std::size_t i = 1; i <= seq.prefix().size(); ++i) {
        if (seq(i) < 0.0) {
            if (out.first_negative == 0) out.first_negative = i;
            out.last_negative = i;
        }
    }
    const std::size_t start = seq.prefix().size() + 1;
    const auto note_first = [&](std::size_t i) {
        if (out.first_negative == 0) out.first_negative = i;
    };
    if (seq.is_opaque()) {
        out.kind = SignProfile::Kind::Unknown;
        return out;
    }
    if (const auto cyc = as_cycle(seq.tail())) {
        if (std::any_of(cyc->begin(), cyc->end(), [](double v) { return v < 0.0; })) {
            out.kind = SignProfile::Kind::InfinitelyNegative;
            for (std::size_t i = start;; ++i)
                if (cycle_at(*cyc, i) < 0.0) {
                    note_first(i);
                    break;
                }
        } else {
            out.kind = SignProfile::Kind::FinitelyNegative;
        }
        return out;
    }
    const Affine f = *as_affine(seq.tail());
    const bool alternating = f.kind == Affine::Kind::Geometric && f.param < 0.0;
    if (f.base < 0.0 || (f.base == 0.0 && (f.a < 0.0 || (alternating && f.a != 0.0)))) {
        out.kind = SignProfile::Kind::InfinitelyNegative;
        for (std::size_t i = start; i <= kWindowCap; ++i)
            if (f.at(i) < 0.0) {
                note_first(i);
                break;
            }
        return out;
    }
    if (f.base == 0.0) {
        out.kind = SignProfile::Kind::FinitelyNegative;
        return out;
    }
    const std::size_t settled = first_index_below(f, std::abs(f.a), f.base);
    if (settled == kNoIndex || settled > kWindowCap) {
        out.kind = SignProfile::Kind::Unknown;
        return out;
    }
    for (std::size_t i = start; i < settled; ++i)
        if (f.at(i) < 0.0) {
            note_first(i);
            out.last_negative = i;
        }
    out.kind = SignProfile::Kind::FinitelyNegative;
    return out;
}

std::vector<std::size_t> negative_indices(const TailedSequence& seq, std::size_t from, std::size_t count) {
    std::vector<std::size_t> out;
    for (std::size_t i = from + 1; out.size() < count && i <= from + kWindowCap; ++i)
        if (seq(i) < 0.0) out.push_back(i);
    return out;
}

Tri all_nonnegative(const TailedSequence& seq) {
    const SignProfile s = sign_profile(seq);
    if (s.first_negative != 0) return Tri::No;
    if (s.kind == SignProfile::Kind::Unknown) return Tri::Unknown;
    return Tri::Yes;
}

std::optional<std::pair<double, double>> range_bounds(const TailedSequence& seq) {
    if (seq.is_opaque()) return std::nullopt;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : seq.prefix()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const std::size_t start = seq.prefix().size() + 1;
    if (const auto cyc = as_cycle(seq.tail())) {
        for (double v : *cyc) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    } else {
        const Affine f = *as_affine(seq.tail());
        const double ext = std::abs(f.a) * std::abs(f.g(start));
        const bool alternating = f.kind == Affine::Kind::Geometric && f.param < 0.0;
        if (alternating) {
            lo = std::min(lo, f.base - ext);
            hi = std::max(hi, f.base + ext);
        } else {
            const double first = f.at(start);
            lo = std::min({lo, f.base, first});
            hi = std::max({hi, f.base, first});
        }
    }
    return std::make_pair(down(lo), up(hi));
}

std::optional<double> abs_tail_sum(const TailedSequence& seq, std::size_t n) {
    if (seq.is_opaque()) return std::nullopt;
    double explicit_part = 0.0;
    for (std::size_t i = n + 1; i <= seq.prefix().size(); ++i) explicit_part += std::abs(seq(i));
    const std::size_t m = std::max(n, seq.prefix().size());
    double tail = 0.0;
    if (const auto cyc = as_cycle(seq.tail())) {
        if (std::any_of(cyc->begin(), cyc->end(), [](double v) { return v != 0.0; })) return std::nullopt;
    } else {
        Affine f = *as_affine(seq.tail());
        if (f.base != 0.0) return std::nullopt;
        f.a = std::abs(f.a);
        if (f.kind == Affine::Kind::Geometric) f.param = std::abs(f.param);
        const auto s = affine_zero_base_sum(f, m);
        tail = s->value + s->err;
    }
    if (explicit_part == 0.0 && tail == 0.0) return 0.0; // exact, no rounding to widen
    return up(up(explicit_part * (1 + 4 * rounding::kUnit * static_cast<double>(seq.prefix().size() + 1))) + tail);
}

std::optional<Bounded> dot_tail(const TailedSequence& w, const TailedSequence& x, std::size_t n) {
    const std::size_t m = std::max({n, w.prefix().size(), x.prefix().size()});
    double explicit_part = 0.0, explicit_abs = 0.0;
    for (std::size_t i = n + 1; i <= m; ++i) {
        const double t = w(i) * x(i);
        explicit_part += t;
        explicit_abs += std::abs(t);
    }
    const double explicit_err = 2.0 * static_cast<double>(m - n + 1) * rounding::kUnit * explicit_abs;
    const auto finish = [&](Bounded tail) -> Bounded {
        return {explicit_part + tail.value, up(explicit_err + tail.err + 2 * rounding::kUnit * std::abs(tail.value))};
    };
    if (w.is_opaque()) return std::nullopt;
    const auto fw = as_affine(w.tail());
    const auto cw = as_cycle(w.tail());
    if (cw && std::all_of(cw->begin(), cw->end(), [](double v) { return v == 0.0; })) return finish({0.0, 0.0});
    if (!fw || fw->base != 0.0) return std::nullopt;

    if (!x.is_opaque()) {
        const auto fx = as_affine(x.tail());
        if (fx && fx->kind == Affine::Kind::None) {
            const auto s = affine_zero_base_sum(*fw, m);
            return finish({fx->base * s->value, up(std::abs(fx->base) * s->err)});
        }
        if (fx && fw->kind == Affine::Kind::Geometric && fx->kind == Affine::Kind::Geometric) {
            const double q = fw->param, r = fx->param;
            const double e = static_cast<double>(m + 1);
            const double v = fw->a * fx->base * std::pow(q, e) / (1 - q) + fw->a * fx->a * std::pow(q * r, e) / (1 - q * r);
            return finish({v, up(16 * rounding::kUnit * (std::abs(v) + std::abs(fw->a)))});
        }
        if (fx && fw->kind == Affine::Kind::Power && fx->kind == Affine::Kind::Power) {
            const Bounded s1 = power_tail_sum(fw->param, m);
            const Bounded s2 = power_tail_sum(fw->param + fx->param, m);
            const double v = fw->a * fx->base * s1.value + fw->a * fx->a * s2.value;
            return finish({v, up(std::abs(fw->a * fx->base) * s1.err + std::abs(fw->a * fx->a) * s2.err)});
        }
        if (fw->kind == Affine::Kind::Geometric && std::holds_alternative<Periodic>(x.tail())) {
            const auto& c = std::get<Periodic>(x.tail()).cycle;
            const double q = fw->param;
            const double denom = 1.0 - std::pow(q, static_cast<double>(c.size()));
            double v = 0.0;
            for (std::size_t r = 0; r < c.size(); ++r)
                v += cycle_at(c, m + 1 + r) * std::pow(q, static_cast<double>(m + 1 + r));
            v = fw->a * v / denom;
            return finish({v, up(32 * rounding::kUnit * static_cast<double>(c.size()) * (std::abs(v) + std::abs(fw->a)))});
        }
    }
    // Generic: explicit summation with a certified remainder.
    const auto range = range_bounds(x);
    double sup = 0.0;
    if (range) {
        sup = std::max(std::abs(range->first), std::abs(range->second));
    } else {
        return std::nullopt;
    }
    double acc = 0.0, acc_abs = 0.0;
    std::size_t k = m;
    for (; k < m + kWindowCap; ++k) {
        const auto rest = abs_tail_sum(w, k);
        if (rest && *rest * sup <= 1e-17 * std::max(std::abs(acc), 1e-300)) break;
        if (k - m >= 4096 && rest && *rest * sup <= 1e-16) break;
        const double t = w(k + 1) * x(k + 1);
        acc += t;
        acc_abs += std::abs(t);
    }
    const double rest = *abs_tail_sum(w, k) * sup;
    return finish({acc, up(rest + 2.0 * static_cast<double>(k - m + 1) * rounding::kUnit * acc_abs)});
}

std::optional<std::size_t> settle_index(const TailedSequence& seq, double target, double eps) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    const std::size_t start = seq.prefix().size() + 1;
    std::size_t t; // all i >= t certified inside
    if (const auto* o = std::get_if<Opaque>(&seq.tail())) {
        if (!o->log_tail_bound || target != 1.0) return std::nullopt;
        // |log l| <= B(m) for i > m gives |l - 1| <= expm1(B).
        const double need = std::log1p(eps);
        std::size_t m = seq.prefix().size();
        while (m < kWindowCap && !(o->log_tail_bound(m) < need)) ++m;
        if (m >= kWindowCap) return std::nullopt;
        t = m + 1;
    } else if (const auto cyc = as_cycle(seq.tail())) {
        if (!std::all_of(cyc->begin(), cyc->end(), [&](double v) { return std::abs(v - target) < eps; }))
            return std::nullopt;
        t = start;
    } else {
        const Affine f = *as_affine(seq.tail());
        const double gap = std::abs(f.base - target);
        if (!(gap < eps)) return std::nullopt;
        const std::size_t s = first_index_below(f, std::abs(f.a), eps - gap);
        if (s == kNoIndex || s > kWindowCap) return std::nullopt;
        t = std::max(start, s);
    }
    while (t > 1 && std::abs(seq(t - 1) - target) < eps) --t;
    return t;
}

} // namespace measinf
