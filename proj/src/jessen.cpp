#include "measinf/jessen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "measinf/random.hpp"
#include "measinf/rounding.hpp"

namespace measinf {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::size_t kMcBlock = 4096;
constexpr double kZ99 = 2.5758293035489004;

const TailedSequence& half() {
    static const TailedSequence h = TailedSequence::constant(0.5);
    return h;
}

std::size_t cells_per_table(std::size_t cells, std::size_t dims) {
    std::size_t n = 1;
    for (std::size_t k = 0; k < dims; ++k) {
        if (n > std::numeric_limits<std::size_t>::max() / std::max<std::size_t>(cells, 1))
            throw Error(ErrorCode::InvalidArgument, "table too large");
        n *= cells;
    }
    return n;
}

double monomial_value(const FiniteCylinder::Monomial& m, std::span<const double> v) {
    double t = m.coef;
    for (std::size_t k = 0; k < v.size(); ++k) t *= std::pow(v[k], static_cast<double>(m.powers[k]));
    return t;
}

double table_value(const FiniteCylinder::Table& t, std::span<const double> v) {
    std::size_t flat = 0;
    for (double x : v) {
        if (!(x >= 0.0 && x <= 1.0)) return 0.0;
        const auto c = std::min(t.cells - 1, static_cast<std::size_t>(x * static_cast<double>(t.cells)));
        flat = flat * t.cells + c;
    }
    return t.values[flat];
}

double cylinder_value(const FiniteCylinder& c, std::span<const double> v) {
    return std::visit(overloaded{
                          [&](const FiniteCylinder::Polynomial& p) {
                              double s = 0.0;
                              for (const auto& m : p) s += monomial_value(m, v);
                              return s;
                          },
                          [&](const FiniteCylinder::Table& t) { return table_value(t, v); },
                          [&](const FiniteCylinder::Callable& g) { return g(v); },
                      },
                      c.form);
}

Tri member(const Parallelepiped& box, const TailedSequence& x) {
    try {
        const Tri lo = all_nonnegative(x - box.lower());
        if (lo == Tri::No) return Tri::No;
        const Tri hi = all_nonnegative(box.upper() - x);
        if (hi == Tri::No) return Tri::No;
        return lo == Tri::Yes && hi == Tri::Yes ? Tri::Yes : Tri::Unknown;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::RepresentationOverflow) throw;
        return Tri::Unknown;
    }
}

// Side lengths of box ∩ [0,1]^inf, clamped at 0.
TailedSequence clipped_lengths(const Parallelepiped& box) {
    const TailedSequence lo = max(box.lower(), TailedSequence::constant(0.0));
    const TailedSequence hi = min(box.upper(), TailedSequence::constant(1.0));
    return max(hi - lo, TailedSequence::constant(0.0));
}

// seq with its first d terms replaced by v.
TailedSequence with_head(const TailedSequence& seq, std::size_t d, double v) {
    TailedSequence m = seq.materialized(d);
    std::vector<double> prefix = m.prefix();
    for (std::size_t i = 0; i < d; ++i) prefix[i] = v;
    return {std::move(prefix), m.tail()};
}

// prod_{i>d} seq(i).
ProductValue product_beyond(const TailedSequence& seq, std::size_t d, double tol) {
    return infinite_product(with_head(seq, d, 1.0), tol);
}

// Mean of x^e for x uniform on [lo, hi].
double power_mean(double lo, double hi, unsigned e) {
    if (hi == lo) return std::pow(lo, static_cast<double>(e));
    const double k = static_cast<double>(e) + 1.0;
    return (std::pow(hi, k) - std::pow(lo, k)) / (k * (hi - lo));
}

// Fraction of [lo, hi] inside cell c of a grid with `cells` cells on [0,1].
double cell_weight(double lo, double hi, std::size_t c, std::size_t cells) {
    const double a = static_cast<double>(c) / static_cast<double>(cells);
    const double b = static_cast<double>(c + 1) / static_cast<double>(cells);
    if (hi == lo) {
        const auto k = std::min(cells - 1, static_cast<std::size_t>(lo * static_cast<double>(cells)));
        return lo >= 0.0 && lo <= 1.0 && k == c ? 1.0 : 0.0;
    }
    return std::max(0.0, std::min(hi, b) - std::max(lo, a)) / (hi - lo);
}

// Table average with independent per-axis cell weights.
double weighted_table(const FiniteCylinder::Table& t, const std::vector<std::vector<double>>& weights) {
    const std::size_t dims = weights.size();
    const std::size_t total = cells_per_table(t.cells, dims);
    double s = 0.0;
    for (std::size_t flat = 0; flat < total; ++flat) {
        double w = 1.0;
        std::size_t rest = flat;
        for (std::size_t k = dims; k-- > 0;) {
            w *= weights[k][rest % t.cells];
            rest /= t.cells;
        }
        if (w != 0.0) s += w * t.values[flat];
    }
    return s;
}

// Fast evaluation at points whose coordinates beyond `depth` equal 1/2.
class TruncatedEvaluator {
public:
    TruncatedEvaluator(const ProductFunction& f, std::size_t depth) : f_(f), depth_(depth) {
        if (const auto* l = std::get_if<LinearTail>(&f_)) {
            const auto t = dot_tail(l->weights, half(), depth);
            if (!t) throw Error(ErrorCode::PreconditionViolated, "weights are not certifiably summable");
            linear_tail_ = t->value;
            const TailedSequence w = l->weights.materialized(depth);
            weights_.assign(w.prefix().begin(), w.prefix().begin() + static_cast<std::ptrdiff_t>(depth));
        } else if (const auto* ind = std::get_if<Indicator>(&f_)) {
            const TailedSequence lo = ind->box.lower().materialized(depth);
            const TailedSequence hi = ind->box.upper().materialized(depth);
            lower_.assign(lo.prefix().begin(), lo.prefix().begin() + static_cast<std::ptrdiff_t>(depth));
            upper_.assign(hi.prefix().begin(), hi.prefix().begin() + static_cast<std::ptrdiff_t>(depth));
            std::vector<double> probe = lower_;
            const Tri tail = member(ind->box, TailedSequence(std::move(probe), Constant{0.5}));
            if (tail == Tri::Unknown)
                throw Error(ErrorCode::PreconditionViolated, "membership of the fixed tail is undecidable");
            tail_inside_ = tail == Tri::Yes;
        }
    }

    double operator()(std::span<const double> pts) const {
        return std::visit(overloaded{
                              [&](const FiniteCylinder& c) {
                                  std::vector<double> v(c.indices.size());
                                  for (std::size_t k = 0; k < v.size(); ++k)
                                      v[k] = c.indices[k] <= pts.size() ? pts[c.indices[k] - 1] : 0.5;
                                  return cylinder_value(c, v);
                              },
                              [&](const LinearTail& l) {
                                  double s = l.offset + linear_tail_;
                                  for (std::size_t i = 0; i < depth_; ++i) s += weights_[i] * pts[i];
                                  return s;
                              },
                              [&](const Indicator& ind) {
                                  if (!tail_inside_) return 0.0;
                                  for (std::size_t i = 0; i < depth_; ++i)
                                      if (pts[i] < lower_[i] || pts[i] > upper_[i]) return 0.0;
                                  return ind.scale;
                              },
                              [&](const OpaqueFunction& o) {
                                  return o.eval(TailedSequence(std::vector<double>(pts.begin(), pts.end()),
                                                               Constant{0.5}));
                              },
                          },
                          f_);
    }

private:
    const ProductFunction& f_;
    std::size_t depth_;
    double linear_tail_ = 0.0;
    std::vector<double> weights_, lower_, upper_;
    bool tail_inside_ = true;
};

struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }

    void merge(const Moments& o) {
        if (o.n == 0) return;
        const double total = static_cast<double>(n + o.n);
        const double delta = o.mean - mean;
        mean += delta * static_cast<double>(o.n) / total;
        m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) / total;
        n += o.n;
    }
};

FiniteCylinder integrate_cylinder_beyond(const FiniteCylinder& c, std::size_t d) {
    std::vector<std::size_t> keep_pos;
    for (std::size_t k = 0; k < c.indices.size(); ++k)
        if (c.indices[k] <= d) keep_pos.push_back(k);
    if (keep_pos.size() == c.indices.size()) return c;

    FiniteCylinder out;
    for (std::size_t k : keep_pos) out.indices.push_back(c.indices[k]);
    if (const auto* p = std::get_if<FiniteCylinder::Polynomial>(&c.form)) {
        FiniteCylinder::Polynomial q;
        for (const auto& m : *p) {
            FiniteCylinder::Monomial r;
            double divisor = 1.0;
            for (std::size_t k = 0; k < c.indices.size(); ++k) {
                if (c.indices[k] <= d)
                    r.powers.push_back(m.powers[k]);
                else
                    divisor *= static_cast<double>(m.powers[k]) + 1.0;
            }
            r.coef = m.coef / divisor;
            q.push_back(std::move(r));
        }
        out.form = std::move(q);
        return out;
    }
    if (const auto* t = std::get_if<FiniteCylinder::Table>(&c.form)) {
        const std::size_t dims = c.indices.size();
        FiniteCylinder::Table r;
        r.cells = t->cells;
        r.values.assign(cells_per_table(t->cells, keep_pos.size()), 0.0);
        const double w = 1.0 / static_cast<double>(cells_per_table(t->cells, dims - keep_pos.size()));
        for (std::size_t flat = 0; flat < t->values.size(); ++flat) {
            std::vector<std::size_t> digit(dims);
            std::size_t rest = flat;
            for (std::size_t k = dims; k-- > 0;) {
                digit[k] = rest % t->cells;
                rest /= t->cells;
            }
            std::size_t target = 0;
            for (std::size_t k : keep_pos) target = target * t->cells + digit[k];
            r.values[target] += w * t->values[flat];
        }
        out.form = std::move(r);
        return out;
    }
    throw Error(ErrorCode::CylinderBeyondD,
                "callable cylinder depends on coordinate " + std::to_string(c.indices.back()) + " > " +
                    std::to_string(d));
}

Bounded integrate_cylinder(const FiniteCylinder& c) {
    return std::visit(overloaded{
                          [](const FiniteCylinder::Polynomial& p) {
                              double s = 0.0;
                              for (const auto& m : p) {
                                  double divisor = 1.0;
                                  for (unsigned e : m.powers) divisor *= static_cast<double>(e) + 1.0;
                                  s += m.coef / divisor;
                              }
                              return Bounded{s, 0.0};
                          },
                          [&](const FiniteCylinder::Table& t) {
                              double s = 0.0;
                              for (double v : t.values) s += v;
                              return Bounded{s / static_cast<double>(t.values.size()), 0.0};
                          },
                          [](const FiniteCylinder::Callable&) -> Bounded {
                              throw Error(ErrorCode::OpaqueUnsupported, "callable cylinder has no closed-form integral");
                          },
                      },
                      c.form);
}

void require_summable(const TailedSequence& w) {
    if (!abs_tail_sum(w, 0))
        throw Error(ErrorCode::InvalidArgument, "linear-tail weights must be certifiably absolutely summable");
}

} // namespace

FiniteCylinder make_polynomial(std::vector<std::size_t> indices, FiniteCylinder::Polynomial terms) {
    if (!std::is_sorted(indices.begin(), indices.end()) ||
        std::adjacent_find(indices.begin(), indices.end()) != indices.end() ||
        (!indices.empty() && indices.front() == 0))
        throw Error(ErrorCode::InvalidArgument, "cylinder indices must be distinct, sorted and >= 1");
    for (const auto& m : terms)
        if (m.powers.size() != indices.size())
            throw Error(ErrorCode::InvalidArgument, "each monomial needs one exponent per index");
    return {std::move(indices), std::move(terms)};
}

FiniteCylinder make_table(std::vector<std::size_t> indices, std::size_t cells, std::vector<double> values) {
    if (!std::is_sorted(indices.begin(), indices.end()) ||
        std::adjacent_find(indices.begin(), indices.end()) != indices.end() ||
        (!indices.empty() && indices.front() == 0))
        throw Error(ErrorCode::InvalidArgument, "cylinder indices must be distinct, sorted and >= 1");
    if (cells == 0) throw Error(ErrorCode::InvalidArgument, "table needs at least one cell per axis");
    if (values.size() != cells_per_table(cells, indices.size()))
        throw Error(ErrorCode::InvalidArgument, "table needs cells^|J| values");
    return {std::move(indices), FiniteCylinder::Table{cells, std::move(values)}};
}

LinearTail make_linear_tail(TailedSequence weights, double offset) {
    require_summable(weights);
    return {std::move(weights), offset};
}

OpaqueFunction limsup_function() {
    OpaqueFunction f;
    f.label = "limsup";
    f.eval = [](const TailedSequence& x) {
        return std::visit(overloaded{
                              [](const Constant& c) { return c.value; },
                              [](const PowerDrift& d) { return d.base; },
                              [](const GeometricDrift& d) { return d.base; },
                              [](const Periodic& p) { return *std::max_element(p.cycle.begin(), p.cycle.end()); },
                              [](const Opaque&) -> double {
                                  throw Error(ErrorCode::OpaqueUnsupported, "limsup of an opaque tail");
                              },
                          },
                          x.tail());
    };
    return f;
}

double evaluate(const ProductFunction& f, const TailedSequence& x) {
    return std::visit(overloaded{
                          [&](const FiniteCylinder& c) {
                              std::vector<double> v;
                              for (std::size_t i : c.indices) v.push_back(x(i));
                              return cylinder_value(c, v);
                          },
                          [&](const LinearTail& l) {
                              const auto s = dot_tail(l.weights, x, 0);
                              if (!s) throw Error(ErrorCode::PreconditionViolated, "sum w_i x_i is not certifiable");
                              return l.offset + s->value;
                          },
                          [&](const Indicator& ind) {
                              const Tri t = member(ind.box, x);
                              if (t == Tri::Unknown)
                                  throw Error(ErrorCode::PreconditionViolated, "membership is undecidable");
                              return t == Tri::Yes ? ind.scale : 0.0;
                          },
                          [&](const OpaqueFunction& o) { return o.eval(x); },
                      },
                      f);
}

TailIntegral tail_integrate(const ProductFunction& f, std::size_t d, double tol) {
    if (d == 0) throw Error(ErrorCode::InvalidArgument, "d must be positive");
    return std::visit(
        overloaded{
            [&](const FiniteCylinder& c) { return TailIntegral{d, integrate_cylinder_beyond(c, d), true}; },
            [&](const LinearTail& l) {
                const auto t = dot_tail(l.weights, half(), d);
                if (!t) throw Error(ErrorCode::PreconditionViolated, "weights are not certifiably summable");
                const TailedSequence w = l.weights.materialized(d);
                std::vector<double> head(w.prefix().begin(), w.prefix().begin() + static_cast<std::ptrdiff_t>(d));
                return TailIntegral{d, LinearTail{TailedSequence(std::move(head), Constant{0.0}), l.offset + t->value},
                                    t->err == 0.0};
            },
            [&](const Indicator& ind) {
                const ProductValue p = product_beyond(clipped_lengths(ind.box), d, tol);
                if (p.is_undefined() || p.is_infinite())
                    throw Error(ErrorCode::OpaqueUnsupported, "tail factor is " + to_string(p));
                const TailedSequence lo = ind.box.lower().materialized(d);
                const TailedSequence hi = ind.box.upper().materialized(d);
                std::vector<double> a(lo.prefix().begin(), lo.prefix().begin() + static_cast<std::ptrdiff_t>(d));
                std::vector<double> b(hi.prefix().begin(), hi.prefix().begin() + static_cast<std::ptrdiff_t>(d));
                Parallelepiped head(TailedSequence(std::move(a), Constant{0.0}),
                                    TailedSequence(std::move(b), Constant{1.0}));
                const double factor = p.is_zero() ? 0.0 : p.value;
                return TailIntegral{d, Indicator{std::move(head), ind.scale * factor}, p.err == 0.0};
            },
            [&](const OpaqueFunction& o) -> TailIntegral {
                throw Error(ErrorCode::OpaqueUnsupported, "no closed-form tail integral for '" + o.label + "'");
            },
        },
        f);
}

Bounded integrate_cube(const ProductFunction& f, double tol) {
    return std::visit(overloaded{
                          [&](const FiniteCylinder& c) { return integrate_cylinder(c); },
                          [&](const LinearTail& l) {
                              const auto t = dot_tail(l.weights, half(), 0);
                              if (!t) throw Error(ErrorCode::PreconditionViolated, "weights are not summable");
                              return Bounded{l.offset + t->value, t->err};
                          },
                          [&](const Indicator& ind) {
                              const ProductValue p = infinite_product(clipped_lengths(ind.box), tol);
                              if (p.is_undefined() || p.is_infinite())
                                  throw Error(ErrorCode::OpaqueUnsupported, "clipped volume is " + to_string(p));
                              if (p.is_zero()) return Bounded{0.0, 0.0};
                              return Bounded{ind.scale * p.value, std::abs(ind.scale) * p.err};
                          },
                          [&](const OpaqueFunction& o) -> Bounded {
                              throw Error(ErrorCode::OpaqueUnsupported, "no closed-form integral for '" + o.label + "'");
                          },
                      },
                      f);
}

Bounded average_over(const ProductFunction& f, const Parallelepiped& box, double tol) {
    const MeasureValue vb = volume(box, tol);
    if (!vb.is_finite()) throw Error(ErrorCode::NotFiniteBase, "averaging box has volume " + to_string(vb));
    const auto clipped = intersect(box, Parallelepiped::unit_cube());
    if (!clipped) return {0.0, 0.0};
    const MeasureValue vc = volume(*clipped, tol);
    if (vc.is_undefined()) throw Error(ErrorCode::RepresentationOverflow, "clipped volume is undefined");
    if (vc.is_zero()) return {0.0, 0.0};
    const double ratio = vc.value / vb.value;
    const double ratio_err = ratio * (vc.err / vc.value + vb.err / vb.value) + 4 * rounding::kUnit * ratio;
    const TailedSequence& lo = clipped->lower();
    const TailedSequence& hi = clipped->upper();

    const auto scaled = [&](Bounded mean) {
        return Bounded{ratio * mean.value,
                       rounding::up(ratio_err * std::abs(mean.value) + ratio * mean.err +
                                    4 * rounding::kUnit * std::abs(ratio * mean.value))};
    };

    return std::visit(
        overloaded{
            [&](const FiniteCylinder& c) {
                if (const auto* p = std::get_if<FiniteCylinder::Polynomial>(&c.form)) {
                    double s = 0.0, mag = 0.0;
                    for (const auto& m : *p) {
                        double t = m.coef;
                        for (std::size_t k = 0; k < c.indices.size(); ++k)
                            t *= power_mean(lo(c.indices[k]), hi(c.indices[k]), m.powers[k]);
                        s += t;
                        mag += std::abs(t);
                    }
                    return scaled({s, 64 * rounding::kUnit * mag});
                }
                if (const auto* t = std::get_if<FiniteCylinder::Table>(&c.form)) {
                    std::vector<std::vector<double>> w;
                    for (std::size_t i : c.indices) {
                        std::vector<double> wi(t->cells);
                        for (std::size_t k = 0; k < t->cells; ++k) wi[k] = cell_weight(lo(i), hi(i), k, t->cells);
                        w.push_back(std::move(wi));
                    }
                    double mag = 0.0;
                    for (double v : t->values) mag = std::max(mag, std::abs(v));
                    return scaled({weighted_table(*t, w), 64 * rounding::kUnit * mag});
                }
                throw Error(ErrorCode::OpaqueUnsupported, "callable cylinder has no closed-form average");
            },
            [&](const LinearTail& l) {
                const auto s = dot_tail(l.weights, 0.5 * (lo + hi), 0);
                if (!s) throw Error(ErrorCode::PreconditionViolated, "weights are not summable");
                return scaled({l.offset + s->value, s->err});
            },
            [&](const Indicator& ind) {
                const auto both = intersect(*clipped, ind.box);
                if (!both) return Bounded{0.0, 0.0};
                const MeasureValue v = volume(*both, tol);
                if (v.is_undefined()) throw Error(ErrorCode::RepresentationOverflow, "intersection volume undefined");
                if (v.is_zero()) return Bounded{0.0, 0.0};
                const double r = v.value / vb.value;
                const double e = r * (v.err / v.value + vb.err / vb.value) + 4 * rounding::kUnit * r;
                return Bounded{ind.scale * r, std::abs(ind.scale) * e};
            },
            [&](const OpaqueFunction& o) -> Bounded {
                throw Error(ErrorCode::OpaqueUnsupported, "no closed-form average for '" + o.label + "'");
            },
        },
        f);
}

std::vector<ConvergenceRow> jessen_convergence(const ProductFunction& f, const TailedSequence& x,
                                               const std::vector<std::size_t>& dims) {
    const double fx = evaluate(f, x);
    std::vector<ConvergenceRow> rows;
    for (std::size_t d : dims) {
        const TailIntegral fd = tail_integrate(f, d);
        ConvergenceRow row{d, evaluate(fd.function, x), 0.0};
        if (const auto* l = std::get_if<LinearTail>(&f)) {
            // sum_{i>d} w_i (x_i - 1/2), evaluated directly.
            const auto g = dot_tail(l->weights, x - 0.5, d);
            if (!g) throw Error(ErrorCode::PreconditionViolated, "tail gap is not certifiable");
            row.gap = std::abs(g->value);
        } else {
            row.gap = std::abs(row.f_d - fx);
        }
        rows.push_back(row);
    }
    return rows;
}

McEstimate mc_tail_integrate(const ProductFunction& f, std::span<const double> x_prefix, std::size_t d,
                             std::size_t n_samples, std::uint64_t seed, std::size_t truncation_depth,
                             unsigned threads) {
    if (truncation_depth < d) throw Error(ErrorCode::InvalidArgument, "truncation depth must be at least d");
    if (x_prefix.size() < d) throw Error(ErrorCode::InvalidArgument, "x prefix shorter than d");
    if (n_samples == 0) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
    const TruncatedEvaluator eval(f, truncation_depth);
    const std::size_t blocks = (n_samples + kMcBlock - 1) / kMcBlock;
    std::vector<Moments> parts(blocks);
    random::parallel_for(blocks, threads, [&](std::size_t b) {
        auto g = random::stream_engine(seed, b);
        std::vector<double> pts(truncation_depth);
        std::copy(x_prefix.begin(), x_prefix.begin() + static_cast<std::ptrdiff_t>(d), pts.begin());
        const std::size_t count = std::min(kMcBlock, n_samples - b * kMcBlock);
        Moments m;
        for (std::size_t s = 0; s < count; ++s) {
            for (std::size_t i = d; i < truncation_depth; ++i) pts[i] = random::uniform01(g);
            m.add(eval(pts));
        }
        parts[b] = m;
    });
    Moments all;
    for (const auto& m : parts) all.merge(m);
    McEstimate out;
    out.samples = all.n;
    out.mean = all.mean;
    const double var = all.n > 1 ? all.m2 / static_cast<double>(all.n - 1) : 0.0;
    out.std_error = std::sqrt(var / static_cast<double>(all.n));
    out.ci_low = out.mean - kZ99 * out.std_error;
    out.ci_high = out.mean + kZ99 * out.std_error;
    return out;
}

FubiniReport fubini_check(const ProductFunction& f, std::size_t d, double tol) {
    const TailIntegral fd = tail_integrate(f, d, tol);
    FubiniReport r;
    r.truncated = integrate_cube(fd.function, tol).value;
    r.full = integrate_cube(f, tol).value;
    r.difference = std::abs(r.truncated - r.full);
    return r;
}

OscillationReport slowly_oscillating_test(const ProductFunction& f, double eps, std::size_t d, std::size_t n_pairs,
                                          std::uint64_t seed, std::size_t truncation_depth) {
    if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be non-negative");
    if (truncation_depth < d) throw Error(ErrorCode::InvalidArgument, "truncation depth must be at least d");
    OscillationReport rep;
    rep.d = d;

    auto g = random::stream_engine(seed, 0);
    double worst = -1.0;
    const auto consider = [&](TailedSequence x, TailedSequence y) {
        const double diff = std::abs(evaluate(f, x) - evaluate(f, y));
        rep.sampled_sup = std::max(rep.sampled_sup, diff);
        if (diff > eps && diff > worst) {
            worst = diff;
            rep.witness = std::make_pair(std::move(x), std::move(y));
        }
    };

    std::vector<double> head(d);
    for (double& v : head) v = random::uniform01(g);
    consider(TailedSequence(head, Constant{0.0}), TailedSequence(head, Constant{1.0}));
    consider(TailedSequence(head, Constant{1.0}), TailedSequence(head, Constant{0.0}));

    std::vector<double> px(truncation_depth), py(truncation_depth);
    for (std::size_t k = 0; k < n_pairs; ++k) {
        for (std::size_t i = 0; i < d; ++i) px[i] = py[i] = random::uniform01(g);
        for (std::size_t i = d; i < truncation_depth; ++i) {
            px[i] = random::uniform01(g);
            py[i] = random::uniform01(g);
        }
        consider(TailedSequence(px, Constant{0.5}), TailedSequence(py, Constant{0.5}));
    }

    std::visit(overloaded{
                   [&](const FiniteCylinder& c) {
                       if (c.indices.empty() || c.indices.back() <= d) rep.certified_bound = 0.0;
                   },
                   [&](const LinearTail& l) {
                       // sup over pairs in I^inf of |sum_{i>d} w_i (x_i - y_i)| <= sum_{i>d} |w_i|.
                       if (const auto s = abs_tail_sum(l.weights, d)) rep.certified_bound = *s;
                   },
                   [&](const Indicator& ind) {
                       // Zero when every side beyond d contains [0, 1].
                       try {
                           const TailedSequence lo = with_head(ind.box.lower(), d, 0.0);
                           const TailedSequence hi = with_head(ind.box.upper(), d, 1.0);
                           const bool inside = all_nonnegative(-1.0 * lo) == Tri::Yes &&
                                               all_nonnegative(hi - 1.0) == Tri::Yes;
                           rep.certified_bound = inside ? 0.0 : std::abs(ind.scale);
                       } catch (const Error& e) {
                           if (e.code() != ErrorCode::RepresentationOverflow) throw;
                           rep.certified_bound = std::abs(ind.scale);
                       }
                   },
                   [&](const OpaqueFunction& o) {
                       if (o.sup_bound) rep.certified_bound = 2 * *o.sup_bound;
                   },
               },
               f);

    rep.verdict = rep.witness ? OscillationReport::Verdict::FailWitness : OscillationReport::Verdict::PassAt;
    return rep;
}

std::vector<SupportLevel> sigma_finite_support_cover(const ProductFunction& f, std::size_t n_levels, double tol) {
    const Bounded total = integrate_cube(f, tol);
    if (!(std::abs(total.value - 1.0) <= 1e-9 + total.err))
        throw Error(ErrorCode::PreconditionViolated, "density must integrate to 1");
    std::vector<SupportLevel> out;
    for (std::size_t n = 1; n <= n_levels; ++n) {
        SupportLevel lv;
        lv.n = n;
        lv.level = 1.0 / static_cast<double>(n);
        lv.volume_bound = static_cast<double>(n); // Chebyshev: level * vol(S_n) <= integral = 1
        std::visit(overloaded{
                       [&](const Indicator& ind) {
                           lv.representable = true;
                           if (!(ind.scale > lv.level)) {
                               lv.volume_bound = 0.0;
                               return;
                           }
                           const auto box = intersect(ind.box, Parallelepiped::unit_cube());
                           if (!box) {
                               lv.volume_bound = 0.0;
                               return;
                           }
                           const MeasureValue v = volume(*box, tol);
                           lv.volume_bound = std::min(lv.volume_bound, v.is_zero() ? 0.0 : v.upper());
                           lv.cover.push_back(*box);
                       },
                       [&](const FiniteCylinder& c) {
                           const auto* t = std::get_if<FiniteCylinder::Table>(&c.form);
                           if (!t) return;
                           lv.representable = true;
                           const std::size_t dims = c.indices.size();
                           std::size_t hits = 0;
                           for (std::size_t flat = 0; flat < t->values.size(); ++flat) {
                               if (!(t->values[flat] > lv.level)) continue;
                               ++hits;
                               std::vector<double> lo(c.indices.empty() ? 0 : c.indices.back(), 0.0);
                               std::vector<double> hi(lo.size(), 1.0);
                               std::size_t rest = flat;
                               for (std::size_t k = dims; k-- > 0;) {
                                   const std::size_t cell = rest % t->cells;
                                   rest /= t->cells;
                                   lo[c.indices[k] - 1] = static_cast<double>(cell) / static_cast<double>(t->cells);
                                   hi[c.indices[k] - 1] = static_cast<double>(cell + 1) / static_cast<double>(t->cells);
                               }
                               lv.cover.emplace_back(TailedSequence(std::move(lo), Constant{0.0}),
                                                     TailedSequence(std::move(hi), Constant{1.0}));
                           }
                           lv.volume_bound = std::min(lv.volume_bound, static_cast<double>(hits) /
                                                                           static_cast<double>(t->values.size()));
                       },
                       [](const auto&) {},
                   },
                   f);
        out.push_back(std::move(lv));
    }
    return out;
}

std::vector<SupportLevel> sigma_finite_support_cover_strict(const ProductFunction& f, std::size_t n_levels,
                                                            double tol) {
    auto levels = sigma_finite_support_cover(f, n_levels, tol);
    for (const auto& lv : levels)
        if (!lv.representable)
            throw Error(ErrorCode::SuperLevelNotRepresentable, "super-level sets of this class are not box unions");
    return levels;
}

TailedSequence unit_cube_escape_witness(const Parallelepiped& box, const std::vector<Parallelepiped>& unit_cubes) {
    const std::size_t m = unit_cubes.size();
    std::vector<double> x = box.lower().materialized(m).prefix();
    for (std::size_t j = 1; j <= m; ++j) {
        const double a = box.lower()(j), b = box.upper()(j);
        if (!(b - a > 1.0))
            throw Error(ErrorCode::PreconditionViolated,
                        "box side " + std::to_string(j) + " must be longer than 1", j);
        const double lo = unit_cubes[j - 1].lower()(j), hi = unit_cubes[j - 1].upper()(j);
        if (hi - lo > 1.0)
            throw Error(ErrorCode::PreconditionViolated, "cover element " + std::to_string(j - 1) + " is not a unit cube",
                        j - 1);
        // [a, b] is longer than [lo, hi], so one end of it escapes.
        x[j - 1] = a < lo ? a : b;
    }
    return {std::move(x), box.lower().tail()};
}

ContradictionCertificate continuous_density_contradiction(const ProductFunction& f, const TailedSequence& x0,
                                                          const ContinuityClaim& claim) {
    const std::size_t d = claim.lower.size();
    if (claim.upper.size() != d || d == 0)
        throw Error(ErrorCode::InvalidArgument, "claimed neighbourhood needs matching, non-empty bounds");
    ContradictionCertificate cert;
    cert.f_at_x0 = evaluate(f, x0);
    if (!(cert.f_at_x0 > 0.0)) throw Error(ErrorCode::NotPositiveAt, "f(x0) = " + std::to_string(cert.f_at_x0));
    cert.epsilon = cert.f_at_x0 / 2;
    cert.base_volume = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        if (!(claim.lower[i] < x0(i + 1) && x0(i + 1) < claim.upper[i]))
            throw Error(ErrorCode::PreconditionViolated, "x0 is not inside the claimed neighbourhood", i + 1);
        cert.base_volume *= claim.upper[i] - claim.lower[i];
    }
    // V' = prod_{i<=d}(a_i, b_i) x R x R x ...: every tail side is unbounded.
    cert.neighbourhood_volume = MeasureValue::infinite();
    cert.integral_lower_bound = MeasureValue::infinite();

    // Move one free coordinate; the claim says f stays within eps there.
    for (std::size_t i = d + 1; i <= d + 4 && !cert.refuting_point; ++i) {
        const double xi = x0(i);
        for (double v : {xi + 1.0, xi - 1.0, 2.0, -1.0, xi + 1e6}) {
            const TailedSequence y = x0.with_term(i, v);
            double fy;
            try {
                fy = evaluate(f, y);
            } catch (const Error&) {
                continue;
            }
            if (!(std::abs(cert.f_at_x0 - fy) < cert.epsilon)) {
                cert.refuting_point = y;
                break;
            }
        }
    }
    cert.note = "integral over V' >= eps * vol(V') = +inf > 1 = integral of f, so the claimed modulus is inconsistent";
    if (cert.refuting_point) cert.note += "; explicit point of V' violating the claimed bound supplied";
    return cert;
}

} // namespace measinf
