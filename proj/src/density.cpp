#include "measinf/density.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "measinf/rounding.hpp"

namespace measinf {

namespace {

constexpr std::size_t kMaxUnion = 16;
constexpr std::size_t kFallbackDepth = 4096;

// Ratio of per-coordinate lengths of (p ∩ a) to p; 0 when disjoint there.
double coordinate_ratio(const Parallelepiped& p, const Parallelepiped& a, std::size_t i) {
    const double lo = std::max(p.lower()(i), a.lower()(i));
    const double hi = std::min(p.upper()(i), a.upper()(i));
    const double len = p.upper()(i) - p.lower()(i);
    if (hi < lo) return 0.0;
    if (len == 0.0) return 1.0;
    return (hi - lo) / len;
}

// Witness that vol(p ∩ a) / vol(p) < threshold, from finitely many coordinates.
std::optional<ZeroWitness> zero_witness(const Parallelepiped& p, const Parallelepiped& a, std::size_t set_index) {
    ZeroWitness w;
    w.set_index = set_index;
    w.bound = 1.0;
    for (std::size_t i = 1; i <= kWindowCap && !(w.bound < kZeroThreshold); ++i) {
        const double r = coordinate_ratio(p, a, i);
        if (r >= 1.0) continue;
        w.coordinates.push_back(i);
        w.factors.push_back(rounding::up(r));
        w.observed.push_back(r);
        w.bound = rounding::up(w.bound * rounding::up(r));
    }
    if (!(w.bound < kZeroThreshold)) return std::nullopt;
    return w;
}

struct StageValue {
    double average = 0.0;
    double err = 0.0;
    bool zero = false; ///< certified exactly zero
    bool certified = true;
    std::vector<ZeroWitness> witnesses;
};

StageValue union_average_certified(const std::vector<Parallelepiped>& sets, const Parallelepiped& p,
                                   const MeasureValue& vp, double tol) {
    StageValue out;
    const std::size_t n = sets.size();
    bool all_zero = true;
    double sum = 0.0, err = 0.0;
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::optional<Parallelepiped> q = p;
        for (std::size_t j = 0; j < n && q; ++j)
            if (mask & (std::size_t{1} << j)) q = intersect(*q, sets[j]);
        if (!q) continue;
        const MeasureValue v = volume(*q, tol);
        if (v.is_undefined() || v.is_infinite())
            throw Error(ErrorCode::RepresentationOverflow, "intersection volume is " + to_string(v));
        if (v.is_zero()) continue;
        all_zero = false;
        const double sign = (std::popcount(mask) % 2 == 1) ? 1.0 : -1.0;
        sum += sign * v.value;
        err += v.err + 2 * rounding::kUnit * std::abs(sum);
    }
    if (all_zero) {
        out.zero = true;
        for (std::size_t j = 0; j < n; ++j) {
            auto w = zero_witness(p, sets[j], j);
            if (!w) {
                // Zero by the product classification but the scan window is too short.
                ZeroWitness none;
                none.set_index = j;
                none.bound = 0.0;
                w = none;
            }
            out.witnesses.push_back(std::move(*w));
        }
        return out;
    }
    out.average = sum / vp.value;
    out.err = rounding::up((err + std::abs(out.average) * vp.err) / vp.value + 4 * rounding::kUnit * std::abs(out.average));
    return out;
}

StageValue union_average_truncated(const std::vector<Parallelepiped>& sets, const Parallelepiped& p) {
    StageValue out;
    out.certified = false;
    const std::size_t n = sets.size();
    double sum = 0.0;
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        double ratio = 1.0;
        for (std::size_t i = 1; i <= kFallbackDepth && ratio > 0.0; ++i) {
            double lo = p.lower()(i), hi = p.upper()(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (!(mask & (std::size_t{1} << j))) continue;
                lo = std::max(lo, sets[j].lower()(i));
                hi = std::min(hi, sets[j].upper()(i));
            }
            const double len = p.upper()(i) - p.lower()(i);
            ratio *= hi < lo ? 0.0 : (len == 0.0 ? 1.0 : (hi - lo) / len);
        }
        sum += ((std::popcount(mask) % 2 == 1) ? 1.0 : -1.0) * ratio;
    }
    out.average = sum;
    out.err = std::numeric_limits<double>::infinity();
    return out;
}

DensityReport finish_report(std::vector<DensityStage> stages, std::vector<StageValue> values, double tol) {
    DensityReport rep;
    rep.stages = std::move(stages);
    for (const auto& v : values) rep.certified = rep.certified && v.certified;
    if (rep.stages.empty()) return rep;
    const std::size_t k = std::min(kConvergenceWindow, rep.stages.size());
    const std::size_t first = rep.stages.size() - k;
    bool zeros = true;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t s = first; s < rep.stages.size(); ++s) {
        zeros = zeros && values[s].zero;
        lo = std::min(lo, rep.stages[s].average);
        hi = std::max(hi, rep.stages[s].average);
    }
    if (zeros) {
        rep.verdict = DensityReport::Verdict::ZeroCertificate;
        rep.witnesses = values.back().witnesses;
        rep.limit = 0.0;
    } else if (hi - lo <= tol) {
        rep.verdict = DensityReport::Verdict::Converged;
        rep.limit = rep.stages.back().average;
    } else {
        rep.verdict = DensityReport::Verdict::Oscillating;
        rep.liminf = lo;
        rep.limsup = hi;
    }
    return rep;
}

MeasureValue checked_base_volume(const Parallelepiped& base, double tol) {
    const MeasureValue v = volume(base, tol);
    if (!v.is_finite() || !(v.lower() > 0.0)) throw Error(ErrorCode::NotFiniteBase, "base volume is " + to_string(v));
    return v;
}

} // namespace

CoreSpec make_core_spec(Parallelepiped base, double delta, double tol) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must lie in [0, 1]");
    checked_base_volume(base, tol);
    return {std::move(base), delta};
}

double core_truncated_volume(const CoreSpec& spec, std::size_t D, std::size_t d) {
    if (d == 0 || d <= D) throw Error(ErrorCode::InvalidArgument, "need d > D and d >= 1");
    double v = 1.0;
    for (std::size_t i = 1; i <= d; ++i) {
        const double l = spec.base.lengths()(i);
        v *= i <= D ? l : spec.delta * l;
    }
    return v;
}

TailedSequence core_slack(const TailedSequence& x, const CoreSpec& spec) {
    const TailedSequence c = spec.base.centre();
    return (0.5 * spec.delta) * spec.base.lengths() - max(x - c, c - x);
}

CoreMembership in_core(const TailedSequence& x, const CoreSpec& spec, std::size_t depth) {
    CoreMembership out;
    out.depth = depth;
    if (x.is_opaque()) {
        out.reason = "opaque tail";
        return out;
    }
    try {
        const SignProfile s = sign_profile(core_slack(x, spec));
        switch (s.kind) {
        case SignProfile::Kind::InfinitelyNegative:
            out.answer = Tri::No;
            out.reason = "infinitely many coordinates leave the core tube, first at " + std::to_string(s.first_negative);
            break;
        case SignProfile::Kind::FinitelyNegative:
            if (s.last_negative <= depth) {
                out.answer = Tri::Yes;
                out.from = s.last_negative;
            } else {
                out.reason = "last violation at " + std::to_string(s.last_negative) + " beyond depth";
            }
            break;
        case SignProfile::Kind::Unknown: out.reason = "sign structure undecidable"; break;
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::RepresentationOverflow) throw;
        out.reason = e.what();
    }
    return out;
}

ShrinkFamily ShrinkFamily::around(const TailedSequence& centre, double side, double eta) {
    if (!(side > 0.0)) throw Error(ErrorCode::InvalidArgument, "side must be positive");
    if (!(eta > 0.0 && eta < 1.0)) throw Error(ErrorCode::InvalidArgument, "eta must lie in (0, 1)");
    return {Parallelepiped::cube(centre, side), eta};
}

Parallelepiped ShrinkFamily::stage(std::size_t m) const {
    if (!(eta > 0.0 && eta < 1.0)) throw Error(ErrorCode::InvalidArgument, "eta must lie in (0, 1)");
    if (m == 0) return base;
    // Sides beyond m keep the base endpoints exactly.
    std::vector<double> lo = base.lower().materialized(m).prefix();
    std::vector<double> hi = base.upper().materialized(m).prefix();
    for (std::size_t i = 0; i < m; ++i) {
        const double c = 0.5 * (lo[i] + hi[i]);
        const double h = 0.5 * eta * (hi[i] - lo[i]);
        lo[i] = c - h;
        hi[i] = c + h;
    }
    return {TailedSequence(std::move(lo), base.lower().tail()), TailedSequence(std::move(hi), base.upper().tail())};
}

const char* to_string(DensityReport::Verdict v) noexcept {
    switch (v) {
    case DensityReport::Verdict::Converged: return "Converged";
    case DensityReport::Verdict::Oscillating: return "Oscillating";
    case DensityReport::Verdict::ZeroCertificate: return "ZeroCertificate";
    }
    return "?";
}

DensityReport density_sequence(const std::vector<Parallelepiped>& sets, const ShrinkFamily& fam, std::size_t stages,
                               double tol) {
    if (sets.size() > kMaxUnion) throw Error(ErrorCode::InvalidArgument, "at most 16 sets in a union");
    const MeasureValue vb = checked_base_volume(fam.base, tol);
    std::vector<DensityStage> rows;
    std::vector<StageValue> values;
    for (std::size_t m = 1; m <= stages; ++m) {
        const Parallelepiped p = fam.stage(m);
        MeasureValue vp = volume(p, tol);
        if (!vp.is_finite() || !(vp.lower() > 0.0)) {
            // Closed form: eta^m times the base volume.
            const double f = std::pow(fam.eta, static_cast<double>(m));
            vp = MeasureValue::finite(f * vb.value, rounding::up(f * vb.err + 4 * rounding::kUnit * f * vb.value));
        }
        StageValue v;
        if (sets.empty()) {
            v.zero = true;
        } else {
            try {
                v = union_average_certified(sets, p, vp, tol);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::RepresentationOverflow && e.code() != ErrorCode::WindowCapExceeded) throw;
                v = union_average_truncated(sets, p);
            }
        }
        rows.push_back({m, vp, v.average, v.err});
        values.push_back(std::move(v));
    }
    return finish_report(std::move(rows), std::move(values), tol);
}

DensityReport density_sequence(const ProductFunction& f, const ShrinkFamily& fam, std::size_t stages, double tol) {
    if (const auto* ind = std::get_if<Indicator>(&f)) {
        const auto clipped = intersect(ind->box, Parallelepiped::unit_cube());
        std::vector<Parallelepiped> sets;
        if (clipped) sets.push_back(*clipped);
        DensityReport rep = density_sequence(sets, fam, stages, tol);
        for (auto& s : rep.stages) {
            s.average *= ind->scale;
            s.bound *= std::abs(ind->scale);
        }
        rep.limit *= ind->scale;
        rep.liminf *= ind->scale;
        rep.limsup *= ind->scale;
        if (ind->scale < 0) std::swap(rep.liminf, rep.limsup);
        return rep;
    }
    const MeasureValue vb = checked_base_volume(fam.base, tol);
    std::vector<DensityStage> rows;
    std::vector<StageValue> values;
    for (std::size_t m = 1; m <= stages; ++m) {
        const Parallelepiped p = fam.stage(m);
        const double factor = std::pow(fam.eta, static_cast<double>(m));
        const MeasureValue vp = MeasureValue::finite(factor * vb.value, factor * vb.err);
        StageValue v;
        const Bounded a = average_over(f, p, tol);
        v.average = a.value;
        v.err = a.err;
        rows.push_back({m, vp, a.value, a.err});
        values.push_back(std::move(v));
    }
    return finish_report(std::move(rows), std::move(values), tol);
}

Rational oscillating_mass(std::size_t k) {
    // sum over even n >= k of 2^-(n+1) = (4/3) 2^-(k0+1), k0 the first even n >= k.
    const std::size_t k0 = k % 2 == 0 ? k : k + 1;
    Rational m(4, 3);
    return m / Rational(boost::multiprecision::cpp_int(1) << (k0 + 1));
}

Oscillation1d oscillating_density_1d(std::size_t m_max) {
    if (m_max == 0) throw Error(ErrorCode::InvalidArgument, "m_max must be at least 1");
    Oscillation1d out;
    out.integral_unit = oscillating_mass(0);
    out.normalized_symmetric = out.integral_unit / 2;
    for (std::size_t k = 1; k <= m_max; ++k) {
        Oscillation1dRow row;
        row.k = k;
        row.half_width = Rational(1) / Rational(boost::multiprecision::cpp_int(1) << k);
        // f vanishes on [-2^-k, 0], so only the right half carries mass.
        row.average = oscillating_mass(k) / (2 * row.half_width);
        out.rows.push_back(std::move(row));
    }
    out.liminf = out.rows.front().average;
    out.limsup = out.rows.front().average;
    for (const auto& r : out.rows) {
        out.liminf = std::min(out.liminf, r.average);
        out.limsup = std::max(out.limsup, r.average);
    }
    out.oscillating = out.liminf != out.limsup;
    return out;
}

double interval_overlap(double l, double offset) {
    return std::max(0.0, std::min(l / 2, offset + 0.5) - std::max(-l / 2, offset - 0.5));
}

double overlap_bound(double l, double offset) {
    if (!(l >= 7.0 / 8.0 && l <= 9.0 / 8.0))
        throw Error(ErrorCode::PreconditionViolated, "side length must lie in [7/8, 9/8]");
    if (!(offset >= l / 4)) throw Error(ErrorCode::PreconditionViolated, "offset must be at least l/4");
    return interval_overlap(l, offset);
}

DensityReport non_density_check(const std::vector<Parallelepiped>& support_cover, const TailedSequence& x,
                                double tol, std::size_t depth) {
    DensityReport rep;
    rep.verdict = DensityReport::Verdict::ZeroCertificate;
    const auto needed = static_cast<std::size_t>(std::ceil(std::log(kZeroThreshold) / std::log(kOverlapCap)));
    for (std::size_t j = 0; j < support_cover.size(); ++j) {
        const CoreSpec spec = make_core_spec(support_cover[j], 0.5, tol);
        const CoreMembership m = in_core(x, spec, depth);
        if (m.answer == Tri::Yes)
            throw Error(ErrorCode::PreconditionViolated,
                        "in_core=Yes for cover element " + std::to_string(j) + " (from D=" + std::to_string(m.from) +
                            ")",
                        j);
        if (m.answer == Tri::Unknown)
            throw Error(ErrorCode::CoreMembershipUnknown, "cover element " + std::to_string(j) + ": " + m.reason, j);

        // Beyond N every side lies in (7/8, 9/8).
        const std::size_t N = tail_deviation_index(support_cover[j], 1.0 / 8.0, tol);
        const auto coords = negative_indices(core_slack(x, spec), N - 1, needed);
        if (coords.size() < needed)
            throw Error(ErrorCode::CoreMembershipUnknown,
                        "cover element " + std::to_string(j) + ": too few violating coordinates found", j);
        const TailedSequence c = support_cover[j].centre();
        ZeroWitness w;
        w.set_index = j;
        w.bound = 1.0;
        for (std::size_t i : coords) {
            const double l = support_cover[j].lengths()(i);
            const double off = std::abs(x(i) - c(i));
            w.coordinates.push_back(i);
            w.observed.push_back(overlap_bound(l, off));
            w.factors.push_back(kOverlapCap);
            w.bound = rounding::up(w.bound * kOverlapCap);
            if (w.bound < kZeroThreshold) break;
        }
        rep.witnesses.push_back(std::move(w));
    }
    return rep;
}

LebesgueCertificate lebesgue_point_at_continuity(const ProductFunction& f, const TailedSequence& x, double eps) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    const auto make = [&](double side, double dev, std::string note) {
        Parallelepiped v = Parallelepiped::cube(x, side);
        MeasureValue vol = volume(v);
        return LebesgueCertificate{std::move(v), side, dev, vol, std::move(note)};
    };
    return std::visit(
        [&](const auto& g) -> LebesgueCertificate {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, LinearTail>) {
                const auto w = abs_tail_sum(g.weights, 0);
                if (!w) throw Error(ErrorCode::NoModulus, "weights are not certifiably summable");
                if (*w == 0.0) return make(1.0, 0.0, "constant function");
                // |f(y) - f(x)| <= sum |w_i| * side / 2 on the cube.
                const double side = 0.95 * 2 * eps / *w;
                return make(side, rounding::up(*w * side / 2), "Lipschitz bound from the weight sum");
            } else if constexpr (std::is_same_v<T, Indicator>) {
                const auto lo = range_bounds(x - g.box.lower());
                const auto hi = range_bounds(g.box.upper() - x);
                if (!lo || !hi) throw Error(ErrorCode::NoModulus, "margin to the box boundary is undecidable");
                const double margin = std::min(lo->first, hi->first);
                if (!(margin > 0.0))
                    throw Error(ErrorCode::PreconditionViolated, "x has no positive margin inside the box");
                return make(margin, 0.0, "indicator is constant on the cube");
            } else if constexpr (std::is_same_v<T, FiniteCylinder>) {
                if (const auto* p = std::get_if<FiniteCylinder::Polynomial>(&g.form)) {
                    // Lipschitz constant (l1 in the J coordinates) on the box |y_j - x_j| <= 1/2.
                    double lip = 0.0;
                    for (const auto& m : *p) {
                        for (std::size_t k = 0; k < g.indices.size(); ++k) {
                            if (m.powers[k] == 0) continue;
                            double t = std::abs(m.coef) * m.powers[k];
                            for (std::size_t j = 0; j < g.indices.size(); ++j) {
                                const double r = std::abs(x(g.indices[j])) + 0.5;
                                t *= std::pow(r, static_cast<double>(j == k ? m.powers[j] - 1 : m.powers[j]));
                            }
                            lip += t;
                        }
                    }
                    lip = rounding::up(lip, 8);
                    if (lip == 0.0) return make(1.0, 0.0, "constant function");
                    const double side = std::min(1.0, 0.95 * 2 * eps / lip);
                    return make(side, rounding::up(lip * side / 2), "polynomial Lipschitz bound");
                }
                if (const auto* t = std::get_if<FiniteCylinder::Table>(&g.form)) {
                    double margin = 0.5;
                    for (std::size_t i : g.indices) {
                        const double v = x(i) * static_cast<double>(t->cells);
                        const double frac = v - std::floor(v);
                        margin = std::min(margin, std::min(frac, 1.0 - frac) / static_cast<double>(t->cells));
                        if (!(x(i) > 0.0 && x(i) < 1.0)) margin = 0.0;
                    }
                    if (!(margin > 0.0))
                        throw Error(ErrorCode::PreconditionViolated, "x lies on a cell boundary of the table");
                    return make(margin, 0.0, "table is constant on the cube");
                }
                throw Error(ErrorCode::NoModulus, "callable cylinder carries no modulus");
            } else {
                throw Error(ErrorCode::NoModulus, "opaque function '" + g.label + "' carries no modulus");
            }
        },
        f);
}

} // namespace measinf
