// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "measinf/density.hpp"
#include "measinf/dieudonne.hpp"
#include "measinf/jessen.hpp"
#include "measinf/parallelepiped.hpp"
#include "measinf/rgg.hpp"
#include "measinf/sequences.hpp"
#include "oracles.hpp"

using namespace measinf;

namespace {

// Collects failed checks without stopping, so each line lists every reason.
struct Verdict {
    std::vector<std::string> failures;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Verdict&)> body;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Parallelepiped with_lengths(const TailedSequence& l) {
    return Parallelepiped::from_lengths(TailedSequence::constant(0.0), l);
}

void volume_axioms(Verdict& v) {
    auto unit = volume(Parallelepiped::unit_cube());
    v.check(unit.is_finite() && unit.value == 1.0 && unit.err == 0.0, "unit cube is not Finite(1, 0)");
    auto half = volume(with_lengths(TailedSequence({0.5}, Constant{1.0})));
    v.check(half.is_finite() && half.value == 0.5, "half cube is not 0.5");
    v.check(volume(with_lengths(TailedSequence({}, make_periodic({0.5, 2.0})))).is_undefined(),
            "periodic [0.5, 2] is not Undefined");
    v.check(volume(with_lengths(TailedSequence::constant(2.0))).is_infinite(), "Constant(2) is not Infinite");
}

void geometric_product(Verdict& v) {
    // Partial product over i <= 64; the tail factor is within exp(2^-64) of 1.
    long double p = 1.0L;
    for (int i = 1; i <= 64; ++i) p *= 1.0L + std::ldexp(1.0L, -i);
    const double oracle = static_cast<double>(p);
    auto r = infinite_product(TailedSequence({}, make_geometric_drift(1.0, 0.5)));
    v.check(r.is_finite(), "not Finite");
    v.check(std::abs(r.value - oracle) <= 1e-9, "off the oracle by more than 1e-9");
    v.check(std::abs(oracle - 2.384231029) <= 1e-9, "oracle disagrees with 2.384231029");
    v.note("value " + fmt("%.12f", r.value) + " err " + fmt("%.1e", r.err));
}

void translation_invariance(Verdict& v) {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(0.2, 1.8), sh(-4.0, 4.0);
    int finite = 0;
    for (int t = 0; t < 200; ++t) {
        auto lengths = TailedSequence({u(g), u(g)}, make_geometric_drift(u(g) - 1.0, 0.5));
        auto box = Parallelepiped::from_lengths(TailedSequence({}, make_geometric_drift(sh(g), 0.5, 0.0)), lengths);
        auto x = TailedSequence({sh(g)}, make_geometric_drift(sh(g), 0.5, sh(g)));
        auto a = volume(box), b = volume(translate(box, x));
        v.check(a.kind == b.kind, "classification changed in pair " + std::to_string(t));
        if (a.is_finite() && b.is_finite()) {
            ++finite;
            v.check(std::abs(a.value - b.value) <= a.err + b.err, "values differ in pair " + std::to_string(t));
        }
    }
    v.note(std::to_string(finite) + "/200 finite");
}

void side_lengths(Verdict& v) {
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> amp(-0.9, 3.0), pre(0.1, 4.0);
    std::uniform_int_distribution<int> kind(0, 2);
    const double eps = 1e-3, tol = 1e-6;
    for (int t = 0; t < 50; ++t) {
        TailedSequence l = [&] {
            switch (kind(g)) {
            case 0: return TailedSequence({pre(g), pre(g)}, make_geometric_drift(amp(g), 0.5));
            case 1: return TailedSequence({pre(g)}, make_power_drift(amp(g), 3.0 + pre(g)));
            default: return TailedSequence({pre(g), pre(g), pre(g)}, Constant{1.0});
            }
        }();
        auto box = with_lengths(l);
        const auto vol = volume(box, tol);
        if (!vol.is_finite() || vol.value <= 0.0) {
            v.check(false, "instance " + std::to_string(t) + " is not finite-positive");
            continue;
        }
        const std::size_t N = tail_deviation_index(box, eps, tol);
        for (std::size_t i = N; i <= N + 10000; ++i)
            if (!(std::abs(box.lengths()(i) - 1.0) < eps)) {
                v.check(false, "instance " + std::to_string(t) + " breaks at i = " + std::to_string(i));
                break;
            }
    }
}

void boundary_cover_sum(Verdict& v) {
    for (double eps : {0.5, 0.25, 1.0}) {
        for (int J : {1, 2, 8, 20, 40}) {
            auto slabs = boundary_cover(eps, J);
            double total = 0.0;
            for (const auto& p : slabs) total += volume(p).value;
            long double oracle = 0.0L;
            for (int j = 1; j <= J; ++j) oracle += 2.0L * std::ldexp(1.0L, -j - 1) * eps;
            v.check(total == eps * (1.0 - std::ldexp(1.0, -J)), "sum is not eps(1 - 2^-J) at J = " + std::to_string(J));
            v.check(total == static_cast<double>(oracle), "sum disagrees with the slab-by-slab oracle");
            auto est = cover_upper_bound(unit_cube_faces(J), {slabs});
            v.check(est.best_bound == total, "cover_upper_bound does not report the sum");
        }
    }
}

void core_nullity(Verdict& v) {
    // Unit cube: truncated core volume is exactly (1/2)^(d-D).
    auto cube = make_core_spec(Parallelepiped::unit_cube(), 0.5);
    const std::size_t D = 5;
    std::size_t extra = 1;
    while (extra <= 60 && core_truncated_volume(cube, D, D + extra) >= kZeroThreshold) ++extra;
    v.check(extra <= 60, "unit cube needs more than 60 extra coordinates");
    v.check(core_truncated_volume(cube, D, D + extra) == std::ldexp(1.0, -static_cast<int>(extra)),
            "unit cube volume is not a power of 1/2");
    v.note("cube " + std::to_string(extra) + " extra");

    // Sides 1 + 2^-i: oracle (1/2)^(d-D) prod_{i<=d} (1 + 2^-i).
    auto drift = make_core_spec(with_lengths(TailedSequence({}, make_geometric_drift(1.0, 0.5))), 0.5);
    std::size_t e2 = 1;
    while (e2 <= 60 && core_truncated_volume(drift, D, D + e2) >= kZeroThreshold) ++e2;
    v.check(e2 <= 60, "drifting base needs more than 60 extra coordinates");
    long double oracle = std::ldexp(1.0L, -static_cast<int>(e2));
    for (std::size_t i = 1; i <= D + e2; ++i) oracle *= 1.0L + std::ldexp(1.0L, -static_cast<int>(i));
    const double got = core_truncated_volume(drift, D, D + e2);
    v.check(std::abs(got - static_cast<double>(oracle)) <= 1e-12 * static_cast<double>(oracle),
            "drifting base disagrees with the power oracle");
    v.note("drift " + std::to_string(e2) + " extra");
}

void non_density(Verdict& v) {
    v.check(overlap_bound(9.0 / 8.0, 9.0 / 32.0) == 25.0 / 32.0, "overlap factor is not exactly 25/32");
    auto rep = non_density_check({Parallelepiped::cube(TailedSequence::constant(0.0), 1.0)},
                                 TailedSequence::constant(0.4));
    v.check(rep.verdict == DensityReport::Verdict::ZeroCertificate, "no ZeroCertificate");
    if (rep.witnesses.size() != 1) {
        v.check(false, "expected one witness");
        return;
    }
    const auto& w = rep.witnesses[0];
    v.check(w.bound < 1e-10, "bound not below 1e-10");
    v.check(w.coordinates.size() <= 95, "more than 95 factors");
    for (double f : w.factors) v.check(f <= 25.0 / 32.0, "a factor exceeds 25/32");
    // (25/32)^m oracle for the certified bound.
    const double pw = std::pow(25.0 / 32.0, static_cast<double>(w.coordinates.size()));
    v.check(w.bound <= pw * (1 + 1e-12), "bound exceeds (25/32)^m");
    v.note(std::to_string(w.coordinates.size()) + " factors, bound " + fmt("%.3e", w.bound));
}

void oscillation(Verdict& v) {
    auto osc = oscillating_density_1d(12);
    v.check(osc.integral_unit == Rational(2, 3), "integral over [0,1] is not 2/3");
    v.check(osc.normalized_symmetric == Rational(1, 3), "normalised integral is not 1/3");
    const std::size_t res = 2 * 12 + 4;
    for (const auto& r : osc.rows) {
        v.check(r.average == (r.k % 2 == 0 ? Rational(1, 3) : Rational(1, 6)),
                "average at k = " + std::to_string(r.k) + " does not alternate");
        Rational diff = oscillating_mass(r.k) - oracle::brute_mass(r.k, res);
        if (diff < 0) diff = -diff;
        v.check(diff <= Rational(1) / Rational(boost::multiprecision::cpp_int(1) << res),
                "mass disagrees with the dyadic oracle at k = " + std::to_string(r.k));
    }
    v.check(osc.oscillating && osc.liminf == Rational(1, 6) && osc.limsup == Rational(1, 3),
            "verdict is not Oscillating(1/6, 1/3)");
}

void jessen_suite(Verdict& v) {
    std::mt19937_64 g(2024);
    for (int t = 0; t < 100; ++t) {
        auto f = oracle::random_closed(g, t, true);
        const std::size_t d1 = 1 + g() % 4, d2 = d1 + g() % 5;
        auto twice = tail_integrate(tail_integrate(f, d2).function, d1).function;
        auto once = tail_integrate(f, d1).function;
        for (int k = 0; k < 5; ++k) {
            auto x = oracle::random_point(g);
            if (evaluate(twice, x) != evaluate(once, x)) {
                v.check(false, "tower property inexact on instance " + std::to_string(t));
                break;
            }
        }
    }
    double worst = 0.0;
    std::mt19937_64 gf(5);
    for (int t = 0; t < 40; ++t) worst = std::max(worst, fubini_check(oracle::random_closed(gf, t, t % 2 == 0), 1 + t % 7).difference);
    v.check(worst <= 1e-12, "fubini difference above 1e-12");

    const TailedSequence w({}, make_geometric_drift(1.0, 0.5, 0.0));
    std::vector<std::size_t> dims;
    for (std::size_t d = 1; d <= 20; ++d) dims.push_back(d);
    for (const auto& r : jessen_convergence(make_linear_tail(w), TailedSequence::constant(1.0), dims))
        v.check(r.gap == std::ldexp(1.0, -static_cast<int>(r.d) - 1), "gap is not 2^-(d+1) at d = " + std::to_string(r.d));

    std::mt19937_64 gm(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int covered = 0;
    for (int t = 0; t < 20; ++t) {
        auto f = oracle::random_closed(gm, t, false);
        const std::size_t d = 1 + gm() % 5;
        std::vector<double> x(d);
        for (auto& c : x) c = u(gm);
        const double exact = evaluate(tail_integrate(f, d).function, TailedSequence(x, Constant{0.5}));
        covered += mc_tail_integrate(f, x, d, 100000, 100 + static_cast<std::uint64_t>(t), 64).contains(exact) ? 1 : 0;
    }
    v.check(covered >= 18, "MC coverage below 18/20");
    v.note("fubini " + fmt("%.1e", worst) + ", MC " + std::to_string(covered) + "/20");
}

void slowly_oscillating(Verdict& v) {
    auto pass = slowly_oscillating_test(make_polynomial({1, 2}, {{1.0, {1, 1}}}), 0.01, 3, 500, 1);
    v.check(pass.verdict == OscillationReport::Verdict::PassAt, "cylinder does not pass");
    v.check(pass.sampled_sup == 0.0, "cylinder sup is not 0");
    const ProductFunction ls{limsup_function()};
    auto fail = slowly_oscillating_test(ls, 0.01, 10, 200, 1);
    v.check(fail.verdict == OscillationReport::Verdict::FailWitness, "limsup function does not fail");
    if (!fail.witness) {
        v.check(false, "no witness pair");
        return;
    }
    const auto& [x, y] = *fail.witness;
    for (std::size_t i = 1; i <= 10; ++i) v.check(x(i) == y(i), "witness differs inside the first d coordinates");
    const double gap = std::abs(evaluate(ls, x) - evaluate(ls, y));
    v.check(gap >= 0.99, "witness gap below 0.99");
    v.note("witness gap " + fmt("%.3f", gap));
}

void dieudonne_campaign(Verdict& v) {
    dieudonne::Config cfg; // c = 0.01, s = 1
    auto rep = dieudonne::verify_campaign(cfg, 3);
    v.check(rep.sequence.passed(), "sequence conditions fail");
    v.note("sum bound " + fmt("%.6f", rep.sequence.sum_bound));
    std::size_t rows = 0;
    for (const auto& st : rep.stages) rows += st.rows.size();
    v.note(std::to_string(rep.stages.size()) + " stage(s), " + std::to_string(rows) + " rows, " +
           std::to_string(rep.ledger_failures()) + " ledger failures");
    if (rep.failure) v.check(false, rep.failure_message);
    v.check(rep.stages.size() == 3, "fewer than 3 stages completed");
    for (const auto& st : rep.stages) {
        v.check(st.stop_rule_ok && st.target_ok && st.carry_ok, "stage " + std::to_string(st.n) + " inequality fails");
        for (const auto& r : st.rows)
            if (r.checks != dieudonne::kAllRowChecks) {
                v.check(false, "row check fails in stage " + std::to_string(st.n));
                break;
            }
    }
    v.check(rep.total_mu_a < dieudonne::kSumCap, "sum of mu(A) not below 1/8");
    v.check(rep.passed(), "campaign not passed");
}

void rgg_proposition(Verdict& v) {
    using namespace measinf::rgg;
    const Box A = Box::cube(2, 0.25, 0.75);
    const Schedule sched{Schedule::Kind::Thermodynamic, 1.0};
    auto tab = asymptotic_check(motif_preset("k2"), A, Density::unit_cube(2), sched, {20000}, 20, 1, 4);
    const double mu = M_PI / 8;
    const double scaled = tab.rows.at(0).scaled;
    v.check(std::abs(scaled - mu) <= 0.05 * mu, "scaled mean not within 5% of pi/8");
    v.note("scaled " + fmt("%.6f", scaled) + " vs " + fmt("%.6f", mu));

    const std::vector<std::string> motifs{"k2", "path3", "triangle", "star4", "path4", "complete4", "star5"};
    std::size_t cases = 0;
    for (std::size_t n = 2; n <= 12; ++n)
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            auto cloud = sample_points(Density::unit_cube(2), n, 2, seed);
            for (double r : {0.2, 0.45, 0.8}) {
                auto g = build_graph(cloud, r);
                for (const auto& name : motifs) {
                    const Motif m = motif_preset(name);
                    if (m.k > n) continue;
                    ++cases;
                    if (count_induced_motifs(g, cloud, m, A) != oracle::brute_count(cloud.points, r, m, A)) {
                        v.check(false, name + " count differs at n = " + std::to_string(n));
                    }
                }
            }
        }
    v.note(std::to_string(cases) + " exhaustive cases");
}

void greedy_and_feasibility(Verdict& v) {
    using namespace measinf::rgg;
    const Eigen::Vector2d q(0.3, 0.7);
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto c = sample_points(Density::unit_cube(2), 200, 2, seed);
        auto g = build_graph(c, 0.12);
        auto w = greedy_walk(g, c, seed % 200, q);
        for (std::size_t i = 1; i < w.distances.size(); ++i)
            if (!(w.distances[i] < w.distances[i - 1])) {
                v.check(false, "walk " + std::to_string(seed) + " does not strictly decrease");
                break;
            }
    }

    std::ifstream in(MEASINF_FIXTURES "/greedy_local_minimum.txt");
    std::stringstream ss;
    ss << in.rdbuf();
    auto cloud = from_points(parse_points(ss.str()));
    auto w = greedy_walk(build_graph(cloud, 1.0), cloud, 0, Eigen::Vector2d(0, 0));
    v.check(!w.success && w.terminal == 1 && w.nearest == 2, "fixture does not stall at vertex 1");

    auto s5 = feasibility_search(motif_preset("star5"), 2, 1000000, 1);
    v.check(s5.found && realizes(motif_preset("star5"), s5.points), "S5 not found");
    Eigen::MatrixXd eq(3, 2);
    eq << 0, 0, 0.9, 0, 0.45, 0.9 * std::sqrt(3.0) / 2;
    v.check(realizes(motif_preset("triangle"), eq), "K3 witness rejected");
    auto s7 = feasibility_search(motif_preset("star7"), 2, 1000000, 1);
    v.check(!s7.found, "S7 unexpectedly found");
    v.check(s7.note.find("not a proof") != std::string::npos, "S7 result not labelled as a non-proof");
    v.note("S5 after " + std::to_string(s5.evaluations) + " evaluations; S7 " + std::to_string(s7.evaluations));
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "volume axioms", 1, volume_axioms},
        {2, "geometric drift product", 1, geometric_product},
        {3, "translation invariance", 5, translation_invariance},
        {4, "side-lengths lemma", 5, side_lengths},
        {5, "boundary cover", 1, boundary_cover_sum},
        {6, "core nullity", 1, core_nullity},
        {7, "non-density certificate", 1, non_density},
        {8, "one-dimensional oscillation", 1, oscillation},
        {9, "tail integration suite", 30, jessen_suite},
        {10, "slowly oscillating class", 5, slowly_oscillating},
        {11, "construction campaign", 60, dieudonne_campaign},
        {12, "random geometric graph limit", 300, rgg_proposition},
        {13, "greedy walk and feasibility", 120, greedy_and_feasibility},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Verdict v;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.body(v);
        } catch (const std::exception& e) {
            v.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s) v.check(false, "over the " + fmt("%g", c.budget_s) + " s budget");
        const bool ok = v.failures.empty();
        failed += ok ? 0 : 1;
        std::printf("%s %2d %s (%.2f s)", ok ? "PASS" : "FAIL", c.id, c.name, secs);
        if (!v.detail.empty()) std::printf(" [%s]", v.detail.c_str());
        for (const auto& f : v.failures) std::printf(" | %s", f.c_str());
        std::printf("\n");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
