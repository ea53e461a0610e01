#pragma once

// Independent oracles shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "measinf/density.hpp"
#include "measinf/jessen.hpp"
#include "measinf/rgg.hpp"

namespace oracle {

using namespace measinf;

// Every k-subset, induced adjacency straight from distances, isomorphism by
// trying all vertex permutations.
inline std::uint64_t brute_count(const Eigen::MatrixXd& pts, double r, const rgg::Motif& m, const rgg::Box& A) {
    const std::size_t n = pts.rows(), k = m.k;
    std::uint64_t total = 0;
    std::vector<std::size_t> sel(k);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
        if (depth == k) {
            std::vector<std::size_t> perm(k);
            std::iota(perm.begin(), perm.end(), 0);
            bool iso = false;
            do {
                bool ok = true;
                for (std::size_t a = 0; a < k && ok; ++a)
                    for (std::size_t b = a + 1; b < k && ok; ++b) {
                        const bool e = (pts.row(sel[perm[a]]) - pts.row(sel[perm[b]])).norm() < r;
                        ok = e == m.has_edge(a, b);
                    }
                iso = ok;
            } while (!iso && std::next_permutation(perm.begin(), perm.end()));
            if (!iso) return;
            std::size_t lmp = sel[0];
            for (std::size_t v : sel) {
                const auto x = pts.row(v), y = pts.row(lmp);
                if (std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end())) lmp = v;
            }
            if (A.contains(pts.row(lmp).transpose())) ++total;
            return;
        }
        for (std::size_t v = start; v < n; ++v) {
            sel[depth] = v;
            rec(v + 1, depth + 1);
        }
    };
    rec(0, 0);
    return total;
}

// Dyadic parameters keep every closed-form step exact in binary floating point.
inline double dyadic(std::mt19937_64& g, int lo, int hi) {
    return std::ldexp(static_cast<double>(lo + static_cast<int>(g() % static_cast<unsigned>(hi - lo + 1))), -8);
}

inline ProductFunction random_closed(std::mt19937_64& g, int kind, bool exact) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto r = [&](int lo, int hi) { return exact ? dyadic(g, lo, hi) : std::ldexp(lo + (hi - lo) * u(g), -8); };
    switch (kind % 4) {
    case 0:
        return make_linear_tail(TailedSequence({r(-128, 128), r(0, 256)}, make_geometric_drift(r(1, 256), 0.5, 0.0)),
                                r(0, 256));
    case 1: {
        const double a = r(0, 64), b = r(192, 256);
        return Indicator{Parallelepiped(TailedSequence({a, 0.125, a}, Constant{0.0}),
                                        TailedSequence({b, 0.875, b}, Constant{1.0})),
                         1.0 + r(0, 256)};
    }
    case 2:
        return make_polynomial({1, 3, 6}, {{r(0, 256), {1, 3, 0}}, {r(0, 256), {0, 1, 3}}, {r(-128, 128), {3, 0, 1}}});
    default: {
        const std::size_t cells = exact ? 4 : 3;
        std::vector<double> values(cells * cells * cells);
        for (auto& v : values) v = r(0, 256);
        return make_table({2, 4, 5}, cells, values);
    }
    }
}

inline TailedSequence random_point(std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> pre(10);
    for (auto& p : pre) p = u(g);
    return TailedSequence(pre, Constant{u(g)});
}

// Mass of the oscillating density over [0, 2^-k] on a dyadic grid of
// resolution 2^-res: a cell (j 2^-res, (j+1) 2^-res] lies in (2^-(n+1), 2^-n]
// for a single n.
inline Rational brute_mass(std::size_t k, std::size_t res) {
    std::uint64_t hits = 0;
    const std::size_t cells = std::size_t{1} << (res - k);
    for (std::size_t j = 0; j < cells; ++j) {
        const std::size_t hi = j + 1;
        std::size_t n = 0;
        while ((hi << (n + 1)) <= (std::size_t{1} << res)) ++n;
        if (n % 2 == 0) ++hits;
    }
    return Rational(boost::multiprecision::cpp_int(hits)) / Rational(boost::multiprecision::cpp_int(1) << res);
}

} // namespace oracle
