#include "measinf/rgg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "measinf/error.hpp"
#include "measinf/random.hpp"
#include "measinf/text.hpp"

namespace measinf::rgg {

// ---------------------------------------------------------------------------
// Densities
// ---------------------------------------------------------------------------

namespace {

// Integral of (alpha (x - base))^k over [a, b] (alpha may be negative).
double linear_pow_integral(double alpha, double base, double a, double b, int k) {
    if (b <= a) return 0.0;
    const double ka = std::pow(a - base, k + 1);
    const double kb = std::pow(b - base, k + 1);
    return std::pow(alpha, k) * (kb - ka) / (k + 1);
}

bool finite(double x) { return std::isfinite(x); }

} // namespace

double AxisDensity::pdf(double x) const {
    if (x < lo || x > hi) return 0.0;
    const double w = hi - lo;
    if (kind == Kind::Uniform) return 1.0 / w;
    if (x <= mode) return mode > lo ? 2.0 * (x - lo) / (w * (mode - lo)) : 2.0 / w;
    return hi > mode ? 2.0 * (hi - x) / (w * (hi - mode)) : 2.0 / w;
}

double AxisDensity::integral_pow(double a, double b, int k) const {
    a = std::max(a, lo);
    b = std::min(b, hi);
    if (b <= a) return 0.0;
    const double w = hi - lo;
    if (kind == Kind::Uniform) return (b - a) * std::pow(1.0 / w, k);
    double total = 0.0;
    if (mode > lo) total += linear_pow_integral(2.0 / (w * (mode - lo)), lo, a, std::min(b, mode), k);
    if (hi > mode) total += linear_pow_integral(-2.0 / (w * (hi - mode)), hi, std::max(a, mode), b, k);
    return total;
}

double AxisDensity::sample(double u) const {
    const double w = hi - lo;
    if (kind == Kind::Uniform) return lo + u * w;
    const double fm = (mode - lo) / w;
    if (u < fm) return lo + std::sqrt(u * w * (mode - lo));
    return hi - std::sqrt((1.0 - u) * w * (hi - mode));
}

Density Density::uniform_box(const std::vector<double>& lo, const std::vector<double>& hi) {
    if (lo.size() != hi.size()) throw Error(ErrorCode::UnsupportedDensity, "box bounds differ in length");
    Density f;
    for (std::size_t i = 0; i < lo.size(); ++i) f.axes.push_back({AxisDensity::Kind::Uniform, lo[i], hi[i], 0.0});
    validate(f);
    return f;
}

Density Density::unit_cube(std::size_t d) {
    return uniform_box(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
}

double Density::pdf(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    double v = 1.0;
    for (std::size_t i = 0; i < axes.size(); ++i) v *= axes[i].pdf(x[static_cast<Eigen::Index>(i)]);
    return v;
}

bool Density::in_support(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const double xi = x[static_cast<Eigen::Index>(i)];
        if (xi < axes[i].lo || xi > axes[i].hi) return false;
    }
    return true;
}

void validate(const Density& f) {
    if (f.axes.empty()) throw Error(ErrorCode::UnsupportedDensity, "density needs at least one axis");
    for (std::size_t i = 0; i < f.axes.size(); ++i) {
        const auto& a = f.axes[i];
        if (!finite(a.lo) || !finite(a.hi) || !(a.lo < a.hi))
            throw Error(ErrorCode::UnsupportedDensity, "axis support must be a finite interval with lo < hi", i);
        if (a.kind == AxisDensity::Kind::Triangular && !(a.mode >= a.lo && a.mode <= a.hi))
            throw Error(ErrorCode::UnsupportedDensity, "triangular mode outside its support", i);
    }
}

Box Box::cube(std::size_t d, double lo, double hi) {
    const auto dd = static_cast<Eigen::Index>(d);
    return {Eigen::VectorXd::Constant(dd, lo), Eigen::VectorXd::Constant(dd, hi)};
}

bool Box::empty() const { return (lo.array() > hi.array()).any(); }

bool Box::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
}

PointCloud sample_points(const Density& f, std::size_t n, std::size_t d, std::uint64_t seed, std::uint64_t stream) {
    validate(f);
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "need at least one point");
    if (d == 0 || d != f.dim()) throw Error(ErrorCode::UnsupportedDensity, "density dimension does not match d");
    PointCloud c;
    c.d = d;
    c.density = f;
    c.seed = seed;
    c.stream = stream;
    c.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    auto g = random::stream_engine(seed, stream);
    for (Eigen::Index i = 0; i < c.points.rows(); ++i)
        for (Eigen::Index j = 0; j < c.points.cols(); ++j)
            c.points(i, j) = f.axes[static_cast<std::size_t>(j)].sample(random::uniform01(g));
    return c;
}

PointCloud from_points(Eigen::MatrixXd points) {
    if (points.rows() == 0 || points.cols() == 0) throw Error(ErrorCode::InvalidArgument, "empty point list");
    PointCloud c;
    c.d = static_cast<std::size_t>(points.cols());
    c.points = std::move(points);
    return c;
}

Eigen::MatrixXd parse_points(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) {
            try {
                row.push_back(text::parse_number(tok));
            } catch (const Error&) {
                throw Error(ErrorCode::ParseError, "bad coordinate '" + tok + "'", line_no, line.find(tok) + 1);
            }
        }
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size())
            throw Error(ErrorCode::ParseError, "points differ in dimension", line_no, 1);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::ParseError, "no points", line_no + 1, 1);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

std::string format_points(const Eigen::MatrixXd& pts) {
    std::string out;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        for (Eigen::Index j = 0; j < pts.cols(); ++j) {
            if (j) out += ' ';
            out += text::format_number(pts(i, j));
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Graphs
// ---------------------------------------------------------------------------

std::size_t Graph::edge_count() const {
    std::size_t s = 0;
    for (const auto& a : adj) s += a.size();
    return s / 2;
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
    const auto& a = adj[i];
    return std::binary_search(a.begin(), a.end(), static_cast<std::uint32_t>(j));
}

namespace {

using Cell = std::vector<std::int64_t>;

struct CellHash {
    std::size_t operator()(const Cell& c) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto v : c) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
        return h;
    }
};

void require_radius(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "radius must be finite and positive");
}

} // namespace

Graph build_graph(const PointCloud& cloud, double r) {
    require_radius(r);
    const auto& P = cloud.points;
    const Eigen::Index n = P.rows(), d = P.cols();
    const double r2 = r * r;
    Graph g;
    g.adj.resize(static_cast<std::size_t>(n));
    if (n == 0) return g;
    const Eigen::RowVectorXd origin = P.colwise().minCoeff();

    std::unordered_map<Cell, std::vector<std::uint32_t>, CellHash> grid;
    std::vector<Cell> cell_of(static_cast<std::size_t>(n), Cell(static_cast<std::size_t>(d)));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j)
            cell_of[i][j] = static_cast<std::int64_t>(std::floor((P(i, j) - origin[j]) / r));
        grid[cell_of[i]].push_back(static_cast<std::uint32_t>(i));
    }

    // Offsets in {-1,0,1}^d.
    std::vector<Cell> offsets;
    const std::size_t n_off = static_cast<std::size_t>(std::pow(3.0, static_cast<double>(d)));
    for (std::size_t code = 0; code < n_off; ++code) {
        Cell off(static_cast<std::size_t>(d));
        std::size_t c = code;
        for (auto& o : off) {
            o = static_cast<std::int64_t>(c % 3) - 1;
            c /= 3;
        }
        offsets.push_back(std::move(off));
    }

    Cell probe(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < n; ++i) {
        auto& out = g.adj[static_cast<std::size_t>(i)];
        for (const auto& off : offsets) {
            for (Eigen::Index j = 0; j < d; ++j) probe[j] = cell_of[i][j] + off[j];
            auto it = grid.find(probe);
            if (it == grid.end()) continue;
            for (std::uint32_t k : it->second) {
                if (static_cast<Eigen::Index>(k) == i) continue;
                if ((P.row(i) - P.row(k)).squaredNorm() < r2) out.push_back(k);
            }
        }
        std::sort(out.begin(), out.end());
    }
    return g;
}

Graph build_graph_naive(const PointCloud& cloud, double r) {
    require_radius(r);
    const auto& P = cloud.points;
    Graph g;
    g.adj.resize(static_cast<std::size_t>(P.rows()));
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        for (Eigen::Index j = 0; j < P.rows(); ++j)
            if (i != j && (P.row(i) - P.row(j)).norm() < r) g.adj[i].push_back(static_cast<std::uint32_t>(j));
    return g;
}

// ---------------------------------------------------------------------------
// Motifs
// ---------------------------------------------------------------------------

bool Motif::has_edge(std::size_t i, std::size_t j) const {
    for (const auto& [a, b] : edges)
        if ((a == i && b == j) || (a == j && b == i)) return true;
    return false;
}

Motif make_motif(std::size_t k, std::vector<std::pair<std::size_t, std::size_t>> edges, std::string name) {
    if (k < 2) throw Error(ErrorCode::InvalidArgument, "motif needs at least 2 vertices");
    Motif m;
    m.k = k;
    m.name = std::move(name);
    for (auto [a, b] : edges) {
        if (a >= k || b >= k || a == b) throw Error(ErrorCode::InvalidArgument, "bad motif edge");
        if (a > b) std::swap(a, b);
        if (!m.has_edge(a, b)) m.edges.emplace_back(a, b);
    }
    // Connectivity by flood fill from 0.
    std::vector<bool> seen(k, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        for (const auto& [a, b] : m.edges) {
            const std::size_t w = a == v ? b : (b == v ? a : k);
            if (w < k && !seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw Error(ErrorCode::InvalidArgument, "motif must be connected");
    return m;
}

Motif motif_preset(const std::string& name) {
    auto number_after = [&](const std::string& prefix) -> std::optional<std::size_t> {
        if (name.rfind(prefix, 0) != 0) return std::nullopt;
        std::string rest = name.substr(prefix.size());
        if (rest.size() >= 2 && rest.front() == '{' && rest.back() == '}') rest = rest.substr(1, rest.size() - 2);
        if (rest.empty() || !std::all_of(rest.begin(), rest.end(), [](char c) { return c >= '0' && c <= '9'; }))
            return std::nullopt;
        return static_cast<std::size_t>(std::stoul(rest));
    };
    std::vector<std::pair<std::size_t, std::size_t>> e;
    if (name == "k2") return make_motif(2, {{0, 1}}, name);
    if (name == "triangle") return make_motif(3, {{0, 1}, {1, 2}, {0, 2}}, name);
    if (name == "path3") return make_motif(3, {{0, 1}, {1, 2}}, name);
    if (auto k = number_after("star")) {
        for (std::size_t i = 1; i < *k; ++i) e.emplace_back(0, i);
        return make_motif(*k, e, name);
    }
    if (auto k = number_after("path")) {
        for (std::size_t i = 1; i < *k; ++i) e.emplace_back(i - 1, i);
        return make_motif(*k, e, name);
    }
    if (auto k = number_after("complete")) {
        for (std::size_t i = 0; i < *k; ++i)
            for (std::size_t j = i + 1; j < *k; ++j) e.emplace_back(i, j);
        return make_motif(*k, e, name);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown motif preset '" + name + "'");
}

namespace {

inline std::size_t pair_bit(std::size_t a, std::size_t b, std::size_t k) { return a * k - a * (a + 1) / 2 + (b - a - 1); }

bool lex_less(const Eigen::MatrixXd& P, Eigen::Index i, Eigen::Index j) {
    for (Eigen::Index c = 0; c < P.cols(); ++c) {
        if (P(i, c) < P(j, c)) return true;
        if (P(i, c) > P(j, c)) return false;
    }
    return i < j;
}

} // namespace

std::uint32_t induced_mask(const Graph& g, const std::vector<std::uint32_t>& vs) {
    const std::size_t k = vs.size();
    std::uint32_t m = 0;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b)
            if (g.has_edge(vs[a], vs[b])) m |= std::uint32_t{1} << pair_bit(a, b, k);
    return m;
}

std::vector<std::uint32_t> isomorphic_masks(const Motif& motif) {
    if (motif.k > kMaxMotif) throw Error(ErrorCode::MotifTooLarge, "motifs are limited to 8 vertices");
    std::vector<std::size_t> perm(motif.k);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::uint32_t> masks;
    do {
        std::uint32_t m = 0;
        for (auto [a, b] : motif.edges) {
            std::size_t x = perm[a], y = perm[b];
            if (x > y) std::swap(x, y);
            m |= std::uint32_t{1} << pair_bit(x, y, motif.k);
        }
        masks.push_back(m);
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::sort(masks.begin(), masks.end());
    masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
    return masks;
}

bool realizes(const Motif& motif, const Eigen::MatrixXd& pts) {
    if (static_cast<std::size_t>(pts.rows()) != motif.k) return false;
    for (std::size_t a = 0; a < motif.k; ++a)
        for (std::size_t b = a + 1; b < motif.k; ++b) {
            const double dist = (pts.row(static_cast<Eigen::Index>(a)) - pts.row(static_cast<Eigen::Index>(b))).norm();
            if (motif.has_edge(a, b) != (dist < 1.0)) return false;
        }
    return true;
}

namespace {

// ESU enumeration of connected induced k-subsets, each exactly once.
class Enumerator {
public:
    Enumerator(const Graph& g, std::size_t k) : g_(g), k_(k) {}

    template <class F>
    void run(F&& visit) {
        for (std::uint32_t v = 0; v < g_.n(); ++v) {
            sub_.assign(1, v);
            std::vector<std::uint32_t> ext;
            for (std::uint32_t u : g_.adj[v])
                if (u > v) ext.push_back(u);
            extend(ext, v, visit);
        }
    }

private:
    template <class F>
    void extend(std::vector<std::uint32_t> ext, std::uint32_t v, F& visit) {
        if (sub_.size() == k_) {
            sorted_ = sub_;
            std::sort(sorted_.begin(), sorted_.end());
            visit(sorted_);
            return;
        }
        while (!ext.empty()) {
            const std::uint32_t w = ext.back();
            ext.pop_back();
            std::vector<std::uint32_t> next = ext;
            for (std::uint32_t u : g_.adj[w]) {
                if (u <= v) continue;
                bool exclusive = true;
                for (std::uint32_t s : sub_)
                    if (s == u || g_.has_edge(s, u)) {
                        exclusive = false;
                        break;
                    }
                if (exclusive && std::find(next.begin(), next.end(), u) == next.end()) next.push_back(u);
            }
            sub_.push_back(w);
            extend(std::move(next), v, visit);
            sub_.pop_back();
        }
    }

    const Graph& g_;
    std::size_t k_;
    std::vector<std::uint32_t> sub_;
    std::vector<std::uint32_t> sorted_;
};

} // namespace

std::uint64_t count_induced_motifs(const Graph& g, const PointCloud& cloud, const Motif& motif, const Box& A) {
    if (motif.k > kMaxMotif) throw Error(ErrorCode::MotifTooLarge, "motifs are limited to 8 vertices");
    if (static_cast<std::size_t>(cloud.points.rows()) != g.n())
        throw Error(ErrorCode::InvalidArgument, "graph and cloud differ in size");
    if (A.lo.size() != cloud.points.cols() || A.hi.size() != cloud.points.cols())
        throw Error(ErrorCode::InvalidArgument, "box dimension does not match the cloud");
    if (A.empty()) return 0;
    const auto masks = isomorphic_masks(motif);
    const auto& P = cloud.points;
    std::uint64_t count = 0;
    Enumerator(g, motif.k).run([&](const std::vector<std::uint32_t>& vs) {
        if (!std::binary_search(masks.begin(), masks.end(), induced_mask(g, vs))) return;
        Eigen::Index lmp = vs[0];
        for (std::size_t i = 1; i < vs.size(); ++i)
            if (lex_less(P, vs[i], lmp)) lmp = vs[i];
        if (A.contains(P.row(lmp).transpose())) ++count;
    });
    return count;
}

// ---------------------------------------------------------------------------
// mu_{Gamma,A}
// ---------------------------------------------------------------------------

double integral_f_pow(const Density& f, const Box& A, int k) {
    validate(f);
    if (static_cast<std::size_t>(A.lo.size()) != f.dim() || static_cast<std::size_t>(A.hi.size()) != f.dim())
        throw Error(ErrorCode::InvalidArgument, "box dimension does not match the density");
    if (A.empty()) return 0.0;
    double v = 1.0;
    for (std::size_t i = 0; i < f.dim(); ++i)
        v *= f.axes[i].integral_pow(A.lo[static_cast<Eigen::Index>(i)], A.hi[static_cast<Eigen::Index>(i)], k);
    return v;
}

namespace {

double factorial(std::size_t k) {
    double f = 1.0;
    for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return f;
}

} // namespace

MuEstimate mu_gamma_A(const Motif& motif, const Box& A, const Density& f, const Quadrature& q) {
    if (motif.k > 4) throw Error(ErrorCode::MotifTooLarge, "mu quadrature is limited to 4 vertices");
    if (q.samples == 0) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
    MuEstimate est;
    const int k = static_cast<int>(motif.k);
    est.outer = integral_f_pow(f, A, k);
    if (est.outer == 0.0) return est;

    const std::size_t d = f.dim();
    const std::size_t dims = d * (motif.k - 1);
    const double half = static_cast<double>(motif.k - 1);
    const double volume = std::pow(2.0 * half, static_cast<double>(dims));

    const auto masks = isomorphic_masks(motif);
    std::vector<bool> table(std::size_t{1} << (motif.k * (motif.k - 1) / 2), false);
    for (auto m : masks) table[m] = true;

    const std::size_t n_blocks = (q.samples + kMcBlock - 1) / kMcBlock;
    std::vector<std::uint64_t> hits(n_blocks, 0);
    random::parallel_for(n_blocks, q.threads, [&](std::size_t b) {
        auto g = random::stream_engine(q.seed, b);
        const std::size_t m = std::min(kMcBlock, q.samples - b * kMcBlock);
        Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(motif.k), static_cast<Eigen::Index>(d));
        std::uint64_t h = 0;
        for (std::size_t s = 0; s < m; ++s) {
            for (Eigen::Index i = 1; i < pts.rows(); ++i)
                for (Eigen::Index j = 0; j < pts.cols(); ++j) pts(i, j) = half * (2.0 * random::uniform01(g) - 1.0);
            std::uint32_t mask = 0;
            for (std::size_t a = 0; a < motif.k; ++a)
                for (std::size_t c = a + 1; c < motif.k; ++c)
                    if ((pts.row(static_cast<Eigen::Index>(a)) - pts.row(static_cast<Eigen::Index>(c))).squaredNorm() <
                        1.0)
                        mask |= std::uint32_t{1} << pair_bit(a, c, motif.k);
            h += table[mask] ? 1 : 0;
        }
        hits[b] = h;
    });
    const std::uint64_t total = std::accumulate(hits.begin(), hits.end(), std::uint64_t{0});
    const double p = static_cast<double>(total) / static_cast<double>(q.samples);
    est.samples = q.samples;
    est.inner = volume * p;
    est.inner_se = volume * std::sqrt(p * (1.0 - p) / static_cast<double>(q.samples));
    const double scale = est.outer / factorial(motif.k);
    est.value = scale * est.inner;
    est.std_error = scale * est.inner_se;
    est.ci_low = est.value - kZ99 * est.std_error;
    est.ci_high = est.value + kZ99 * est.std_error;
    return est;
}

// ---------------------------------------------------------------------------
// Schedules and the asymptotic check
// ---------------------------------------------------------------------------

double Schedule::radius(std::size_t n, std::size_t d) const {
    if (n < 2 || d == 0) throw Error(ErrorCode::InvalidArgument, "schedule needs n >= 2 and d >= 1");
    if (!(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "schedule constant must be positive");
    const double nn = static_cast<double>(n), dd = static_cast<double>(d);
    switch (kind) {
    case Kind::Thermodynamic: return c * std::pow(nn, -1.0 / dd);
    case Kind::Connectivity: return c * std::pow(std::log(nn) / nn, 1.0 / dd);
    case Kind::Sparse: return c * std::pow(nn, -1.5 / dd);
    case Kind::Dense: return c * std::pow(nn, -0.5 / dd);
    }
    return 0.0;
}

const char* to_string(Schedule::Kind k) noexcept {
    switch (k) {
    case Schedule::Kind::Sparse: return "sparse";
    case Schedule::Kind::Thermodynamic: return "thermodynamic";
    case Schedule::Kind::Connectivity: return "connectivity";
    case Schedule::Kind::Dense: return "dense";
    }
    return "unknown";
}

Schedule::Kind parse_schedule_kind(const std::string& s) {
    for (auto k : {Schedule::Kind::Sparse, Schedule::Kind::Thermodynamic, Schedule::Kind::Connectivity,
                   Schedule::Kind::Dense})
        if (s == to_string(k)) return k;
    throw Error(ErrorCode::InvalidArgument, "unknown regime '" + s + "'");
}

double AsymptoticTable::trend_fraction(double mu) const {
    if (rows.size() < 2) return 1.0;
    std::size_t good = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (std::abs(rows[i].scaled - mu) <= std::abs(rows[i - 1].scaled - mu)) ++good;
    return static_cast<double>(good) / static_cast<double>(rows.size() - 1);
}

AsymptoticTable asymptotic_check(const Motif& motif, const Box& A, const Density& f, const Schedule& sched,
                                 const std::vector<std::size_t>& n_list, std::size_t seeds, std::uint64_t seed,
                                 unsigned threads) {
    if (seeds == 0) throw Error(ErrorCode::InvalidArgument, "need at least one seed");
    if (motif.k > kMaxMotif) throw Error(ErrorCode::MotifTooLarge, "motifs are limited to 8 vertices");
    validate(f);
    const std::size_t d = f.dim();
    AsymptoticTable table;
    for (std::size_t n : n_list) {
        AsymptoticRow row;
        row.n = n;
        row.r = sched.radius(n, d);
        row.counts.assign(seeds, 0);
        random::parallel_for(seeds, threads, [&](std::size_t s) {
            const std::uint64_t stream = (static_cast<std::uint64_t>(n) << 20) | s;
            const PointCloud cloud = sample_points(f, n, d, seed, stream);
            row.counts[s] = count_induced_motifs(build_graph(cloud, row.r), cloud, motif, A);
        });
        const double norm = std::pow(row.r, static_cast<double>(d * (motif.k - 1))) *
                            std::pow(static_cast<double>(n), static_cast<double>(motif.k));
        double mean = 0.0, m2 = 0.0, mean_count = 0.0;
        for (std::size_t s = 0; s < seeds; ++s) {
            const double x = static_cast<double>(row.counts[s]) / norm;
            const double delta = x - mean;
            mean += delta / static_cast<double>(s + 1);
            m2 += delta * (x - mean);
            mean_count += (static_cast<double>(row.counts[s]) - mean_count) / static_cast<double>(s + 1);
        }
        row.mean_count = mean_count;
        row.scaled = mean;
        row.std_error = seeds > 1 ? std::sqrt(m2 / static_cast<double>(seeds - 1) / static_cast<double>(seeds)) : 0.0;
        table.rows.push_back(std::move(row));
    }
    return table;
}

PairProbability pair_probability(const Density& f, const Box& A, double r, std::size_t samples, std::uint64_t seed,
                                 unsigned threads) {
    validate(f);
    require_radius(r);
    if (samples == 0) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
    const std::size_t d = f.dim();
    const std::size_t n_blocks = (samples + kMcBlock - 1) / kMcBlock;
    std::vector<std::uint64_t> hits(n_blocks, 0);
    random::parallel_for(n_blocks, threads, [&](std::size_t b) {
        auto g = random::stream_engine(seed, b);
        const std::size_t m = std::min(kMcBlock, samples - b * kMcBlock);
        Eigen::MatrixXd xy(2, static_cast<Eigen::Index>(d));
        std::uint64_t h = 0;
        for (std::size_t s = 0; s < m; ++s) {
            for (Eigen::Index i = 0; i < 2; ++i)
                for (Eigen::Index j = 0; j < xy.cols(); ++j)
                    xy(i, j) = f.axes[static_cast<std::size_t>(j)].sample(random::uniform01(g));
            if ((xy.row(0) - xy.row(1)).norm() >= r) continue;
            const Eigen::Index lmp = lex_less(xy, 0, 1) ? 0 : 1;
            if (A.contains(xy.row(lmp).transpose())) ++h;
        }
        hits[b] = h;
    });
    PairProbability out;
    out.samples = samples;
    const double total = static_cast<double>(std::accumulate(hits.begin(), hits.end(), std::uint64_t{0}));
    out.p = total / static_cast<double>(samples);
    out.std_error = std::sqrt(out.p * (1.0 - out.p) / static_cast<double>(samples));
    return out;
}

// ---------------------------------------------------------------------------
// Greedy walk
// ---------------------------------------------------------------------------

WalkResult greedy_walk(const Graph& g, const PointCloud& cloud, std::size_t start,
                       const Eigen::Ref<const Eigen::VectorXd>& query) {
    if (start >= g.n()) throw Error(ErrorCode::InvalidArgument, "start vertex not in graph");
    if (static_cast<std::size_t>(cloud.points.rows()) != g.n() || query.size() != cloud.points.cols())
        throw Error(ErrorCode::InvalidArgument, "graph, cloud and query disagree in size");
    const auto& P = cloud.points;
    auto dist = [&](std::size_t i) { return (P.row(static_cast<Eigen::Index>(i)).transpose() - query).norm(); };

    WalkResult w;
    std::size_t cur = start;
    double dc = dist(cur);
    w.path.push_back(cur);
    w.distances.push_back(dc);
    for (;;) {
        std::size_t best = cur;
        double db = dc;
        for (std::uint32_t u : g.adj[cur]) {
            const double du = dist(u);
            if (du < db) {
                best = u;
                db = du;
            }
        }
        if (best == cur) break;
        cur = best;
        dc = db;
        w.path.push_back(cur);
        w.distances.push_back(dc);
    }
    w.terminal = cur;
    double dn = dist(0);
    for (std::size_t i = 1; i < g.n(); ++i)
        if (double di = dist(i); di < dn) {
            dn = di;
            w.nearest = i;
        }
    w.success = dc <= dn;
    return w;
}

// ---------------------------------------------------------------------------
// Feasibility search
// ---------------------------------------------------------------------------

namespace {

// Sum of hinge violations with a safety margin, so that zero loss implies
// strict realisation.
double hinge_loss(const Motif& m, const std::vector<bool>& edge, const Eigen::MatrixXd& pts) {
    constexpr double kMargin = 0.02;
    double loss = 0.0;
    for (std::size_t a = 0; a < m.k; ++a)
        for (std::size_t b = a + 1; b < m.k; ++b) {
            const double dist = (pts.row(static_cast<Eigen::Index>(a)) - pts.row(static_cast<Eigen::Index>(b))).norm();
            if (edge[a * m.k + b])
                loss += std::max(0.0, dist - (1.0 - kMargin));
            else
                loss += std::max(0.0, (1.0 + kMargin) - dist);
        }
    return loss;
}

} // namespace

FeasibilityResult feasibility_search(const Motif& motif, std::size_t d, std::size_t budget, std::uint64_t seed) {
    if (motif.k > kMaxMotif) throw Error(ErrorCode::MotifTooLarge, "motifs are limited to 8 vertices");
    if (d == 0) throw Error(ErrorCode::InvalidArgument, "d must be positive");
    std::vector<bool> edge(motif.k * motif.k, false);
    for (auto [a, b] : motif.edges) edge[a * motif.k + b] = edge[b * motif.k + a] = true;

    auto g = random::stream_engine(seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto K = static_cast<Eigen::Index>(motif.k), D = static_cast<Eigen::Index>(d);

    FeasibilityResult res;
    Eigen::MatrixXd pts(K, D);
    while (res.evaluations < budget) {
        ++res.restarts;
        for (Eigen::Index i = 0; i < K; ++i)
            for (Eigen::Index j = 0; j < D; ++j) pts(i, j) = 2.0 * random::uniform01(g) - 1.0;
        double loss = hinge_loss(motif, edge, pts);
        ++res.evaluations;
        double sigma = 0.3;
        std::size_t stale = 0;
        while (loss > 0.0 && res.evaluations < budget && sigma > 1e-4 && stale < 2000) {
            const Eigen::Index i = static_cast<Eigen::Index>(g() % motif.k);
            const Eigen::RowVectorXd old = pts.row(i);
            for (Eigen::Index j = 0; j < D; ++j) pts(i, j) += sigma * normal(g);
            const double trial = hinge_loss(motif, edge, pts);
            ++res.evaluations;
            if (trial < loss) {
                stale = 0;
                loss = trial;
                sigma = std::min(1.0, sigma * 1.2);
            } else {
                ++stale;
                pts.row(i) = old;
                sigma *= 0.98;
            }
        }
        if (loss == 0.0 && realizes(motif, pts)) {
            res.found = true;
            res.points = pts;
            res.note = "found: configuration realises the motif at radius 1";
            return res;
        }
    }
    res.note = "not found within budget; this is not a proof of infeasibility";
    return res;
}

} // namespace measinf::rgg
