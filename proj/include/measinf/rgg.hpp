#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "measinf/error.hpp"

namespace measinf::rgg {

// ---------------------------------------------------------------------------
// Densities and samples
// ---------------------------------------------------------------------------

/// One factor of a product density on R^d.
struct AxisDensity {
    enum class Kind { Uniform, Triangular };
    Kind kind = Kind::Uniform;
    double lo = 0.0;
    double hi = 1.0;
    double mode = 0.5; ///< Triangular only

    double pdf(double x) const;
    /// Integral of pdf^k over [a, b].
    double integral_pow(double a, double b, int k) const;
    double sample(double u) const; ///< inverse CDF
};

struct Density {
    std::vector<AxisDensity> axes;

    static Density uniform_box(const std::vector<double>& lo, const std::vector<double>& hi);
    static Density unit_cube(std::size_t d);

    std::size_t dim() const { return axes.size(); }
    double pdf(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    bool in_support(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Throws UnsupportedDensity for degenerate or non-finite axes.
void validate(const Density& f);

/// Axis-aligned closed box in R^d. lo > hi on some axis means empty.
struct Box {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    static Box cube(std::size_t d, double lo, double hi);
    bool empty() const;
    bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

struct PointCloud {
    std::size_t d = 0;
    Eigen::MatrixXd points; ///< n x d
    Density density;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    std::size_t n() const { return static_cast<std::size_t>(points.rows()); }
};

/// i.i.d. sample; (density, n, seed, stream) determines it bit for bit.
PointCloud sample_points(const Density& f, std::size_t n, std::size_t d, std::uint64_t seed, std::uint64_t stream = 0);

/// Cloud from explicit points (fixtures).
PointCloud from_points(Eigen::MatrixXd points);

/// Plain text: one point per line, whitespace-separated coordinates, '#' comments.
Eigen::MatrixXd parse_points(const std::string& text);
std::string format_points(const Eigen::MatrixXd& pts);

// ---------------------------------------------------------------------------
// Graphs and motifs
// ---------------------------------------------------------------------------

struct Graph {
    std::vector<std::vector<std::uint32_t>> adj; ///< sorted neighbour lists

    std::size_t n() const { return adj.size(); }
    std::size_t edge_count() const;
    bool has_edge(std::size_t i, std::size_t j) const;
};

/// Edge iff Euclidean distance < r (strict). Uses a uniform grid of cell size r.
Graph build_graph(const PointCloud& cloud, double r);

/// O(n^2) construction, for cross-checks.
Graph build_graph_naive(const PointCloud& cloud, double r);

struct Motif {
    std::size_t k = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::string name;

    bool has_edge(std::size_t i, std::size_t j) const;
};

/// Validates k >= 2, simple edges and connectivity (InvalidArgument).
Motif make_motif(std::size_t k, std::vector<std::pair<std::size_t, std::size_t>> edges, std::string name = {});

/// k2, path3, triangle, star<k> / star{k} (k vertices), complete<k>, path<k>.
Motif motif_preset(const std::string& name);

inline constexpr std::size_t kMaxMotif = 8;

/// Induced copies of `motif` whose left-most (lexicographically least) point
/// lies in `A`. Each vertex subset is counted once. MotifTooLarge above 8.
std::uint64_t count_induced_motifs(const Graph& g, const PointCloud& cloud, const Motif& motif, const Box& A);

/// Adjacency bitmask of the subgraph induced by sorted vertices `vs`, pair
/// (a, b) with a < b at bit index a*k - a*(a+1)/2 + (b - a - 1).
std::uint32_t induced_mask(const Graph& g, const std::vector<std::uint32_t>& vs);

/// Masks (same layout) of every labelling of the motif.
std::vector<std::uint32_t> isomorphic_masks(const Motif& motif);

/// Points satisfy G(Y; 1) isomorphic to the motif in the given labelling:
/// edges strictly below 1, non-edges at least 1.
bool realizes(const Motif& motif, const Eigen::MatrixXd& pts);

// ---------------------------------------------------------------------------
// mu_{Gamma,A}
// ---------------------------------------------------------------------------

struct Quadrature {
    std::size_t samples = 1'000'000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct MuEstimate {
    double outer = 0.0;      ///< integral over A of f^k (closed form)
    double inner = 0.0;      ///< integral of h over (R^d)^(k-1)
    double inner_se = 0.0;
    double value = 0.0;      ///< outer * inner / k!
    double std_error = 0.0;
    double ci_low = 0.0;     ///< 99% interval
    double ci_high = 0.0;
    std::size_t samples = 0;
};

inline constexpr double kZ99 = 2.5758293035489004;
inline constexpr std::size_t kMcBlock = 4096;

/// Integral over A of f^k for product densities.
double integral_f_pow(const Density& f, const Box& A, int k);

/// Monte Carlo over [-(k-1), k-1]^(d(k-1)), which holds every connected unit
/// configuration rooted at 0. k <= 4.
MuEstimate mu_gamma_A(const Motif& motif, const Box& A, const Density& f, const Quadrature& q);

// ---------------------------------------------------------------------------
// Regimes and the asymptotic check
// ---------------------------------------------------------------------------

struct Schedule {
    enum class Kind { Sparse, Thermodynamic, Connectivity, Dense };
    Kind kind = Kind::Thermodynamic;
    double c = 1.0;

    /// Thermodynamic c n^(-1/d); Connectivity c (log n / n)^(1/d);
    /// Sparse c n^(-3/(2d)) (n r^d -> 0); Dense c n^(-1/(2d)) (n r^d -> inf).
    double radius(std::size_t n, std::size_t d) const;
};

const char* to_string(Schedule::Kind k) noexcept;
Schedule::Kind parse_schedule_kind(const std::string& s);

struct AsymptoticRow {
    std::size_t n = 0;
    double r = 0.0;
    double mean_count = 0.0;
    double scaled = 0.0;   ///< mean of r^(-d(k-1)) n^(-k) count
    double std_error = 0.0;
    std::vector<std::uint64_t> counts; ///< per seed, in seed order
};

struct AsymptoticTable {
    std::vector<AsymptoticRow> rows;
    /// Fraction of consecutive steps where |scaled - mu| did not increase.
    double trend_fraction(double mu) const;
};

/// Replication s of size n samples with stream (n, s) of `seed`.
AsymptoticTable asymptotic_check(const Motif& motif, const Box& A, const Density& f, const Schedule& sched,
                                 const std::vector<std::size_t>& n_list, std::size_t seeds, std::uint64_t seed,
                                 unsigned threads = 1);

struct PairProbability {
    double p = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    double expected_count(std::size_t n) const { return 0.5 * double(n) * double(n - 1) * p; }
};

/// P(|X - Y| < r and lexmin(X, Y) in A) for X, Y i.i.d. f, by direct sampling.
PairProbability pair_probability(const Density& f, const Box& A, double r, std::size_t samples, std::uint64_t seed,
                                 unsigned threads = 1);

// ---------------------------------------------------------------------------
// Greedy search and feasibility
// ---------------------------------------------------------------------------

struct WalkResult {
    std::vector<std::size_t> path;
    std::vector<double> distances; ///< to the query, along the path
    std::size_t terminal = 0;
    std::size_t nearest = 0;       ///< global nearest point (lowest index on ties)
    bool success = false;          ///< terminal is at the nearest distance
};

/// Moves to the strictly closest neighbour (lowest index on ties) until no
/// neighbour is strictly closer.
WalkResult greedy_walk(const Graph& g, const PointCloud& cloud, std::size_t start,
                       const Eigen::Ref<const Eigen::VectorXd>& query);

struct FeasibilityResult {
    bool found = false;
    Eigen::MatrixXd points; ///< k x d when found
    std::size_t evaluations = 0;
    std::size_t restarts = 0;
    std::string note;
};

/// Random restarts plus single-point perturbation on the hinge loss of the
/// distance constraints. NotFound is not a proof of infeasibility.
FeasibilityResult feasibility_search(const Motif& motif, std::size_t d, std::size_t budget, std::uint64_t seed);

} // namespace measinf::rgg
