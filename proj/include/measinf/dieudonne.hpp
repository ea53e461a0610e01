#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "measinf/error.hpp"
#include "measinf/rounding.hpp"

namespace measinf::dieudonne {

using rounding::Enclosure;

inline constexpr double kSumCap = 1.0 / 8.0;
inline constexpr double kTermCap = 1.0 / 4.0;
inline constexpr double kHalf = 1.0 / 2.0;
inline constexpr double kTarget = 7.0 / 16.0;
inline constexpr double kCarryTarget = 7.0 / 8.0;
inline constexpr std::uint64_t kPCap = std::uint64_t{1} << 40;
inline constexpr std::size_t kMinimalityScan = 64;

/// a_n = c / ((n + s) log^2(n + s)) unless a custom sequence is supplied.
struct Config {
    double c = 0.01;
    std::size_t shift = 1;
    std::size_t check_terms = 1'000'000; ///< N used by check_sequence_conditions
    std::size_t row_cap = std::size_t{1} << 20; ///< rows per stage before giving up

    /// Custom decreasing sequence (1-based) with an optional certified bound
    /// on sum_{n>N} a_n. Divergence of sum a log(1/a) is then Unknown.
    std::function<double(std::size_t)> custom;
    std::function<double(std::size_t)> custom_tail_bound;
    std::string custom_label;

    bool canonical() const { return !custom; }
    double a(std::size_t n) const;
};

enum class Check { Pass, Fail, Unknown };
const char* to_string(Check c) noexcept;

struct SequenceReport {
    std::size_t n_checked = 0;
    double partial_sum = 0.0;  ///< upper bound on sum_{n<=N} a_n
    double tail_bound = 0.0;   ///< upper bound on sum_{n>N} a_n (inf when unavailable)
    double sum_bound = 0.0;
    Check sum_cap = Check::Unknown;
    double max_term = 0.0;     ///< max of a log(1/a) over n <= N
    Check term_cap = Check::Unknown;
    Check decreasing = Check::Unknown;
    Check divergence = Check::Unknown;
    std::string divergence_note;

    bool passed() const {
        return sum_cap == Check::Pass && term_cap == Check::Pass && decreasing == Check::Pass &&
               divergence != Check::Fail;
    }
};

SequenceReport check_sequence_conditions(const Config& cfg, std::size_t N);

// ---------------------------------------------------------------------------
// Choosing p
// ---------------------------------------------------------------------------

enum class Kind { FirstStage, Inductive };

/// Constraint bits for one candidate p.
enum Constraint : std::uint8_t {
    kSide = 1,        ///< 1 - t/p > 1/2
    kCLower = 2,      ///< mu(C) >= a / (2 beta)
    kCUpper = 4,      ///< mu(C) <= a / beta
    kDLower = 8,      ///< mu(D) >= (a / beta) log(1/a) / 2
    kDUpper = 16,     ///< mu(D) <= 2 (a / beta) log(1/a)
};
inline constexpr std::uint8_t kAllConstraints = kSide | kCLower | kCUpper | kDLower | kDUpper;

const char* constraint_name(std::uint8_t bit) noexcept;

struct Candidate {
    std::uint64_t p = 0;
    Enclosure t;    ///< log(beta / a)
    Enclosure side; ///< 1 - t/p
    Enclosure mu_c; ///< (1 - t/p)^p
    Enclosure mu_d; ///< (1 - t/p)^p + t (1 - t/p)^(p-1)
    std::uint8_t satisfied = 0;

    bool feasible() const { return satisfied == kAllConstraints; }
    /// First violated constraint bit (0 when feasible).
    std::uint8_t first_violation() const;
};

Candidate evaluate_p(double a, double beta, std::uint64_t p);

struct Choice {
    Candidate chosen;
    std::uint8_t below_violates = 0; ///< constraint that p-1 violates (0 when p-1 is below the side floor)
    std::size_t scanned_below = 0;   ///< how many smaller p were re-checked
};

/// Smallest feasible p: doubling, binary search, then a downward scan.
Choice choose_p(double a, double beta, Kind kind);

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

/// Per-row checks.
enum RowCheck : std::uint16_t {
    kRowMinimal = 1,       ///< p - 1 violates a constraint
    kRowSide = 2,
    kRowCLower = 4,
    kRowCUpper = 8,
    kRowDeltaLower = 16,   ///< a log(1/a) / 2 <= delta
    kRowDeltaUpper = 32,   ///< delta <= 2 a log(1/a)
    kRowBetaPrev = 64,     ///< beta_{r-1} >= 1/2
    kRowMuA = 128,         ///< mu(A_{n,r}) <= a_{n,r}
    kRowDeltaFormula = 256 ///< two-term delta agrees with the independent recomputation
};
inline constexpr std::uint16_t kAllRowChecks = 511;

const char* row_check_name(std::uint16_t bit) noexcept;

struct Row {
    std::size_t r = 0;
    std::size_t index = 0; ///< k_n + r
    double a = 0.0;
    std::uint64_t p = 0;
    Enclosure t;
    Enclosure side;
    Enclosure mu_c;
    Enclosure mu_d;
    Enclosure delta;    ///< beta_{r-1} mu(D_{n,r})
    Enclosure beta;     ///< beta_r = 1 - sum delta
    double mu_a_upper = 0.0;
    std::uint8_t below_violates = 0;
    std::uint16_t checks = 0;
};

/// State threaded between stages.
struct Carry {
    std::size_t n = 1;
    std::size_t k = 0;         ///< k_n
    std::uint64_t q = 0;       ///< q_n (q_1 = 0)
    double mu_b_lower = 1.0;   ///< lower bound on mu(B_n)
    double sum_mu_a = 0.0;     ///< upper bound on sum of all earlier mu(A)
    bool sum_cap_certified = false;
};

struct StageRecord {
    enum class Status { Terminated, RowCap, BetaBelowHalf };

    std::size_t n = 0;
    std::uint64_t q = 0;
    std::size_t k = 0;
    std::vector<Row> rows;
    std::size_t h = 0;
    Enclosure sum_delta;
    Enclosure sum_delta_prev; ///< over the first h-1 rows
    double mu_b_lower = 0.0;
    double mu_d_lower = 0.0;
    double sum_mu_a = 0.0; ///< upper bound over this stage's rows
    Status status = Status::Terminated;

    bool stop_rule_ok = false; ///< sum over h rows > 1/2, over h-1 rows <= 1/2
    bool target_ok = false;    ///< mu(D_n) > 7/16
    bool carry_ok = false;     ///< mu(B_n) > 7/8
};

const char* to_string(StageRecord::Status s) noexcept;

/// Runs one stage without throwing on non-termination; the status says why it
/// stopped.
StageRecord run_stage_partial(const Config& cfg, const Carry& carry);

/// Throws CarryUnverifiable, StageNotTerminated or BetaBelowHalf.
StageRecord run_stage(const Config& cfg, const Carry& carry);

Carry next_carry(const Carry& carry, const StageRecord& stage);

Carry initial_carry(const SequenceReport& seq);

// ---------------------------------------------------------------------------
// Campaign
// ---------------------------------------------------------------------------

struct LedgerEntry {
    std::size_t stage = 0; ///< 0 for campaign-level rows
    std::size_t row = 0;   ///< 0 for stage-level rows
    std::string name;
    double lhs = 0.0;
    std::string op;
    double rhs = 0.0;
    bool pass = false;
};

struct CampaignReport {
    SequenceReport sequence;
    std::vector<StageRecord> stages;
    double total_mu_a = 0.0;
    std::optional<ErrorCode> failure;
    std::string failure_message;

    std::size_t ledger_size() const;
    std::size_t ledger_failures() const;
    bool passed() const { return !failure && sequence.passed() && ledger_failures() == 0; }
};

/// Runs stages 1..n_stages. Stage errors end the campaign and are recorded
/// in `failure`, keeping the partial trace.
CampaignReport verify_campaign(const Config& cfg, std::size_t n_stages);

/// Calls emit for every ledger entry, in order (none when no stage ran). Each applicable inequality
/// appears once per row.
void for_each_ledger_entry(const CampaignReport& rep, const std::function<void(const LedgerEntry&)>& emit);

std::vector<LedgerEntry> ledger(const CampaignReport& rep);

} // namespace measinf::dieudonne
