#include "measinf/dieudonne.hpp"

#include <cmath>
#include <limits>

namespace measinf::dieudonne {

using rounding::certainly_le;
using rounding::certainly_lt;
using rounding::down;
using rounding::up;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const Config& cfg) {
    if (cfg.canonical()) {
        if (!(cfg.c > 0.0) || !std::isfinite(cfg.c))
            throw Error(ErrorCode::InvalidConfig, "c must be finite and positive");
        if (cfg.shift < 1) throw Error(ErrorCode::InvalidConfig, "shift must be at least 1");
    }
    if (cfg.row_cap == 0) throw Error(ErrorCode::InvalidConfig, "row_cap must be positive");
}

// Bounds that every row is checked against, from a and beta_{r-1}.
struct RowBounds {
    Enclosure a_over_beta;
    Enclosure log_inv_a;
    double c_lower;     // hi of a / (2 beta)
    double c_upper;     // lo of a / beta
    double d_lower;     // hi of (a / beta) log(1/a) / 2
    double d_upper;     // lo of 2 (a / beta) log(1/a)
    double delta_lower; // hi of a log(1/a) / 2
    double delta_upper; // lo of 2 a log(1/a)
};

RowBounds row_bounds(double a, Enclosure beta) {
    RowBounds b;
    const Enclosure ea = Enclosure::point(a);
    b.a_over_beta = rounding::div_pos(ea, beta);
    b.log_inv_a = rounding::log(rounding::div_pos(Enclosure::point(1.0), ea));
    const Enclosure d_ref = rounding::mul_nonneg(b.a_over_beta, b.log_inv_a);
    const Enclosure delta_ref = rounding::mul_nonneg(ea, b.log_inv_a);
    // Halving and doubling are exact.
    b.c_lower = 0.5 * b.a_over_beta.hi;
    b.c_upper = b.a_over_beta.lo;
    b.d_lower = 0.5 * d_ref.hi;
    b.d_upper = 2.0 * d_ref.lo;
    b.delta_lower = 0.5 * delta_ref.hi;
    b.delta_upper = 2.0 * delta_ref.lo;
    return b;
}

void require_ab(double a, Enclosure beta) {
    if (!(a > 0.0) || !(a < 1.0)) throw Error(ErrorCode::PreconditionViolated, "a must lie in (0, 1)");
    if (!(beta.lo >= kHalf) || !(beta.hi <= 1.0))
        throw Error(ErrorCode::BetaBelowHalf, "beta must lie in [1/2, 1]");
    if (!(a < beta.lo)) throw Error(ErrorCode::PreconditionViolated, "need a < beta so that log(beta/a) > 0");
}

Candidate evaluate(double a, Enclosure beta, const RowBounds& b, Enclosure t, std::uint64_t p) {
    Candidate c;
    c.p = p;
    c.t = t;
    const double pd = static_cast<double>(p);
    const double hi_frac = up(t.hi / pd);
    c.side = {down(1.0 - hi_frac), up(1.0 - down(t.lo / pd))};
    if (!(hi_frac < 1.0)) return c; // nothing meaningful to evaluate
    c.mu_c = rounding::pow_one_minus(t, pd, pd);
    const Enclosure tail = rounding::pow_one_minus(t, pd, pd - 1.0);
    c.mu_d = c.mu_c + rounding::mul_nonneg(t, tail);
    if (c.side.lo > kHalf) c.satisfied |= kSide;
    if (c.mu_c.lo >= b.c_lower) c.satisfied |= kCLower;
    if (c.mu_c.hi <= b.c_upper) c.satisfied |= kCUpper;
    if (c.mu_d.lo >= b.d_lower) c.satisfied |= kDLower;
    if (c.mu_d.hi <= b.d_upper) c.satisfied |= kDUpper;
    (void)a;
    (void)beta;
    return c;
}

Choice choose(double a, Enclosure beta, Kind kind) {
    require_ab(a, beta);
    if (kind == Kind::FirstStage && (beta.lo != 1.0 || beta.hi != 1.0))
        throw Error(ErrorCode::PreconditionViolated, "first-stage choice needs beta = 1");
    const RowBounds b = row_bounds(a, beta);
    const Enclosure t = rounding::log(rounding::div_pos(beta, Enclosure::point(a)));
    auto eval = [&](std::uint64_t p) { return evaluate(a, beta, b, t, p); };
    // Plain double evaluation decides clear cases; only candidates within
    // kMargin of a bound get the enclosure treatment. The enclosures are a
    // few ulps wide, so a clear plain verdict is also the certified one.
    static constexpr double kMargin = 1e-9;
    const double tm = t.mid();
    auto feasible = [&](std::uint64_t p) {
        const double pd = static_cast<double>(p);
        const double s = 1.0 - tm / pd;
        if (!(s > kHalf * (1.0 + kMargin))) return false;
        const double mc = std::exp(pd * std::log1p(-tm / pd));
        const double md = mc + tm * mc / s;
        auto above = [](double v, double bound) { return v >= bound * (1.0 + kMargin); };
        auto below = [](double v, double bound) { return v * (1.0 + kMargin) <= bound; };
        const bool clear_fail = mc * (1.0 + kMargin) < b.c_lower || mc > b.c_upper * (1.0 + kMargin) ||
                                md * (1.0 + kMargin) < b.d_lower || md > b.d_upper * (1.0 + kMargin);
        if (clear_fail) return false;
        if (above(mc, b.c_lower) && below(mc, b.c_upper) && above(md, b.d_lower) && below(md, b.d_upper))
            return true;
        return eval(p).feasible();
    };

    // Below this p the side constraint cannot be certified.
    const double floor_d = std::floor(2.0 * t.hi);
    if (floor_d + 1.0 > static_cast<double>(kPCap)) throw Error(ErrorCode::NoFeasibleP, "side floor above the p cap");
    const std::uint64_t p_floor = static_cast<std::uint64_t>(floor_d) + 1;

    std::uint64_t lo = p_floor - 1; // known infeasible, or 0
    std::uint64_t hi = p_floor;
    while (!feasible(hi)) {
        lo = hi;
        if (hi > kPCap / 2) throw Error(ErrorCode::NoFeasibleP, "no feasible p up to 2^40");
        hi *= 2;
    }
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        (feasible(mid) ? hi : lo) = mid;
    }

    // Feasibility is not provably monotone in p, so rescan just below.
    std::uint64_t p = hi;
    std::size_t steps = 0;
    std::uint64_t q = p;
    while (steps < kMinimalityScan && q > 1) {
        --q;
        ++steps;
        if (feasible(q)) {
            p = q;
            steps = 0;
        }
    }
    Choice out;
    out.chosen = eval(p);
    if (!out.chosen.feasible()) throw Error(ErrorCode::NoFeasibleP, "chosen p failed certification");
    out.scanned_below = p - q;
    out.below_violates = p > 1 ? eval(p - 1).first_violation() : 0;
    return out;
}

double delta_recomputed(const Row& row, double beta_prev) {
    const double t = row.t.mid();
    const double s = 1.0 - t / static_cast<double>(row.p);
    return beta_prev * std::pow(s, static_cast<double>(row.p) - 1.0) * (s + t);
}

} // namespace

double Config::a(std::size_t n) const {
    if (custom) return custom(n);
    const double m = static_cast<double>(n + shift);
    const double l = std::log(m);
    return c / (m * l * l);
}

const char* to_string(Check c) noexcept {
    switch (c) {
    case Check::Pass: return "pass";
    case Check::Fail: return "fail";
    case Check::Unknown: return "unknown";
    }
    return "unknown";
}

SequenceReport check_sequence_conditions(const Config& cfg, std::size_t N) {
    validate(cfg);
    if (N == 0) throw Error(ErrorCode::InvalidArgument, "need at least one term");
    SequenceReport rep;
    rep.n_checked = N;
    double sum_lo = 0.0, sum_hi = 0.0;
    double prev = kInf;
    bool decreasing = true, positive = true;
    double max_term_lo = 0.0;
    const double a1 = cfg.a(1);
    for (std::size_t n = 1; n <= N; ++n) {
        const double a = cfg.a(n);
        if (!(a > 0.0) || !std::isfinite(a)) {
            positive = false;
            break;
        }
        if (!(a < prev)) decreasing = false;
        prev = a;
        sum_lo = down(sum_lo + down(a, rounding::kLibmUlps));
        sum_hi = up(sum_hi + up(a, rounding::kLibmUlps));
        if (a < 1.0) {
            const double v = a * -std::log(a);
            rep.max_term = std::max(rep.max_term, up(v, rounding::kLibmUlps + 1));
            max_term_lo = std::max(max_term_lo, down(v, rounding::kLibmUlps + 1));
        } else {
            rep.max_term = kInf;
            max_term_lo = kInf;
        }
    }
    if (!positive) throw Error(ErrorCode::NegativeTerm, "sequence terms must be finite and positive");
    rep.partial_sum = sum_hi;
    if (cfg.canonical()) {
        // a(x) decreases, so the tail is below the integral from N: c / log(N + s).
        rep.tail_bound = up(cfg.c / down(std::log(static_cast<double>(N + cfg.shift)), rounding::kLibmUlps), 2);
    } else if (cfg.custom_tail_bound) {
        rep.tail_bound = cfg.custom_tail_bound(N);
    } else {
        rep.tail_bound = kInf;
    }
    rep.sum_bound = up(rep.partial_sum + rep.tail_bound);
    if (rep.sum_bound < kSumCap)
        rep.sum_cap = Check::Pass;
    else if (sum_lo >= kSumCap)
        rep.sum_cap = Check::Fail;
    else
        rep.sum_cap = Check::Unknown;

    rep.decreasing = decreasing ? Check::Pass : Check::Fail;
    // x log(1/x) increases on (0, 1/e): for a decreasing sequence with
    // a_1 < 1/e the first N terms carry the supremum.
    if (max_term_lo >= kTermCap)
        rep.term_cap = Check::Fail;
    else if (decreasing && a1 < std::exp(-1.0) && rep.max_term < kTermCap)
        rep.term_cap = Check::Pass;
    else
        rep.term_cap = Check::Unknown;

    if (cfg.canonical()) {
        rep.divergence = Check::Pass;
        rep.divergence_note = "a log(1/a) >= c/((n+s) log(n+s)) eventually, and that series diverges";
    } else {
        rep.divergence = Check::Unknown;
        rep.divergence_note = "custom sequence: divergence not decidable from finitely many terms";
    }
    return rep;
}

const char* constraint_name(std::uint8_t bit) noexcept {
    switch (bit) {
    case kSide: return "side";
    case kCLower: return "c_lower";
    case kCUpper: return "c_upper";
    case kDLower: return "d_lower";
    case kDUpper: return "d_upper";
    default: return "none";
    }
}

std::uint8_t Candidate::first_violation() const {
    for (std::uint8_t bit : {kSide, kCLower, kCUpper, kDLower, kDUpper})
        if (!(satisfied & bit)) return bit;
    return 0;
}

Candidate evaluate_p(double a, double beta, std::uint64_t p) {
    const Enclosure eb = Enclosure::point(beta);
    require_ab(a, eb);
    if (p == 0) throw Error(ErrorCode::InvalidArgument, "p must be positive");
    const RowBounds b = row_bounds(a, eb);
    const Enclosure t = rounding::log(rounding::div_pos(eb, Enclosure::point(a)));
    return evaluate(a, eb, b, t, p);
}

Choice choose_p(double a, double beta, Kind kind) { return choose(a, Enclosure::point(beta), kind); }

const char* row_check_name(std::uint16_t bit) noexcept {
    switch (bit) {
    case kRowMinimal: return "p_minimal";
    case kRowSide: return "side_gt_half";
    case kRowCLower: return "mu_c_lower";
    case kRowCUpper: return "mu_c_upper";
    case kRowDeltaLower: return "delta_lower";
    case kRowDeltaUpper: return "delta_upper";
    case kRowBetaPrev: return "beta_prev_ge_half";
    case kRowMuA: return "mu_a_le_a";
    case kRowDeltaFormula: return "delta_formula";
    default: return "unknown";
    }
}

const char* to_string(StageRecord::Status s) noexcept {
    switch (s) {
    case StageRecord::Status::Terminated: return "terminated";
    case StageRecord::Status::RowCap: return "row_cap";
    case StageRecord::Status::BetaBelowHalf: return "beta_below_half";
    }
    return "unknown";
}

Carry initial_carry(const SequenceReport& seq) {
    Carry c;
    c.sum_cap_certified = seq.sum_cap == Check::Pass;
    return c;
}

StageRecord run_stage_partial(const Config& cfg, const Carry& carry) {
    validate(cfg);
    if (!carry.sum_cap_certified)
        throw Error(ErrorCode::CarryUnverifiable, "sum of a_n < 1/8 is not certified, so mu(B_n) > 7/8 is not",
                    carry.n);
    if (!(carry.mu_b_lower > kCarryTarget))
        throw Error(ErrorCode::CarryUnverifiable, "lower bound on mu(B_n) is not above 7/8", carry.n);

    StageRecord st;
    st.n = carry.n;
    st.q = carry.q;
    st.k = carry.k;
    st.mu_b_lower = carry.mu_b_lower;
    st.carry_ok = true;

    Enclosure beta = Enclosure::point(1.0);
    Enclosure sum = Enclosure::point(0.0);
    Enclosure sum_prev = sum;
    double sum_mu_a = 0.0;
    for (std::size_t r = 1;; ++r) {
        if (r > cfg.row_cap) {
            st.status = StageRecord::Status::RowCap;
            break;
        }
        Row row;
        row.r = r;
        row.index = carry.k + r;
        row.a = cfg.a(row.index);
        const Choice ch = choose(row.a, beta, r == 1 ? Kind::FirstStage : Kind::Inductive);
        const Candidate& cand = ch.chosen;
        row.p = cand.p;
        row.t = cand.t;
        row.side = cand.side;
        row.mu_c = cand.mu_c;
        row.mu_d = cand.mu_d;
        row.below_violates = ch.below_violates;
        row.delta = rounding::mul_nonneg(beta, cand.mu_d);

        const RowBounds b = row_bounds(row.a, beta);
        row.mu_a_upper = up(beta.hi * cand.mu_c.hi);
        std::uint16_t checks = 0;
        if (row.below_violates != 0 || row.p == 1) checks |= kRowMinimal;
        if (cand.satisfied & kSide) checks |= kRowSide;
        if (cand.satisfied & kCLower) checks |= kRowCLower;
        if (cand.satisfied & kCUpper) checks |= kRowCUpper;
        if (row.delta.lo >= b.delta_lower) checks |= kRowDeltaLower;
        if (row.delta.hi <= b.delta_upper) checks |= kRowDeltaUpper;
        if (beta.lo >= kHalf) checks |= kRowBetaPrev;
        if (row.mu_a_upper <= row.a) checks |= kRowMuA;
        const double dr = delta_recomputed(row, beta.mid());
        if (std::abs(dr - row.delta.mid()) <= 1e-12 * row.delta.mid() + (row.delta.hi - row.delta.lo)) checks |= kRowDeltaFormula;
        row.checks = checks;

        sum_prev = sum;
        sum = sum + row.delta;
        beta = Enclosure{down(1.0 - sum.hi), up(1.0 - sum.lo)};
        row.beta = beta;
        sum_mu_a = up(sum_mu_a + row.mu_a_upper);
        st.rows.push_back(row);

        if (sum.lo > kHalf) {
            st.h = r;
            break;
        }
        if (!(sum.hi <= kHalf) || beta.lo < kHalf) {
            st.status = StageRecord::Status::BetaBelowHalf;
            break;
        }
    }
    st.sum_delta = sum;
    st.sum_delta_prev = sum_prev;
    st.sum_mu_a = sum_mu_a;
    if (st.status == StageRecord::Status::Terminated) {
        st.stop_rule_ok = sum.lo > kHalf && sum_prev.hi <= kHalf;
        st.mu_d_lower = down(st.mu_b_lower * sum.lo);
        st.target_ok = st.mu_d_lower > kTarget;
    }
    return st;
}

StageRecord run_stage(const Config& cfg, const Carry& carry) {
    StageRecord st = run_stage_partial(cfg, carry);
    switch (st.status) {
    case StageRecord::Status::Terminated: return st;
    case StageRecord::Status::RowCap:
        throw Error(ErrorCode::StageNotTerminated,
                    "sum of delta reached " + std::to_string(st.sum_delta.hi) + " after " +
                        std::to_string(st.rows.size()) + " rows without exceeding 1/2",
                    st.n);
    case StageRecord::Status::BetaBelowHalf:
        throw Error(ErrorCode::BetaBelowHalf, "stopping rule undecidable at row " + std::to_string(st.rows.size()),
                    st.n);
    }
    return st;
}

Carry next_carry(const Carry& carry, const StageRecord& stage) {
    Carry next = carry;
    next.n = carry.n + 1;
    next.k = carry.k + stage.h;
    for (const Row& r : stage.rows) next.q += r.p;
    next.sum_mu_a = up(carry.sum_mu_a + stage.sum_mu_a);
    next.mu_b_lower = down(1.0 - next.sum_mu_a);
    return next;
}

CampaignReport verify_campaign(const Config& cfg, std::size_t n_stages) {
    CampaignReport rep;
    rep.sequence = check_sequence_conditions(cfg, cfg.check_terms);
    Carry carry = initial_carry(rep.sequence);
    for (std::size_t n = 1; n <= n_stages; ++n) {
        StageRecord st;
        try {
            st = run_stage_partial(cfg, carry);
        } catch (const Error& e) {
            rep.failure = e.code();
            rep.failure_message = e.what();
            break;
        }
        rep.total_mu_a = up(rep.total_mu_a + st.sum_mu_a);
        const auto status = st.status;
        const std::size_t rows = st.rows.size();
        const double reached = st.sum_delta.hi;
        if (status == StageRecord::Status::Terminated) carry = next_carry(carry, st);
        rep.stages.push_back(std::move(st));
        if (status == StageRecord::Status::RowCap) {
            rep.failure = ErrorCode::StageNotTerminated;
            rep.failure_message = "StageNotTerminated: stage " + std::to_string(n) + " reached sum delta " +
                                  std::to_string(reached) + " after " + std::to_string(rows) +
                                  " rows without exceeding 1/2";
            break;
        }
        if (status == StageRecord::Status::BetaBelowHalf) {
            rep.failure = ErrorCode::BetaBelowHalf;
            rep.failure_message = "BetaBelowHalf: stage " + std::to_string(n) + " row " + std::to_string(rows);
            break;
        }
    }
    return rep;
}

namespace {

constexpr std::size_t kCampaignEntries = 3;
constexpr std::size_t kStageEntries = 4;
constexpr std::size_t kRowEntries = 9;

} // namespace

std::size_t CampaignReport::ledger_size() const {
    if (stages.empty()) return 0;
    std::size_t n = kCampaignEntries;
    for (const auto& st : stages) n += kStageEntries + kRowEntries * st.rows.size();
    return n;
}

std::size_t CampaignReport::ledger_failures() const {
    std::size_t bad = 0;
    for_each_ledger_entry(*this, [&](const LedgerEntry& e) { bad += e.pass ? 0 : 1; });
    return bad;
}

void for_each_ledger_entry(const CampaignReport& rep, const std::function<void(const LedgerEntry&)>& emit) {
    LedgerEntry e;
    auto put = [&](std::size_t stage, std::size_t row, const char* name, double lhs, const char* op, double rhs,
                   bool pass) {
        e.stage = stage;
        e.row = row;
        e.name = name;
        e.lhs = lhs;
        e.op = op;
        e.rhs = rhs;
        e.pass = pass;
        emit(e);
    };
    if (rep.stages.empty()) return; // nothing was constructed, so nothing to certify
    put(0, 0, "sum_a", rep.sequence.sum_bound, "<", kSumCap, rep.sequence.sum_cap == Check::Pass);
    put(0, 0, "max_a_log_inv_a", rep.sequence.max_term, "<", kTermCap, rep.sequence.term_cap == Check::Pass);
    put(0, 0, "sum_mu_a", rep.total_mu_a, "<", kSumCap, rep.total_mu_a < kSumCap);

    for (const auto& st : rep.stages) {
        const bool done = st.status == StageRecord::Status::Terminated;
        put(st.n, 0, "stop_sum_delta", st.sum_delta.lo, ">", kHalf, done && st.sum_delta.lo > kHalf);
        put(st.n, 0, "stop_sum_delta_prev", st.sum_delta_prev.hi, "<=", kHalf, done && st.stop_rule_ok);
        put(st.n, 0, "mu_d_stage", st.mu_d_lower, ">", kTarget, done && st.target_ok);
        put(st.n, 0, "mu_b_carry", st.mu_b_lower, ">", kCarryTarget, st.carry_ok);

        Enclosure beta = Enclosure::point(1.0);
        for (const Row& row : st.rows) {
            const RowBounds b = row_bounds(row.a, beta);
            auto ok = [&](std::uint16_t bit) { return (row.checks & bit) != 0; };
            put(st.n, row.r, row_check_name(kRowMinimal), static_cast<double>(row.p - 1), "infeasible",
                static_cast<double>(row.below_violates), ok(kRowMinimal));
            put(st.n, row.r, row_check_name(kRowSide), row.side.lo, ">", kHalf, ok(kRowSide));
            put(st.n, row.r, row_check_name(kRowCLower), row.mu_c.lo, ">=", b.c_lower, ok(kRowCLower));
            put(st.n, row.r, row_check_name(kRowCUpper), row.mu_c.hi, "<=", b.c_upper, ok(kRowCUpper));
            put(st.n, row.r, row_check_name(kRowDeltaLower), row.delta.lo, ">=", b.delta_lower, ok(kRowDeltaLower));
            put(st.n, row.r, row_check_name(kRowDeltaUpper), row.delta.hi, "<=", b.delta_upper, ok(kRowDeltaUpper));
            put(st.n, row.r, row_check_name(kRowBetaPrev), beta.lo, ">=", kHalf, ok(kRowBetaPrev));
            put(st.n, row.r, row_check_name(kRowMuA), row.mu_a_upper, "<=", row.a, ok(kRowMuA));
            put(st.n, row.r, row_check_name(kRowDeltaFormula), delta_recomputed(row, beta.mid()), "~=",
                row.delta.mid(), ok(kRowDeltaFormula));
            beta = row.beta;
        }
    }
}

std::vector<LedgerEntry> ledger(const CampaignReport& rep) {
    std::vector<LedgerEntry> out;
    out.reserve(rep.ledger_size());
    for_each_ledger_entry(rep, [&](const LedgerEntry& e) { out.push_back(e); });
    return out;
}

} // namespace measinf::dieudonne
