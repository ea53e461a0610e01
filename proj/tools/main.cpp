// measinf: batch runner for every library module.
//
// Each run resolves its parameters (defaults < --config file < flags) into a
// canonical form and writes them as `#! key = value` header lines (CSV) or a
// "config" object (JSON). Feeding an output file back through --config
// reproduces it byte for byte.

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "measinf/density.hpp"
#include "measinf/dieudonne.hpp"
#include "measinf/error.hpp"
#include "measinf/jessen.hpp"
#include "measinf/parallelepiped.hpp"
#include "measinf/random.hpp"
#include "measinf/rgg.hpp"
#include "measinf/text.hpp"

using namespace measinf;
using text::format_number;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

// ---------------------------------------------------------------------------
// Parameters and configuration
// ---------------------------------------------------------------------------

enum class Type { Real, Int, Word, Path, Sequence, Box, Boxes, Function, List };

struct Param {
    std::string key;
    Type type;
    std::string def;
    std::string help;
};

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_boxes(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto bar = s.find('|', start);
        out.push_back(trim(s.substr(start, bar == std::string::npos ? std::string::npos : bar - start)));
        if (bar == std::string::npos) break;
        start = bar + 1;
    }
    return out;
}

std::string canonical(const Param& p, const std::string& raw) {
    const std::string v = trim(raw);
    try {
        switch (p.type) {
        case Type::Real: return format_number(text::parse_number(v));
        case Type::Int: {
            const double x = text::parse_number(v);
            if (x < 0 || x != std::floor(x) || x > 9.007199254740992e15)
                throw Error(ErrorCode::InvalidConfig, "'" + p.key + "' must be a non-negative integer");
            return std::to_string(static_cast<std::uint64_t>(x));
        }
        case Type::Word:
        case Type::Path:
            if (v.empty()) throw Error(ErrorCode::InvalidConfig, "'" + p.key + "' is empty");
            return v;
        case Type::Sequence: return text::format(text::parse_sequence(v));
        case Type::Box: return text::format(text::parse_parallelepiped(v));
        case Type::Boxes: {
            std::string out;
            for (const auto& part : split_boxes(v)) {
                if (!out.empty()) out += " | ";
                out += text::format(text::parse_parallelepiped(part));
            }
            return out;
        }
        case Type::Function:
            if (v == "none") return v;
            return text::format(text::parse_function(v));
        case Type::List: return text::format_number_list(text::parse_number_list(v));
        }
    } catch (const Error& e) {
        throw Error(e.code() == ErrorCode::InvalidConfig ? ErrorCode::InvalidConfig : ErrorCode::ParseError,
                    "in '" + p.key + "': " + e.what());
    }
    return v;
}

struct Located {
    std::string value;
    std::size_t line = 0;
    std::size_t column = 0;
};

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t offset) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

std::map<std::string, Located> parse_json_config(const std::string& src) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(src);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [l, c] = line_col(src, e.byte > 0 ? e.byte - 1 : 0);
        throw Error(ErrorCode::ParseError, "invalid JSON", l, c);
    }
    if (j.is_object() && j.contains("config") && j["config"].is_object()) j = j["config"];
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "JSON config must be an object", 1, 1);
    std::map<std::string, Located> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto pos = src.find("\"" + it.key() + "\"");
        const auto [l, c] = line_col(src, pos == std::string::npos ? 0 : pos);
        std::string v;
        if (it->is_string())
            v = it->get<std::string>();
        else if (it->is_number_integer() || it->is_number_unsigned())
            v = it->dump();
        else if (it->is_number_float())
            v = format_number(it->get<double>());
        else
            throw Error(ErrorCode::ParseError, "value of '" + it.key() + "' must be a string or number", l, c);
        out[it.key()] = {v, l, c};
    }
    return out;
}

/// Flat `key = value` lines, '#' comments. When `#!` lines exist (a previous
/// run's output) only those are read.
std::map<std::string, Located> parse_flat_config(const std::string& src) {
    std::vector<std::pair<std::string, std::size_t>> lines;
    bool has_header = false;
    {
        std::istringstream in(src);
        std::string line;
        while (std::getline(in, line)) {
            lines.emplace_back(line, 0);
            if (line.rfind("#!", 0) == 0) has_header = true;
        }
    }
    std::map<std::string, Located> out;
    for (std::size_t n = 0; n < lines.size(); ++n) {
        std::string line = lines[n].first;
        std::size_t offset = 0;
        if (has_header) {
            if (line.rfind("#!", 0) != 0) continue;
            offset = 2;
            line = line.substr(2);
        } else if (auto h = line.find('#'); h != std::string::npos) {
            line.erase(h);
        }
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        const auto first = line.find_first_not_of(" \t");
        if (eq == std::string::npos)
            throw Error(ErrorCode::ParseError, "expected 'key = value'", n + 1, offset + line.size() + 1);
        const std::string key = trim(line.substr(0, eq));
        const bool ident = !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
        });
        if (!ident) throw Error(ErrorCode::ParseError, "bad key", n + 1, offset + first + 1);
        if (out.count(key)) throw Error(ErrorCode::InvalidConfig, "duplicate key '" + key + "'", n + 1, offset + first + 1);
        out[key] = {line.substr(eq + 1), n + 1, offset + first + 1};
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct Ctx {
    std::string command;
    std::vector<Param> params;
    std::map<std::string, std::string> values; // canonical
    unsigned threads = 1;
    std::ostringstream out;

    const std::string& get(const std::string& k) const { return values.at(k); }
    double real(const std::string& k) const { return text::parse_number(get(k)); }
    std::size_t integer(const std::string& k) const { return static_cast<std::size_t>(std::stoull(get(k))); }
    std::uint64_t seed() const { return std::stoull(get("seed")); }
    TailedSequence sequence(const std::string& k) const { return text::parse_sequence(get(k)); }
    Parallelepiped box(const std::string& k) const { return text::parse_parallelepiped(get(k)); }
    std::vector<Parallelepiped> boxes(const std::string& k) const {
        std::vector<Parallelepiped> v;
        for (const auto& s : split_boxes(get(k))) v.push_back(text::parse_parallelepiped(s));
        return v;
    }
    ProductFunction function(const std::string& k) const { return text::parse_function(get(k)); }
    std::vector<double> list(const std::string& k) const { return text::parse_number_list(get(k)); }

    void header() {
        out << "#! command = " << command << '\n';
        for (const auto& p : params) out << "#! " << p.key << " = " << values.at(p.key) << '\n';
    }
    void note(const std::string& k, const std::string& v) { out << "# " << k << " = " << v << '\n'; }
    void note(const std::string& k, double v) { note(k, format_number(v)); }

    nlohmann::ordered_json config_json() const {
        nlohmann::ordered_json j;
        j["command"] = command;
        for (const auto& p : params) j[p.key] = values.at(p.key);
        return j;
    }
};

const std::string kUnitCube = "lower={tail=Constant(0)}; upper={tail=Constant(1)}";

using Runner = std::function<int(Ctx&)>;

struct Command {
    std::string name;
    std::string help;
    std::vector<Param> params;
    Runner run;
};

std::string kind_name(const MeasureValue& v) { return to_string(v.kind); }

const char* tri_name(Tri t) { return t == Tri::Yes ? "Yes" : t == Tri::No ? "No" : "Unknown"; }

// volume ---------------------------------------------------------------------

int run_volume(Ctx& c) {
    const MeasureValue v = volume(c.box("box"), c.real("tol"));
    c.header();
    c.out << "kind,value,error\n" << kind_name(v) << ',' << format_number(v.value) << ',' << format_number(v.err) << '\n';
    return kExitPass;
}

// cover ----------------------------------------------------------------------

int run_cover(Ctx& c) {
    const double eps = c.real("eps");
    const std::size_t J = c.integer("count");
    const auto cover = boundary_cover(eps, J);
    const auto est = cover_upper_bound(unit_cube_faces(J), {cover});
    const double exact = eps * (1.0 - std::ldexp(1.0, -static_cast<int>(J)));
    c.header();
    c.note("bound", est.best_bound);
    c.note("expected", exact);
    const bool pass = est.best_bound == exact;
    c.note("verdict", pass ? "pass" : "fail");
    c.out << "index,volume,box\n";
    for (std::size_t i = 0; i < cover.size(); ++i) {
        const auto v = volume(cover[i]);
        c.out << i << ',' << format_number(v.value) << ",\"" << text::format(cover[i]) << "\"\n";
    }
    return pass ? kExitPass : kExitFail;
}

// core -----------------------------------------------------------------------

int run_core(Ctx& c) {
    const CoreSpec spec = make_core_spec(c.box("base"), c.real("delta"));
    const auto m = in_core(c.sequence("x"), spec, c.integer("depth"));
    const std::size_t D = c.integer("from");
    const std::size_t extra = c.integer("extra");
    c.header();
    c.note("in_core", tri_name(m.answer));
    if (m.answer == Tri::Yes) c.note("from_index", std::to_string(m.from));
    if (!m.reason.empty()) c.note("reason", m.reason);
    c.out << "d,truncated_volume\n";
    for (std::size_t d = D + 1; d <= D + extra; ++d)
        c.out << d << ',' << format_number(core_truncated_volume(spec, D, d)) << '\n';
    return m.answer == Tri::Unknown ? kExitFail : kExitPass;
}

// density --------------------------------------------------------------------

void write_witnesses(Ctx& c, const DensityReport& r) {
    c.out << "set,coordinates,bound\n";
    for (const auto& w : r.witnesses) {
        std::string coords;
        for (std::size_t i = 0; i < w.coordinates.size(); ++i) coords += (i ? " " : "") + std::to_string(w.coordinates[i]);
        c.out << w.set_index << ",\"" << coords << "\"," << format_number(w.bound) << '\n';
    }
}

int run_density(Ctx& c) {
    const std::string mode = c.get("mode");
    if (mode == "sequence") {
        const auto fam = ShrinkFamily::around(c.sequence("x"), c.real("side"), c.real("eta"));
        const std::size_t stages = c.integer("stages");
        const DensityReport r = c.get("function") != "none" ? density_sequence(c.function("function"), fam, stages)
                                                            : density_sequence(c.boxes("sets"), fam, stages);
        c.header();
        c.note("verdict", to_string(r.verdict));
        if (r.verdict == DensityReport::Verdict::Converged) c.note("limit", r.limit);
        if (r.verdict == DensityReport::Verdict::Oscillating) {
            c.note("liminf", r.liminf);
            c.note("limsup", r.limsup);
        }
        c.note("certified", r.certified ? "true" : "false");
        if (r.verdict == DensityReport::Verdict::ZeroCertificate) {
            write_witnesses(c, r);
            return kExitPass;
        }
        c.out << "m,volume_kind,volume,average,bound\n";
        for (const auto& s : r.stages)
            c.out << s.m << ',' << kind_name(s.volume) << ',' << format_number(s.volume.value) << ','
                  << format_number(s.average) << ',' << format_number(s.bound) << '\n';
        return kExitPass;
    }
    if (mode == "nondensity") {
        const DensityReport r = non_density_check(c.boxes("sets"), c.sequence("x"), kDefaultTol, c.integer("depth"));
        c.header();
        c.note("verdict", to_string(r.verdict));
        write_witnesses(c, r);
        return r.verdict == DensityReport::Verdict::ZeroCertificate ? kExitPass : kExitFail;
    }
    if (mode == "lebesgue") {
        if (c.get("function") == "none") throw Error(ErrorCode::InvalidConfig, "lebesgue mode needs a function");
        const auto cert = lebesgue_point_at_continuity(c.function("function"), c.sequence("x"), c.real("eps"));
        c.header();
        c.note("side", cert.side);
        c.note("deviation_bound", cert.deviation_bound);
        c.note("volume", to_string(cert.volume));
        c.note("note", cert.note);
        c.out << "neighbourhood\n\"" << text::format(cert.neighbourhood) << "\"\n";
        return kExitPass;
    }
    throw Error(ErrorCode::InvalidConfig, "mode must be sequence, nondensity or lebesgue");
}

// oscillate1d ----------------------------------------------------------------

int run_oscillate1d(Ctx& c) {
    const auto r = oscillating_density_1d(c.integer("m_max"));
    c.header();
    c.note("integral_unit", r.integral_unit.str());
    c.note("normalized_symmetric", r.normalized_symmetric.str());
    c.note("liminf", r.liminf.str());
    c.note("limsup", r.limsup.str());
    c.note("verdict", r.oscillating ? "Oscillating" : "Converged");
    c.out << "k,half_width,average\n";
    for (const auto& row : r.rows) c.out << row.k << ',' << row.half_width.str() << ',' << row.average.str() << '\n';
    return r.oscillating ? kExitPass : kExitFail;
}

// jessen ---------------------------------------------------------------------

int run_jessen(Ctx& c) {
    const auto f = c.function("function");
    const auto x = c.sequence("x");
    std::vector<std::size_t> dims;
    for (double v : c.list("dims")) {
        if (v < 0 || v != std::floor(v)) throw Error(ErrorCode::InvalidConfig, "dims must be non-negative integers");
        dims.push_back(static_cast<std::size_t>(v));
    }
    const auto rows = jessen_convergence(f, x, dims);
    const std::size_t samples = c.integer("mc_samples");
    c.header();
    c.note("integral", integrate_cube(f).value);
    c.out << "d,f_d,gap,fubini_diff";
    if (samples) c.out << ",mc_mean,mc_stderr,mc_contains";
    c.out << '\n';
    bool all_contained = true;
    for (const auto& r : rows) {
        c.out << r.d << ',' << format_number(r.f_d) << ',' << format_number(r.gap) << ','
              << format_number(fubini_check(f, r.d).difference);
        if (samples) {
            std::vector<double> prefix(r.d);
            for (std::size_t i = 0; i < r.d; ++i) prefix[i] = x(i + 1);
            const auto mc = mc_tail_integrate(f, prefix, r.d, samples, c.seed(), c.integer("trunc"), c.threads);
            all_contained = all_contained && mc.contains(r.f_d);
            c.out << ',' << format_number(mc.mean) << ',' << format_number(mc.std_error) << ','
                  << (mc.contains(r.f_d) ? "true" : "false");
        }
        c.out << '\n';
    }
    return all_contained ? kExitPass : kExitFail;
}

// sosc -----------------------------------------------------------------------

int run_sosc(Ctx& c) {
    const auto r = slowly_oscillating_test(c.function("function"), c.real("eps"), c.integer("d"), c.integer("pairs"),
                                           c.seed(), c.integer("trunc"));
    const bool pass = r.verdict == OscillationReport::Verdict::PassAt;
    c.header();
    c.out << "verdict,d,sampled_sup,certified_bound,witness_x,witness_y\n";
    c.out << (pass ? "PassAt" : "FailWitness") << ',' << r.d << ',' << format_number(r.sampled_sup) << ','
          << (r.certified_bound ? format_number(*r.certified_bound) : "") << ',';
    if (r.witness)
        c.out << '"' << text::format(r.witness->first) << "\",\"" << text::format(r.witness->second) << '"';
    else
        c.out << ',';
    c.out << '\n';
    return pass ? kExitPass : kExitFail;
}

// dieudonne ------------------------------------------------------------------

nlohmann::ordered_json enclosure_json(const rounding::Enclosure& e) { return {e.lo, e.hi}; }

// JSON has no infinities; keep them readable instead of null.
nlohmann::ordered_json num(double x) {
    if (std::isfinite(x)) return x;
    return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

int run_dieudonne(Ctx& c) {
    dieudonne::Config cfg;
    cfg.c = c.real("c");
    cfg.shift = c.integer("s");
    cfg.check_terms = c.integer("check_terms");
    cfg.row_cap = c.integer("row_cap");
    const bool full = c.get("detail") == "full";
    if (!full && c.get("detail") != "summary") throw Error(ErrorCode::InvalidConfig, "detail must be summary or full");
    const std::size_t emit = c.integer("emit_ledger");
    if (emit > 1) throw Error(ErrorCode::InvalidConfig, "emit_ledger must be 0 or 1");
    const bool all_entries = full || emit == 1;
    const auto rep = dieudonne::verify_campaign(cfg, c.integer("stages"));

    nlohmann::ordered_json j;
    j["config"] = c.config_json();
    const auto& s = rep.sequence;
    j["sequence"] = {{"n_checked", s.n_checked},
                     {"partial_sum", num(s.partial_sum)},
                     {"tail_bound", num(s.tail_bound)},
                     {"sum_bound", num(s.sum_bound)},
                     {"sum_cap", dieudonne::to_string(s.sum_cap)},
                     {"max_term", num(s.max_term)},
                     {"term_cap", dieudonne::to_string(s.term_cap)},
                     {"decreasing", dieudonne::to_string(s.decreasing)},
                     {"divergence", dieudonne::to_string(s.divergence)},
                     {"divergence_note", s.divergence_note}};
    j["stages"] = nlohmann::ordered_json::array();
    for (const auto& st : rep.stages) {
        nlohmann::ordered_json js;
        js["n"] = st.n;
        js["q"] = st.q;
        js["k"] = st.k;
        js["status"] = dieudonne::to_string(st.status);
        js["h"] = st.h;
        js["rows"] = st.rows.size();
        js["sum_delta"] = enclosure_json(st.sum_delta);
        js["mu_b_lower"] = st.mu_b_lower;
        js["mu_d_lower"] = st.mu_d_lower;
        js["stop_rule_ok"] = st.stop_rule_ok;
        js["target_ok"] = st.target_ok;
        js["carry_ok"] = st.carry_ok;
        nlohmann::ordered_json checks;
        for (std::uint16_t bit = 1; bit <= 256; bit <<= 1) {
            std::size_t ok = 0;
            for (const auto& r : st.rows) ok += (r.checks & bit) ? 1 : 0;
            checks[dieudonne::row_check_name(bit)] = ok;
        }
        js["row_checks_passed"] = checks;
        if (!st.rows.empty()) {
            js["first_p"] = st.rows.front().p;
            js["last_p"] = st.rows.back().p;
        }
        if (full) {
            auto& rows = js["table"] = nlohmann::ordered_json::array();
            for (const auto& r : st.rows)
                rows.push_back({{"r", r.r},
                                {"index", r.index},
                                {"a", r.a},
                                {"p", r.p},
                                {"mu_c", enclosure_json(r.mu_c)},
                                {"mu_d", enclosure_json(r.mu_d)},
                                {"delta", enclosure_json(r.delta)},
                                {"beta", enclosure_json(r.beta)},
                                {"mu_a_upper", r.mu_a_upper},
                                {"below_violates", dieudonne::constraint_name(r.below_violates)}});
        }
        j["stages"].push_back(std::move(js));
    }
    j["total_mu_a"] = rep.total_mu_a;
    j["ledger_size"] = rep.ledger_size();
    auto& led = j[all_entries ? "ledger" : "ledger_failures"] = nlohmann::ordered_json::array();
    std::size_t failures = 0;
    dieudonne::for_each_ledger_entry(rep, [&](const dieudonne::LedgerEntry& e) {
        failures += e.pass ? 0 : 1;
        if (all_entries || !e.pass)
            led.push_back({{"stage", e.stage}, {"row", e.row}, {"name", e.name}, {"lhs", num(e.lhs)}, {"op", e.op},
                           {"rhs", num(e.rhs)}, {"pass", e.pass}});
    });
    j["ledger_failure_count"] = failures;
    j["failure"] = rep.failure ? nlohmann::ordered_json(to_string(*rep.failure)) : nlohmann::ordered_json(nullptr);
    j["failure_message"] = rep.failure_message;
    j["passed"] = rep.passed();
    c.out << j.dump(2) << '\n';
    return rep.passed() ? kExitPass : kExitFail;
}

// rgg ------------------------------------------------------------------------

rgg::Density density_of(const Ctx& c, std::size_t d) {
    const std::string& name = c.get("density");
    if (name == "uniform") return rgg::Density::unit_cube(d);
    if (name == "triangular") {
        rgg::Density f;
        for (std::size_t i = 0; i < d; ++i) f.axes.push_back({rgg::AxisDensity::Kind::Triangular, 0.0, 1.0, 0.5});
        return f;
    }
    throw Error(ErrorCode::UnsupportedDensity, "density must be uniform or triangular");
}

int run_rgg_asym(Ctx& c) {
    const std::size_t d = c.integer("d");
    const auto motif = rgg::motif_preset(c.get("motif"));
    const auto f = density_of(c, d);
    const rgg::Box A = rgg::Box::cube(d, c.real("a_lo"), c.real("a_hi"));
    const rgg::Schedule sched{rgg::parse_schedule_kind(c.get("regime")), c.real("c")};
    std::vector<std::size_t> ns;
    for (double v : c.list("n_list")) {
        if (v < 2 || v != std::floor(v)) throw Error(ErrorCode::InvalidConfig, "n_list entries must be integers >= 2");
        ns.push_back(static_cast<std::size_t>(v));
    }
    const auto table = rgg::asymptotic_check(motif, A, f, sched, ns, c.integer("seeds"), c.seed(), c.threads);
    c.header();
    int code = kExitPass;
    if (motif.k <= 4) {
        const auto mu = rgg::mu_gamma_A(motif, A, f, {c.integer("mu_samples"), c.seed(), c.threads});
        c.note("mu", mu.value);
        c.note("mu_stderr", mu.std_error);
        if (!table.rows.empty() && mu.value > 0) {
            const double rel = std::abs(table.rows.back().scaled - mu.value) / mu.value;
            c.note("relative_error", rel);
            c.note("trend_fraction", table.trend_fraction(mu.value));
            const bool pass = rel <= c.real("tol");
            c.note("verdict", pass ? "pass" : "fail");
            code = pass ? kExitPass : kExitFail;
        }
    } else {
        c.note("verdict", "unchecked (mu quadrature needs k <= 4)");
    }
    c.out << "n,r_n,count,scaled,stderr\n";
    for (const auto& r : table.rows)
        c.out << r.n << ',' << format_number(r.r) << ',' << format_number(r.mean_count) << ','
              << format_number(r.scaled) << ',' << format_number(r.std_error) << '\n';
    return code;
}

int run_rgg_walk(Ctx& c) {
    rgg::PointCloud cloud;
    if (c.get("points") == "random") {
        const std::size_t d = c.integer("d");
        cloud = rgg::sample_points(density_of(c, d), c.integer("n"), d, c.seed());
    } else {
        cloud = rgg::from_points(rgg::parse_points(read_file(c.get("points"))));
    }
    const auto q = c.list("query");
    if (q.size() != cloud.d) throw Error(ErrorCode::InvalidConfig, "query dimension does not match the points");
    const Eigen::VectorXd query = Eigen::Map<const Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()));
    const auto g = rgg::build_graph(cloud, c.real("r"));
    const auto w = rgg::greedy_walk(g, cloud, c.integer("start"), query);
    bool decreasing = true;
    for (std::size_t i = 1; i < w.distances.size(); ++i) decreasing = decreasing && w.distances[i] < w.distances[i - 1];
    c.header();
    c.note("terminal", std::to_string(w.terminal));
    c.note("nearest", std::to_string(w.nearest));
    c.note("success", w.success ? "true" : "false");
    c.note("strictly_decreasing", decreasing ? "true" : "false");
    c.out << "step,vertex,distance\n";
    for (std::size_t i = 0; i < w.path.size(); ++i)
        c.out << i << ',' << w.path[i] << ',' << format_number(w.distances[i]) << '\n';
    return w.success ? kExitPass : kExitFail;
}

int run_feasibility(Ctx& c) {
    const auto motif = rgg::motif_preset(c.get("motif"));
    const std::size_t d = c.integer("d");
    const auto r = rgg::feasibility_search(motif, d, c.integer("budget"), c.seed());
    c.header();
    c.note("result", r.found ? "Found" : "NotFound");
    c.note("evaluations", std::to_string(r.evaluations));
    c.note("restarts", std::to_string(r.restarts));
    c.note("note", r.note);
    c.out << "vertex";
    for (std::size_t j = 1; j <= d; ++j) c.out << ",x" << j;
    c.out << '\n';
    if (r.found)
        for (Eigen::Index i = 0; i < r.points.rows(); ++i) {
            c.out << i;
            for (Eigen::Index j = 0; j < r.points.cols(); ++j) c.out << ',' << format_number(r.points(i, j));
            c.out << '\n';
        }
    return r.found ? kExitPass : kExitFail;
}

std::vector<Command> commands() {
    const Param seed{"seed", Type::Int, "1", "random seed"};
    return {
        {"volume", "volume of a parallelepiped",
         {{"box", Type::Box, kUnitCube, "parallelepiped literal"}, {"tol", Type::Real, "1e-12", "error tolerance"}, seed},
         run_volume},
        {"cover", "boundary slab cover of the unit cube faces",
         {{"eps", Type::Real, "0.5", "total thickness budget"}, {"count", Type::Int, "8", "number of face pairs J"}, seed},
         run_cover},
        {"core", "delta-core membership and truncated core volumes",
         {{"base", Type::Box, kUnitCube, "base parallelepiped"},
          {"delta", Type::Real, "0.5", "core fraction"},
          {"x", Type::Sequence, "tail=Constant(0.5)", "point"},
          {"depth", Type::Int, "1000", "search depth"},
          {"from", Type::Int, "0", "D"},
          {"extra", Type::Int, "60", "coordinates beyond D"},
          seed},
         run_core},
        {"density", "densities along shrinking families, non-density and Lebesgue points",
         {{"mode", Type::Word, "sequence", "sequence | nondensity | lebesgue"},
          {"sets", Type::Boxes, kUnitCube, "parallelepipeds separated by |"},
          {"function", Type::Function, "none", "function literal or none"},
          {"x", Type::Sequence, "tail=Constant(0.5)", "centre"},
          {"side", Type::Real, "1", "initial side"},
          {"eta", Type::Real, "0.5", "shrink factor"},
          {"stages", Type::Int, "20", "number of stages"},
          {"depth", Type::Int, "1000", "core search depth"},
          {"eps", Type::Real, "0.1", "continuity tolerance"},
          seed},
         run_density},
        {"oscillate1d", "the one-dimensional oscillating density",
         {{"m_max", Type::Int, "12", "largest k"}, seed}, run_oscillate1d},
        {"jessen", "tail integrals f_d and their convergence",
         {{"function", Type::Function, "Linear(weights={tail=GeometricDrift(a=1, q=0.5, base=0)})", "function literal"},
          {"x", Type::Sequence, "tail=Constant(1)", "evaluation point"},
          {"dims", Type::List, "[1, 2, 4, 8, 16]", "values of d"},
          {"mc_samples", Type::Int, "0", "Monte Carlo samples (0: off)"},
          {"trunc", Type::Int, "2048", "Monte Carlo truncation depth"},
          seed},
         run_jessen},
        {"sosc", "slowly-oscillating class test",
         {{"function", Type::Function, "Opaque(limsup)", "function literal"},
          {"eps", Type::Real, "0.01", "oscillation tolerance"},
          {"d", Type::Int, "10", "prefix length"},
          {"pairs", Type::Int, "1000", "random pairs"},
          {"trunc", Type::Int, "2048", "truncation depth"},
          seed},
         run_sosc},
        {"dieudonne", "construction campaign with the inequality ledger (JSON)",
         {{"c", Type::Real, "0.01", "sequence constant"},
          {"s", Type::Int, "1", "sequence shift"},
          {"stages", Type::Int, "3", "stages to build"},
          {"check_terms", Type::Int, "1000000", "terms summed explicitly"},
          {"row_cap", Type::Int, "1048576", "rows per stage before giving up"},
          {"detail", Type::Word, "summary", "summary | full"},
          {"emit_ledger", Type::Int, "0", "1 writes every ledger entry, not just failures"},
          seed},
         run_dieudonne},
        {"rgg-asym", "subgraph-count limit check",
         {{"motif", Type::Word, "k2", "k2 | path3 | triangle | star{k} | path{k} | complete{k}"},
          {"d", Type::Int, "2", "dimension"},
          {"density", Type::Word, "uniform", "uniform | triangular"},
          {"regime", Type::Word, "thermodynamic", "sparse | thermodynamic | connectivity | dense"},
          {"c", Type::Real, "1", "schedule constant"},
          {"n_list", Type::List, "[20000]", "sample sizes"},
          {"seeds", Type::Int, "20", "replications per n"},
          {"a_lo", Type::Real, "0.25", "A = [a_lo, a_hi]^d"},
          {"a_hi", Type::Real, "0.75", "A = [a_lo, a_hi]^d"},
          {"mu_samples", Type::Int, "1000000", "Monte Carlo samples for mu"},
          {"tol", Type::Real, "0.05", "relative tolerance for the verdict"},
          seed},
         run_rgg_asym},
        {"rgg-walk", "greedy walk towards a query",
         {{"points", Type::Path, "random", "point list file or random"},
          {"n", Type::Int, "200", "random points"},
          {"d", Type::Int, "2", "dimension of random points"},
          {"density", Type::Word, "uniform", "uniform | triangular"},
          {"r", Type::Real, "0.15", "radius"},
          {"start", Type::Int, "0", "start vertex"},
          {"query", Type::List, "[0.5, 0.5]", "query point"},
          seed},
         run_rgg_walk},
        {"feasibility", "search for a unit-radius realisation of a motif",
         {{"motif", Type::Word, "star5", "motif preset"},
          {"d", Type::Int, "2", "dimension"},
          {"budget", Type::Int, "1000000", "loss evaluations"},
          seed},
         run_feasibility},
    };
}

int input_error(const std::string& msg) {
    std::cerr << "error: " << msg << '\n';
    return kExitInput;
}

bool is_input_error(ErrorCode code) {
    switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidArgument:
    case ErrorCode::NegativeTerm:
    case ErrorCode::NotFinitePositive:
    case ErrorCode::NotFiniteBase:
    case ErrorCode::PreconditionViolated:
    case ErrorCode::UnsupportedDensity:
    case ErrorCode::MotifTooLarge:
    case ErrorCode::CylinderBeyondD:
    case ErrorCode::OpaqueUnsupported:
    case ErrorCode::RepresentationOverflow:
        return true;
    default:
        return false;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Measures on R^infinity: volumes, densities, tail integrals, Dieudonne's set, random geometric graphs"};
    app.require_subcommand(1);

    auto cmds = commands();
    struct Bound {
        CLI::App* sub = nullptr;
        std::string config, out;
        std::optional<unsigned> threads;
        std::map<std::string, std::string> flags;
    };
    std::vector<Bound> bound(cmds.size());
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        auto& b = bound[i];
        b.sub = app.add_subcommand(cmds[i].name, cmds[i].help);
        b.sub->add_option("--config", b.config, "flat key = value or JSON config file");
        b.sub->add_option("--out", b.out, "output file (default stdout)");
        b.sub->add_option("--threads", b.threads, "worker threads (default MEASURE_INFINITY_THREADS or 1)");
        for (const auto& p : cmds[i].params) {
            std::string names = "--" + p.key;
            // underscore keys also answer to the hyphenated spelling
            if (p.key.find('_') != std::string::npos) {
                std::string dashed = p.key;
                std::replace(dashed.begin(), dashed.end(), '_', '-');
                names += ",--" + dashed;
            }
            b.sub->add_option(names, b.flags[p.key], p.help + " [" + p.def + "]");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    for (std::size_t i = 0; i < cmds.size(); ++i) {
        if (!bound[i].sub->parsed()) continue;
        const Command& cmd = cmds[i];
        Bound& b = bound[i];
        Ctx ctx;
        ctx.command = cmd.name;
        ctx.params = cmd.params;
        try {
            std::map<std::string, std::string> raw;
            for (const auto& p : cmd.params) raw[p.key] = p.def;
            if (!b.config.empty()) {
                const std::string src = read_file(b.config);
                const auto first = src.find_first_not_of(" \t\r\n");
                const auto cfg = first != std::string::npos && src[first] == '{' ? parse_json_config(src)
                                                                                 : parse_flat_config(src);
                for (const auto& [k, v] : cfg) {
                    if (k == "command") {
                        if (trim(v.value) != cmd.name)
                            throw Error(ErrorCode::InvalidConfig,
                                        "config is for '" + trim(v.value) + "', not '" + cmd.name + "'", v.line,
                                        v.column);
                        continue;
                    }
                    if (!raw.count(k)) throw Error(ErrorCode::InvalidConfig, "unknown key '" + k + "'", v.line, v.column);
                    raw[k] = v.value;
                }
            }
            for (const auto& p : cmd.params)
                if (b.sub->count("--" + p.key)) raw[p.key] = b.flags[p.key];
            for (const auto& p : cmd.params) ctx.values[p.key] = canonical(p, raw[p.key]);
            ctx.threads = random::resolve_threads(b.threads);
        } catch (const Error& e) {
            return input_error(e.what());
        }

        int code = kExitPass;
        try {
            code = cmd.run(ctx);
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return is_input_error(e.code()) ? kExitInput : kExitFail;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitFail;
        }
        if (b.out.empty()) {
            std::cout << ctx.out.str();
        } else {
            std::ofstream f(b.out, std::ios::binary);
            if (!f) return input_error("cannot write '" + b.out + "'");
            f << ctx.out.str();
        }
        return code;
    }
    return kExitInput;
}
