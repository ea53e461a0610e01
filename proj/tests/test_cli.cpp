#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out, err;
};

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("measinf_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

Run run(const std::string& args, const std::string& env = "") {
    const auto out = scratch() / "stdout", err = scratch() / "stderr";
    const std::string cmd = env + " " + quote(MEASINF_BIN) + " " + args + " >" + quote(out.string()) + " 2>" +
                            quote(err.string());
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

// Feed the emitted output back as --config; the result must be identical.
void check_round_trip(const std::string& command, const std::string& args) {
    const Run first = run(command + " " + args);
    REQUIRE(first.code != 2);
    const auto cfg = scratch() / "roundtrip.cfg";
    spit(cfg, first.out);
    const Run second = run(command + " --config " + quote(cfg.string()));
    CHECK(second.code == first.code);
    CHECK(second.out == first.out);
}

std::string fixture(const std::string& name) { return std::string(MEASINF_FIXTURES) + "/" + name; }

} // namespace

TEST_CASE("volume of the unit cube") {
    auto r = run("volume");
    CHECK(r.code == 0);
    CHECK(r.out.find("#! command = volume\n") == 0);
    CHECK(r.out.find("kind,value,error\nFinite,1,0\n") != std::string::npos);
}

TEST_CASE("cover and oscillate1d report pass verdicts") {
    auto c = run("cover --count 3");
    CHECK(c.code == 0);
    CHECK(c.out.find("# verdict = pass") != std::string::npos);
    CHECK(c.out.find("# bound = 0.4375") != std::string::npos);
    auto o = run("oscillate1d --m_max 3");
    CHECK(o.code == 0);
    CHECK(o.out.find("k,half_width,average\n1,1/2,1/6\n2,1/4,1/3\n3,1/8,1/6\n") != std::string::npos);
}

TEST_CASE("input errors exit with 2 and a located diagnostic") {
    auto r = run("volume --box " + quote("lower={tail=Bogus}"));
    CHECK(r.code == 2);
    CHECK(r.err.find("ParseError") != std::string::npos);
    CHECK(r.err.find("1:13") != std::string::npos);

    const auto cfg = scratch() / "bad.cfg";
    spit(cfg, "tol = 1e-9\nbogus = 1\n");
    auto u = run("volume --config " + quote(cfg.string()));
    CHECK(u.code == 2);
    CHECK(u.err.find("InvalidConfig at 2:1") != std::string::npos);

    spit(cfg, "command = cover\n");
    CHECK(run("volume --config " + quote(cfg.string())).code == 2);
    CHECK(run("volume --config " + quote((scratch() / "missing.cfg").string())).code == 2);
    CHECK(run("density --mode nonsense").code == 2);
    CHECK(run("").code == 2);
}

TEST_CASE("JSON configs are accepted") {
    const auto cfg = scratch() / "volume.json";
    spit(cfg, R"({"command": "volume", "box": "lower={prefix=[0.25]; tail=Constant(0)}; upper={tail=Constant(1)}"})");
    auto r = run("volume --config " + quote(cfg.string()));
    CHECK(r.code == 0);
    CHECK(r.out.find("Finite,0.75,0") != std::string::npos);
}

TEST_CASE("flags override config values") {
    const auto cfg = scratch() / "cover.cfg";
    spit(cfg, "count = 5\n");
    auto r = run("cover --config " + quote(cfg.string()) + " --count 2");
    CHECK(r.out.find("#! count = 2\n") != std::string::npos);
}

TEST_CASE("emitted output round-trips as a config") {
    check_round_trip("volume", "--box " + quote("lower={prefix=[0.5]; tail=Constant(0)}; upper={tail=Constant(1)}"));
    check_round_trip("cover", "--count 4 --eps 0.25");
    check_round_trip("density", "--stages 6");
    check_round_trip("oscillate1d", "--m_max 5");
    check_round_trip("rgg-asym", "--n_list " + quote("[200, 400]") + " --seeds 2 --mu_samples 2000");
    check_round_trip("dieudonne", "--stages 0 --check_terms 1000");
    check_round_trip("rgg-walk", "--n 50 --r 0.3");
}

TEST_CASE("output is independent of the thread count") {
    const std::string args = "rgg-asym --n_list " + quote("[500]") + " --seeds 4 --mu_samples 5000";
    auto one = run(args + " --threads 1");
    auto three = run(args + " --threads 3");
    auto env = run(args, "MEASURE_INFINITY_THREADS=2");
    CHECK(one.out == three.out);
    CHECK(one.out == env.out);
}

TEST_CASE("--out writes to a file") {
    const auto path = scratch() / "out.csv";
    auto r = run("volume --out " + quote(path.string()));
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    CHECK(slurp(path).find("Finite,1,0") != std::string::npos);
}

TEST_CASE("dieudonne with a huge constant fails on the carry") {
    auto r = run("dieudonne --c 10 --stages 1 --check-terms 1000 --emit-ledger 1");
    CHECK(r.code == 1);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["failure"] == "CarryUnverifiable");
    CHECK(j["passed"] == false);
    CHECK(j["sequence"]["sum_cap"] == "fail");
    CHECK(j["config"]["emit_ledger"] == "1");
    CHECK(j.contains("ledger"));
    CHECK(run("dieudonne --emit-ledger 2 --stages 0").code == 2);
}

TEST_CASE("dieudonne with no stages passes with an empty ledger") {
    auto r = run("dieudonne --stages 0 --check_terms 1000 --emit_ledger 1");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["ledger_size"] == 0);
    CHECK(j["ledger"].empty());
    CHECK(j["passed"] == true);
}

TEST_CASE("greedy walk stalls on the committed fixture") {
    auto r = run("rgg-walk --points " + quote(fixture("greedy_local_minimum.txt")) + " --r 1 --start 0 --query " +
                 quote("[0, 0]"));
    CHECK(r.code == 1);
    CHECK(r.out.find("# terminal = 1\n") != std::string::npos);
    CHECK(r.out.find("# nearest = 2\n") != std::string::npos);
    CHECK(r.out.find("# strictly_decreasing = true\n") != std::string::npos);
}

TEST_CASE("feasibility search") {
    auto found = run("feasibility --motif star5 --budget 200000");
    CHECK(found.code == 0);
    CHECK(found.out.find("Found") != std::string::npos);
    auto nf = run("feasibility --motif star7 --budget 20000");
    CHECK(nf.code == 1);
    CHECK(nf.out.find("not a proof") != std::string::npos);
}
