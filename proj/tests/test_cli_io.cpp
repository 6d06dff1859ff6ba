#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "diskpatch/cli_io.hpp"
#include "diskpatch/error.hpp"

using namespace diskpatch;
namespace fs = std::filesystem;

namespace {

const char* minimal = R"(# steady circle
[scenario]
scenario = single_patch
N = 64
axis_a = 0.5
axis_b = 0.5

[numerics]
dt = 0.05
refinement = 1

[run]
T = 0.5

[diagnostics]
gamma = 0.5
corner_rows = 200
)";

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("diskpatch_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string config_error_text(const std::string& text) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        return e.what();
    }
    return "";
}

bool same_bits(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

TEST_CASE("minimal config parses with defaults filled in") {
    RunConfig c = parse_config(minimal);
    CHECK(c.scenario.kind == ScenarioKind::single_patch);
    CHECK(c.scenario.N == 64);
    CHECK(c.step.dt == 0.05);
    CHECK(c.T == 0.5);
    CHECK(c.gamma == 0.5);
    CHECK(c.diagnostics_every == 1);
    CHECK(c.snapshot_every == 0);
    CHECK(!c.resume_from);
}

TEST_CASE("bad configs are rejected with the key and line") {
    std::string g = std::string(minimal);
    g.replace(g.find("gamma = 0.5"), 11, "gamma = 1.5");
    std::string msg = config_error_text(g);
    CHECK(msg.find("gamma") != std::string::npos);
    CHECK(msg.find("line 16") != std::string::npos);

    std::string u = std::string(minimal) + "dtt = 0.1\n";
    msg = config_error_text(u);
    CHECK(msg.find("dtt") != std::string::npos);
    CHECK(msg.find("line 18") != std::string::npos);

    CHECK(config_error_text("scenario = single_patch\nN = 64\ndt = 0.1\ngamma = 0.5\n").find("T") != std::string::npos);
    CHECK(config_error_text(std::string(minimal) + "N = 32\n").find("duplicate") != std::string::npos);
    CHECK(config_error_text(std::string(minimal) + "[solver]\n").find("unknown section") != std::string::npos);
    CHECK(config_error_text(std::string(minimal) + "diagnostics_every = 0\n").find("diagnostics_every") != std::string::npos);
    CHECK(config_error_text(std::string(minimal) + "seed = abc\n").find("integer") != std::string::npos);
    CHECK(config_error_text(std::string(minimal) + "shape = square\n").find("shape") != std::string::npos);
}

TEST_CASE("environment overrides the file") {
    std::map<std::string, std::string> env{{"DISKPATCH_DT", "0.025"}, {"DISKPATCH_SYMMETRY_AXIS", "true"}};
    EnvLookup look = [&](const std::string& k) -> std::optional<std::string> {
        auto it = env.find(k);
        if (it == env.end()) return std::nullopt;
        return it->second;
    };
    RunConfig c = parse_config(minimal, look);
    CHECK(c.step.dt == 0.025);
    CHECK(c.step.symmetry_axis);
    env["DISKPATCH_GAMMA"] = "0";
    CHECK_THROWS_AS(parse_config(minimal, look), Error);
}

TEST_CASE("canonical config round trips and the hash ignores T and output_dir") {
    RunConfig c = parse_config(minimal);
    c.scenario.tilt = 0.1;  // not exactly representable in short decimal
    c.envelope_eps = 1.0 / 3.0;
    std::string text = canonical_config(c);
    RunConfig back = parse_config(text);
    CHECK(canonical_config(back) == text);
    CHECK(back.scenario.tilt == c.scenario.tilt);
    CHECK(back.envelope_eps == c.envelope_eps);
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);

    RunConfig t = c;
    t.T = 7.0;
    t.output_dir = "elsewhere";
    CHECK(config_hash(t) == config_hash(c));
    RunConfig d = c;
    d.step.dt = 0.04;
    CHECK(config_hash(d) != config_hash(c));
}

TEST_CASE("time series CSV round trips bitwise, absent values as nan") {
    std::vector<DiagnosticsRecord> rows(3);
    for (int i = 0; i < 3; ++i) {
        auto& r = rows[i];
        r.t = 0.1 * i;
        r.kappa_max = std::exp(0.3 * i) / 3.0;
        r.areas = {0.7853981633974483, 0.1 + i};
        r.delta_sep = i == 0 ? std::numeric_limits<double>::infinity() : 0.01 / (i + 1);
        r.A_inf = 1.0 / 7.0;
        r.A_sup = 2.0;
        r.A_gamma = 3.5;
        r.x1_leftmost = -0.3;
        r.omega_corner = 1e-300;
        if (i == 2) {
            r.a_env = 1e-20;
            r.b_env = 0.01;
        }
    }
    std::string csv = timeseries_csv(rows);
    CHECK(csv.substr(0, csv.find('\n')) ==
          "t,kappa_max,area_1,area_2,delta_sep,A_inf,A_sup,A_gamma,x1_leftmost,omega_corner,a_env,b_env");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    auto back = parse_timeseries(csv);
    REQUIRE(back.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(same_bits(back[i].t, rows[i].t));
        CHECK(same_bits(back[i].kappa_max, rows[i].kappa_max));
        CHECK(back[i].areas == rows[i].areas);
        CHECK(same_bits(back[i].delta_sep, rows[i].delta_sep));
        CHECK(same_bits(back[i].A_inf, rows[i].A_inf));
        CHECK(same_bits(back[i].omega_corner, rows[i].omega_corner));
        CHECK(back[i].a_env == rows[i].a_env);
        CHECK(back[i].b_env == rows[i].b_env);
    }
    CHECK(timeseries_csv(back) == csv);
    CHECK_THROWS_AS(parse_timeseries("t,kappa\n"), Error);
}

TEST_CASE("snapshot round trips a two-patch state bitwise") {
    RunConfig c = parse_config(minimal);
    c.scenario.kind = ScenarioKind::symmetric_pair;
    c.scenario.center = {0.4, 0.1};
    c.scenario.axis_a = 0.2;
    c.scenario.axis_b = 0.13;
    SimState s = initial_state(c.scenario, run_options(c));
    s.t = 0.123456789;
    s.step_index = 42;
    s.markers = {{0.1, -0.99498743710662}};
    s.env = {true, 1e-20, 1.0 / 3.0};
    s.projection_flag = true;
    REQUIRE(s.ps.patches.size() == 2);

    std::string hash;
    SimState back = parse_snapshot(snapshot_json(s, "0123456789abcdef"), &hash);
    CHECK(back == s);
    CHECK(hash == "0123456789abcdef");

    fs::path dir = scratch("snap");
    std::string p = write_snapshot(dir.string(), s, "h");
    CHECK(fs::path(p).filename() == "step_0000000042.jsonl");
    CHECK(load_snapshot(p) == s);
    CHECK_THROWS_AS(parse_snapshot("{\"t\": 1}"), Error);
    fs::remove_all(dir);
}

TEST_CASE("cmd_run on the steady circle writes a complete run directory") {
    fs::path dir = scratch("run");
    RunConfig c = parse_config(minimal);
    c.output_dir = dir.string();
    c.snapshot_every = 4;
    std::ostringstream log;
    REQUIRE(cmd_run(c, log) == 0);
    CHECK(fs::exists(dir / "config.ini"));
    CHECK(read_file((dir / "config.hash").string()) == config_hash(c) + "\n");
    auto rows = parse_timeseries(read_file((dir / "timeseries.csv").string()));
    CHECK(rows.size() == 11);
    for (const auto& r : rows) CHECK(std::abs(r.kappa_max - 2.0) <= 1e-3 * 2.0);
    // steps 0, 4, 8 on the cadence plus the final step 10
    CHECK(fs::exists(snapshot_path(dir.string(), 0)));
    CHECK(fs::exists(snapshot_path(dir.string(), 8)));
    CHECK(fs::exists(snapshot_path(dir.string(), 10)));
    CHECK(!fs::exists(dir / "failure.txt"));
    CHECK(cmd_report(dir.string(), log) == 0);
    CHECK(fs::exists(dir / "summary.txt"));

    // edited config no longer matches the stored hash
    write_atomic((dir / "config.hash").string(), "0000000000000000\n");
    CHECK(cmd_report(dir.string(), log) == 2);
    fs::remove_all(dir);
}

TEST_CASE("resume after an early stop reproduces the uninterrupted run byte for byte") {
    fs::path a = scratch("full"), b = scratch("part");
    RunConfig c = parse_config(minimal);
    c.scenario.axis_b = 0.35;
    c.scenario.center = {0.1, 0.0};
    c.T = 0.6;
    c.diagnostics_every = 2;
    c.snapshot_every = 3;
    c.output_dir = a.string();
    std::ostringstream log;
    REQUIRE(cmd_run(c, log) == 0);

    RunConfig early = c;
    early.T = 0.4;
    early.output_dir = b.string();
    REQUIRE(cmd_run(early, log) == 0);
    // pretend the run died just after step 6: later rows and snapshots are stale
    fs::remove(snapshot_path(b.string(), 8));
    REQUIRE(cmd_resume(snapshot_path(b.string(), 6), c, log) == 0);

    CHECK(read_file((a / "timeseries.csv").string()) == read_file((b / "timeseries.csv").string()));
    CHECK(read_file(snapshot_path(a.string(), 12)) == read_file(snapshot_path(b.string(), 12)));

    RunConfig other = c;
    other.step.dt = 0.04;
    CHECK(cmd_resume(snapshot_path(b.string(), 6), other, log) == 2);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("cmd_report names a double-exponential curvature trend") {
    fs::path dir = scratch("report");
    RunConfig c = parse_config(minimal);
    write_atomic((dir / "config.ini").string(), canonical_config(c));
    write_atomic((dir / "config.hash").string(), config_hash(c) + "\n");
    std::vector<DiagnosticsRecord> rows;
    for (int i = 0; i <= 30; ++i) {
        DiagnosticsRecord r;
        r.t = 0.1 * i;
        r.kappa_max = std::exp(std::exp(r.t));
        r.areas = {0.1};
        r.delta_sep = std::numeric_limits<double>::infinity();
        r.A_inf = 1.0;
        r.A_sup = std::exp(r.t);
        r.A_gamma = 2.0 * std::exp(r.t);
        r.x1_leftmost = 0.05 * std::exp(-0.5 * r.t);
        r.omega_corner = 1.0;
        rows.push_back(r);
    }
    write_atomic((dir / "timeseries.csv").string(), timeseries_csv(rows));
    std::ostringstream log;
    REQUIRE(cmd_report(dir.string(), log) == 0);
    std::string out = log.str();
    CHECK(out.find("double_exponential") != std::string::npos);
    CHECK(out.find("decays at rate 0.5") != std::string::npos);
    CHECK(read_file((dir / "summary.txt").string()) == out);
    fs::remove_all(dir);
}

TEST_CASE("cmd_verify with zero vorticity reports every bound as bounded") {
    fs::path dir = scratch("verify");
    RunConfig c = parse_config(minimal);
    c.scenario.theta = 0.0;
    c.output_dir = dir.string();
    std::ostringstream log;
    CHECK(cmd_verify(c, log) == 0);
    for (const char* n : {"grad_log_bound", "hessian_tangent_disk", "I1_identity", "keylemma", "image_hessian_bound"})
        CHECK_MESSAGE(fs::exists(dir / "reports" / (std::string(n) + ".json")), n);
    fs::remove_all(dir);
}

TEST_CASE("module errors surface as exit code 1 with failure.txt") {
    fs::path dir = scratch("fail");
    RunConfig c = parse_config(minimal);
    c.scenario.center = {0.7, 0.0};  // pokes out of the disk
    c.output_dir = dir.string();
    std::ostringstream log;
    CHECK(cmd_run(c, log) == 1);
    CHECK(log.str().find("error") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("shipped configs parse") {
    for (const char* n : {"steady_circle.ini", "strip.ini"}) {
        RunConfig c = load_config(std::string(DISKPATCH_SOURCE_DIR) + "/tools/configs/" + n);
        CHECK_MESSAGE(c.output_dir.rfind("runs/", 0) == 0, n);
    }
}
