#include "diskpatch/cli_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "diskpatch/bounds_lab.hpp"
#include "diskpatch/error.hpp"

namespace fs = std::filesystem;

namespace diskpatch {

namespace {

[[noreturn]] void config_error(const std::string& key, int line, const std::string& what) {
    std::string where = line > 0 ? "line " + std::to_string(line) : (line == 0 ? "environment" : "config");
    throw Error(ErrorKind::Config, where + ": " + key + ": " + what);
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_real(const std::string& k, const std::string& v, int line) {
    const char* b = v.c_str();
    char* e = nullptr;
    double x = std::strtod(b, &e);
    if (v.empty() || *e != '\0') config_error(k, line, "expected a real number, got '" + v + "'");
    return x;
}

std::int64_t to_int(const std::string& k, const std::string& v, int line) {
    const char* b = v.c_str();
    char* e = nullptr;
    long long x = std::strtoll(b, &e, 10);
    if (v.empty() || *e != '\0') config_error(k, line, "expected an integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& k, const std::string& v, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    config_error(k, line, "expected true or false, got '" + v + "'");
}

struct Field {
    const char* name;
    const char* section;
    std::function<void(RunConfig&, const std::string&, int)> set;
    std::function<std::string(const RunConfig&)> get;
    bool required = false;
    bool hashed = true;
};

std::string fmt_int(std::int64_t v) { return std::to_string(v); }

const char* scenario_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::single_patch: return "single_patch";
        case ScenarioKind::symmetric_pair: return "symmetric_pair";
        case ScenarioKind::ks_example: return "ks_example";
    }
    return "?";
}

#define REAL(NAME, SEC, EXPR) \
    Field{NAME, SEC, [](RunConfig& c, const std::string& v, int l) { EXPR = to_real(NAME, v, l); }, \
          [](const RunConfig& c) { return format_real(EXPR); }}
#define INT(NAME, SEC, EXPR, TYPE) \
    Field{NAME, SEC, [](RunConfig& c, const std::string& v, int l) { EXPR = static_cast<TYPE>(to_int(NAME, v, l)); }, \
          [](const RunConfig& c) { return fmt_int(static_cast<std::int64_t>(EXPR)); }}

const std::vector<Field>& fields() {
    static const std::vector<Field> f = [] {
        std::vector<Field> v;
        v.push_back(Field{"scenario", "scenario",
                          [](RunConfig& c, const std::string& s, int l) {
                              if (s == "single_patch") c.scenario.kind = ScenarioKind::single_patch;
                              else if (s == "symmetric_pair") c.scenario.kind = ScenarioKind::symmetric_pair;
                              else if (s == "ks_example") c.scenario.kind = ScenarioKind::ks_example;
                              else config_error("scenario", l, "unknown scenario '" + s + "'");
                          },
                          [](const RunConfig& c) { return std::string(scenario_name(c.scenario.kind)); }, true});
        v.push_back(INT("N", "scenario", c.scenario.N, std::size_t));
        v.back().required = true;
        v.push_back(Field{"shape", "scenario",
                          [](RunConfig& c, const std::string& s, int l) {
                              if (s == "ellipse") c.scenario.shape = Shape::ellipse;
                              else if (s == "perturbed_circle") c.scenario.shape = Shape::perturbed_circle;
                              else config_error("shape", l, "unknown shape '" + s + "'");
                          },
                          [](const RunConfig& c) {
                              return std::string(c.scenario.shape == Shape::ellipse ? "ellipse" : "perturbed_circle");
                          }});
        v.push_back(REAL("disk_x", "scenario", c.scenario.disk.center.x1));
        v.push_back(REAL("disk_y", "scenario", c.scenario.disk.center.x2));
        v.push_back(REAL("disk_radius", "scenario", c.scenario.disk.radius));
        v.push_back(REAL("center_x", "scenario", c.scenario.center.x1));
        v.push_back(REAL("center_y", "scenario", c.scenario.center.x2));
        v.push_back(REAL("axis_a", "scenario", c.scenario.axis_a));
        v.push_back(REAL("axis_b", "scenario", c.scenario.axis_b));
        v.push_back(REAL("tilt", "scenario", c.scenario.tilt));
        v.push_back(REAL("perturb_amp", "scenario", c.scenario.perturb_amp));
        v.push_back(INT("perturb_mode", "scenario", c.scenario.perturb_mode, int));
        v.push_back(REAL("theta", "scenario", c.scenario.theta));
        v.push_back(REAL("strip", "scenario", c.scenario.strip));
        v.push_back(REAL("rounding", "scenario", c.scenario.rounding));
        v.push_back(REAL("gamma_cone", "scenario", c.scenario.gamma_cone));
        v.push_back(REAL("marker_x1", "scenario", c.scenario.marker_x1));

        v.push_back(REAL("dt", "numerics", c.step.dt));
        v.back().required = true;
        v.push_back(INT("refinement", "numerics", c.step.quad.refinement, int));
        v.push_back(REAL("h_min", "numerics", c.step.h_min));
        v.push_back(REAL("h_max", "numerics", c.step.h_max));
        v.push_back(REAL("curvature_refine", "numerics", c.step.curvature_refine));
        v.push_back(Field{"symmetry_axis", "numerics",
                          [](RunConfig& c, const std::string& s, int l) { c.step.symmetry_axis = to_bool("symmetry_axis", s, l); },
                          [](const RunConfig& c) { return std::string(c.step.symmetry_axis ? "true" : "false"); }});
        v.push_back(INT("max_nodes", "numerics", c.step.max_nodes, std::size_t));

        v.push_back(REAL("T", "run", c.T));
        v.back().required = true;
        v.back().hashed = false;
        v.push_back(INT("snapshot_every", "run", c.snapshot_every, std::int64_t));
        v.push_back(INT("diagnostics_every", "run", c.diagnostics_every, std::int64_t));
        v.push_back(INT("redistribute_every", "run", c.redistribute_every, std::int64_t));
        v.push_back(Field{"seed", "run",
                          [](RunConfig& c, const std::string& s, int l) {
                              std::int64_t x = to_int("seed", s, l);
                              if (x < 0) config_error("seed", l, "must be non-negative");
                              c.seed = static_cast<std::uint64_t>(x);
                          },
                          [](const RunConfig& c) { return std::to_string(c.seed); }});
        v.push_back(Field{"output_dir", "run", [](RunConfig& c, const std::string& s, int) { c.output_dir = s; },
                          [](const RunConfig& c) { return c.output_dir; }});
        v.back().hashed = false;
        v.push_back(Field{"resume_from", "run", [](RunConfig& c, const std::string& s, int) { c.resume_from = s; },
                          [](const RunConfig& c) { return c.resume_from.value_or(""); }});
        v.back().hashed = false;

        v.push_back(REAL("gamma", "diagnostics", c.gamma));
        v.back().required = true;
        v.push_back(REAL("envelope_eps", "diagnostics", c.envelope_eps));
        v.push_back(REAL("corner_x", "diagnostics", c.corner.x1));
        v.push_back(REAL("corner_y", "diagnostics", c.corner.x2));
        v.push_back(INT("corner_rows", "diagnostics", c.corner_rows, int));
        v.push_back(REAL("contact_tol", "diagnostics", c.contact_tol));
        return v;
    }();
    return f;
}

#undef REAL
#undef INT

const Field* find_field(const std::string& k) {
    for (const auto& f : fields())
        if (k == f.name) return &f;
    return nullptr;
}

void check_constraints(const RunConfig& c, const std::map<std::string, int>& lines) {
    auto line = [&](const char* k) {
        auto it = lines.find(k);
        return it == lines.end() ? -1 : it->second;
    };
    auto need = [&](bool ok, const char* k, const char* what) {
        if (!ok) config_error(k, line(k), what);
    };
    need(c.gamma > 0.0 && c.gamma < 1.0, "gamma", "must lie in (0, 1)");
    need(c.scenario.N >= 8, "N", "must be at least 8");
    need(c.step.dt > 0.0 && std::isfinite(c.step.dt), "dt", "must be positive");
    need(c.T > 0.0 && std::isfinite(c.T), "T", "must be positive");
    need(c.step.h_min > 0.0, "h_min", "must be positive");
    need(c.step.h_max > c.step.h_min, "h_max", "must exceed h_min");
    need(c.step.curvature_refine > 0.0, "curvature_refine", "must be positive");
    need(c.step.quad.refinement >= 1, "refinement", "must be at least 1");
    need(c.step.max_nodes >= 8, "max_nodes", "must be at least 8");
    need(c.snapshot_every >= 0, "snapshot_every", "must be non-negative (0: final snapshot only)");
    need(c.diagnostics_every >= 1, "diagnostics_every", "must be at least 1");
    need(c.redistribute_every >= 0, "redistribute_every", "must be non-negative (0: never)");
    need(c.scenario.disk.radius > 0.0, "disk_radius", "must be positive");
    need(c.envelope_eps >= 0.0 && c.envelope_eps < 1.0, "envelope_eps", "must lie in [0, 1)");
    need(c.corner_rows >= 8, "corner_rows", "must be at least 8");
    need(c.contact_tol > 0.0, "contact_tol", "must be positive");
    need(c.output_dir.size() > 0, "output_dir", "must not be empty");
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

double parse_real_cell(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    char* e = nullptr;
    double v = std::strtod(s.c_str(), &e);
    if (s.empty() || *e != '\0') throw Error(ErrorKind::Io, "bad number in time series: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

RunOptions run_options(const RunConfig& c) {
    RunOptions o;
    o.T = c.T;
    o.diagnostics_every = c.diagnostics_every;
    o.snapshot_every = c.snapshot_every;
    o.redistribute_every = c.redistribute_every;
    o.diag.gamma = c.gamma;
    o.diag.seed = c.seed;
    o.diag.corner = c.corner;
    o.diag.corner_rows = c.corner_rows;
    o.diag.contact_tol = c.contact_tol;
    o.envelope_eps = c.envelope_eps;
    return o;
}

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v) return std::nullopt;
        return std::string(v);
    };
}

RunConfig parse_config(const std::string& text, const EnvLookup& env) {
    std::map<std::string, std::pair<std::string, int>> kv;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    static const char* sections[] = {"scenario", "numerics", "run", "diagnostics"};
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') config_error(line, lineno, "malformed section header");
            std::string s = trim(line.substr(1, line.size() - 2));
            if (std::find_if(std::begin(sections), std::end(sections), [&](const char* x) { return s == x; }) == std::end(sections))
                config_error("[" + s + "]", lineno, "unknown section");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) config_error(line, lineno, "expected key = value");
        std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (k.empty()) config_error("(empty key)", lineno, "expected key = value");
        if (!find_field(k)) config_error(k, lineno, "unknown key");
        if (kv.count(k)) config_error(k, lineno, "duplicate key (first set on line " + std::to_string(kv[k].second) + ")");
        kv[k] = {v, lineno};
    }
    if (env) {
        for (const auto& f : fields()) {
            std::string name = "DISKPATCH_";
            for (const char* p = f.name; *p; ++p) name += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
            if (auto v = env(name)) kv[f.name] = {trim(*v), 0};
        }
    }
    RunConfig c;
    std::map<std::string, int> lines;
    for (const auto& f : fields()) {
        auto it = kv.find(f.name);
        if (it == kv.end()) {
            if (f.required) config_error(f.name, -1, "missing required key");
            continue;
        }
        f.set(c, it->second.first, it->second.second);
        lines[f.name] = it->second.second;
    }
    if (c.resume_from && c.resume_from->empty()) c.resume_from.reset();
    check_constraints(c, lines);
    return c;
}

RunConfig load_config(const std::string& path, const EnvLookup& env) { return parse_config(read_file(path), env); }

std::string canonical_config(const RunConfig& c) {
    std::string out, section;
    for (const auto& f : fields()) {
        if (section != f.section) {
            if (!section.empty()) out += "\n";
            section = f.section;
            out += "[" + section + "]\n";
        }
        if (std::string(f.name) == "resume_from" && !c.resume_from) continue;
        out += std::string(f.name) + " = " + f.get(c) + "\n";
    }
    return out;
}

std::string config_hash(const RunConfig& c) {
    std::string s;
    for (const auto& f : fields())
        if (f.hashed) s += std::string(f.name) + "=" + f.get(c) + "\n";
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s)));
    return buf;
}

// ---- time series ----

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_header(std::size_t patches) {
    std::string h = "t,kappa_max";
    for (std::size_t k = 1; k <= patches; ++k) h += ",area_" + std::to_string(k);
    h += ",delta_sep,A_inf,A_sup,A_gamma,x1_leftmost,omega_corner,a_env,b_env";
    return h;
}

std::string csv_row(const DiagnosticsRecord& r) {
    std::string s = format_real(r.t) + "," + format_real(r.kappa_max);
    for (double a : r.areas) s += "," + format_real(a);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double v : {r.delta_sep, r.A_inf, r.A_sup, r.A_gamma, r.x1_leftmost, r.omega_corner, r.a_env.value_or(nan),
                     r.b_env.value_or(nan)})
        s += "," + format_real(v);
    return s;
}

std::string timeseries_csv(const std::vector<DiagnosticsRecord>& rows) {
    std::string out = csv_header(rows.empty() ? 0 : rows.front().areas.size()) + "\n";
    for (const auto& r : rows) out += csv_row(r) + "\n";
    return out;
}

std::vector<DiagnosticsRecord> parse_timeseries(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::Io, "empty time series");
    auto head = split(line, ',');
    if (head.size() < 10 || head[0] != "t" || head[1] != "kappa_max") throw Error(ErrorKind::Io, "unexpected time series header");
    const std::size_t patches = head.size() - 10;
    if (line != csv_header(patches)) throw Error(ErrorKind::Io, "unexpected time series header");
    std::vector<DiagnosticsRecord> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto c = split(line, ',');
        if (c.size() != head.size()) throw Error(ErrorKind::Io, "time series row has the wrong number of fields");
        std::vector<double> v;
        for (const auto& s : c) v.push_back(parse_real_cell(s));
        DiagnosticsRecord r;
        std::size_t i = 0;
        r.t = v[i++];
        r.kappa_max = v[i++];
        for (std::size_t k = 0; k < patches; ++k) r.areas.push_back(v[i++]);
        r.delta_sep = v[i++];
        r.A_inf = v[i++];
        r.A_sup = v[i++];
        r.A_gamma = v[i++];
        r.x1_leftmost = v[i++];
        r.omega_corner = v[i++];
        if (!std::isnan(v[i])) r.a_env = v[i];
        ++i;
        if (!std::isnan(v[i])) r.b_env = v[i];
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_atomic(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorKind::Io, "cannot open " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, p, ec);
    if (ec) throw Error(ErrorKind::Io, "rename to " + p.string() + " failed: " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot read " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

// ---- snapshots ----

namespace {

nlohmann::json points_json(const std::vector<Point>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : v) a.push_back({p.x1, p.x2});
    return a;
}

std::vector<Point> points_from(const nlohmann::json& a) {
    std::vector<Point> v;
    for (const auto& p : a) v.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return v;
}

}  // namespace

std::string snapshot_json(const SimState& s, const std::string& config_hash) {
    nlohmann::ordered_json j;
    j["t"] = s.t;
    j["step"] = s.step_index;
    j["patches"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < s.ps.patches.size(); ++k) {
        nlohmann::ordered_json p;
        p["theta"] = s.ps.patches[k].theta;
        p["nodes"] = points_json(s.ps.patches[k].boundary.nodes());
        p["w"] = points_json(k < s.w.size() ? s.w[k] : std::vector<Vec2>{});
        j["patches"].push_back(std::move(p));
    }
    j["config_hash"] = config_hash;
    j["disk"] = {{"center", {s.ps.disk.center.x1, s.ps.disk.center.x2}}, {"radius", s.ps.disk.radius}};
    j["markers"] = points_json(s.markers);
    j["envelope"] = {{"active", s.env.active}, {"a", s.env.a}, {"b", s.env.b}};
    j["projection_flag"] = s.projection_flag;
    return j.dump();
}

SimState parse_snapshot(const std::string& line, std::string* config_hash) {
    SimState s;
    try {
        auto j = nlohmann::json::parse(line);
        s.t = j.at("t").get<double>();
        s.step_index = j.at("step").get<std::int64_t>();
        if (j.contains("disk")) {
            const auto& d = j["disk"];
            s.ps.disk.center = {d.at("center").at(0).get<double>(), d.at("center").at(1).get<double>()};
            s.ps.disk.radius = d.at("radius").get<double>();
        }
        for (const auto& p : j.at("patches")) {
            s.ps.patches.push_back({p.at("theta").get<double>(), ClosedCurve(points_from(p.at("nodes")))});
            s.w.push_back(points_from(p.at("w")));
        }
        if (j.contains("markers")) s.markers = points_from(j["markers"]);
        if (j.contains("envelope")) {
            const auto& e = j["envelope"];
            s.env = {e.at("active").get<bool>(), e.at("a").get<double>(), e.at("b").get<double>()};
        }
        if (j.contains("projection_flag")) s.projection_flag = j["projection_flag"].get<bool>();
        if (config_hash) *config_hash = j.at("config_hash").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Io, std::string("malformed snapshot: ") + e.what());
    }
    check_state(s);
    return s;
}

std::string snapshot_path(const std::string& run_dir, std::int64_t step) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "step_%010lld.jsonl", static_cast<long long>(step));
    return (fs::path(run_dir) / "snapshots" / buf).string();
}

std::string write_snapshot(const std::string& run_dir, const SimState& s, const std::string& config_hash) {
    std::string p = snapshot_path(run_dir, s.step_index);
    write_atomic(p, snapshot_json(s, config_hash) + "\n");
    return p;
}

SimState load_snapshot(const std::string& path, std::string* config_hash) {
    std::string text = read_file(path);
    std::istringstream in(text);
    std::string line, last;
    while (std::getline(in, line))
        if (!trim(line).empty()) last = line;
    if (last.empty()) throw Error(ErrorKind::Io, "empty snapshot " + path);
    return parse_snapshot(last, config_hash);
}

// ---- commands ----

namespace {

class DirSink : public RunSink {
public:
    DirSink(std::string dir, std::string hash, std::vector<DiagnosticsRecord> rows, std::ostream& log)
        : dir_(std::move(dir)), hash_(std::move(hash)), rows_(std::move(rows)), log_(log) {}

    void record(const DiagnosticsRecord& r, const SimState&) override { rows_.push_back(r); }
    void snapshot(const SimState& s) override {
        write_snapshot(dir_, s, hash_);
        last_snap_ = s.step_index;
        flush();
    }
    void failed(const SimState& s, const Error& e) override {
        log_ << "run stopped at t = " << format_real(s.t) << ": " << e.what() << "\n";
        write_snapshot(dir_, s, hash_);
        flush();
        write_atomic((fs::path(dir_) / "failure.txt").string(),
                     std::string(error_kind_name(e.kind())) + "\n" + e.what() + "\nt = " + format_real(s.t) + "\n");
    }
    void finish(const SimState& s) {
        if (last_snap_ != s.step_index) write_snapshot(dir_, s, hash_);
        flush();
    }
    void flush() { write_atomic((fs::path(dir_) / "timeseries.csv").string(), timeseries_csv(rows_)); }
    std::size_t rows() const { return rows_.size(); }

private:
    std::string dir_, hash_;
    std::vector<DiagnosticsRecord> rows_;
    std::ostream& log_;
    std::int64_t last_snap_ = -1;
};

void write_config_files(const std::string& dir, const RunConfig& c) {
    write_atomic((fs::path(dir) / "config.ini").string(), canonical_config(c));
    write_atomic((fs::path(dir) / "config.hash").string(), config_hash(c) + "\n");
}

template <class F>
int guarded(std::ostream& log, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        log << "error (" << error_kind_name(e.kind()) << "): " << e.what() << "\n";
        return e.kind() == ErrorKind::Config ? 2 : 1;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int cmd_run(const RunConfig& c, std::ostream& log) {
    return guarded(log, [&] {
        if (c.resume_from) return cmd_resume(*c.resume_from, c, log);
        fs::create_directories(c.output_dir);
        fs::remove_all(fs::path(c.output_dir) / "snapshots");
        fs::remove(fs::path(c.output_dir) / "failure.txt");
        write_config_files(c.output_dir, c);
        DirSink sink(c.output_dir, config_hash(c), {}, log);
        SimState end = run(c.scenario, c.step, run_options(c), sink);
        sink.finish(end);
        log << "run complete: t = " << format_real(end.t) << ", " << sink.rows() << " records in " << c.output_dir << "\n";
        return 0;
    });
}

int cmd_resume(const std::string& snapshot, const std::optional<RunConfig>& config, std::ostream& log) {
    return guarded(log, [&] {
        fs::path snap(snapshot);
        std::string dir = snap.parent_path().parent_path().string();
        if (dir.empty()) dir = ".";
        RunConfig c = config ? *config : load_config((fs::path(dir) / "config.ini").string());
        c.resume_from.reset();
        c.output_dir = dir;
        std::string hash;
        SimState s = load_snapshot(snapshot, &hash);
        if (hash != config_hash(c)) throw Error(ErrorKind::Config, "snapshot config hash " + hash + " does not match " + config_hash(c));
        std::vector<DiagnosticsRecord> rows;
        fs::path csv = fs::path(dir) / "timeseries.csv";
        if (fs::exists(csv)) rows = parse_timeseries(read_file(csv.string()));
        // rows past the snapshot belong to the interrupted tail
        rows.erase(std::remove_if(rows.begin(), rows.end(), [&](const DiagnosticsRecord& r) { return r.t > s.t; }), rows.end());
        write_config_files(dir, c);
        DirSink sink(dir, hash, std::move(rows), log);
        SimState end = run_from(s, c.step, run_options(c), sink, true);
        sink.finish(end);
        log << "resumed from step " << s.step_index << ": t = " << format_real(end.t) << ", " << sink.rows() << " records\n";
        return 0;
    });
}

int cmd_verify(const RunConfig& c, std::ostream& log) {
    return guarded(log, [&] {
        const bool zero = c.scenario.theta == 0.0;
        const std::size_t N = c.scenario.N;
        auto ellipse = [&](double cx, double cy, double a, double b, double tilt) {
            ScenarioSpec s;
            s.disk = c.scenario.disk;
            s.center = {c.scenario.disk.center.x1 + cx * c.scenario.disk.radius, c.scenario.disk.center.x2 + cy * c.scenario.disk.radius};
            s.axis_a = a * c.scenario.disk.radius;
            s.axis_b = b * c.scenario.disk.radius;
            s.tilt = tilt;
            s.N = N;
            s.theta = zero ? 0.0 : 1.0;
            return s;
        };
        std::vector<BoundReport> reps;

        reps.push_back(verify_grad_log_bound({ellipse(0, 0, 0.5, 0.5, 0), ellipse(0, 0.55, 0.4, 0.05, 0), ellipse(0, 0, 0.4, 0.2, 0)}, c.gamma));

        SourceFn f = zero ? SourceFn([](Point) { return 0.0; }) : SourceFn(default_source);
        reps.push_back(verify_hessian_tangent_disk({0.5, 0.25, 0.125}, {0.1, 1.0, 10.0}, f));

        BoundReport i1;
        i1.name = "I1_identity";
        const double f0 = zero ? 0.0 : 1.0;
        for (int cells : {1024, 2048}) {
            double worst = 0.0;
            for (double r : {0.5, 0.25, 0.125})
                for (double a : {0.1, 1.0, 10.0}) worst = std::max(worst, verify_I1_identity(r, a * r, f0, cells));
            i1.refinement_trend.push_back({double(cells), worst});
        }
        i1.samples = 9;
        i1.sup_ratio = i1.refinement_trend.back().second;
        i1.verdict = i1.sup_ratio <= 1e-5 ? Verdict::bounded : Verdict::unbounded_trend;
        reps.push_back(i1);

        std::vector<PatchSet> shapes = zero ? std::vector<PatchSet>{PatchSet{c.scenario.disk, {}}} : keylemma_shapes(10, c.seed, N);
        reps.push_back(verify_keylemma(shapes, c.scenario.gamma_cone));

        reps.push_back(verify_image_hessian_bound({ellipse(0, 0.7, 0.28, 0.28, 0), ellipse(0.1, 0.6, 0.3, 0.15, 0.4)}, c.gamma));

        int status = 0;
        for (const auto& r : reps) {
            write_atomic((fs::path(c.output_dir) / "reports" / (r.name + ".json")).string(), to_json(r) + "\n");
            log << r.name << ": " << verdict_name(r.verdict) << " (sup " << format_real(r.sup_ratio) << ", " << r.samples << " samples)\n";
            if (r.verdict != Verdict::bounded) status = 3;
        }
        return status;
    });
}

int cmd_report(const std::string& run_dir, std::ostream& log) {
    return guarded(log, [&] {
        fs::path dir(run_dir);
        RunConfig c = load_config((dir / "config.ini").string());
        std::string stored = trim(read_file((dir / "config.hash").string()));
        std::string hash = config_hash(c);
        if (stored != hash) throw Error(ErrorKind::Config, "config hash mismatch: stored " + stored + ", config gives " + hash);
        if (fs::exists(dir / "snapshots")) {
            std::vector<fs::path> snaps;
            for (const auto& e : fs::directory_iterator(dir / "snapshots"))
                if (e.path().extension() == ".jsonl") snaps.push_back(e.path());
            std::sort(snaps.begin(), snaps.end());
            if (!snaps.empty()) {
                std::string h;
                load_snapshot(snaps.back().string(), &h);
                if (h != hash) throw Error(ErrorKind::Config, "snapshot " + snaps.back().filename().string() + " has config hash " + h);
            }
        }
        auto rows = parse_timeseries(read_file((dir / "timeseries.csv").string()));
        std::ostringstream out;
        out << "run " << run_dir << " (config " << hash << ", " << rows.size() << " records)\n";
        if (!rows.empty())
            out << "kappa_max: " << format_real(rows.front().kappa_max) << " at t = " << format_real(rows.front().t) << " -> "
                << format_real(rows.back().kappa_max) << " at t = " << format_real(rows.back().t) << "\n";

        std::vector<std::pair<double, double>> kap;
        for (const auto& r : rows) kap.push_back({r.t, r.kappa_max});
        try {
            GrowthFit g = fit_growth(kap);
            out << "kappa_max growth: " << model_name(g.model) << " (r2 " << format_real(g.r2) << "; exponential r2 "
                << format_real(g.exp_fit.r2) << " rate " << format_real(g.exp_fit.params[1]) << "; double_exponential r2 "
                << format_real(g.dexp_fit.r2) << " inner rate " << format_real(g.dexp_fit.params[2]) << ")\n";
        } catch (const Error& e) {
            out << "kappa_max growth: not fitted (" << e.what() << ")\n";
        }

        std::vector<double> ts, ls;
        for (const auto& r : rows)
            if (std::isfinite(r.x1_leftmost) && r.x1_leftmost > 0.0) {
                ts.push_back(r.t);
                ls.push_back(std::log(r.x1_leftmost));
            }
        if (ts.size() >= 2) {
            double mt = 0, ml = 0;
            for (std::size_t i = 0; i < ts.size(); ++i) {
                mt += ts[i];
                ml += ls[i];
            }
            mt /= ts.size();
            ml /= ts.size();
            double sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < ts.size(); ++i) {
                sxx += (ts[i] - mt) * (ts[i] - mt);
                sxy += (ts[i] - mt) * (ls[i] - ml);
            }
            if (sxx > 0) out << "leftmost contact: log x1 decays at rate " << format_real(-sxy / sxx) << " per unit time\n";
        } else {
            out << "leftmost contact: no positive samples\n";
        }

        try {
            BoundReport a = verify_a_ode(rows);
            out << "A-ODE constants: C_sup " << format_real(a.details[0].second) << ", C_inf " << format_real(a.details[1].second)
                << ", C_gamma " << format_real(a.details[2].second) << "\n";
            write_atomic((dir / "reports" / "a_ode.json").string(), to_json(a) + "\n");
        } catch (const Error& e) {
            out << "A-ODE constants: not fitted (" << e.what() << ")\n";
        }
        write_atomic((dir / "summary.txt").string(), out.str());
        log << out.str();
        return 0;
    });
}

}  // namespace diskpatch
