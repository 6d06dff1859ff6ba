#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "diskpatch/diagnostics.hpp"
#include "diskpatch/dynamics.hpp"
#include "diskpatch/scenarios.hpp"

namespace diskpatch {

struct RunConfig {
    ScenarioSpec scenario;
    StepConfig step;
    double T = 1.0;
    double gamma = 0.5;
    std::string output_dir = "run";
    std::int64_t snapshot_every = 0;  // 0: only the final snapshot
    std::int64_t diagnostics_every = 1;
    std::int64_t redistribute_every = 0;
    std::uint64_t seed = 20240601;
    double envelope_eps = 0.0;
    Point corner{1e-2, 1e-2};
    int corner_rows = 4000;
    double contact_tol = 1e-3;
    std::optional<std::string> resume_from;
};

RunOptions run_options(const RunConfig& c);

// name -> value, or nullopt; used for DISKPATCH_<KEY> overrides
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// Key-value text: "[section]" headers, "key = value", '#' comments. Keys are
// unique across sections. Throws Config errors naming the key and line.
RunConfig parse_config(const std::string& text, const EnvLookup& env = nullptr);
RunConfig load_config(const std::string& path, const EnvLookup& env = nullptr);

// Every key, fixed order, 17 significant digits; parse_config reads it back.
std::string canonical_config(const RunConfig& c);
// FNV-1a of the canonical text without T, output_dir and resume_from, 16 hex digits.
std::string config_hash(const RunConfig& c);

std::string format_real(double v);  // %.17g, "inf", "-inf", "nan"
std::string csv_header(std::size_t patches);
std::string csv_row(const DiagnosticsRecord& r);
std::string timeseries_csv(const std::vector<DiagnosticsRecord>& rows);
std::vector<DiagnosticsRecord> parse_timeseries(const std::string& text);

// Write to a sibling temp file, then rename over the target.
void write_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::string snapshot_json(const SimState& s, const std::string& config_hash);
SimState parse_snapshot(const std::string& line, std::string* config_hash = nullptr);
std::string snapshot_path(const std::string& run_dir, std::int64_t step);
std::string write_snapshot(const std::string& run_dir, const SimState& s, const std::string& config_hash);
SimState load_snapshot(const std::string& path, std::string* config_hash = nullptr);

// Exit codes: 0 ok, 1 module error, 2 config or usage error, 3 verify found an unbounded trend.
int cmd_run(const RunConfig& c, std::ostream& log);
int cmd_resume(const std::string& snapshot, const std::optional<RunConfig>& config, std::ostream& log);
int cmd_verify(const RunConfig& c, std::ostream& log);
int cmd_report(const std::string& run_dir, std::ostream& log);

}  // namespace diskpatch
