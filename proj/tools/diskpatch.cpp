// diskpatch: run, verify, report and resume contour-dynamics experiments.
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "diskpatch/cli_io.hpp"
#include "diskpatch/error.hpp"
#include "diskpatch/parallel.hpp"

using namespace diskpatch;

namespace {

int with_config(const std::string& path, const std::string& output, int (*cmd)(const RunConfig&, std::ostream&)) {
    RunConfig c;
    try {
        c = load_config(path, process_env());
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    if (!output.empty()) c.output_dir = output;
    return cmd(c, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vortex patches in a disk: contour dynamics and bound checks"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "worker threads, 0 for all cores; output does not depend on it")->check(CLI::NonNegativeNumber);

    std::string config, output, snapshot, run_dir;

    auto* run = app.add_subcommand("run", "evolve a scenario and write a run directory");
    run->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
    run->add_option("--output", output, "run directory (overrides output_dir)");
    run->add_option("--resume", snapshot, "continue from this snapshot instead of the initial data");

    auto* verify = app.add_subcommand("verify", "run the bound checks and write reports/");
    verify->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
    verify->add_option("--output", output, "directory for reports/");

    auto* report = app.add_subcommand("report", "summarise a finished run directory");
    report->add_option("run_dir", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);

    auto* resume = app.add_subcommand("resume", "continue a run from a snapshot");
    resume->add_option("snapshot", snapshot, "snapshot file")->required()->check(CLI::ExistingFile);
    resume->add_option("--config", config, "replacement config (same hash; T may change)")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    set_thread_count(threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency()));

    if (*run) {
        if (!snapshot.empty()) {
            try {
                RunConfig c = load_config(config, process_env());
                if (!output.empty()) c.output_dir = output;
                return cmd_resume(snapshot, c, std::cerr);
            } catch (const Error& e) {
                std::cerr << e.what() << "\n";
                return 2;
            }
        }
        return with_config(config, output, cmd_run);
    }
    if (*verify) return with_config(config, output, cmd_verify);
    if (*report) return cmd_report(run_dir, std::cout);
    if (*resume) {
        std::optional<RunConfig> c;
        if (!config.empty()) {
            try {
                c = load_config(config, process_env());
            } catch (const Error& e) {
                std::cerr << e.what() << "\n";
                return 2;
            }
        }
        return cmd_resume(snapshot, c, std::cerr);
    }
    return 2;
}
