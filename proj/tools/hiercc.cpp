// Experiment driver for hierarchical coded matrix multiplication.
//
// Subcommands: simulate | optimize-profile | run | sweep | tradeoff | fit.
// A JSON config file declares the experiment; the flags below override the
// matching config fields.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hiercc/cli/commands.hpp"

using namespace hiercc;

namespace {

struct GlobalFlags {
    std::string configPath;
    std::string outPath;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> threads;
    std::optional<std::string> points;
};

cli::ExperimentConfig resolve_config(const GlobalFlags& flags) {
    cli::ExperimentConfig config;
    if (!flags.configPath.empty()) config = cli::load_config(flags.configPath);
    if (flags.seed) config.seed = *flags.seed;
    if (flags.trials) config.trials = *flags.trials;
    if (flags.threads) config.threads = *flags.threads;
    if (flags.points) config.points = point_kind_from_string(*flags.points);
    return config;
}

std::ostream& open_out(const GlobalFlags& flags, std::ofstream& file) {
    if (flags.outPath.empty()) return std::cout;
    file.open(flags.outPath);
    if (!file) throw std::invalid_argument("cannot open output " + flags.outPath);
    return file;
}

void add_common(CLI::App* cmd, GlobalFlags& flags) {
    cmd->add_option("--config", flags.configPath, "JSON experiment config");
    cmd->add_option("--out", flags.outPath, "output path (default: stdout)");
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--trials", flags.trials, "override the Monte Carlo trial count");
    cmd->add_option("--threads", flags.threads, "worker thread budget (0: hardware)");
    cmd->add_option("--points", flags.points, "evaluation points: chebyshev|integer");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical coded matrix multiplication toolkit"};
    app.require_subcommand(1);

    GlobalFlags flags;
    std::string aPath, bPath, logPath, schedulePath, samplesPath;

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo finishing-time sweep (CSV)");
    add_common(simulate, flags);

    auto* optimize = app.add_subcommand("optimize-profile", "recovery profile design (JSON)");
    add_common(optimize, flags);

    auto* run = app.add_subcommand("run", "execute one job in-process (JSON report)");
    add_common(run, flags);
    run->add_option("--a", aPath, "matrix A file (binary format)");
    run->add_option("--b", bPath, "matrix B file (binary format)");
    run->add_option("--log-out", logPath, "write the completion log CSV here");
    run->add_option("--schedule-out", schedulePath, "write schedules and partition JSON here");

    auto* sweepCmd = app.add_subcommand("sweep", "repeated runtime comparison (CSV)");
    add_common(sweepCmd, flags);

    auto* tradeoff = app.add_subcommand("tradeoff", "hybrid decode/compute frontier (CSV)");
    add_common(tradeoff, flags);

    auto* fit = app.add_subcommand("fit", "shifted-exponential fit of samples (JSON)");
    add_common(fit, flags);
    fit->add_option("samples", samplesPath, "CSV of time samples")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const auto config = resolve_config(flags);
        std::ofstream file;
        std::ostream& os = open_out(flags, file);
        if (simulate->parsed()) {
            cli::cmd_simulate(config, os);
        } else if (optimize->parsed()) {
            os << cli::cmd_optimize_profile(config).dump(2) << '\n';
        } else if (run->parsed()) {
            if (aPath.empty() != bPath.empty())
                throw std::invalid_argument("provide both --a and --b, or neither");
            if (!aPath.empty()) {
                const Matrix a = load_matrix(aPath);
                const Matrix b = load_matrix(bPath);
                os << cli::cmd_run(config, &a, &b, logPath, schedulePath).dump(2) << '\n';
            } else {
                os << cli::cmd_run(config, nullptr, nullptr, logPath, schedulePath).dump(2)
                   << '\n';
            }
        } else if (sweepCmd->parsed()) {
            cli::cmd_sweep(config, os);
        } else if (tradeoff->parsed()) {
            cli::cmd_tradeoff(config, os);
        } else if (fit->parsed()) {
            std::ifstream is(samplesPath);
            if (!is) throw std::invalid_argument("cannot open " + samplesPath);
            os << cli::cmd_fit(is).dump(2) << '\n';
        }
    } catch (const NotYetRecoverable& e) {
        std::cerr << "unrecoverable job: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
