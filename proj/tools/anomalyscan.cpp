#include "cli/commands.hpp"
#include "cli/run_config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Flags {
    std::string config;
    std::string out = "out";
    std::optional<std::string> monthly, daily, factors;
    std::optional<std::vector<int>> j, k;
    std::optional<int> skip, window, step, lag;
    std::optional<std::uint64_t> seed;
    bool raw = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON run configuration");
    cmd->add_option("--out", f.out, "output directory")->capture_default_str();
    cmd->add_option("--monthly", f.monthly, "monthly returns CSV");
    cmd->add_option("--daily", f.daily, "daily bars CSV");
    cmd->add_option("--factors", f.factors, "factors CSV");
    cmd->add_option("--j", f.j, "estimation horizons, comma separated")->delimiter(',');
    cmd->add_option("--k", f.k, "holding horizons, comma separated")->delimiter(',');
    cmd->add_option("--skip", f.skip, "skip months");
    cmd->add_option("--window", f.window, "scan window M (months)");
    cmd->add_option("--step", f.step, "scan step a (months)");
    cmd->add_option("--lag", f.lag, "Newey-West lag (default: automatic)");
    cmd->add_option("--seed", f.seed, "generator seed");
    cmd->add_flag("--raw", f.raw, "full-precision numbers");
}

anomalyscan::cli::RunConfig merge(const Flags& f) {
    auto c = f.config.empty() ? anomalyscan::cli::RunConfig{} : anomalyscan::cli::RunConfig::load(f.config);
    if (f.monthly) c.monthly = *f.monthly;
    if (f.daily) c.daily = *f.daily;
    if (f.factors) c.factors = *f.factors;
    if (f.j) c.j = *f.j;
    if (f.k) c.k = *f.k;
    if (f.skip) c.skip = *f.skip;
    if (f.window) c.window = *f.window;
    if (f.step) c.step = *f.step;
    if (f.lag) c.lag = *f.lag;
    if (f.seed) c.seed = *f.seed;
    if (f.raw) c.raw = true;
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"anomalyscan: J-K contrarian/momentum research engine"};
    app.require_subcommand(1);
    Flags flags;
    const char* commands[][2] = {
        {"backtest", "strategy returns and the raw-return table"},
        {"scan", "rolling-window significance grid"},
        {"regress", "CAPM, three-factor and dummy-augmented regressions"},
        {"regimes", "market-condition series and regime splits"},
        {"synth", "write a synthetic fixture set"},
    };
    for (auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    anomalyscan::cli::RunConfig config;
    try {
        config = merge(flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return anomalyscan::cli::run_command(name, config, flags.out, std::cerr);
}
