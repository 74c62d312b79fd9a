#include "anomalyscan/econometrics.hpp"
#include "anomalyscan/errors.hpp"
#include "anomalyscan/panel.hpp"
#include "anomalyscan/portfolio.hpp"
#include "cli/commands.hpp"
#include "cli/run_config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace anomalyscan;
using namespace anomalyscan::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("anomalyscan_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
    return out;
}

int run(std::string_view cmd, const RunConfig& c, const fs::path& out) {
    std::ostringstream err;
    return run_command(cmd, c, out, err);
}

// Small fixture set shared by the tests below.
const fs::path& fixtures() {
    static const fs::path dir = [] {
        const fs::path d = scratch("fixtures");
        RunConfig c;
        c.seed = 3;
        c.synth.n_stocks = 40;
        c.synth.n_months = 150;
        c.synth.daily_stocks = 8;
        c.synth.regimes = {{0, 80, -0.4}};
        if (run("synth", c, d) != 0) throw std::runtime_error("synth failed");
        return d;
    }();
    return dir;
}

RunConfig small_config() {
    RunConfig c;
    c.monthly = (fixtures() / "monthly_returns.csv").string();
    c.factors = (fixtures() / "factors.csv").string();
    c.daily = (fixtures() / "daily_bars.csv").string();
    c.j = {1, 12};
    c.k = {1, 6};
    c.min_days = 5;
    return c;
}

} // namespace

TEST(RunConfig, JsonRoundTripAndUnknownKeys) {
    RunConfig c = small_config();
    c.lag = 3;
    c.synth.regimes = {{1, 2, -0.25}};
    const auto back = RunConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
    EXPECT_EQ(back.to_json(), c.to_json());
    EXPECT_EQ(config_hash(back), config_hash(c));
    EXPECT_THROW(RunConfig::from_json(nlohmann::json::parse(R"({"windows": 60})")), ValidationError);
    EXPECT_THROW(RunConfig::from_json(nlohmann::json::parse(R"({"j": "1"})")), ValidationError);
    EXPECT_THROW(parse_month_key("2001-13"), ValidationError);
}

TEST(RunConfig, HashIsFnv1a) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    RunConfig a;
    RunConfig b;
    b.step = 6;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(header_line(a).rfind("# anomalyscan ", 0), 0u);
}

TEST(Cli, MissingInputIsValidationError) {
    RunConfig c;
    c.monthly = "/nonexistent/monthly.csv";
    std::ostringstream err;
    EXPECT_EQ(run_command("backtest", c, scratch("missing"), err), 1);
    EXPECT_NE(err.str().find("/nonexistent/monthly.csv"), std::string::npos);
    EXPECT_EQ(run_command("nosuch", c, scratch("missing"), err), 1);
}

TEST(Cli, ConstantIndexIsComputationError) {
    const fs::path dir = scratch("constant_index");
    fs::create_directories(dir);
    std::ofstream f(dir / "factors.csv");
    f << "year,month,mkt,smb,hml,index_logret\n";
    for (int i = 0; i < 120; ++i) f << 2000 + i / 12 << ',' << i % 12 + 1 << ",0.01,0.0,0.0,0.005\n";
    f.close();
    RunConfig c;
    c.factors = (dir / "factors.csv").string();
    EXPECT_EQ(run("regimes", c, dir / "out"), 2);
}

TEST(Cli, BacktestMatchesLibraryCalls) {
    RunConfig c = small_config();
    c.raw = true;
    const fs::path out = scratch("backtest");
    ASSERT_EQ(run("backtest", c, out), 0);
    const auto panel = load_monthly_panel(c.monthly);
    std::istringstream in(slurp(out / "raw_returns.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, header_line(c));
    std::getline(in, line);
    EXPECT_EQ(line, "j,k,mean,t,stars,n");
    for (int j : c.j) {
        for (int k : c.k) {
            ASSERT_TRUE(std::getline(in, line));
            const auto s = strategy_series(panel, StrategySpec{j, k, 1});
            const auto t = nw_mean_test(s.values());
            std::istringstream row(line);
            std::string field[6];
            for (auto& x : field) std::getline(row, x, ',');
            EXPECT_EQ(std::stoi(field[0]), j);
            EXPECT_EQ(std::stoi(field[1]), k);
            EXPECT_EQ(std::stod(field[2]), t.mean);
            EXPECT_EQ(std::stod(field[3]), t.hac_t);
            EXPECT_EQ(field[4], significance_stars(t.hac_t));
            EXPECT_EQ(std::stoul(field[5]), s.observations.size());
        }
    }
}

TEST(Cli, EveryCommandIsByteDeterministic) {
    const RunConfig c = small_config();
    for (const char* cmd : {"backtest", "scan", "regress", "regimes", "synth"}) {
        const fs::path a = scratch(std::string("det_a_") + cmd);
        const fs::path b = scratch(std::string("det_b_") + cmd);
        ASSERT_EQ(run(cmd, c, a), 0) << cmd;
        ASSERT_EQ(run(cmd, c, b), 0) << cmd;
        const auto ta = tree(a);
        EXPECT_EQ(ta, tree(b)) << cmd;
        EXPECT_TRUE(ta.count("run_config.json")) << cmd;
        for (const auto& [name, text] : ta) {
            if (name != "run_config.json") EXPECT_EQ(text.rfind(header_line(c) + "\n", 0), 0u) << cmd << " " << name;
        }
    }
}

TEST(Cli, EmptyGridGivesHeaderOnlyOutputs) {
    RunConfig c = small_config();
    c.j.clear();
    const fs::path out = scratch("empty");
    ASSERT_EQ(run("backtest", c, out), 0);
    const std::string h = header_line(c) + "\n";
    EXPECT_EQ(slurp(out / "strategy_returns.csv"), h + "j,k,skip,side,formation_year,formation_month,bh_return\n");
    EXPECT_EQ(slurp(out / "raw_returns.csv"), h + "j,k,mean,t,stars,n\n");
    ASSERT_EQ(run("scan", c, out), 0);
    EXPECT_EQ(slurp(out / "scan_values.csv"), h + "j,k,window_start,window_end,label,n,mean,t,class\n");
    ASSERT_EQ(run("regress", c, out), 0);
    EXPECT_EQ(slurp(out / "regressions.csv"), h + "j,k,model,dummy,coef_name,estimate,hac_se,t,stars,n,lag\n");
}

TEST(Cli, SynthOutputsLoadBack) {
    const auto panel = load_monthly_panel(fixtures() / "monthly_returns.csv");
    EXPECT_EQ(panel.n_stocks(), 40u);
    EXPECT_EQ(panel.n_months(), 150u);
    const auto f = load_factors(fixtures() / "factors.csv");
    EXPECT_TRUE(f.index_logret && f.macro_index);
    EXPECT_EQ(load_daily_bars(fixtures() / "daily_bars.csv").stocks().size(), 8u);
}
