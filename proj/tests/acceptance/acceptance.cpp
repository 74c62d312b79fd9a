// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include "anomalyscan/econometrics.hpp"
#include "anomalyscan/panel.hpp"
#include "anomalyscan/portfolio.hpp"
#include "anomalyscan/regimes.hpp"
#include "anomalyscan/scan.hpp"
#include "anomalyscan/synth.hpp"
#include "anomalyscan/volmodels.hpp"
#include "cli/commands.hpp"
#include "cli/run_config.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace anomalyscan;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and thresholds.
constexpr double kPortfolioTol = 1e-12;
constexpr double kPortfolioSeconds = 1.0;
constexpr double kNwTol = 1e-10;
constexpr double kNoiselessTol = 1e-10;
constexpr double kSeMultiple = 3.0;
constexpr int kRegressionSeeds = 100;
constexpr int kRegressionPass = 95;
constexpr int kGarchSeeds = 100;
constexpr int kGarchPass = 90;
constexpr double kGarchRelTol = 0.25;
constexpr double kGarchLoglikSlack = 1e-6;
constexpr double kGarchFitSeconds = 30.0;
constexpr double kGradientTol = 1e-4;
constexpr double kAmihudTol = 1e-15;
constexpr int kScanNullSeeds = 20;
constexpr double kScanNullRate = 0.90;
constexpr int kScanPowerSeeds = 10;
constexpr double kScanPowerRate = 0.80;
constexpr double kScanSeconds = 60.0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const char* name, const std::function<Outcome()>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  %-34s %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
}

MonthlyPanel synth_panel(std::uint64_t seed, int n_stocks, int n_months, std::vector<RhoSegment> regimes = {}) {
    SynthSpec s;
    s.seed = seed;
    s.n_stocks = n_stocks;
    s.n_months = n_months;
    s.regimes = std::move(regimes);
    return gen_panel(s);
}

// i.i.d. N(0, noise^2) returns: no loadings, no drift, no reversal.
MonthlyPanel null_panel(std::uint64_t seed, int n_stocks, int n_months) {
    SynthSpec s;
    s.seed = seed;
    s.n_stocks = n_stocks;
    s.n_months = n_months;
    s.loading_mean = {0, 0, 0};
    s.loading_sd = {0, 0, 0};
    s.factor_mean = {0, 0, 0};
    return gen_panel(s);
}

std::vector<std::pair<int, int>> full_grid() {
    std::vector<std::pair<int, int>> g;
    for (int j : default_scan_horizons()) {
        for (int k : default_scan_horizons()) g.emplace_back(j, k);
    }
    return g;
}

Outcome portfolio_oracle() {
    const auto p = synth_panel(11, 30, 120, {{0, 119, -0.3}});
    double worst = 0.0;
    double lib_seconds = 0.0;
    bool shape_ok = true;
    for (int j : {1, 12}) {
        for (int k : {1, 6}) {
            const StrategySpec spec{j, k, 1};
            const auto t0 = std::chrono::steady_clock::now();
            const auto got = strategy_series(p, spec);
            lib_seconds += seconds_since(t0);
            const auto want = oracle::strategy_series(p, j, k, 1, Side::Contrarian);
            if (got.observations.size() != want.size() || want.empty()) {
                shape_ok = false;
                continue;
            }
            for (std::size_t i = 0; i < want.size(); ++i) {
                shape_ok = shape_ok && got.observations[i].formation_month == want[i].formation_month;
                worst = std::max(worst, std::abs(got.observations[i].bh_return - want[i].value));
            }
        }
    }
    return {shape_ok && worst <= kPortfolioTol && lib_seconds < kPortfolioSeconds,
            "max |diff| " + fmt("%.3g", worst) + ", library time " + fmt("%.4f", lib_seconds) + "s"};
}

Outcome negation_symmetry() {
    const auto p = synth_panel(12, 100, 240, {{0, 119, -0.5}});
    StrategyEngine engine(p);
    engine.prepare(default_scan_horizons(), default_scan_horizons(), 4);
    std::size_t mismatches = 0;
    std::size_t compared = 0;
    for (auto [j, k] : full_grid()) {
        const auto con = engine.series(StrategySpec{j, k, 1, Side::Contrarian});
        const auto mom = engine.series(StrategySpec{j, k, 1, Side::Momentum});
        if (con.observations.size() != mom.observations.size()) {
            ++mismatches;
            continue;
        }
        for (std::size_t i = 0; i < con.observations.size(); ++i) {
            ++compared;
            mismatches += !(con.observations[i].bh_return == -mom.observations[i].bh_return);
        }
    }
    return {mismatches == 0 && compared > 0,
            std::to_string(compared) + " pairs over 121 cells, " + std::to_string(mismatches) + " mismatches"};
}

Outcome newey_west_oracle() {
    double worst = 0.0;
    int cases = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(1000 + seed);
        const std::size_t n = 40 + 13 * seed;
        // AR(1) series with a drift, so the autocovariances matter.
        std::vector<double> x(n);
        double prev = 0.0;
        for (auto& v : x) {
            prev = 0.4 * prev + rng.normal();
            v = 0.1 + prev;
        }
        std::vector<double> a(n), b(n), y(n);
        std::vector<std::vector<double>> rows;
        for (std::size_t t = 0; t < n; ++t) {
            a[t] = rng.normal();
            b[t] = 0.3 * a[t] + rng.normal();
            y[t] = 0.5 + a[t] - 2.0 * b[t] + (1.0 + 0.5 * std::abs(a[t])) * x[t];
            rows.push_back({1.0, a[t], b[t]});
        }
        auto design = DesignMatrix::with_intercept(n);
        design.add_column("a", a).add_column("b", b);
        for (int lag : {0, 1, 4, automatic_lag(n)}) {
            const auto m = nw_mean_test(x, lag);
            const auto mo = oracle::nw_mean(x, lag);
            worst = std::max(worst, std::abs(m.hac_se - mo.se));
            const auto r = ols_hac(y, design, lag);
            const auto ro = oracle::ols_hac(y, rows, lag);
            for (std::size_t j = 0; j < 3; ++j) worst = std::max(worst, std::abs(r.hac_std_errors[j] - ro.se[j]));
            ++cases;
        }
        // The default lag must be the automatic rule.
        worst = std::max(worst, std::abs(nw_mean_test(x).hac_se - oracle::nw_mean(x, automatic_lag(n)).se));
    }
    return {worst <= kNwTol, std::to_string(cases) + " series/design cases, max |se diff| " + fmt("%.3g", worst)};
}

struct Planted {
    StrategyReturnSeries series;
    FactorSeries factors;
};

constexpr double kTruth[4] = {0.005, 0.3, 0.9, 0.4};

Planted planted_fftm(std::uint64_t seed, std::size_t n, double noise) {
    Rng rng(seed);
    Planted s;
    s.factors.first_month = MonthKey(1980, 1);
    for (std::size_t t = 0; t < n + 1; ++t) {
        s.factors.mkt.push_back(0.01 + 0.05 * rng.normal());
        s.factors.smb.push_back(0.03 * rng.normal());
        s.factors.hml.push_back(0.03 * rng.normal());
    }
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t h = t + 1;
        const double er = kTruth[0] + kTruth[1] * s.factors.mkt[h] + kTruth[2] * s.factors.smb[h] +
                          kTruth[3] * s.factors.hml[h] + noise * rng.normal();
        s.series.observations.push_back({s.factors.month(t), er});
    }
    return s;
}

Outcome regression_recovery() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto s = planted_fftm(seed, 120, 0.0);
        const auto r = fit_fftm(s.series, s.factors);
        for (std::size_t j = 0; j < 4; ++j) worst = std::max(worst, std::abs(r.coefficients[j] - kTruth[j]));
    }
    int covered = 0;
    for (int seed = 1; seed <= kRegressionSeeds; ++seed) {
        const auto s = planted_fftm(500 + seed, 600, 0.02);
        const auto r = fit_fftm(s.series, s.factors);
        bool all = true;
        for (std::size_t j = 0; j < 4; ++j) {
            all = all && std::abs(r.coefficients[j] - kTruth[j]) <= kSeMultiple * r.hac_std_errors[j];
        }
        covered += all;
    }
    return {worst <= kNoiselessTol && covered >= kRegressionPass,
            "noiseless max err " + fmt("%.3g", worst) + "; T=600 all within 3 SE in " + std::to_string(covered) +
                "/" + std::to_string(kRegressionSeeds) + " seeds"};
}

const GarchParams kGarchTruth{0.0, 0.05, 1e-6, 0.85, 0.08, 0.08};
const GarchSpec kGjr{true, false};

Outcome garch_recovery() {
    int good = 0;
    double slowest = 0.0;
    for (int seed = 1; seed <= kGarchSeeds; ++seed) {
        const auto path = gen_garch_path(kGarchTruth, 5000, static_cast<std::uint64_t>(seed));
        const auto t0 = std::chrono::steady_clock::now();
        const auto fit = fit_garch(path.y, kGjr);
        slowest = std::max(slowest, seconds_since(t0));
        const auto est = fit.params.to_array();
        const auto tru = kGarchTruth.to_array();
        const auto se = fit.std_errors.to_array();
        bool ok = fit.converged && fit.loglik >= garch_loglik(path.y, kGarchTruth, kGjr) - kGarchLoglikSlack;
        for (std::size_t j = 0; j < GarchParams::kCount; ++j) {
            const bool rel = tru[j] != 0.0 && std::abs(est[j] - tru[j]) <= kGarchRelTol * std::abs(tru[j]);
            ok = ok && (rel || std::abs(est[j] - tru[j]) <= kSeMultiple * se[j]);
        }
        good += ok;
    }
    return {good >= kGarchPass && slowest < kGarchFitSeconds,
            std::to_string(good) + "/" + std::to_string(kGarchSeeds) + " seeds recovered, slowest fit " +
                fmt("%.3f", slowest) + "s"};
}

Outcome gradient_check() {
    double worst = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto path = gen_garch_path(kGarchTruth, 5000, seed);
        const auto fit = fit_garch(path.y, kGjr);
        const auto g = garch_loglik_gradient(path.y, fit.params, kGjr);
        const auto fd = oracle::garch_fd_gradient(path.y, fit.params, true);
        for (std::size_t j = 0; j < GarchParams::kCount; ++j) {
            worst = std::max(worst, std::abs(g[j] - fd[j]) / std::max(std::abs(fd[j]), 1.0));
        }
    }
    return {worst < kGradientTol, "max |g - fd| / max(|fd|, 1) = " + fmt("%.3g", worst) + " at 3 fitted optima"};
}

Outcome amihud_fixture() {
    auto bar = [](int m, int d, double r, double v) { return DailyBar{Date{2001, m, d}, r, v}; };
    const DailyBarSet bars({
        {"S1", {bar(1, 2, 0.5, 2), bar(1, 3, -0.25, 4), bar(2, 1, 0.125, 1)}},
        {"S2", {bar(1, 2, -0.5, 8), bar(1, 5, 0.3, 0), bar(2, 1, 0.25, 2), bar(2, 2, -0.5, 4)}},
        {"S3", {bar(1, 2, 0.75, 2), bar(1, 3, 0.25, 2), bar(1, 4, -0.5, 1), bar(1, 5, 0.25, 4), bar(2, 1, 0.1, 0)}},
    });
    // S1 Jan 0.15625, S2 Jan 0.0625, S3 Jan 0.265625; Feb S1 0.125, S2 0.125, S3 no volume.
    const double jan = (0.15625 + 0.0625 + 0.265625) / 3.0;
    const double feb = 0.125;
    const auto r = amihud_illiquidity(bars, AmihudOptions{1});
    const bool shape = r.months == std::vector<MonthKey>{MonthKey(2001, 1), MonthKey(2001, 2)};
    const double err = shape ? std::max(std::abs(r.raw_value[0] - jan) / jan, std::abs(r.raw_value[1] - feb) / feb) : 1.0;
    return {shape && err <= kAmihudTol && r.dummy == std::vector<int>{1, 0},
            "relative error " + fmt("%.3g", err)};
}

Outcome regime_invariants() {
    // Strictly-above and strictly-below counts differ by at most the number
    // of values tied at the median.
    bool balance_ok = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        const std::size_t n = 50 + seed;
        std::vector<double> v(n);
        // Odd seeds: continuous values; even seeds: heavy ties.
        for (auto& x : v) x = seed % 2 ? rng.normal() : std::floor(3.0 * rng.uniform());
        std::vector<MonthKey> months;
        for (std::size_t i = 0; i < n; ++i) months.push_back(MonthKey(1990, 1) + static_cast<std::int64_t>(i));
        const auto r = median_split(Condition::Illiquidity, months, v);
        const double med = median(v);
        const long ties = std::count(v.begin(), v.end(), med);
        const long above = std::count(r.dummy.begin(), r.dummy.end(), 1);
        const long below = static_cast<long>(n) - above - ties;
        balance_ok = balance_ok && std::labs(above - below) <= ties;
        for (std::size_t i = 0; i < n; ++i) balance_ok = balance_ok && r.dummy[i] == (v[i] > med ? 1 : 0);
    }
    Rng rng(300);
    std::vector<double> logret(300);
    for (auto& x : logret) x = 0.05 * rng.normal();
    const auto state = market_state(MonthlySeries{MonthKey(1990, 1), logret});
    const auto sums = oracle::trailing_sums(logret, 36);
    bool state_ok = state.raw_value.size() == sums.size() && state.months.front() == MonthKey(1993, 1);
    std::size_t diffs = 0;
    for (std::size_t i = 0; state_ok && i < sums.size(); ++i) {
        diffs += state.raw_value[i] != sums[i] || state.dummy[i] != (sums[i] >= 0.0 ? 1 : 0);
    }
    state_ok = state_ok && diffs == 0;
    return {balance_ok && state_ok, std::string("median balance ") + (balance_ok ? "ok" : "violated") +
                                        " on 20 samples; market state " + std::to_string(sums.size()) +
                                        " months, " + std::to_string(diffs) + " differences"};
}

bool insignificant(CellClass c) { return c == CellClass::NSP || c == CellClass::NSN; }

Outcome scanner_false_positives() {
    double rate_sum = 0.0;
    double k1_sum = 0.0;
    for (int seed = 1; seed <= kScanNullSeeds; ++seed) {
        ScanConfig cfg;
        cfg.threads = 4;
        const auto g = run_scan(null_panel(static_cast<std::uint64_t>(seed), 100, 300), cfg);
        int defined = 0, ns = 0, k1_defined = 0, k1_ns = 0;
        for (std::size_t r = 0; r < g.rows.size(); ++r) {
            for (std::size_t w = 0; w < g.windows.size(); ++w) {
                const auto c = g.at(r, w).cls;
                if (c == CellClass::NA) continue;
                ++defined;
                ns += insignificant(c);
                if (g.rows[r].second == 1) {
                    ++k1_defined;
                    k1_ns += insignificant(c);
                }
            }
        }
        rate_sum += static_cast<double>(ns) / defined;
        k1_sum += static_cast<double>(k1_ns) / k1_defined;
    }
    const double rate = rate_sum / kScanNullSeeds;
    return {rate >= kScanNullRate, "NSP/NSN share " + fmt("%.3f", rate) + " over all cells (K=1 rows alone: " +
                                       fmt("%.3f", k1_sum / kScanNullSeeds) + ")"};
}

Outcome scanner_power() {
    int in_total = 0, in_sp = 0, out_total = 0, out_ns = 0;
    for (int seed = 1; seed <= kScanPowerSeeds; ++seed) {
        const auto p = synth_panel(static_cast<std::uint64_t>(700 + seed), 200, 240, {{0, 119, -0.5}});
        ScanConfig cfg;
        cfg.threads = 4;
        cfg.grid = std::vector<std::pair<int, int>>{};
        for (int j : default_scan_horizons()) cfg.grid->emplace_back(j, 1);
        const auto g = run_scan(p, cfg);
        const MonthKey regime_end = p.month(119);
        const MonthKey null_start = p.month(120);
        for (std::size_t w = 0; w < g.windows.size(); ++w) {
            const bool inside = g.windows[w].end <= regime_end;
            const bool null = g.windows[w].start >= null_start;
            for (std::size_t r = 0; r < g.rows.size(); ++r) {
                const auto c = g.at(r, w).cls;
                if (c == CellClass::NA) continue;
                if (inside) {
                    ++in_total;
                    in_sp += c == CellClass::SP;
                } else if (null) {
                    ++out_total;
                    out_ns += insignificant(c);
                }
            }
        }
    }
    const double sp = static_cast<double>(in_sp) / in_total;
    const double ns = static_cast<double>(out_ns) / out_total;
    return {in_total > 0 && out_total > 0 && sp >= kScanPowerRate && ns >= kScanPowerRate,
            "SP in reversal windows " + fmt("%.3f", sp) + " (" + std::to_string(in_total) +
                " cells), NSP/NSN in null windows " + fmt("%.3f", ns) + " (" + std::to_string(out_total) + " cells)"};
}

Outcome scan_performance() {
    const auto p = synth_panel(99, 1000, 300, {{0, 149, -0.3}});
    std::string text[2];
    double secs[2];
    const unsigned threads[2] = {1, 4};
    for (int i = 0; i < 2; ++i) {
        ScanConfig cfg;
        cfg.threads = threads[i];
        const auto t0 = std::chrono::steady_clock::now();
        const auto g = run_scan(p, cfg);
        secs[i] = seconds_since(t0);
        std::ostringstream out;
        emit_grid(out, g);
        emit_values(out, g, true);
        text[i] = out.str();
    }
    const bool same = text[0] == text[1];
    return {same && secs[1] < kScanSeconds,
            "1 thread " + fmt("%.2f", secs[0]) + "s, 4 threads " + fmt("%.2f", secs[1]) + "s, outputs " +
                (same ? "identical" : "DIFFER")};
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        out[e.path().filename().string()] = s.str();
    }
    return out;
}

Outcome cli_determinism() {
    const fs::path root = fs::temp_directory_path() / "anomalyscan_acceptance_cli";
    fs::remove_all(root);
    cli::RunConfig c;
    c.seed = 21;
    c.synth.n_stocks = 100;
    c.synth.n_months = 240;
    c.synth.daily_stocks = 20;
    c.synth.regimes = {{0, 119, -0.4}};
    std::ostringstream err;
    if (cli::run_command("synth", c, root / "fixtures", err) != 0) return {false, "synth failed: " + err.str()};
    c.monthly = (root / "fixtures" / "monthly_returns.csv").string();
    c.factors = (root / "fixtures" / "factors.csv").string();
    c.daily = (root / "fixtures" / "daily_bars.csv").string();
    int identical = 0;
    std::string bad;
    for (const char* cmd : {"backtest", "scan", "regress", "regimes", "synth"}) {
        const fs::path a = root / (std::string(cmd) + "_a");
        const fs::path b = root / (std::string(cmd) + "_b");
        std::ostringstream e1, e2;
        const int ra = cli::run_command(cmd, c, a, e1);
        const int rb = cli::run_command(cmd, c, b, e2);
        if (ra != 0 || rb != 0) {
            bad += std::string(" ") + cmd + "(exit " + std::to_string(ra) + ")";
            continue;
        }
        if (read_tree(a) == read_tree(b)) ++identical;
        else bad += std::string(" ") + cmd;
    }
    fs::remove_all(root);
    return {identical == 5, std::to_string(identical) + "/5 subcommands byte-identical" +
                                (bad.empty() ? "" : ", differing:" + bad)};
}

} // namespace

int main() {
    criterion("portfolio oracle equivalence", portfolio_oracle);
    criterion("negation symmetry", negation_symmetry);
    criterion("Newey-West oracle", newey_west_oracle);
    criterion("regression recovery", regression_recovery);
    criterion("GJR-GARCH recovery", garch_recovery);
    criterion("gradient check", gradient_check);
    criterion("Amihud fixture", amihud_fixture);
    criterion("regime invariants", regime_invariants);
    criterion("scanner false-positive control", scanner_false_positives);
    criterion("scanner power / wax-and-wane", scanner_power);
    criterion("scan performance", scan_performance);
    criterion("end-to-end determinism", cli_determinism);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
