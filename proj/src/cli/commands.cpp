#include "commands.hpp"

#include "anomalyscan/econometrics.hpp"
#include "anomalyscan/errors.hpp"
#include "anomalyscan/panel.hpp"
#include "anomalyscan/parallel.hpp"
#include "anomalyscan/portfolio.hpp"
#include "anomalyscan/regimes.hpp"
#include "anomalyscan/report.hpp"
#include "anomalyscan/scan.hpp"
#include "anomalyscan/synth.hpp"
#include "anomalyscan/volmodels.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace anomalyscan::cli {

namespace fs = std::filesystem;

namespace {

class OutputDir {
public:
    OutputDir(const fs::path& dir, const RunConfig& config) : dir_(dir), header_(header_line(config)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw ValidationError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    void write(const std::string& name, const std::string& body) const {
        write_raw(name, header_ + "\n" + body);
    }

    void write_config(std::string_view command, const RunConfig& config) const {
        nlohmann::ordered_json doc;
        doc["tool"] = "anomalyscan";
        doc["version"] = kVersion;
        doc["command"] = command;
        doc["config_hash"] = config_hash(config);
        doc["config"] = config.to_json();
        write_raw("run_config.json", doc.dump(2) + "\n");
    }

private:
    void write_raw(const std::string& name, const std::string& text) const {
        const fs::path p = dir_ / name;
        std::ofstream f(p, std::ios::binary);
        if (!f) throw ValidationError("cannot write " + p.string());
        f << text;
        if (!f) throw ValidationError("write failed: " + p.string());
    }

    fs::path dir_;
    std::string header_;
};

std::string num(double v, const RunConfig& c) { return format_number(v, c.raw); }

std::vector<std::pair<int, int>> cells(const RunConfig& c) {
    std::vector<std::pair<int, int>> out;
    for (int j : c.j) {
        for (int k : c.k) out.emplace_back(j, k);
    }
    return out;
}

MonthlyPanel require_monthly(const RunConfig& c) {
    if (c.monthly.empty()) throw ValidationError("a monthly returns file is required (--monthly)");
    LoadReport report;
    auto panel = load_monthly_panel(c.monthly, {}, &report);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    return panel;
}

FactorSeries require_factors(const RunConfig& c) {
    if (c.factors.empty()) throw ValidationError("a factors file is required (--factors)");
    return load_factors(c.factors);
}

std::vector<StrategyReturnSeries> all_series(const MonthlyPanel& panel, const RunConfig& c,
                                             const std::vector<std::pair<int, int>>& grid) {
    const unsigned threads = default_thread_count();
    StrategyEngine engine(panel);
    engine.prepare(c.j, c.k, threads);
    const Side side = parse_side(c.side);
    std::vector<StrategyReturnSeries> out(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        out[i] = engine.series(StrategySpec{grid[i].first, grid[i].second, c.skip, side});
    });
    return out;
}

// Mean test that reports NaN instead of failing on short or constant series.
MeanTestResult mean_test_or_na(std::span<const double> v, std::optional<int> lag) {
    try {
        return nw_mean_test(v, lag);
    } catch (const ComputationError&) {
        MeanTestResult r;
        r.n_obs = v.size();
        r.mean = kMissing;
        r.hac_se = kMissing;
        r.hac_t = kMissing;
        return r;
    }
}

std::string stars_of(const MeanTestResult& t) { return t.hac_t == t.hac_t ? std::string(significance_stars(t.hac_t)) : ""; }

struct BuiltRegimes {
    std::vector<RegimeSeries> series;
    std::optional<GarchFit> volatility;
    std::optional<GarchFit> uncertainty;
};

BuiltRegimes build_regimes(const RunConfig& c, const std::optional<FactorSeries>& factors) {
    BuiltRegimes b;
    if (factors && factors->index_logret) {
        const MonthlySeries idx{factors->first_month, *factors->index_logret};
        b.series.push_back(market_state(idx, c.lookback));
        GarchFit fit;
        b.series.push_back(volatility_regime(idx, &fit));
        b.volatility = std::move(fit);
    }
    if (!c.daily.empty()) {
        b.series.push_back(amihud_illiquidity(load_daily_bars(c.daily), AmihudOptions{c.min_days}));
    }
    if (factors && factors->macro_index) {
        GarchFit fit;
        b.series.push_back(macro_uncertainty(MonthlySeries{factors->first_month, *factors->macro_index}, &fit));
        b.uncertainty = std::move(fit);
    }
    return b;
}

void write_fit(std::ostringstream& out, std::string_view model, const GarchFit& fit, std::size_t n,
               const RunConfig& c) {
    static const char* names[GarchParams::kCount] = {"c", "phi", "k", "gamma", "alpha", "xi"};
    const auto est = fit.params.to_array();
    const auto se = fit.std_errors.to_array();
    for (std::size_t i = 0; i < GarchParams::kCount; ++i) {
        if (i == 5 && !fit.spec.has_leverage()) continue;
        out << model << ',' << names[i] << ',' << num(est[i], c) << ',' << num(se[i], c) << '\n';
    }
    out << model << ",loglik," << num(fit.loglik, c) << ",NA\n";
    out << model << ",converged," << (fit.converged ? 1 : 0) << ",NA\n";
    out << model << ",iterations," << fit.iterations << ",NA\n";
    out << model << ",n," << n << ",NA\n";
}

void write_cond_variance(const OutputDir& dir, const std::string& name, const RegimeSeries& r, const RunConfig& c) {
    std::ostringstream out;
    out << "year,month,sigma2\n";
    for (std::size_t i = 0; i < r.months.size(); ++i) {
        out << r.months[i].year() << ',' << r.months[i].month() << ',' << num(r.raw_value[i], c) << '\n';
    }
    dir.write(name, out.str());
}

std::string regression_rows(int j, int k, std::string_view model, std::string_view dummy,
                            const RegressionResult& r, const RunConfig& c) {
    std::ostringstream out;
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        out << j << ',' << k << ',' << model << ',' << dummy << ',' << r.names[i] << ',' << num(r.coefficients[i], c)
            << ',' << num(r.hac_std_errors[i], c) << ',' << num(r.t_stats[i], c) << ','
            << significance_stars(r.t_stats[i]) << ',' << r.n_obs << ',' << r.lag << '\n';
    }
    return out.str();
}

} // namespace

void cmd_backtest(const RunConfig& c, const fs::path& out) {
    c.validate();
    const auto panel = require_monthly(c);
    const OutputDir dir(out, c);
    const auto grid = cells(c);
    const auto series = all_series(panel, c, grid);

    std::ostringstream rets;
    std::ostringstream table;
    rets << "j,k,skip,side,formation_year,formation_month,bh_return\n";
    table << "j,k,mean,t,stars,n\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto [j, k] = grid[i];
        for (const auto& o : series[i].observations) {
            rets << j << ',' << k << ',' << c.skip << ',' << c.side << ',' << o.formation_month.year() << ','
                 << o.formation_month.month() << ',' << num(o.bh_return, c) << '\n';
        }
        const auto values = series[i].values();
        const auto t = mean_test_or_na(values, c.lag);
        table << j << ',' << k << ',' << num(t.mean, c) << ',' << num(t.hac_t, c) << ',' << stars_of(t) << ','
              << values.size() << '\n';
    }
    dir.write("strategy_returns.csv", rets.str());
    dir.write("raw_returns.csv", table.str());
    dir.write_config("backtest", c);
}

void cmd_scan(const RunConfig& c, const fs::path& out) {
    c.validate();
    const auto panel = require_monthly(c);
    const OutputDir dir(out, c);
    ScanConfig sc;
    sc.window = c.window;
    sc.step = c.step;
    sc.grid = cells(c);
    sc.critical = c.critical;
    sc.skip = c.skip;
    sc.lag = c.lag;
    sc.threads = default_thread_count();
    const auto grid = run_scan(panel, sc);
    std::ostringstream g;
    std::ostringstream v;
    emit_grid(g, grid);
    emit_values(v, grid, c.raw);
    dir.write("scan_grid.csv", g.str());
    dir.write("scan_values.csv", v.str());
    dir.write_config("scan", c);
}

void cmd_regress(const RunConfig& c, const fs::path& out) {
    c.validate();
    const auto panel = require_monthly(c);
    const auto factors = require_factors(c);
    const OutputDir dir(out, c);
    const auto regimes = build_regimes(c, factors);
    const auto grid = cells(c);
    const auto series = all_series(panel, c, grid);

    std::vector<std::string> rows(grid.size());
    std::vector<std::string> notes(grid.size());
    parallel_for(grid.size(), default_thread_count(), [&](std::size_t i) {
        const auto [j, k] = grid[i];
        auto attempt = [&](std::string_view model, std::string_view dummy, auto&& fit) {
            try {
                rows[i] += regression_rows(j, k, model, dummy, fit(), c);
            } catch (const ComputationError& e) {
                notes[i] += "note: J=" + std::to_string(j) + " K=" + std::to_string(k) + " " + std::string(model) +
                            (dummy.empty() ? "" : " " + std::string(dummy)) + " skipped: " + e.what() + "\n";
            }
        };
        attempt("CAPM", "", [&] { return fit_capm(series[i], factors, c.lag); });
        attempt("FFTM", "", [&] { return fit_fftm(series[i], factors, c.lag); });
        for (const auto& r : regimes.series) {
            const auto d = r.to_dummy();
            attempt("FFTM_DUMMY", condition_name(r.condition),
                    [&] { return fit_fftm_dummy(series[i], factors, d, c.lag); });
        }
    });
    std::ostringstream body;
    body << "j,k,model,dummy,coef_name,estimate,hac_se,t,stars,n,lag\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        body << rows[i];
        std::cerr << notes[i];
    }
    dir.write("regressions.csv", body.str());
    dir.write_config("regress", c);
}

void cmd_regimes(const RunConfig& c, const fs::path& out) {
    c.validate();
    std::optional<FactorSeries> factors;
    if (!c.factors.empty()) factors = load_factors(c.factors);
    if (!factors && c.daily.empty()) {
        throw ValidationError("regimes needs --factors (index columns) and/or --daily");
    }
    std::optional<MonthlyPanel> panel;
    if (!c.monthly.empty()) panel = require_monthly(c);
    const OutputDir dir(out, c);
    const auto built = build_regimes(c, factors);
    if (built.series.empty()) {
        throw ValidationError("no regime inputs: the factors file has no index_logret or macro_index column");
    }

    std::ostringstream reg;
    reg << "condition,year,month,raw_value,dummy\n";
    for (const auto& r : built.series) {
        for (std::size_t i = 0; i < r.months.size(); ++i) {
            reg << condition_name(r.condition) << ',' << r.months[i].year() << ',' << r.months[i].month() << ','
                << num(r.raw_value[i], c) << ',' << r.dummy[i] << '\n';
        }
    }
    dir.write("regimes.csv", reg.str());

    std::ostringstream fits;
    fits << "model,param,estimate,std_error\n";
    for (const auto& r : built.series) {
        if (r.condition == Condition::Volatility) {
            write_fit(fits, "GJR_GARCH", *built.volatility, r.months.size(), c);
            write_cond_variance(dir, "cond_variance.csv", r, c);
        } else if (r.condition == Condition::Uncertainty) {
            write_fit(fits, "GARCH", *built.uncertainty, r.months.size(), c);
            write_cond_variance(dir, "cond_variance_macro.csv", r, c);
        }
    }
    dir.write("garch_fit.csv", fits.str());

    std::ostringstream splits;
    splits << "j,k,raw_mean,raw_t,high_mean,high_t,low_mean,low_t,condition\n";
    if (panel) {
        const auto grid = cells(c);
        const auto series = all_series(*panel, c, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto raw = mean_test_or_na(series[i].values(), c.lag);
            for (const auto& r : built.series) {
                double hm = kMissing, ht = kMissing, lm = kMissing, lt = kMissing;
                try {
                    const auto s = split_performance(series[i], r, c.lag);
                    hm = s.high.mean;
                    ht = s.high.hac_t;
                    lm = s.low.mean;
                    lt = s.low.hac_t;
                } catch (const ComputationError&) {
                }
                splits << grid[i].first << ',' << grid[i].second << ',' << num(raw.mean, c) << ','
                       << num(raw.hac_t, c) << ',' << num(hm, c) << ',' << num(ht, c) << ',' << num(lm, c) << ','
                       << num(lt, c) << ',' << condition_name(r.condition) << '\n';
            }
        }
    }
    dir.write("regime_splits.csv", splits.str());
    dir.write_config("regimes", c);
}

void cmd_synth(const RunConfig& c, const fs::path& out) {
    c.validate();
    SynthSpec spec;
    spec.seed = c.seed;
    spec.n_stocks = c.synth.n_stocks;
    spec.n_months = c.synth.n_months;
    spec.first_month = parse_month_key(c.synth.first_month);
    spec.regimes = c.synth.regimes;
    spec.reversal_lag = c.synth.reversal_lag;
    spec.noise_sd = c.synth.noise_sd;
    auto data = gen_dataset(spec);
    if (c.synth.index_columns) add_index_columns(data.factors, c.seed);

    const OutputDir dir(out, c);
    std::ostringstream m;
    write_monthly_panel(m, data.panel);
    dir.write("monthly_returns.csv", m.str());
    std::ostringstream f;
    write_factors(f, data.factors);
    dir.write("factors.csv", f.str());
    if (c.synth.daily) {
        DailySpec ds;
        ds.seed = c.seed;
        ds.n_stocks = c.synth.daily_stocks;
        ds.n_months = c.synth.n_months;
        ds.first_month = spec.first_month;
        ds.days_per_month = c.synth.days_per_month;
        ds.zero_volume_prob = c.synth.zero_volume_prob;
        std::ostringstream d;
        write_daily_bars(d, gen_daily_bars(ds));
        dir.write("daily_bars.csv", d.str());
    }
    dir.write_config("synth", c);
}

int run_command(std::string_view name, const RunConfig& config, const fs::path& out, std::ostream& err) {
    try {
        if (name == "backtest") cmd_backtest(config, out);
        else if (name == "scan") cmd_scan(config, out);
        else if (name == "regress") cmd_regress(config, out);
        else if (name == "regimes") cmd_regimes(config, out);
        else if (name == "synth") cmd_synth(config, out);
        else throw ValidationError("unknown command '" + std::string(name) + "'");
        return 0;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ComputationError& e) {
        err << "computation error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace anomalyscan::cli
