#include "anomalyscan/regimes.hpp"

#include "anomalyscan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace anomalyscan {

std::string_view condition_name(Condition c) noexcept {
    switch (c) {
    case Condition::State: return "State";
    case Condition::Volatility: return "Volatility";
    case Condition::Illiquidity: return "Illiquidity";
    case Condition::Uncertainty: return "Uncertainty";
    }
    return "Unknown";
}

DummySeries RegimeSeries::to_dummy() const {
    return DummySeries{std::string(condition_name(condition)), months, dummy};
}

bool RegimeSeries::all_tied() const noexcept {
    return std::adjacent_find(raw_value.begin(), raw_value.end(), std::not_equal_to<>()) == raw_value.end();
}

double median(std::vector<double> values) {
    if (values.empty()) throw InsufficientDataError("median of an empty series");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

RegimeSeries median_split(Condition condition, std::vector<MonthKey> months, std::vector<double> raw) {
    if (months.size() != raw.size()) throw ValidationError("regime months and values differ in length");
    RegimeSeries out;
    out.condition = condition;
    const double med = median(raw);
    out.dummy.reserve(raw.size());
    for (double v : raw) out.dummy.push_back(v > med ? 1 : 0);
    out.months = std::move(months);
    out.raw_value = std::move(raw);
    return out;
}

RegimeSeries market_state(const MonthlySeries& index_logret, int lookback) {
    if (lookback < 1) throw ValidationError("market-state lookback must be >= 1");
    const std::size_t n = index_logret.values.size();
    const auto lb = static_cast<std::size_t>(lookback);
    if (n <= lb) {
        throw InsufficientDataError("market state needs more than " + std::to_string(lookback) +
                                    " index returns, got " + std::to_string(n));
    }
    RegimeSeries out;
    out.condition = Condition::State;
    for (std::size_t t = lb; t < n; ++t) {
        double s = 0.0;
        for (std::size_t i = t - lb; i < t; ++i) s += index_logret.values[i];
        out.months.push_back(index_logret.month(t));
        out.raw_value.push_back(s);
        out.dummy.push_back(s >= 0.0 ? 1 : 0);
    }
    return out;
}

namespace {

RegimeSeries variance_regime(Condition condition, MonthKey first, std::span<const double> returns,
                             const GarchSpec& spec, GarchFit* fit_out) {
    GarchFit fit = fit_garch(returns, spec);
    if (!fit.converged) {
        throw ComputationError(std::string(condition_name(condition)) + ": GARCH fit did not converge after " +
                               std::to_string(fit.iterations) + " iterations");
    }
    std::vector<MonthKey> months;
    for (std::size_t i = 0; i < fit.cond_variance.size(); ++i) months.push_back(first + static_cast<std::int64_t>(i + 1));
    auto out = median_split(condition, std::move(months), fit.cond_variance);
    if (fit_out) *fit_out = std::move(fit);
    return out;
}

} // namespace

RegimeSeries volatility_regime(const MonthlySeries& index_logret, GarchFit* fit_out) {
    return variance_regime(Condition::Volatility, index_logret.first, index_logret.values, GarchSpec{true, false},
                           fit_out);
}

RegimeSeries macro_uncertainty(const MonthlySeries& macro_index, GarchFit* fit_out) {
    const auto& lv = macro_index.values;
    if (lv.size() < 61) {
        throw InsufficientDataError("macro uncertainty needs at least 61 index levels, got " + std::to_string(lv.size()));
    }
    std::vector<double> r;
    r.reserve(lv.size() - 1);
    for (std::size_t t = 1; t < lv.size(); ++t) {
        if (!(lv[t] > 0.0) || !(lv[t - 1] > 0.0)) throw ValidationError("macro index levels must be positive");
        r.push_back(std::log(lv[t] / lv[t - 1]));
    }
    return variance_regime(Condition::Uncertainty, macro_index.first + 1, r, GarchSpec{false, false}, fit_out);
}

RegimeSeries amihud_illiquidity(const DailyBarSet& bars, const AmihudOptions& options) {
    if (options.min_days < 1) throw ValidationError("min_days must be >= 1");
    // month -> (sum of stock ILLIQ, qualifying stocks)
    std::map<MonthKey, std::pair<double, int>> by_month;
    for (const auto& stock : bars.stocks()) {
        std::size_t i = 0;
        const auto& b = stock.bars;
        while (i < b.size()) {
            const MonthKey m = b[i].date.month_key();
            double ratio_sum = 0.0;
            int days = 0;
            for (; i < b.size() && b[i].date.month_key() == m; ++i) {
                if (b[i].volume > 0.0) {
                    ratio_sum += std::abs(b[i].ret) / b[i].volume;
                    ++days;
                }
            }
            if (days >= options.min_days) {
                auto& acc = by_month[m];
                acc.first += ratio_sum / days;
                acc.second += 1;
            }
        }
    }
    if (by_month.empty()) throw InsufficientDataError("no stock-month meets the minimum valid-day count");
    std::vector<MonthKey> months;
    std::vector<double> raw;
    for (const auto& [m, acc] : by_month) {
        months.push_back(m);
        raw.push_back(acc.first / acc.second);
    }
    return median_split(Condition::Illiquidity, std::move(months), std::move(raw));
}

SplitResult split_performance(const StrategyReturnSeries& series, const RegimeSeries& regime,
                              std::optional<int> lag) {
    if (regime.all_tied()) {
        throw DegenerateInputError(std::string(condition_name(regime.condition)) +
                                   ": all regime values tie at the median; no high/low split");
    }
    const DummySeries dummy = regime.to_dummy();
    std::vector<double> high;
    std::vector<double> low;
    SplitResult res;
    for (const auto& obs : series.observations) {
        const auto d = dummy.at(obs.formation_month);
        if (!d) {
            ++res.unmatched;
            continue;
        }
        (*d == 1 ? high : low).push_back(obs.bh_return);
    }
    if (high.size() < 2 || low.size() < 2) {
        throw InsufficientDataError(std::string(condition_name(regime.condition)) + " split: high bucket has " +
                                    std::to_string(high.size()) + " observations, low bucket " +
                                    std::to_string(low.size()) + "; need at least 2 each");
    }
    res.high = nw_mean_test(high, lag);
    res.low = nw_mean_test(low, lag);
    return res;
}

} // namespace anomalyscan
