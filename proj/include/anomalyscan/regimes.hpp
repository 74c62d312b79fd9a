#pragma once

#include "anomalyscan/econometrics.hpp"
#include "anomalyscan/month.hpp"
#include "anomalyscan/panel.hpp"
#include "anomalyscan/portfolio.hpp"
#include "anomalyscan/volmodels.hpp"

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace anomalyscan {

enum class Condition { State, Volatility, Illiquidity, Uncertainty };

std::string_view condition_name(Condition c) noexcept;

// Values on a gap-free month axis starting at `first`.
struct MonthlySeries {
    MonthKey first{};
    std::vector<double> values;

    MonthKey month(std::size_t i) const noexcept { return first + static_cast<std::int64_t>(i); }
};

// Per-month condition value and its high (1) / low (0) indicator.
struct RegimeSeries {
    Condition condition = Condition::State;
    std::vector<MonthKey> months; // strictly increasing, may have gaps
    std::vector<double> raw_value;
    std::vector<int> dummy;

    DummySeries to_dummy() const;
    // Every raw value equal: no meaningful high/low split exists.
    bool all_tied() const noexcept;
};

double median(std::vector<double> values);

// dummy = 1 iff raw value is strictly above the full-sample median.
RegimeSeries median_split(Condition condition, std::vector<MonthKey> months, std::vector<double> raw);

// Trailing sum of the previous `lookback` monthly index log returns
// (months t-lookback .. t-1); dummy = 1 iff the sum is >= 0. The first
// `lookback` months have no value.
RegimeSeries market_state(const MonthlySeries& index_logret, int lookback = 36);

// Conditional variance of an AR(1)-GJR-GARCH(1,1) fit to the index log
// returns, median split. `fit_out` receives the fit.
RegimeSeries volatility_regime(const MonthlySeries& index_logret, GarchFit* fit_out = nullptr);

struct AmihudOptions {
    int min_days = 10; // valid (positive-volume) days per stock-month
};

// Stock-month mean of |r| / volume over positive-volume days, averaged across
// stocks with at least min_days such days. Months with no qualifying stock
// are absent. Median split.
RegimeSeries amihud_illiquidity(const DailyBarSet& bars, const AmihudOptions& options = {});

// Conditional variance of an AR(1)-GARCH(1,1) fit to log(level_t/level_{t-1}),
// median split.
RegimeSeries macro_uncertainty(const MonthlySeries& macro_index, GarchFit* fit_out = nullptr);

struct SplitResult {
    MeanTestResult high;
    MeanTestResult low;
    std::size_t unmatched = 0; // observations whose formation month has no regime value
};

// Buckets observations by the dummy at their formation month and tests each
// bucket. Throws DegenerateInputError for an all-tie regime and
// InsufficientDataError when a bucket has fewer than 2 observations.
SplitResult split_performance(const StrategyReturnSeries& series, const RegimeSeries& regime,
                              std::optional<int> lag = std::nullopt);

} // namespace anomalyscan
