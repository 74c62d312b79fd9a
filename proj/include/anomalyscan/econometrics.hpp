#pragma once

#include "anomalyscan/month.hpp"
#include "anomalyscan/panel.hpp"
#include "anomalyscan/portfolio.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace anomalyscan {

// Two-sided normal critical values.
inline constexpr double kCritical5 = 1.96;
inline constexpr double kCritical1 = 2.576;

// floor(4 * (n / 100)^(2/9))
int automatic_lag(std::size_t n) noexcept;

// Bartlett-weighted long-run variance of the demeaned series:
// g0 + 2 * sum_{l=1..L} (1 - l/(L+1)) g_l, autocovariances with divisor n.
double long_run_variance(std::span<const double> series, int lag);

// "**" at 1%, "*" at 5%, "" otherwise.
std::string_view significance_stars(double t) noexcept;

struct MeanTestResult {
    double mean = 0.0;
    double hac_se = 0.0;
    double hac_t = 0.0;
    std::size_t n_obs = 0;
    int lag = 0;
    bool significant_5 = false;
    bool significant_1 = false;
};

// HAC t-test of H0: mean = 0. Lag defaults to automatic_lag(n) and is capped
// at n-1. Throws InsufficientDataError (n < 2) or DegenerateInputError
// (constant series).
MeanTestResult nw_mean_test(std::span<const double> series, std::optional<int> lag = std::nullopt);

// Named regressor columns, stored column-major.
class DesignMatrix {
public:
    explicit DesignMatrix(std::size_t rows) : rows_(rows) {}

    static DesignMatrix with_intercept(std::size_t rows, std::string name = "alpha");
    DesignMatrix& add_column(std::string name, std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    // Column-major storage, column c at [c * rows, (c + 1) * rows).
    std::span<const double> column(std::size_t c) const noexcept { return {data_.data() + c * rows_, rows_}; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[c * rows_ + r]; }

private:
    std::size_t rows_;
    std::vector<std::string> names_;
    std::vector<double> data_;
};

struct RegressionResult {
    std::vector<std::string> names;
    std::vector<double> coefficients;
    std::vector<double> hac_std_errors;
    std::vector<double> t_stats;
    std::vector<double> fitted;
    std::vector<double> residuals;
    std::vector<double> covariance; // p x p, row-major
    std::size_t n_obs = 0;
    int lag = 0;

    std::optional<std::size_t> index_of(std::string_view name) const;
};

// Least squares through Householder QR with Newey-West sandwich covariance
// (X'X)^-1 [sum Bartlett-weighted residual cross-products] (X'X)^-1, using the
// same kernel and lag rule as nw_mean_test. A column whose QR pivot falls
// below 1e-10 of its own norm is reported as rank deficient by name.
RegressionResult ols_hac(std::span<const double> y, const DesignMatrix& x, std::optional<int> lag = std::nullopt);

// 0/1 market-condition indicator keyed by month.
struct DummySeries {
    std::string name;
    std::vector<MonthKey> months;
    std::vector<int> values;

    std::optional<int> at(MonthKey m) const;
};

// Factor regressions of a strategy series. Each observation is matched to the
// factor returns compounded over its holding months (a single month for K=1)
// and, for the dummy model, to the dummy at its formation month.
// Observations without complete factor (or dummy) data are skipped; at least
// 10 matched observations are required.
RegressionResult fit_capm(const StrategyReturnSeries& series, const FactorSeries& factors,
                          std::optional<int> lag = std::nullopt);
RegressionResult fit_fftm(const StrategyReturnSeries& series, const FactorSeries& factors,
                          std::optional<int> lag = std::nullopt);
RegressionResult fit_fftm_dummy(const StrategyReturnSeries& series, const FactorSeries& factors,
                                const DummySeries& dummy, std::optional<int> lag = std::nullopt);

} // namespace anomalyscan
