#include "anomalyscan/econometrics.hpp"

#include "anomalyscan/errors.hpp"
#include "anomalyscan/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace anomalyscan {

int automatic_lag(std::size_t n) noexcept {
    return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

namespace {

int resolve_lag(std::optional<int> lag, std::size_t n) {
    const int l = lag.value_or(automatic_lag(n));
    if (l < 0) throw ValidationError("HAC lag must be >= 0, got " + std::to_string(l));
    return std::min<int>(l, static_cast<int>(n) - 1);
}

double bartlett(int l, int lag) noexcept { return 1.0 - static_cast<double>(l) / (lag + 1); }

} // namespace

double long_run_variance(std::span<const double> series, int lag) {
    const std::size_t n = series.size();
    if (n == 0) return 0.0;
    const double mean = kernels::sum(series) / static_cast<double>(n);
    std::vector<double> d(n);
    for (std::size_t t = 0; t < n; ++t) d[t] = series[t] - mean;
    lag = std::min<int>(lag, static_cast<int>(n) - 1);
    const double inv_n = 1.0 / static_cast<double>(n);
    double s = kernels::dot(d, d) * inv_n;
    for (int l = 1; l <= lag; ++l) {
        const auto ul = static_cast<std::size_t>(l);
        const double gamma = kernels::dot(std::span<const double>(d).subspan(ul), std::span<const double>(d).first(n - ul)) * inv_n;
        s += 2.0 * bartlett(l, lag) * gamma;
    }
    return s;
}

std::string_view significance_stars(double t) noexcept {
    const double a = std::abs(t);
    if (a >= kCritical1) return "**";
    if (a >= kCritical5) return "*";
    return "";
}

MeanTestResult nw_mean_test(std::span<const double> series, std::optional<int> lag) {
    const std::size_t n = series.size();
    if (n < 2) throw InsufficientDataError("mean test needs at least 2 observations, got " + std::to_string(n));
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    if (*lo == *hi) throw DegenerateInputError("mean test on a constant series (zero variance)");
    for (double v : series) {
        if (!std::isfinite(v)) throw ValidationError("mean test on a series with non-finite values");
    }

    MeanTestResult r;
    r.n_obs = n;
    r.lag = resolve_lag(lag, n);
    r.mean = kernels::sum(series) / static_cast<double>(n);
    const double lrv = long_run_variance(series, r.lag);
    if (!(lrv > 0.0)) throw DegenerateInputError("long-run variance is not positive");
    r.hac_se = std::sqrt(lrv / static_cast<double>(n));
    r.hac_t = r.mean / r.hac_se;
    r.significant_5 = std::abs(r.hac_t) >= kCritical5;
    r.significant_1 = std::abs(r.hac_t) >= kCritical1;
    return r;
}

// ---------------------------------------------------------------------------
// OLS with HAC covariance
// ---------------------------------------------------------------------------

DesignMatrix DesignMatrix::with_intercept(std::size_t rows, std::string name) {
    DesignMatrix x(rows);
    std::vector<double> ones(rows, 1.0);
    x.add_column(std::move(name), ones);
    return x;
}

DesignMatrix& DesignMatrix::add_column(std::string name, std::span<const double> values) {
    if (values.size() != rows_) {
        throw ValidationError("column '" + name + "' has " + std::to_string(values.size()) + " rows, expected " +
                              std::to_string(rows_));
    }
    names_.push_back(std::move(name));
    data_.insert(data_.end(), values.begin(), values.end());
    return *this;
}

std::optional<std::size_t> RegressionResult::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
    }
    return std::nullopt;
}

RegressionResult ols_hac(std::span<const double> y, const DesignMatrix& x, std::optional<int> lag) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    if (y.size() != n) throw ValidationError("response and design have different lengths");
    if (p == 0) throw ValidationError("design matrix has no columns");
    if (n <= p) {
        throw InsufficientDataError("regression needs more observations (" + std::to_string(n) + ") than regressors (" +
                                    std::to_string(p) + ")");
    }

    Eigen::Map<const Eigen::MatrixXd> X(x.column(0).data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Eigen::Map<const Eigen::VectorXd> Y(y.data(), static_cast<Eigen::Index>(n));
    if (!X.allFinite() || !Y.allFinite()) throw ValidationError("regression inputs contain non-finite values");

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::MatrixXd r_full = qr.matrixQR().topRows(static_cast<Eigen::Index>(p)).triangularView<Eigen::Upper>();
    for (std::size_t j = 0; j < p; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double norm = X.col(jj).norm();
        if (norm == 0.0 || std::abs(r_full(jj, jj)) <= 1e-10 * norm) {
            throw RankDeficiencyError(x.names()[j], "design matrix is rank deficient: column '" + x.names()[j] +
                                                        "' is zero or collinear with earlier columns");
        }
    }

    const Eigen::VectorXd beta = qr.solve(Y);
    const Eigen::VectorXd fitted = X * beta;
    const Eigen::VectorXd resid = Y - fitted;

    const Eigen::MatrixXd r_inv = r_full.triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
    const Eigen::MatrixXd bread = r_inv * r_inv.transpose(); // (X'X)^-1

    const int l_max = resolve_lag(lag, n);
    const Eigen::MatrixXd u = X.array().colwise() * resid.array(); // rows e_t x_t'
    Eigen::MatrixXd meat = u.transpose() * u;
    for (int l = 1; l <= l_max; ++l) {
        const auto m = static_cast<Eigen::Index>(n) - l;
        const Eigen::MatrixXd gamma = u.bottomRows(m).transpose() * u.topRows(m);
        meat += bartlett(l, l_max) * (gamma + gamma.transpose());
    }
    const Eigen::MatrixXd cov = bread * meat * bread;

    RegressionResult res;
    res.names = x.names();
    res.n_obs = n;
    res.lag = l_max;
    res.coefficients.assign(beta.data(), beta.data() + p);
    res.fitted.assign(fitted.data(), fitted.data() + n);
    res.residuals.assign(resid.data(), resid.data() + n);
    res.covariance.resize(p * p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            res.covariance[i * p + j] = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        const double var = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        const double se = var > 0.0 ? std::sqrt(var) : 0.0;
        res.hac_std_errors.push_back(se);
        res.t_stats.push_back(se > 0.0 ? res.coefficients[i] / se : 0.0);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Factor models
// ---------------------------------------------------------------------------

std::optional<int> DummySeries::at(MonthKey m) const {
    auto it = std::lower_bound(months.begin(), months.end(), m);
    if (it == months.end() || *it != m) return std::nullopt;
    return values[static_cast<std::size_t>(it - months.begin())];
}

namespace {

struct MatchedSample {
    std::vector<double> y;
    std::vector<double> mkt, smb, hml, dummy;
};

double compounded(const std::vector<double>& f, std::size_t first, int k) {
    double g = 1.0;
    for (int t = 0; t < k; ++t) g *= 1.0 + f[first + static_cast<std::size_t>(t)];
    return g - 1.0;
}

MatchedSample match(const StrategyReturnSeries& series, const FactorSeries& factors, const DummySeries* dummy) {
    factors.validate();
    MatchedSample s;
    const int k = series.spec.k;
    for (const auto& obs : series.observations) {
        const MonthKey hold_start = obs.formation_month + series.spec.skip;
        const auto idx = factors.month_index(hold_start);
        if (!idx || *idx + static_cast<std::size_t>(k) > factors.n_months()) continue;
        std::optional<int> d;
        if (dummy) {
            d = dummy->at(obs.formation_month);
            if (!d) continue;
        }
        s.y.push_back(obs.bh_return);
        s.mkt.push_back(k == 1 ? factors.mkt[*idx] : compounded(factors.mkt, *idx, k));
        s.smb.push_back(k == 1 ? factors.smb[*idx] : compounded(factors.smb, *idx, k));
        s.hml.push_back(k == 1 ? factors.hml[*idx] : compounded(factors.hml, *idx, k));
        if (d) s.dummy.push_back(*d);
    }
    if (s.y.size() < 10) {
        throw InsufficientDataError("factor regression needs at least 10 aligned months, got " +
                                    std::to_string(s.y.size()));
    }
    return s;
}

} // namespace

RegressionResult fit_capm(const StrategyReturnSeries& series, const FactorSeries& factors, std::optional<int> lag) {
    const auto s = match(series, factors, nullptr);
    auto x = DesignMatrix::with_intercept(s.y.size());
    x.add_column("beta_mkt", s.mkt);
    return ols_hac(s.y, x, lag);
}

RegressionResult fit_fftm(const StrategyReturnSeries& series, const FactorSeries& factors, std::optional<int> lag) {
    const auto s = match(series, factors, nullptr);
    auto x = DesignMatrix::with_intercept(s.y.size());
    x.add_column("beta_mkt", s.mkt).add_column("beta_smb", s.smb).add_column("beta_hml", s.hml);
    return ols_hac(s.y, x, lag);
}

RegressionResult fit_fftm_dummy(const StrategyReturnSeries& series, const FactorSeries& factors,
                                const DummySeries& dummy, std::optional<int> lag) {
    const auto s = match(series, factors, &dummy);
    auto x = DesignMatrix::with_intercept(s.y.size());
    x.add_column("beta_mkt", s.mkt).add_column("beta_smb", s.smb).add_column("beta_hml", s.hml);
    x.add_column("beta_d", s.dummy);
    try {
        return ols_hac(s.y, x, lag);
    } catch (const RankDeficiencyError& e) {
        if (e.column() != "beta_d") throw;
        throw RankDeficiencyError("beta_d", "dummy '" + dummy.name +
                                                "' is constant over the sample and collinear with the intercept");
    }
}

} // namespace anomalyscan
