#include "anomalyscan/synth.hpp"

#include "anomalyscan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace anomalyscan {

double Rng::uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

double Rng::normal() { return inverse_normal_cdf(uniform()); }

double inverse_normal_cdf(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01, -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("inverse normal CDF needs p in (0, 1)");
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

void SynthSpec::validate() const {
    if (n_stocks < 20) throw ValidationError("synthetic panel needs n_stocks >= 20, got " + std::to_string(n_stocks));
    if (n_months < 24) throw ValidationError("synthetic panel needs n_months >= 24, got " + std::to_string(n_months));
    if (reversal_lag < 1) throw ValidationError("reversal_lag must be >= 1");
    if (!(noise_sd >= 0.0)) throw ValidationError("noise_sd must be >= 0");
    for (int f = 0; f < 3; ++f) {
        if (!(factor_sd[f] >= 0.0) || !(loading_sd[f] >= 0.0)) throw ValidationError("factor and loading sd must be >= 0");
    }
    for (const auto& seg : regimes) {
        if (seg.begin < 0 || seg.end < seg.begin) throw ValidationError("invalid regime month range");
        if (!(std::abs(seg.rho) < 1.0)) throw ValidationError("regime rho must lie in (-1, 1)");
    }
}

double SynthSpec::rho_at(int month) const noexcept {
    for (const auto& seg : regimes) {
        if (month >= seg.begin && month <= seg.end) return seg.rho;
    }
    return 0.0;
}

SynthData gen_dataset(const SynthSpec& spec) {
    spec.validate();
    const auto n = static_cast<std::size_t>(spec.n_stocks);
    const auto t_count = static_cast<std::size_t>(spec.n_months);
    const auto lag = static_cast<std::size_t>(spec.reversal_lag);
    Rng rng(spec.seed);

    std::vector<std::array<double, 3>> beta(n);
    for (auto& b : beta) {
        for (int f = 0; f < 3; ++f) b[f] = rng.normal(spec.loading_mean[f], spec.loading_sd[f]);
    }

    FactorSeries factors;
    factors.first_month = spec.first_month;
    std::vector<double> r(t_count * n);
    for (std::size_t t = 0; t < t_count; ++t) {
        std::array<double, 3> f{};
        for (int j = 0; j < 3; ++j) f[j] = rng.normal(spec.factor_mean[j], spec.factor_sd[j]);
        factors.mkt.push_back(f[0]);
        factors.smb.push_back(f[1]);
        factors.hml.push_back(f[2]);

        const double rho = spec.rho_at(static_cast<int>(t));
        double past_mean = 0.0;
        const double* past = nullptr;
        if (rho != 0.0 && t >= lag) {
            past = &r[(t - lag) * n];
            for (std::size_t i = 0; i < n; ++i) past_mean += past[i];
            past_mean /= static_cast<double>(n);
        }
        double* row = &r[t * n];
        for (std::size_t i = 0; i < n; ++i) {
            double v = beta[i][0] * f[0] + beta[i][1] * f[1] + beta[i][2] * f[2];
            v += spec.noise_sd * rng.normal();
            if (past) v += rho * (past[i] - past_mean);
            row[i] = std::max(v, -0.99);
        }
    }

    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "S%04zu", i + 1);
        ids.emplace_back(buf);
    }
    return {MonthlyPanel(spec.first_month, t_count, std::move(ids), std::move(r)), std::move(factors)};
}

MonthlyPanel gen_panel(const SynthSpec& spec) { return gen_dataset(spec).panel; }

GarchPath gen_garch_path(const GarchParams& p, std::size_t n, std::uint64_t seed, std::size_t burn_in) {
    if (!satisfies_constraints(p, GarchSpec{true, false}) || !(std::abs(p.phi) < 1.0)) {
        throw ValidationError("GARCH path parameters violate the stationarity constraints");
    }
    Rng rng(seed);
    const double persistence = p.gamma + p.alpha + 0.5 * p.xi;
    double h = p.k / (1.0 - persistence);
    double y_prev = p.c / (1.0 - p.phi);
    double e_prev = 0.0;
    GarchPath out;
    out.y.reserve(n);
    out.sigma2.reserve(n);
    for (std::size_t t = 0; t < burn_in + n; ++t) {
        if (t > 0) h = p.k + p.gamma * h + (p.alpha + (e_prev < 0.0 ? p.xi : 0.0)) * e_prev * e_prev;
        const double e = std::sqrt(h) * rng.normal();
        const double y = p.c + p.phi * y_prev + e;
        if (t >= burn_in) {
            out.y.push_back(y);
            out.sigma2.push_back(h);
        }
        y_prev = y;
        e_prev = e;
    }
    return out;
}

DailyBarSet gen_daily_bars(const DailySpec& spec) {
    if (spec.n_stocks < 1 || spec.n_months < 1) throw ValidationError("daily bars need at least one stock and month");
    if (spec.days_per_month < 1 || spec.days_per_month > 28) throw ValidationError("days_per_month must be in 1..28");
    if (!(spec.zero_volume_prob >= 0.0 && spec.zero_volume_prob < 1.0)) {
        throw ValidationError("zero_volume_prob must be in [0, 1)");
    }
    constexpr double kTwoPi = 6.283185307179586;
    Rng rng(spec.seed);
    std::vector<StockBars> stocks;
    for (int s = 0; s < spec.n_stocks; ++s) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "S%04d", s + 1);
        StockBars sb{buf, {}};
        const double level = rng.normal(13.0, 1.0);
        for (int m = 0; m < spec.n_months; ++m) {
            const MonthKey mk = spec.first_month + m;
            const double cycle = 0.8 * std::sin(kTwoPi * m / 48.0);
            for (int d = 1; d <= spec.days_per_month; ++d) {
                const double u = rng.uniform();
                const double ret = spec.return_sd * rng.normal();
                const double vol = std::exp(level - cycle + 0.5 * rng.normal());
                sb.bars.push_back({Date{mk.year(), mk.month(), d}, ret, u < spec.zero_volume_prob ? 0.0 : vol});
            }
        }
        stocks.push_back(std::move(sb));
    }
    return DailyBarSet(std::move(stocks));
}

void add_index_columns(FactorSeries& factors, std::uint64_t seed) {
    const std::size_t n = factors.n_months();
    if (n < 2) throw ValidationError("index columns need at least 2 months");
    const GarchParams index_params{0.005, 0.05, 2e-4, 0.80, 0.08, 0.10};
    factors.index_logret = gen_garch_path(index_params, n, seed ^ 0x9e3779b97f4a7c15ULL).y;

    const GarchParams macro_params{0.002, 0.3, 2e-6, 0.85, 0.10, 0.0};
    const auto growth = gen_garch_path(macro_params, n - 1, seed ^ 0xc2b2ae3d27d4eb4fULL).y;
    std::vector<double> level(n);
    level[0] = 100.0;
    for (std::size_t t = 1; t < n; ++t) level[t] = level[t - 1] * std::exp(growth[t - 1]);
    factors.macro_index = std::move(level);
}

} // namespace anomalyscan
