#pragma once

#include "anomalyscan/month.hpp"
#include "anomalyscan/panel.hpp"
#include "anomalyscan/volmodels.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace anomalyscan {

// Portable generator: std::mt19937_64 (its output sequence is fixed by the
// C++ standard), uniforms ((x >> 11) + 0.5) * 2^-53 on the open interval
// (0, 1), normals by Acklam's inverse normal CDF applied to one uniform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform();
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    std::mt19937_64 engine_;
};

// Acklam's rational approximation to the inverse standard normal CDF
// (relative error below 1.2e-9), p in (0, 1).
double inverse_normal_cdf(double p);

// Cross-sectional AR coefficient rho on months [begin, end] (0-based,
// inclusive). Months outside every segment use rho = 0.
struct RhoSegment {
    int begin = 0;
    int end = 0;
    double rho = 0.0;
};

struct SynthSpec {
    std::uint64_t seed = 1;
    int n_stocks = 100;
    int n_months = 240;
    MonthKey first_month = MonthKey::from_index(2000 * 12);
    std::vector<RhoSegment> regimes;
    // r_t depends on the demeaned r_{t-lag}; 2 lines up with one skip month.
    int reversal_lag = 2;
    std::array<double, 3> factor_mean{0.008, 0.002, 0.003};
    std::array<double, 3> factor_sd{0.05, 0.03, 0.03};
    std::array<double, 3> loading_mean{1.0, 0.5, 0.3};
    std::array<double, 3> loading_sd{0.3, 0.5, 0.5};
    double noise_sd = 0.08;

    void validate() const; // throws ValidationError
    double rho_at(int month) const noexcept;
};

struct SynthData {
    MonthlyPanel panel;
    FactorSeries factors; // mkt, smb, hml driving the panel (no index columns)
};

// r_{i,t} = rho_t (r_{i,t-L} - mean_i r_{.,t-L}) + sum_f beta_{i,f} F_{f,t} + noise_sd e_{i,t},
// floored at -0.99. Stock ids are S0001, S0002, ...
SynthData gen_dataset(const SynthSpec& spec);
MonthlyPanel gen_panel(const SynthSpec& spec);

struct GarchPath {
    std::vector<double> y;
    std::vector<double> sigma2; // true conditional variance of y_t
};

// AR(1)-GJR-GARCH(1,1) path started at the unconditional variance after
// `burn_in` discarded draws. Throws ValidationError for non-stationary params.
GarchPath gen_garch_path(const GarchParams& params, std::size_t n, std::uint64_t seed, std::size_t burn_in = 500);

struct DailySpec {
    std::uint64_t seed = 1;
    int n_stocks = 30;
    int n_months = 120;
    MonthKey first_month = MonthKey::from_index(2000 * 12);
    int days_per_month = 20; // at most 28
    double zero_volume_prob = 0.02;
    double return_sd = 0.02;
};

// Daily bars whose log-volume level drifts with a slow market-wide cycle,
// so the cross-sectional illiquidity measure varies over time.
DailyBarSet gen_daily_bars(const DailySpec& spec);

// Index columns for regime inputs: index_logret from a GJR path and
// macro_index = 100 exp(cumulative GARCH path).
void add_index_columns(FactorSeries& factors, std::uint64_t seed);

} // namespace anomalyscan
