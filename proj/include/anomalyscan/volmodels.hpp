#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace anomalyscan {

// AR(1) mean with GARCH(1,1) variance, optionally with the GJR leverage term:
//   y_t   = c + phi * y_{t-1} + e_t,   e_t = sigma_t z_t
//   s2_t  = k + gamma * s2_{t-1} + (alpha + xi * [e_{t-1} < 0]) * e_{t-1}^2
// The recursion starts at the sample variance of the mean residuals.
struct GarchSpec {
    bool asymmetric = true;
    // Keep xi fixed at 0 while using the asymmetric model.
    bool freeze_leverage = false;

    bool has_leverage() const noexcept { return asymmetric && !freeze_leverage; }
};

struct GarchParams {
    double c = 0.0;
    double phi = 0.0;
    double k = 0.0;
    double gamma = 0.0;
    double alpha = 0.0;
    double xi = 0.0;

    static constexpr std::size_t kCount = 6;
    std::array<double, kCount> to_array() const noexcept { return {c, phi, k, gamma, alpha, xi}; }
    static GarchParams from_array(const std::array<double, kCount>& a) noexcept {
        return {a[0], a[1], a[2], a[3], a[4], a[5]};
    }
    bool operator==(const GarchParams&) const = default;
};

// k > 0, gamma >= 0, alpha >= 0, xi >= 0 and gamma + alpha + xi/2 < 1
// (xi is ignored for the symmetric model).
bool satisfies_constraints(const GarchParams& p, const GarchSpec& spec) noexcept;

struct GarchOptions {
    int max_iterations = 500;
    double tolerance = 1e-8; // relative log-likelihood change
};

struct GarchFit {
    GarchSpec spec;
    GarchParams params;
    GarchParams std_errors;        // inverse observed information; NaN if not available
    double loglik = 0.0;
    std::vector<double> cond_variance; // one value per usable month (input index 1..n-1)
    bool converged = false;
    int iterations = 0;
    std::vector<double> loglik_trace; // accepted iterations of the winning start
};

// Gaussian log-likelihood over the n-1 usable observations; -inf when the
// variance recursion leaves the positive reals.
double garch_loglik(std::span<const double> y, const GarchParams& p, const GarchSpec& spec);

// Analytic gradient with respect to (c, phi, k, gamma, alpha, xi). The xi
// entry is 0 without a leverage term in GarchSpec.
std::array<double, GarchParams::kCount> garch_loglik_gradient(std::span<const double> y, const GarchParams& p,
                                                              const GarchSpec& spec);

// Variance recursion for fixed parameters (length n-1).
std::vector<double> garch_variance_path(std::span<const double> y, const GarchParams& p, const GarchSpec& spec);

// Quasi-maximum-likelihood fit. Requires at least 60 finite, non-constant
// observations. Non-convergence returns the best point with converged=false.
GarchFit fit_garch(std::span<const double> y, const GarchSpec& spec, const GarchOptions& options = {});

inline const std::vector<double>& conditional_variance(const GarchFit& fit) noexcept { return fit.cond_variance; }

} // namespace anomalyscan
