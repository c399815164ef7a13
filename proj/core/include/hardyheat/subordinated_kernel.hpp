#pragma once

#include "hardyheat/couplings.hpp"
#include "hardyheat/quadrature.hpp"

#include <memory>
#include <vector>

namespace hardyheat {

/// Sharp comparator of the subordinated kernel,
///   phi = t / (|r-s|^(1+alpha) (r+s)^(2 zeta)
///          + t^((1+alpha)/alpha) (t^(1/alpha) + r + s)^(2 zeta)).
struct ComparatorValue {
    double phi;
};

/// Unperturbed kernel p_zeta^(alpha)(t,r,s) by subordination:
///   int_0^infty sigma_t^(alpha/2)(tau) p2(tau,r,s) dtau,
/// adaptive in log tau with the integrand window located by a coarse scan.
/// Delegates to the exact Bessel kernel at alpha = 2.
double p_alpha(const ModelParams& params, double t, double r, double s,
               const QuadratureSpec& spec = QuadratureSpec(1e-8, 1e-300));

/// Origin value p_zeta^(alpha)(t,r,0) by subordination of p2_origin.
double p_alpha_origin(const ModelParams& params, double t, double r,
                      const QuadratureSpec& spec = QuadratureSpec(1e-8, 1e-300));

ComparatorValue comparator_value(const ModelParams& params, double t, double r, double s);

/// Clamp weight (1 min r/t^(1/alpha))^(-eta) (1 min s/t^(1/alpha))^(-eta).
double comparator_weight(const ModelParams& params, double eta, double t, double r,
                         double s);

/// Ground-state comparator of the sharp bounds:
///   comparator_weight * p_alpha.
double comparator_phi(const ModelParams& params, double eta, double t, double r, double s);

/// Closed form h_{beta,gamma}(r) = C^(alpha)(beta,gamma,zeta) r^(alpha beta + gamma - 2 zeta).
double h_beta_gamma(const ModelParams& params, double beta, double gamma, double r);

/// Independent double-quadrature oracle for h_{beta,gamma}:
///   int_0^inf dt t^(beta-1) int_0^inf ds s^gamma p_alpha(t,r,s).
double h_beta_gamma_oracle(const ModelParams& params, double beta, double gamma, double r,
                           double rel_tol = 1e-5);

/// Compensated functional on the extended beta-range
/// (0, (2 zeta - gamma + 2)/alpha) excluding beta = (2 zeta - gamma)/alpha:
/// closed form C^(alpha)(beta,gamma,zeta) s^(alpha beta + gamma - 2 zeta).
/// Negative for beta past the uncompensated range.
double h_plus_beta_gamma(const ModelParams& params, double beta, double gamma, double s);

/// Oracle for the compensated functional:
///   int_0^inf dt t^(beta-1) int_0^inf dr r^gamma (p_alpha(t,r,s) - p_alpha(t,r,0)).
double h_plus_beta_gamma_oracle(const ModelParams& params, double beta, double gamma,
                                double s, double rel_tol = 1e-4);

/// Fitzsimmons ratio (beta-1) h_{beta-1,gamma}(r) / h+_{beta,gamma}(r);
/// equals Psi_zeta(eta) r^(-alpha) at eta = 2 zeta - gamma - alpha beta.
double fitzsimmons_ratio(const ModelParams& params, double beta, double gamma, double r);

/// Table-backed fast evaluator of p_zeta^(alpha)(t,r,s), built once per
/// parameter pair and shared. Bicubic interpolation of log p(1,x,y) on a
/// log-log grid, with stable-factor and origin-profile asymptotics outside
/// the table. Exact p2 at alpha = 2 (no table). Relative accuracy a few
/// 1e-4 over the table range; intended for grid sweeps and the Duhamel
/// engine, never for the high-accuracy identity checks.
class CachedKernel {
public:
    explicit CachedKernel(const ModelParams& params, int points_per_decade = 40);

    const ModelParams& params() const { return params_; }

    /// p_zeta^(alpha)(t, r, s)
    double value(double t, double r, double s) const;

    /// p_zeta^(alpha)(1, x, y)
    double unit(double x, double y) const;

    /// Shared per-params instance (thread-safe construction).
    static std::shared_ptr<const CachedKernel> shared(const ModelParams& params);

private:
    double table_lookup(double lx, double ly) const;

    ModelParams params_;
    bool exact_ = false; // alpha == 2
    double lo_ = 0.0, hi_ = 0.0, step_ = 0.0;
    int n_ = 0;
    std::vector<double> log_values_; // n_ x n_, log p(1, e^u, e^v)
    // 1-D profile p(1, ~0, rho) for the far origin-corner
    double w_lo_ = 0.0, w_hi_ = 0.0, w_step_ = 0.0;
    std::vector<double> w_log_values_;
    double nu_sq_plus_1_ = 1.0;
};

} // namespace hardyheat
