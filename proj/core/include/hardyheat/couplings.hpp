#pragma once

#include <limits>

namespace hardyheat {

/// The pair (zeta, alpha) with its validity domain: zeta > -1/2,
/// alpha in (0,2] and alpha < 2*zeta + 1.
struct ModelParams {
    double zeta;
    double alpha;

    ModelParams(double zeta_, double alpha_);

    /// Effective dimension 2*zeta + 1 of the reference measure r^(2 zeta) dr.
    double effective_dimension() const { return 2.0 * zeta + 1.0; }

    /// Left edge of the admissible eta interval: M = alpha for alpha < 2,
    /// M = +inf for alpha = 2.
    double big_m() const {
        return alpha < 2.0 ? alpha : std::numeric_limits<double>::infinity();
    }

    /// Midpoint eta of the admissible interval; the coupling map attains
    /// its maximum there.
    double critical_eta() const { return 0.5 * (2.0 * zeta + 1.0 - alpha); }

    bool is_subcritical_branch(double eta) const {
        return eta > -big_m() && eta <= critical_eta();
    }
};

/// eta together with kappa = psi(params, eta), restricted to the
/// monotone branch eta in (-M, (2 zeta + 1 - alpha)/2].
struct Coupling {
    double eta;
    double kappa;
};

/// The coupling map kappa = Psi_zeta(eta).
///
/// For alpha < 2 this is the Gamma ratio
///   2^alpha G((2z+1-eta)/2) G((alpha+eta)/2) / (G(eta/2) G((2z+1-eta-alpha)/2)),
/// evaluated in log space with sign tracking (the denominator Gamma is
/// negative for eta in (-2,0)); for alpha = 2 it is (2 zeta - 1 - eta) eta.
/// Returns exactly 0 at the removable points eta = 0 and
/// eta = 2 zeta + 1 - alpha.
double psi(const ModelParams& params, double eta);

/// Maximum of the coupling map, Psi at eta = (2 zeta + 1 - alpha)/2.
double kappa_critical(const ModelParams& params);

/// Inverse of the coupling map on the branch (-M, (2 zeta + 1 - alpha)/2].
/// Throws SupercriticalError for kappa > kappa_critical and
/// ConvergenceError if bracketing fails.
double eta_from_kappa(const ModelParams& params, double kappa);

/// Resolve a Coupling from eta.
Coupling coupling_from_eta(const ModelParams& params, double eta);

/// Resolve a Coupling from kappa through the branch inverse.
Coupling coupling_from_kappa(const ModelParams& params, double kappa);

/// Hardy potential q(z) = Psi_zeta(eta) z^(-alpha), z > 0.
double hardy_potential(const ModelParams& params, double eta, double z);

/// Closed-form constant
///   C(beta,gamma,zeta) = 2^(-2 beta) G(beta) G((gamma+1)/2) G((2z-2b-g)/2)
///                        / (G((2z-g)/2) G((2b+g+1)/2)).
/// Requires gamma > -1, beta > 0 and 2 zeta - 2 beta - gamma > -2 away from
/// the pole at 2 zeta - 2 beta - gamma = 0 (the extension below 0 backs the
/// compensated functional).
double c_constant(double beta, double gamma, double zeta);

/// C^(alpha)(beta,gamma,zeta) = Gamma(beta)/Gamma(alpha beta/2)
///                              * C(alpha beta/2, gamma, zeta).
/// Valid for gamma > -1 and 0 < beta < (2 zeta - gamma + 2)/alpha except the
/// pole surface beta = (2 zeta - gamma)/alpha.
double c_alpha_constant(const ModelParams& params, double beta, double gamma);

} // namespace hardyheat
