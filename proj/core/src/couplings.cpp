#include "hardyheat/couplings.hpp"
#include "hardyheat/special_functions.hpp"
#include "hardyheat/errors.hpp"

#include <cmath>
#include <string>

namespace hardyheat {

ModelParams::ModelParams(double zeta_, double alpha_) : zeta(zeta_), alpha(alpha_) {
    if (!(zeta > -0.5))
        throw DomainError("ModelParams: zeta must exceed -1/2, got " + std::to_string(zeta));
    if (!(alpha > 0.0) || alpha > 2.0)
        throw DomainError("ModelParams: alpha must lie in (0,2], got " + std::to_string(alpha));
    if (!(alpha < 2.0 * zeta + 1.0))
        throw DomainError("ModelParams: alpha must be below 2*zeta+1 = " +
                          std::to_string(2.0 * zeta + 1.0));
}

namespace {

void require_admissible_eta(const ModelParams& p, double eta) {
    if (p.alpha == 2.0) {
        if (std::isnan(eta)) throw DomainError("psi: NaN eta");
        return; // all real eta admissible for alpha = 2
    }
    if (!(eta > -p.alpha) || !(eta < 2.0 * p.zeta + 1.0))
        throw DomainError("psi: eta = " + std::to_string(eta) +
                          " outside the admissible interval (" +
                          std::to_string(-p.alpha) + ", " +
                          std::to_string(2.0 * p.zeta + 1.0) + ")");
}

} // namespace

double psi(const ModelParams& params, double eta) {
    require_admissible_eta(params, eta);
    if (params.alpha == 2.0) return (2.0 * params.zeta - 1.0 - eta) * eta;

    const double edge = 2.0 * params.zeta + 1.0 - params.alpha;
    if (eta == 0.0 || eta == edge) return 0.0; // removable zeros of the ratio

    const double z2 = 2.0 * params.zeta + 1.0;
    const double num[2] = {0.5 * (z2 - eta), 0.5 * (params.alpha + eta)};
    const double den[2] = {0.5 * eta, 0.5 * (z2 - eta - params.alpha)};
    return std::exp2(params.alpha) * gamma_ratio(num, 2, den, 2);
}

double kappa_critical(const ModelParams& params) {
    return psi(params, params.critical_eta());
}

double eta_from_kappa(const ModelParams& params, double kappa) {
    const double kc = kappa_critical(params);
    if (kappa > kc * (1.0 + 1e-14) && kappa > kc + 1e-300)
        throw SupercriticalError("eta_from_kappa: kappa = " + std::to_string(kappa) +
                                 " exceeds kappa_critical = " + std::to_string(kc));
    const double eta_star = params.critical_eta();
    if (kappa >= kc) return eta_star;
    if (kappa == 0.0) return 0.0;

    if (params.alpha == 2.0) {
        // (2 zeta - 1 - eta) eta = kappa, branch eta <= (2 zeta - 1)/2.
        const double b = 2.0 * params.zeta - 1.0;
        return 0.5 * (b - std::sqrt(b * b - 4.0 * kappa));
    }

    // Bracketed bisection refined by secant steps on the monotone branch.
    const double m = params.big_m();
    double lo = -m + 1e-9 * m;
    double hi = eta_star;
    double flo = psi(params, lo) - kappa;
    double fhi = kc - kappa;
    // Near the -M pole psi diverges to -inf; push the bracket if the offset
    // 1e-9*M was not deep enough for a very negative kappa.
    for (int push = 0; flo > 0.0 && push < 60; ++push) {
        lo = -m + 0.5 * (lo + m);
        flo = psi(params, lo) - kappa;
    }
    if (flo > 0.0 || fhi < 0.0)
        throw ConvergenceError("eta_from_kappa: bracketing failed, bracket [" +
                               std::to_string(lo) + ", " + std::to_string(hi) +
                               "] values [" + std::to_string(flo) + ", " +
                               std::to_string(fhi) + "]");

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double fx = psi(params, x) - kappa;
        if (fx == 0.0) return x;
        if (fx < 0.0) { lo = x; flo = fx; } else { hi = x; fhi = fx; }
        if (hi - lo < 1e-15 * (1.0 + std::fabs(hi))) break;
        // Secant proposal, falling back to bisection when it leaves the bracket.
        double xs = (lo * fhi - hi * flo) / (fhi - flo);
        if (!(xs > lo && xs < hi)) xs = 0.5 * (lo + hi);
        x = xs;
    }
    return 0.5 * (lo + hi);
}

Coupling coupling_from_eta(const ModelParams& params, double eta) {
    return {eta, psi(params, eta)};
}

Coupling coupling_from_kappa(const ModelParams& params, double kappa) {
    const double eta = eta_from_kappa(params, kappa);
    return {eta, kappa};
}

double hardy_potential(const ModelParams& params, double eta, double z) {
    if (!(z > 0.0))
        throw DomainError("hardy_potential: z must be positive, got " + std::to_string(z));
    return psi(params, eta) * std::pow(z, -params.alpha);
}

double c_constant(double beta, double gamma, double zeta) {
    if (!(gamma > -1.0))
        throw DomainError("c_constant: gamma must exceed -1, got " + std::to_string(gamma));
    if (!(beta > 0.0))
        throw DomainError("c_constant: beta must be positive, got " + std::to_string(beta));
    const double tail = 2.0 * zeta - 2.0 * beta - gamma;
    if (tail == 0.0)
        throw PoleError("c_constant: pole at 2*zeta - 2*beta - gamma = 0");
    if (!(tail > -2.0))
        throw DomainError("c_constant: 2*zeta - 2*beta - gamma = " + std::to_string(tail) +
                          " below the admissible extension (> -2)");
    const double num[3] = {beta, 0.5 * (gamma + 1.0), 0.5 * tail};
    const double den[2] = {0.5 * (2.0 * zeta - gamma), 0.5 * (2.0 * beta + gamma + 1.0)};
    return std::exp2(-2.0 * beta) * gamma_ratio(num, 3, den, 2);
}

double c_alpha_constant(const ModelParams& params, double beta, double gamma) {
    if (!(beta > 0.0))
        throw DomainError("c_alpha_constant: beta must be positive");
    const double pole = (2.0 * params.zeta - gamma) / params.alpha;
    if (beta == pole)
        throw PoleError("c_alpha_constant: pole at beta = (2*zeta - gamma)/alpha "
                        "(corresponds to eta = 0)");
    const double num[1] = {beta};
    const double den[1] = {0.5 * params.alpha * beta};
    return gamma_ratio(num, 1, den, 1) *
           c_constant(0.5 * params.alpha * beta, gamma, params.zeta);
}

} // namespace hardyheat
