#include "hardyheat/bessel_kernel.hpp"
#include "hardyheat/special_functions.hpp"
#include "hardyheat/errors.hpp"

#include <cmath>
#include <string>

namespace hardyheat {

namespace {

void check_trs(double t, double r, double s) {
    if (!(t > 0.0)) throw DomainError("bessel kernel: t must be positive");
    if (!(r > 0.0) || !(s > 0.0))
        throw DomainError("bessel kernel: positions must be positive");
}

double p2_impl(double zeta, double t, double r, double s) {
    const double w = r * s / (2.0 * t);
    if (w < 1e-8) {
        // Leading Bessel series term; the kernel approaches the origin value
        // with the full exp(-(r^2+s^2)/(4t)) factor.
        const double log_v = -2.0 * zeta * M_LN2 - std::lgamma(zeta + 0.5) -
                             0.5 * (2.0 * zeta + 1.0) * std::log(t) -
                             (r * r + s * s) / (4.0 * t);
        return std::exp(log_v);
    }
    const double nu = zeta - 0.5;
    const double bi = besseli_scaled(nu, w);
    if (bi == 0.0) return 0.0;
    const double log_v = (0.5 - zeta) * std::log(r * s) - std::log(2.0 * t) -
                         (r - s) * (r - s) / (4.0 * t) + std::log(bi);
    return std::exp(log_v);
}

} // namespace

double p2(const ModelParams& params, double t, double r, double s) {
    check_trs(t, r, s);
    return p2_impl(params.zeta, t, r, s);
}

double p2_origin(const ModelParams& params, double t, double r) {
    if (!(t > 0.0)) throw DomainError("p2_origin: t must be positive");
    if (!(r >= 0.0)) throw DomainError("p2_origin: r must be nonnegative");
    const double zeta = params.zeta;
    const double log_v = -2.0 * zeta * M_LN2 - std::lgamma(zeta + 0.5) -
                         0.5 * (2.0 * zeta + 1.0) * std::log(t) - r * r / (4.0 * t);
    return std::exp(log_v);
}

double p2_hardy(const ModelParams& params, double eta, double t, double r, double s) {
    check_trs(t, r, s);
    const double shifted = params.zeta - eta;
    if (!(shifted > -0.5))
        throw DomainError("p2_hardy: shifted parameter zeta - eta = " +
                          std::to_string(shifted) + " must exceed -1/2");
    if (eta == 0.0) return p2_impl(params.zeta, t, r, s);
    return std::exp(-eta * std::log(r * s)) * p2_impl(shifted, t, r, s);
}

} // namespace hardyheat
