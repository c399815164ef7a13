#pragma once

#include "hardyheat/couplings.hpp"

namespace hardyheat {

/// Point (t, r, s) with t > 0 and nonnegative positions; r = 0 or s = 0
/// only where the origin-value formula applies.
struct KernelPoint {
    double t, r, s;
};

/// Reflected Bessel heat kernel (the alpha = 2 object)
///   p2(t,r,s) = (rs)^(1/2-zeta)/(2t) exp(-(r^2+s^2)/(4t)) I_{zeta-1/2}(rs/(2t)),
/// computed as exp(-(r-s)^2/(4t)) times the scaled Bessel so the exponent
/// never overflows. The alpha field of params is ignored.
double p2(const ModelParams& params, double t, double r, double s);

/// Origin value p2(t,r,0) = 2^(-2 zeta)/Gamma((2 zeta+1)/2)
///                          t^(-(2 zeta+1)/2) exp(-r^2/(4t)).
double p2_origin(const ModelParams& params, double t, double r);

/// Exact Hardy-perturbed alpha = 2 kernel
///   (r s)^(-eta) p2 with shifted parameter zeta - eta,
/// the heat kernel of the Bessel operator minus Psi_zeta(eta)/r^2.
/// Requires zeta - eta > -1/2.
double p2_hardy(const ModelParams& params, double eta, double t, double r, double s);

} // namespace hardyheat
