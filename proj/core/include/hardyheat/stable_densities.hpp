#pragma once

namespace hardyheat {

/// rho = alpha/2 in (0,1) together with the time parameter.
struct SubordinatorSpec {
    double rho;
    double t;
};

struct SubordinatorValue {
    double value;
    /// True when tau fell outside the quadrature window
    /// [1e-6, 1e6] * t^(2/alpha) and a tail asymptote was returned instead.
    bool tail_asymptote;
};

/// Density sigma_t^(alpha/2)(tau) of the one-sided stable subordinator with
/// Laplace transform exp(-t lambda^(alpha/2)).
///
/// Inside the central window the Zolotarev single-integral representation is
/// used with the integrand maximum factored out in log space; outside it the
/// convergent power series (large tau) or the saddle-point form (small tau).
double subordinator_density(double alpha, double t, double tau);

/// As subordinator_density, reporting whether a tail asymptote was used.
SubordinatorValue subordinator_density_ex(double alpha, double t, double tau);

/// Symmetric 1-D stable density
///   p^(alpha)(t,r,s) = (1/2pi) int exp(-i(s-r)z) exp(-t|z|^alpha) dz.
/// Closed forms at alpha = 1 (Cauchy) and alpha = 2 (Gauss-Weierstrass);
/// for alpha < 1 a rotated-contour integral free of oscillation on the
/// integration scale, for alpha in (1,2) ascending/tail series with a
/// cosine-quadrature bridge.
double stable1d(double alpha, double t, double r, double s);

namespace detail {
/// Unit-scale density of the subordinator with LT exp(-lambda^rho).
double one_sided_stable_unit(double rho, double x);
/// Unit-scale symmetric density f_alpha(y) = p^(alpha)(1, 0, y).
double symmetric_stable_unit(double alpha, double y);
} // namespace detail

} // namespace hardyheat
