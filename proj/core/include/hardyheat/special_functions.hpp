#pragma once

namespace hardyheat {

/// log|Gamma(x)| together with sign(Gamma(x)).
struct LogGamma {
    double log_abs;
    int sign; // +1 or -1
};

/// Log-gamma with explicit sign bookkeeping. Throws PoleError at
/// nonpositive integers.
LogGamma log_gamma(double x);

/// Signed Gamma ratio prod Gamma(num[i]) / prod Gamma(den[j]) evaluated in
/// log space. Throws PoleError if any numerator argument is a nonpositive
/// integer; a pole in the denominator yields exactly 0.
double gamma_ratio(const double* num, int n_num, const double* den, int n_den);

/// Scaled modified Bessel function of the first kind, e^(-z) I_nu(z),
/// for z >= 0 and nu > -1.
///
/// Small z uses the ascending series (all terms positive, no cancellation);
/// large z the classical asymptotic expansion in 1/z. The switch sits at
/// z = 30 + nu^2. For nu in (-1,0) the value diverges as z -> 0+.
double besseli_scaled(double nu, double z);

namespace detail {
// Both regimes exposed so the regime-boundary continuity can be tested.
double besseli_scaled_series(double nu, double z);
double besseli_scaled_asymptotic(double nu, double z);
double besseli_regime_switch(double nu);
} // namespace detail

} // namespace hardyheat
