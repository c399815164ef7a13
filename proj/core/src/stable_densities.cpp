#include "hardyheat/stable_densities.hpp"
#include "hardyheat/quadrature.hpp"
#include "hardyheat/errors.hpp"

#include <cmath>
#include <string>

namespace hardyheat {

namespace {

constexpr double kWindowLo = 1e-6;
constexpr double kWindowHi = 1e6;

// Zolotarev kernel A(phi) on (0, pi); A is increasing from
// A0 = (rho^rho (1-rho)^(1-rho))^(1/(1-rho)) to +infinity.
double zolotarev_a(double phi, double rho) {
    const double omr = 1.0 - rho;
    if (phi < 1e-9) {
        return std::pow(std::pow(rho, rho) * std::pow(omr, omr), 1.0 / omr);
    }
    const double lg = (rho * std::log(std::sin(rho * phi)) +
                       omr * std::log(std::sin(omr * phi)) - std::log(std::sin(phi))) /
                      omr;
    return std::exp(lg);
}

double zolotarev_a0(double rho) {
    const double omr = 1.0 - rho;
    return std::pow(std::pow(rho, rho) * std::pow(omr, omr), 1.0 / omr);
}

// Convergent series for the unit one-sided density at large x:
//   g(x) = (1/pi) sum_{k>=1} (-1)^(k+1) Gamma(k rho + 1)/k! sin(pi k rho) x^(-k rho - 1).
double one_sided_tail_series(double rho, double x) {
    const double lx = std::log(x);
    double sum = 0.0;
    double log_kfac = 0.0;
    for (int k = 1; k <= 220; ++k) {
        log_kfac += std::log(static_cast<double>(k));
        const double lt = std::lgamma(k * rho + 1.0) - log_kfac - (k * rho + 1.0) * lx;
        const double term = ((k % 2) ? 1.0 : -1.0) * std::sin(M_PI * k * rho) * std::exp(lt);
        sum += term;
        if (std::exp(lt) < 1e-18 * std::fabs(sum)) break;
    }
    return sum / M_PI;
}

// Saddle-point form for x -> 0+:
//   g(x) ~ (rho/x)^((2-rho)/(2-2rho)) exp(-(1-rho) rho^(rho/(1-rho)) x^(-rho/(1-rho)))
//          / sqrt(2 pi rho (1-rho)).
double one_sided_small_x(double rho, double x) {
    const double omr = 1.0 - rho;
    const double expo = -omr * std::pow(rho, rho / omr) * std::pow(x, -rho / omr);
    const double lg = 0.5 * (2.0 - rho) / omr * std::log(rho / x) + expo -
                      0.5 * std::log(2.0 * M_PI * rho * omr);
    return lg < -745.0 ? 0.0 : std::exp(lg);
}

} // namespace

namespace detail {

double one_sided_stable_unit(double rho, double x) {
    if (!(rho > 0.0) || !(rho < 1.0))
        throw DomainError("one_sided_stable_unit: rho must lie in (0,1)");
    if (!(x > 0.0)) throw DomainError("one_sided_stable_unit: x must be positive");

    const double omr = 1.0 - rho;
    const double a0 = zolotarev_a0(rho);
    const double c = std::pow(x, -rho / omr);
    // log prefactor of the Zolotarev representation with exp(-c A0) factored
    // out of the integral.
    const double log_pref = std::log(rho / omr / M_PI) - std::log(x) / omr - c * a0;
    if (log_pref < -760.0) return 0.0;

    QuadratureSpec spec(1e-11, 1e-280);
    spec.max_subdivisions = 4000;
    spec.endpoint_power_right = 3.0; // A blows up like (pi - phi)^(-1/(1-rho))
    auto integrand = [rho, a0, c](double phi) {
        const double a = zolotarev_a(phi, rho);
        const double e = c * (a - a0);
        return e > 745.0 ? 0.0 : a * std::exp(-e);
    };
    const IntegralResult integral = integrate(integrand, 0.0, M_PI, spec);
    if (!(integral.value > 0.0)) return 0.0;
    return std::exp(log_pref + std::log(integral.value));
}

double symmetric_stable_unit(double alpha, double y) {
    y = std::fabs(y);
    if (alpha == 2.0) return std::exp(-0.25 * y * y) / std::sqrt(4.0 * M_PI);
    if (alpha == 1.0) return 1.0 / (M_PI * (1.0 + y * y));

    if (alpha < 1.0) {
        // Rotated contour: f(y) = (1/pi) int_0^inf e^(-y v - ca v^alpha)
        //                          sin(sa v^alpha) dv,
        // ca = cos(pi alpha/2) > 0, sa = sin(pi alpha/2). Non-oscillatory
        // envelope; valid for every y >= 0.
        const double ca = std::cos(0.5 * M_PI * alpha);
        const double sa = std::sin(0.5 * M_PI * alpha);
        // Truncate where the envelope has decayed by e^-45.
        double v_max = std::pow(45.0 / ca, 1.0 / alpha);
        if (y > 0.0) v_max = std::min(v_max, 45.0 / y + std::pow(45.0 / ca, 1.0 / alpha) * 0.25);
        QuadratureSpec spec(1e-11, 1e-300);
        spec.max_subdivisions = 20000;
        auto f = [y, ca, sa, alpha](double v) {
            const double va = std::pow(v, alpha);
            return std::exp(-y * v - ca * va) * std::sin(sa * va);
        };
        return integrate(f, 0.0, v_max, spec).value / M_PI;
    }

    // alpha in (1,2)
    if (y <= 3.0) {
        // f(y) = 1/(pi alpha) sum_k (-1)^k y^(2k) Gamma((2k+1)/alpha) / (2k)!
        double sum = 0.0;
        double log_y = y > 0.0 ? std::log(y) : 0.0;
        double log_fac = 0.0; // log (2k)!
        for (int k = 0; k <= 200; ++k) {
            if (k > 0) {
                log_fac += std::log(2.0 * k - 1.0) + std::log(2.0 * k);
            }
            const double lt = (y > 0.0 ? 2.0 * k * log_y : (k == 0 ? 0.0 : -1e30)) +
                              std::lgamma((2.0 * k + 1.0) / alpha) - log_fac;
            const double term = ((k % 2) ? -1.0 : 1.0) * std::exp(lt);
            sum += term;
            if (std::exp(lt) < 1e-17 * std::fabs(sum) && k > 2) break;
        }
        return sum / (M_PI * alpha);
    }
    if (y >= 6.0) {
        // Asymptotic tail series, truncated at the smallest term.
        const double ly = std::log(y);
        double sum = 0.0, prev = 1e308;
        double log_kfac = 0.0;
        for (int k = 1; k <= 200; ++k) {
            log_kfac += std::log(static_cast<double>(k));
            const double lt = std::lgamma(k * alpha + 1.0) - log_kfac - (k * alpha + 1.0) * ly;
            const double mag = std::exp(lt);
            if (mag > prev) break;
            sum += ((k % 2) ? 1.0 : -1.0) * std::sin(0.5 * M_PI * k * alpha) * mag;
            prev = mag;
            if (mag < 1e-17 * std::fabs(sum)) break;
        }
        return sum / M_PI;
    }
    // Bridge 3 < y < 6: direct cosine quadrature; few oscillations here.
    const double z_max = std::pow(42.0, 1.0 / alpha);
    QuadratureSpec spec(1e-12, 1e-300);
    spec.max_subdivisions = 4000;
    auto f = [y, alpha](double z) { return std::cos(y * z) * std::exp(-std::pow(z, alpha)); };
    return integrate(f, 0.0, z_max, spec).value / M_PI;
}

} // namespace detail

SubordinatorValue subordinator_density_ex(double alpha, double t, double tau) {
    if (!(alpha > 0.0) || !(alpha < 2.0))
        throw DomainError("subordinator_density: alpha must lie in (0,2), got " +
                          std::to_string(alpha));
    if (!(t > 0.0)) throw DomainError("subordinator_density: t must be positive");
    if (!(tau > 0.0)) throw DomainError("subordinator_density: tau must be positive");

    const double rho = 0.5 * alpha;
    const double scale = std::pow(t, -1.0 / rho); // t^(-2/alpha)
    const double x = tau * scale;
    if (x < kWindowLo) return {one_sided_small_x(rho, x) * scale, true};
    if (x > kWindowHi) return {one_sided_tail_series(rho, x) * scale, true};
    return {detail::one_sided_stable_unit(rho, x) * scale, false};
}

double subordinator_density(double alpha, double t, double tau) {
    return subordinator_density_ex(alpha, t, tau).value;
}

double stable1d(double alpha, double t, double r, double s) {
    if (!(alpha > 0.0) || alpha > 2.0)
        throw DomainError("stable1d: alpha must lie in (0,2]");
    if (!(t > 0.0)) throw DomainError("stable1d: t must be positive");
    if (std::isnan(r) || std::isnan(s)) throw DomainError("stable1d: NaN position");
    const double scale = std::pow(t, -1.0 / alpha);
    return scale * detail::symmetric_stable_unit(alpha, (s - r) * scale);
}

} // namespace hardyheat
