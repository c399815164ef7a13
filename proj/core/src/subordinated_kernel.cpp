#include "hardyheat/subordinated_kernel.hpp"
#include "hardyheat/bessel_kernel.hpp"
#include "hardyheat/stable_densities.hpp"
#include "hardyheat/special_functions.hpp"
#include "hardyheat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace hardyheat {

namespace {

void check_trs(double t, double r, double s) {
    if (!(t > 0.0)) throw DomainError("p_alpha: t must be positive");
    if (!(r > 0.0) || !(s > 0.0)) throw DomainError("p_alpha: positions must be positive");
}

// p2 with guarded small-argument limit, in terms of zeta only.
double p2_value(double zeta, double t, double r, double s) {
    const double w = r * s / (2.0 * t);
    double log_v;
    if (w < 1e-8) {
        log_v = -2.0 * zeta * M_LN2 - std::lgamma(zeta + 0.5) -
                0.5 * (2.0 * zeta + 1.0) * std::log(t) - (r * r + s * s) / (4.0 * t);
    } else {
        const double bi = besseli_scaled(zeta - 0.5, w);
        if (bi == 0.0) return 0.0;
        log_v = (0.5 - zeta) * std::log(r * s) - std::log(2.0 * t) -
                (r - s) * (r - s) / (4.0 * t) + std::log(bi);
    }
    return log_v < -745.0 ? 0.0 : std::exp(log_v);
}

double p2_origin_value(double zeta, double t, double r) {
    const double log_v = -2.0 * zeta * M_LN2 - std::lgamma(zeta + 0.5) -
                         0.5 * (2.0 * zeta + 1.0) * std::log(t) - r * r / (4.0 * t);
    return log_v < -745.0 ? 0.0 : std::exp(log_v);
}

// Compensated spline of the unit subordinator density: stores
// D(v) = log g(e^v) + b e^(-v rho/(1-rho)) on a uniform v-grid, which keeps
// the interpolated function slowly varying through the saddle regime.
class SubordinatorSpline {
public:
    SubordinatorSpline(double alpha) : rho_(0.5 * alpha) {
        const double omr = 1.0 - rho_;
        saddle_b_ = omr * std::pow(rho_, rho_ / omr);
        saddle_p_ = rho_ / omr;
        // Underflow edge of the density: saddle exponent 720.
        const double x_ue = std::pow(saddle_b_ / 720.0, 1.0 / saddle_p_);
        lo_ = std::log(std::max(1e-6, 1.3 * x_ue));
        hi_ = std::log(1e6);
        const double span = hi_ - lo_;
        n_ = std::max(64, static_cast<int>(std::ceil(span / M_LN10 * 120.0))) + 1;
        step_ = span / (n_ - 1);
        values_.resize(n_);
        for (int i = 0; i < n_; ++i) {
            const double v = lo_ + i * step_;
            const double x = std::exp(v);
            const double g = detail::one_sided_stable_unit(rho_, x);
            values_[i] = std::log(g) + saddle_b_ * std::exp(-saddle_p_ * v);
        }
    }

    double value(double x) const {
        const double v = std::log(x);
        if (v < lo_ || v > hi_) {
            // Outside the central window the dedicated asymptotes apply.
            return subordinator_density(2.0 * rho_, 1.0, x);
        }
        int i = static_cast<int>(std::floor((v - lo_) / step_));
        i = std::clamp(i, 1, n_ - 3);
        const double u = (v - (lo_ + i * step_)) / step_;
        const double d = catmull_rom(values_[i - 1], values_[i], values_[i + 1],
                                     values_[i + 2], u);
        const double lg = d - saddle_b_ * std::exp(-saddle_p_ * v);
        return lg < -745.0 ? 0.0 : std::exp(lg);
    }

    static double catmull_rom(double m1, double p0, double p1, double p2, double u) {
        const double a = 2.0 * p0;
        const double b = p1 - m1;
        const double c = 2.0 * m1 - 5.0 * p0 + 4.0 * p1 - p2;
        const double d = -m1 + 3.0 * p0 - 3.0 * p1 + p2;
        return 0.5 * (a + b * u + c * u * u + d * u * u * u);
    }

private:
    double rho_, saddle_b_, saddle_p_;
    double lo_, hi_, step_;
    int n_;
    std::vector<double> values_;
};

// Core quadrature of int sigma_1(tau) k(tau) dtau in v = log tau, where the
// integrand window is located by a coarse scan. `kernel` is p2(tau,x,y) or
// its origin variant. sigma(x) evaluates the unit subordinator density.
template <class Sigma, class Kernel>
double subordination_integral(double alpha, const Sigma& sigma, const Kernel& kernel,
                              double near_scale, const QuadratureSpec& spec) {
    auto logand = [&](double v) {
        const double tau = std::exp(v);
        const double s = sigma(tau);
        if (s <= 0.0) return 0.0;
        const double k = kernel(tau);
        return s * k * tau; // jacobian of tau = e^v
    };
    // Scan for the support window of the integrand.
    const double rho = 0.5 * alpha;
    double v_lo = std::min(0.0, 2.0 * std::log(0.5 * near_scale + 1e-280)) - 45.0;
    double v_hi = 8.0 + 45.0 / std::min(1.0, rho + 0.05);
    const int n_scan = 96;
    double peak = 0.0;
    int i_peak = -1;
    std::vector<double> vals(n_scan + 1);
    for (int i = 0; i <= n_scan; ++i) {
        const double v = v_lo + (v_hi - v_lo) * i / n_scan;
        vals[i] = logand(v);
        if (vals[i] > peak) { peak = vals[i]; i_peak = i; }
    }
    if (i_peak < 0 || peak <= 0.0) return 0.0;
    const double floor = peak * 1e-18;
    int i_a = i_peak, i_b = i_peak;
    while (i_a > 0 && vals[i_a - 1] > floor) --i_a;
    while (i_b < n_scan && vals[i_b + 1] > floor) ++i_b;
    const double h = (v_hi - v_lo) / n_scan;
    const double a = v_lo + (i_a > 0 ? (i_a - 1) : 0) * h;
    const double b = v_lo + std::min(n_scan, i_b + 1) * h;

    QuadratureSpec inner = spec;
    inner.abs_tol = std::max(spec.abs_tol, peak * (b - a) * 1e-16);
    const double v_peak = v_lo + i_peak * h;
    // Split at the peak so the adaptive pass starts from a reasonable partition.
    const IntegralResult left = integrate(logand, a, v_peak, inner);
    const IntegralResult right = integrate(logand, v_peak, b, inner);
    return left.value + right.value;
}

double direct_sigma(double alpha, double tau) { return subordinator_density(alpha, 1.0, tau); }

} // namespace

double p_alpha(const ModelParams& params, double t, double r, double s,
               const QuadratureSpec& spec) {
    check_trs(t, r, s);
    if (params.alpha == 2.0) return p2(params, t, r, s);
    // Scale to t = 1: p(t,r,s) = t^(-(2z+1)/a) p(1, r t^(-1/a), s t^(-1/a)).
    const double sc = std::pow(t, -1.0 / params.alpha);
    const double x = r * sc, y = s * sc;
    const double zeta = params.zeta;
    const double alpha = params.alpha;
    const double v = subordination_integral(
        alpha, [alpha](double tau) { return direct_sigma(alpha, tau); },
        [zeta, x, y](double tau) { return p2_value(zeta, tau, x, y); }, std::fabs(x - y),
        spec);
    return v * std::pow(t, -(2.0 * zeta + 1.0) / alpha);
}

double p_alpha_origin(const ModelParams& params, double t, double r,
                      const QuadratureSpec& spec) {
    if (!(t > 0.0)) throw DomainError("p_alpha_origin: t must be positive");
    if (!(r >= 0.0)) throw DomainError("p_alpha_origin: r must be nonnegative");
    if (params.alpha == 2.0) return p2_origin(params, t, r);
    const double sc = std::pow(t, -1.0 / params.alpha);
    const double x = r * sc;
    const double zeta = params.zeta;
    const double alpha = params.alpha;
    const double v = subordination_integral(
        alpha, [alpha](double tau) { return direct_sigma(alpha, tau); },
        [zeta, x](double tau) { return p2_origin_value(zeta, tau, x); }, x, spec);
    return v * std::pow(t, -(2.0 * zeta + 1.0) / alpha);
}

ComparatorValue comparator_value(const ModelParams& params, double t, double r, double s) {
    check_trs(t, r, s);
    const double a = params.alpha, z2 = 2.0 * params.zeta;
    const double t1a = std::pow(t, 1.0 / a);
    const double d = std::fabs(r - s);
    const double den = std::pow(d, 1.0 + a) * std::pow(r + s, z2) +
                       std::pow(t, (1.0 + a) / a) * std::pow(t1a + r + s, z2);
    return {t / den};
}

double comparator_weight(const ModelParams& params, double eta, double t, double r,
                         double s) {
    const double t1a = std::pow(t, 1.0 / params.alpha);
    const double cr = std::min(1.0, r / t1a), cs = std::min(1.0, s / t1a);
    return std::pow(cr, -eta) * std::pow(cs, -eta);
}

double comparator_phi(const ModelParams& params, double eta, double t, double r, double s) {
    return comparator_weight(params, eta, t, r, s) * p_alpha(params, t, r, s);
}

double h_beta_gamma(const ModelParams& params, double beta, double gamma, double r) {
    if (!(r > 0.0)) throw DomainError("h_beta_gamma: r must be positive");
    const double band = (2.0 * params.zeta - gamma) / params.alpha;
    if (!(beta > 0.0) || !(beta < band))
        throw DomainError("h_beta_gamma: beta must lie in (0, " + std::to_string(band) + ")");
    return c_alpha_constant(params, beta, gamma) *
           std::pow(r, params.alpha * beta + gamma - 2.0 * params.zeta);
}

double h_beta_gamma_oracle(const ModelParams& params, double beta, double gamma, double r,
                           double rel_tol) {
    if (!(r > 0.0)) throw DomainError("h_beta_gamma_oracle: r must be positive");
    QuadratureSpec kernel_spec(std::min(1e-7, rel_tol * 1e-2), 1e-300);
    QuadratureSpec inner_spec(rel_tol * 0.1, 1e-300);
    inner_spec.max_subdivisions = 800;
    if (gamma < 0.0)
        inner_spec.endpoint_power_left = std::ceil(2.0 / (1.0 + gamma));
    auto moment = [&](double t) {
        auto f = [&](double s) {
            return std::pow(s, gamma) * p_alpha(params, t, r, s, kernel_spec);
        };
        return integrate(f, 0.0, std::numeric_limits<double>::infinity(), inner_spec).value;
    };
    QuadratureSpec outer_spec(rel_tol, 1e-300);
    outer_spec.max_subdivisions = 600;
    if (beta < 1.0) outer_spec.endpoint_power_left = std::ceil(2.0 / beta);
    auto g = [&](double t) { return std::pow(t, beta - 1.0) * moment(t); };
    return integrate(g, 0.0, std::numeric_limits<double>::infinity(), outer_spec).value;
}

double h_plus_beta_gamma(const ModelParams& params, double beta, double gamma, double s) {
    if (!(s > 0.0)) throw DomainError("h_plus_beta_gamma: s must be positive");
    const double band_hi = (2.0 * params.zeta - gamma + 2.0) / params.alpha;
    if (!(beta > 0.0) || !(beta < band_hi))
        throw DomainError("h_plus_beta_gamma: beta must lie in (0, " +
                          std::to_string(band_hi) + ")");
    // c_alpha_constant raises PoleError at the excluded beta = (2z-gamma)/alpha.
    return c_alpha_constant(params, beta, gamma) *
           std::pow(s, params.alpha * beta + gamma - 2.0 * params.zeta);
}

double h_plus_beta_gamma_oracle(const ModelParams& params, double beta, double gamma,
                                double s, double rel_tol) {
    if (!(s > 0.0)) throw DomainError("h_plus_beta_gamma_oracle: s must be positive");
    QuadratureSpec kernel_spec(std::min(1e-8, rel_tol * 1e-3), 1e-300);
    QuadratureSpec inner_spec(rel_tol * 0.05, 1e-300);
    inner_spec.max_subdivisions = 1200;
    if (gamma < 0.0)
        inner_spec.endpoint_power_left = std::ceil(2.0 / (1.0 + gamma));
    auto diff_moment = [&](double t) {
        auto f = [&](double r) {
            const double a = p_alpha(params, t, r, s, kernel_spec);
            const double b = p_alpha_origin(params, t, r, kernel_spec);
            return std::pow(r, gamma) * (a - b);
        };
        return integrate(f, 0.0, std::numeric_limits<double>::infinity(), inner_spec).value;
    };
    // Integrate in log t: the integrand decays by a power at both ends inside
    // the extended band.
    auto g = [&](double v) {
        const double t = std::exp(v);
        return std::pow(t, beta) * diff_moment(t); // includes jacobian t
    };
    QuadratureSpec outer_spec(rel_tol, 1e-300);
    outer_spec.max_subdivisions = 700;
    const double vspan_lo = std::log(s * s) - 26.0, vspan_hi = std::log(s * s + 1.0) + 30.0;
    return integrate(g, vspan_lo, vspan_hi, outer_spec).value;
}

double fitzsimmons_ratio(const ModelParams& params, double beta, double gamma, double r) {
    return (beta - 1.0) * h_beta_gamma(params, beta - 1.0, gamma, r) /
           h_plus_beta_gamma(params, beta, gamma, r);
}

// ---------------------------------------------------------------------------
// CachedKernel

CachedKernel::CachedKernel(const ModelParams& params, int points_per_decade)
    : params_(params) {
    const double nu = params.zeta - 0.5;
    nu_sq_plus_1_ = 1.0 + nu * nu;
    if (params.alpha == 2.0) {
        exact_ = true;
        return;
    }
    SubordinatorSpline sigma(params.alpha);
    QuadratureSpec spec(3e-6, 1e-300);
    spec.max_subdivisions = 600;
    const double zeta = params.zeta, alpha = params.alpha;

    lo_ = std::log(1e-6);
    hi_ = std::log(1e3);
    n_ = static_cast<int>(std::ceil((hi_ - lo_) / M_LN10 * points_per_decade)) + 1;
    step_ = (hi_ - lo_) / (n_ - 1);
    log_values_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        const double x = std::exp(lo_ + i * step_);
        for (int j = i; j < n_; ++j) {
            const double y = std::exp(lo_ + j * step_);
            const double v = subordination_integral(
                alpha, [&sigma](double tau) { return sigma.value(tau); },
                [zeta, x, y](double tau) { return p2_value(zeta, tau, x, y); },
                std::fabs(x - y), spec);
            const double lg = v > 0.0 ? std::log(v) : -900.0;
            log_values_[static_cast<std::size_t>(i) * n_ + j] = lg;
            log_values_[static_cast<std::size_t>(j) * n_ + i] = lg;
        }
    }

    // Origin profile for the far corner min(x,y) small, max(x,y) > table.
    w_lo_ = std::log(0.5e3);
    w_hi_ = std::log(1e9);
    const int wn = static_cast<int>(std::ceil((w_hi_ - w_lo_) / M_LN10 * 24.0)) + 1;
    w_step_ = (w_hi_ - w_lo_) / (wn - 1);
    w_log_values_.resize(wn);
    for (int i = 0; i < wn; ++i) {
        const double rho = std::exp(w_lo_ + i * w_step_);
        const double v = subordination_integral(
            alpha, [&sigma](double tau) { return sigma.value(tau); },
            [zeta, rho](double tau) { return p2_origin_value(zeta, tau, rho); }, rho, spec);
        w_log_values_[i] = v > 0.0 ? std::log(v) : -900.0;
    }
}

double CachedKernel::table_lookup(double lx, double ly) const {
    auto index = [this](double u) {
        int i = static_cast<int>(std::floor((u - lo_) / step_));
        return std::clamp(i, 1, n_ - 3);
    };
    const int i = index(lx), j = index(ly);
    const double ux = (lx - (lo_ + i * step_)) / step_;
    const double uy = (ly - (lo_ + j * step_)) / step_;
    double col[4];
    for (int k = -1; k <= 2; ++k) {
        const double* row = &log_values_[static_cast<std::size_t>(i + k) * n_];
        col[k + 1] = SubordinatorSpline::catmull_rom(row[j - 1], row[j], row[j + 1],
                                                     row[j + 2], uy);
    }
    return SubordinatorSpline::catmull_rom(col[0], col[1], col[2], col[3], ux);
}

double CachedKernel::unit(double x, double y) const {
    if (exact_) return p2_value(params_.zeta, 1.0, std::max(x, 1e-12), std::max(y, 1e-12));
    const double x_hi = std::exp(hi_);
    if (x <= x_hi && y <= x_hi) {
        const double lx = std::max(std::log(std::max(x, 1e-300)), lo_);
        const double ly = std::max(std::log(std::max(y, 1e-300)), lo_);
        const double lg = table_lookup(lx, ly);
        return lg < -745.0 ? 0.0 : std::exp(lg);
    }
    if (x * y >= 1e4 * nu_sq_plus_1_) {
        // Large Bessel argument: p(1,x,y) ~ (xy)^(-zeta) p^(alpha)(1,x,y).
        return std::pow(x * y, -params_.zeta) *
               detail::symmetric_stable_unit(params_.alpha, y - x);
    }
    // Far origin corner: p(1,x,y) ~ p(1,0,hypot(x,y)).
    const double rho = std::hypot(x, y);
    double v = std::log(rho);
    const int wn = static_cast<int>(w_log_values_.size());
    if (v > w_hi_) {
        // Power-law tail continuation from the last two profile points.
        const double slope = (w_log_values_[wn - 1] - w_log_values_[wn - 2]) / w_step_;
        const double lg = w_log_values_[wn - 1] + slope * (v - w_hi_);
        return lg < -745.0 ? 0.0 : std::exp(lg);
    }
    int i = static_cast<int>(std::floor((v - w_lo_) / w_step_));
    i = std::clamp(i, 1, wn - 3);
    const double u = (v - (w_lo_ + i * w_step_)) / w_step_;
    const double lg = SubordinatorSpline::catmull_rom(
        w_log_values_[i - 1], w_log_values_[i], w_log_values_[i + 1], w_log_values_[i + 2], u);
    return lg < -745.0 ? 0.0 : std::exp(lg);
}

double CachedKernel::value(double t, double r, double s) const {
    check_trs(t, r, s);
    if (exact_) return p2_value(params_.zeta, t, r, s);
    const double sc = std::pow(t, -1.0 / params_.alpha);
    return std::pow(t, -(2.0 * params_.zeta + 1.0) / params_.alpha) *
           unit(r * sc, s * sc);
}

std::shared_ptr<const CachedKernel> CachedKernel::shared(const ModelParams& params) {
    static std::mutex mutex;
    static std::map<std::pair<double, double>, std::shared_ptr<const CachedKernel>> registry;
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_pair(params.zeta, params.alpha);
    auto it = registry.find(key);
    if (it != registry.end()) return it->second;
    auto kernel = std::make_shared<const CachedKernel>(params);
    registry.emplace(key, kernel);
    return kernel;
}

} // namespace hardyheat
