#include "hardyheat/quadrature.hpp"
#include "hardyheat/couplings.hpp"
#include "hardyheat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

namespace hardyheat {

namespace {

// 15-point Kronrod extension of 7-point Gauss on [-1,1].
constexpr double kron_x[8] = {
    0.000000000000000000000000000000000e+00,
    2.077849550078984676006894037732449e-01,
    4.058451513773971669066064120769615e-01,
    5.860872354676911302941448382587296e-01,
    7.415311855993944398638647732807884e-01,
    8.648644233597690727897127886409262e-01,
    9.491079123427585245261896840478513e-01,
    9.914553711208126392068546975263285e-01};
constexpr double kron_w[8] = {
    2.094821410847278280129991748917143e-01,
    2.044329400752988924141619992346491e-01,
    1.903505780647854099132564024210137e-01,
    1.690047266392679028265834265985503e-01,
    1.406532597155259187451895905102379e-01,
    1.047900103222501838398763225415180e-01,
    6.309209262997855329070066318920429e-02,
    2.293532201052922496373200805896959e-02};
constexpr double gauss_w[4] = {
    4.179591836734693877551020408163265e-01,
    3.818300505051189449503697754889751e-01,
    2.797053914892766679014677714237796e-01,
    1.294849661688696932706114326790820e-01};

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

Interval eval_gk(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    if (!std::isfinite(fc))
        throw ConvergenceError("integrate: non-finite integrand value at z = " +
                               std::to_string(c));
    double k15 = kron_w[0] * fc;
    double g7 = gauss_w[0] * fc;
    for (int i = 1; i < 8; ++i) {
        const double dx = h * kron_x[i];
        const double f1 = f(c - dx), f2 = f(c + dx);
        if (!std::isfinite(f1) || !std::isfinite(f2))
            throw ConvergenceError("integrate: non-finite integrand value at z = " +
                                   std::to_string(!std::isfinite(f1) ? c - dx : c + dx));
        k15 += kron_w[i] * (f1 + f2);
        if (i % 2 == 0) g7 += gauss_w[i / 2] * (f1 + f2);
    }
    return {a, b, k15 * h, std::fabs(k15 - g7) * h};
}

IntegralResult adapt(const std::function<double(double)>& f, double a, double b,
                     const QuadratureSpec& spec) {
    std::priority_queue<Interval> heap;
    Interval first = eval_gk(f, a, b);
    double total = first.value, total_err = first.error;
    heap.push(first);
    int n = 1;
    while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::fabs(total)) &&
           n < spec.max_subdivisions) {
        Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            heap.push(worst); // interval at roundoff width, cannot split further
            break;
        }
        Interval left = eval_gk(f, worst.a, mid);
        Interval right = eval_gk(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++n;
    }
    if (total_err > std::max(spec.abs_tol, spec.rel_tol * std::fabs(total)) &&
        n >= spec.max_subdivisions) {
        const Interval& worst = heap.top();
        throw ConvergenceError(
            "integrate: subdivision budget " + std::to_string(spec.max_subdivisions) +
            " exhausted; error " + std::to_string(total_err) + " on value " +
            std::to_string(total) + ", worst subinterval [" + std::to_string(worst.a) +
            ", " + std::to_string(worst.b) + "] err " + std::to_string(worst.error));
    }
    return {total, total_err};
}

} // namespace

IntegralResult integrate(const std::function<double(double)>& f, double a, double b,
                         const QuadratureSpec& spec) {
    if (std::isnan(a) || std::isnan(b) || a >= b)
        throw DomainError("integrate: invalid interval");
    if (!(spec.rel_tol > 0.0) || !(spec.abs_tol > 0.0) || spec.max_subdivisions < 8)
        throw DomainError("integrate: invalid QuadratureSpec");

    if (std::isinf(b)) {
        if (spec.tail_cutoff_policy == TailCutoff::Fixed) {
            QuadratureSpec inner = spec;
            return integrate(f, a, a + spec.fixed_tail_cutoff, inner);
        }
        // Rational map z = a + u/(1-u) carries the whole tail; combined with
        // the right-endpoint power substitution below it resolves power decay.
        QuadratureSpec inner = spec;
        inner.endpoint_power_left = spec.endpoint_power_left;
        inner.endpoint_power_right = std::max(spec.endpoint_power_right, 2.0);
        auto g = [&f, a](double u) {
            const double d = 1.0 - u;
            return f(a + u / d) / (d * d);
        };
        return integrate(g, 0.0, 1.0, inner);
    }

    const double pl = spec.endpoint_power_left, pr = spec.endpoint_power_right;
    if (pl > 1.0 || pr > 1.0) {
        const double len = b - a;
        QuadratureSpec inner = spec;
        inner.endpoint_power_left = inner.endpoint_power_right = 1.0;
        inner.rel_tol = 0.5 * spec.rel_tol;
        inner.abs_tol = 0.5 * spec.abs_tol;
        if (pl > 1.0 && pr > 1.0) {
            const double mid = a + 0.5 * len;
            auto left = [&f, a, len, pl](double u) {
                return f(a + 0.5 * len * std::pow(u, pl)) * 0.5 * len * pl * std::pow(u, pl - 1.0);
            };
            auto right = [&f, b, len, pr](double u) {
                return f(b - 0.5 * len * std::pow(u, pr)) * 0.5 * len * pr * std::pow(u, pr - 1.0);
            };
            (void)mid;
            IntegralResult l = adapt(left, 0.0, 1.0, inner);
            IntegralResult r = adapt(right, 0.0, 1.0, inner);
            return {l.value + r.value, l.error_estimate + r.error_estimate};
        }
        if (pl > 1.0) {
            auto g = [&f, a, len, pl](double u) {
                return f(a + len * std::pow(u, pl)) * len * pl * std::pow(u, pl - 1.0);
            };
            return adapt(g, 0.0, 1.0, inner);
        }
        auto g = [&f, b, len, pr](double u) {
            return f(b - len * std::pow(u, pr)) * len * pr * std::pow(u, pr - 1.0);
        };
        return adapt(g, 0.0, 1.0, inner);
    }
    return adapt(f, a, b, spec);
}

double TensorGrid::space_integral(const std::function<double(double)>& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < space_nodes.size(); ++i) s += space_weights[i] * f(space_nodes[i]);
    return s;
}

namespace {

// 4-point Gauss-Legendre on [-1,1].
constexpr double gl4_x[2] = {0.3399810435848562648026658, 0.8611363115940525752239465};
constexpr double gl4_w[2] = {0.6521451548625461426269361, 0.3478548451374538573730639};

void append_log_panels(std::vector<double>& nodes, std::vector<double>& weights,
                       std::vector<double>& edges, double lo, double hi, int n_panels) {
    const double ulo = std::log(lo), uhi = std::log(hi);
    const double h = (uhi - ulo) / n_panels;
    edges.push_back(lo);
    for (int p = 0; p < n_panels; ++p) {
        const double c = ulo + (p + 0.5) * h;
        for (int j = 0; j < 4; ++j) {
            const double x = (j < 2) ? -gl4_x[1 - j] : gl4_x[j - 2];
            const double w = (j < 2) ? gl4_w[1 - j] : gl4_w[j - 2];
            const double u = c + 0.5 * h * x;
            const double z = std::exp(u);
            nodes.push_back(z);
            weights.push_back(0.5 * h * w * z); // jacobian dz = z du
        }
        edges.push_back(std::exp(ulo + (p + 1) * h));
    }
}

} // namespace

TensorGrid build_grid(const ModelParams& params, double t, const QuadratureSpec& spec,
                      double window_lo, double window_hi, int panels_per_decade,
                      int n_time) {
    if (!(t > 0.0)) throw DomainError("build_grid: t must be positive");
    if (!(window_lo > 0.0) || !(window_hi > window_lo))
        throw DomainError("build_grid: infeasible evaluation window");

    const double alpha = params.alpha;
    const double two_zeta = 2.0 * params.zeta;

    // Upper-envelope tail bound: the mass of p_zeta^(alpha)(t,r,.) beyond
    // z_max is <= c t (z_max - r)^(-alpha) (Blumenthal-Getoor type tail for
    // alpha < 2; the Gaussian tail for alpha = 2 is far smaller).
    double z_max;
    if (alpha < 2.0) {
        z_max = window_hi + std::pow(8.0 * t / (alpha * spec.abs_tol), 1.0 / alpha);
    } else {
        z_max = window_hi + std::sqrt(4.0 * t * std::log(4.0 / spec.abs_tol)) + 4.0 * std::sqrt(t);
    }
    // Mass below z_min is <= sup(p) z_min^(2 zeta + 1) / (2 zeta + 1) with
    // sup(p) ~ t^(-(2 zeta + 1)/alpha).
    const double dim = two_zeta + 1.0;
    double z_min = std::pow(spec.abs_tol * dim * std::pow(t, dim / alpha) / 4.0, 1.0 / dim);
    z_min = std::min(z_min, 1e-3 * std::min(window_lo, std::pow(t, 1.0 / alpha)));
    if (!(z_min > 0.0) || z_min >= z_max)
        throw DomainError("build_grid: infeasible window [" + std::to_string(z_min) + ", " +
                          std::to_string(z_max) + "]");

    const double decades = std::log10(z_max / z_min);
    TensorGrid grid;
    grid.t_final = t;
    grid.z_min = z_min;
    grid.z_max = z_max;

    const double exact = (std::pow(z_max, dim) - std::pow(z_min, dim)) / dim;
    int ppd = std::max(2, panels_per_decade);
    for (int attempt = 0; attempt < 4; ++attempt) {
        grid.space_nodes.clear();
        grid.space_weights.clear();
        grid.space_panel_edges.clear();
        const int n_panels = std::max(8, static_cast<int>(std::ceil(decades * ppd)));
        append_log_panels(grid.space_nodes, grid.space_weights, grid.space_panel_edges,
                          z_min, z_max, n_panels);
        double approx = 0.0;
        for (std::size_t i = 0; i < grid.space_nodes.size(); ++i)
            approx += grid.space_weights[i] * std::pow(grid.space_nodes[i], two_zeta);
        if (std::fabs(approx - exact) <= spec.rel_tol * std::fabs(exact)) break;
        ppd *= 2;
    }
    grid.log_spacing = std::log(z_max / z_min) / static_cast<double>(grid.space_nodes.size());

    // Time nodes: Gauss-Legendre in u with tau = t u^2 (3 - 2u), clustering
    // at both endpoints of (0, t).
    const int half = (n_time + 1) / 2;
    std::vector<double> ux, uw;
    // composite 4-point GL over [0,1] in u with half*... use (n_time/4) panels
    const int n_panels_t = std::max(2, n_time / 4);
    const double hu = 1.0 / n_panels_t;
    for (int p = 0; p < n_panels_t; ++p) {
        const double c = (p + 0.5) * hu;
        for (int j = 0; j < 4; ++j) {
            const double x = (j < 2) ? -gl4_x[1 - j] : gl4_x[j - 2];
            const double w = (j < 2) ? gl4_w[1 - j] : gl4_w[j - 2];
            ux.push_back(c + 0.5 * hu * x);
            uw.push_back(0.5 * hu * w);
        }
    }
    (void)half;
    for (std::size_t j = 0; j < ux.size(); ++j) {
        const double u = ux[j];
        grid.time_nodes.push_back(t * u * u * (3.0 - 2.0 * u));
        grid.time_weights.push_back(t * 6.0 * u * (1.0 - u) * uw[j]);
    }
    return grid;
}

} // namespace hardyheat
