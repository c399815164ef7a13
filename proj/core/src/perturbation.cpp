#include "hardyheat/perturbation.hpp"
#include "hardyheat/bessel_kernel.hpp"
#include "hardyheat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hardyheat {

namespace {

// 4-point Gauss-Legendre on [-1,1], positive half.
constexpr double gl4_x[2] = {0.3399810435848562648026658, 0.8611363115940525752239465};
constexpr double gl4_w[2] = {0.6521451548625461426269361, 0.3478548451374538573730639};

void gl4_panel(double a, double b, double* nodes, double* weights) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double xs[4] = {-gl4_x[1], -gl4_x[0], gl4_x[0], gl4_x[1]};
    const double ws[4] = {gl4_w[1], gl4_w[0], gl4_w[0], gl4_w[1]};
    for (int j = 0; j < 4; ++j) {
        nodes[j] = c + h * xs[j];
        weights[j] = h * ws[j];
    }
}

// Shared stop-rule logic of the perturbation series.
struct SeriesAccumulator {
    explicit SeriesAccumulator(const SeriesOptions& opts) : opts_(opts) {}

    // Returns true when the driver should stop.
    bool push(double term) {
        report.terms.push_back(term);
        sum += term;
        const int n = static_cast<int>(report.terms.size()) - 1; // term index
        if (n == 0) return false;
        const double prev = report.terms[n - 1];
        const double ratio = prev != 0.0 ? std::fabs(term / prev)
                                         : std::numeric_limits<double>::infinity();
        report.growth_ratio = ratio;
        if (ratio >= 1.0) ++run_above_one_; else run_above_one_ = 0;

        if (n >= opts_.min_terms && std::fabs(term) <= opts_.rel_tol * std::fabs(sum) &&
            ratio < opts_.growth_cap) {
            report.converged = true;
            report.truncation_index = n;
            return true;
        }
        // Stabilized-ratio geometric stop for slowly convergent series.
        if (n >= opts_.min_terms + 5 && ratio < opts_.tail_ratio_max && prev != 0.0) {
            const double r1 = report.terms[n] / report.terms[n - 1];
            const double r2 = report.terms[n - 1] / report.terms[n - 2];
            const double r3 = report.terms[n - 2] / report.terms[n - 3];
            const bool stable = std::fabs(r1 - r2) <= 0.02 * std::fabs(r1) &&
                                std::fabs(r2 - r3) <= 0.04 * std::fabs(r2) &&
                                std::fabs(r1) < opts_.tail_ratio_max;
            if (stable) {
                const double tail = term * r1 / (1.0 - r1);
                if (std::fabs(tail) * 0.05 <= opts_.rel_tol * std::fabs(sum + tail)) {
                    report.tail_correction = tail;
                    sum += tail;
                    report.converged = true;
                    report.truncation_index = n;
                    stopped_by_tail = true;
                    signed_ratio = r1;
                    return true;
                }
            }
        }
        return false;
    }

    bool diverging() const { return run_above_one_ >= 6; }

    SeriesOptions opts_;
    SeriesReport report;
    double sum = 0.0;
    bool stopped_by_tail = false;
    double signed_ratio = 0.0;
    int run_above_one_ = 0;
};

} // namespace

// ---------------------------------------------------------------------------
// VolterraEngine

VolterraEngine::VolterraEngine(KernelEvaluator base, std::function<double(double)> potential,
                               TensorGrid grid, double s_target, EngineOptions opts)
    : base_(std::move(base)), potential_(std::move(potential)), grid_(std::move(grid)),
      s_target_(s_target), opts_(opts) {
    const int k_rows = std::max(8, opts_.n_time_lattice);
    const double t_final = grid_.t_final;
    lattice_.resize(k_rows);
    for (int k = 0; k < k_rows; ++k)
        lattice_[k] = t_final * std::pow((k + 1.0) / k_rows, opts_.lattice_grading);
    lattice_.back() = t_final;

    // Clustered unit rule for the time integrals: composite GL in u mapped
    // through psi(u) = u^2 (3 - 2u).
    const int n_panels = std::max(2, opts_.n_tau / 4);
    for (int p = 0; p < n_panels; ++p) {
        double un[4], uw[4];
        gl4_panel(static_cast<double>(p) / n_panels, (p + 1.0) / n_panels, un, uw);
        for (int j = 0; j < 4; ++j) {
            const double u = un[j];
            tau_unit_.push_back(u * u * (3.0 - 2.0 * u));
            tau_unit_w_.push_back(6.0 * u * (1.0 - u) * uw[j]);
        }
    }

    const std::size_t nz = grid_.space_nodes.size();
    weights_cache_.resize(nz);
    q_cache_.resize(nz);
    for (std::size_t m = 0; m < nz; ++m) {
        weights_cache_[m] = grid_.space_weights[m] * base_.weight(grid_.space_nodes[m]);
        q_cache_[m] = potential_(grid_.space_nodes[m]);
    }

    // Base term rows.
    std::vector<double> rows(lattice_.size() * nz);
    for (std::size_t k = 0; k < lattice_.size(); ++k)
        for (std::size_t i = 0; i < nz; ++i)
            rows[k * nz + i] = base_value(lattice_[k], grid_.space_nodes[i], s_target_);
    term_rows_.push_back(std::move(rows));
    row_sum_.assign(lattice_.size(), std::vector<double>(nz));
    for (std::size_t k = 0; k < lattice_.size(); ++k)
        for (std::size_t i = 0; i < nz; ++i) row_sum_[k][i] = term_rows_[0][k * nz + i];
    n_terms_ = 0;
}

double VolterraEngine::base_value(double t, double x, double y) const {
    return base_.density(t, x, y);
}

double VolterraEngine::interp_row(const std::vector<double>& row, double z) const {
    const auto& zs = grid_.space_nodes;
    const int n = static_cast<int>(zs.size());
    double zc = std::clamp(z, zs.front(), zs.back());
    int hi = static_cast<int>(std::lower_bound(zs.begin(), zs.end(), zc) - zs.begin());
    int i0 = std::clamp(hi - 2, 0, n - 4);
    // 4-point Lagrange in log z.
    const double lx = std::log(zc);
    double result = 0.0;
    for (int a = 0; a < 4; ++a) {
        double l = 1.0;
        const double xa = std::log(zs[i0 + a]);
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            l *= (lx - std::log(zs[i0 + b])) / (xa - std::log(zs[i0 + b]));
        }
        result += l * row[i0 + a];
    }
    return result;
}

double VolterraEngine::interp_time(int term_index, double t, int node) const {
    const auto& rows = term_rows_[term_index];
    const int nz = static_cast<int>(grid_.space_nodes.size());
    const int K = static_cast<int>(lattice_.size());
    auto value = [&](int k) { return rows[static_cast<std::size_t>(k) * nz + node]; };
    if (t >= lattice_.back()) return value(K - 1);
    if (term_index == 0) {
        // Base kernel known exactly at any time.
        return base_value(t, grid_.space_nodes[node], s_target_);
    }
    if (t <= 0.0) return 0.0;
    const double v0 = value(0), v1 = value(1);
    if (t <= lattice_.front()) {
        // Power-law continuation below the first row.
        if (v0 != 0.0 && v1 != 0.0 && (v0 > 0.0) == (v1 > 0.0)) {
            const double slope = std::log(std::fabs(v1 / v0)) /
                                 std::log(lattice_[1] / lattice_[0]);
            if (slope > 0.0) // vanishes at t = 0
                return v0 * std::exp(slope * std::log(t / lattice_[0]));
        }
        return v0 * t / lattice_[0];
    }
    int hi = static_cast<int>(std::lower_bound(lattice_.begin(), lattice_.end(), t) -
                              lattice_.begin());
    int k0 = std::clamp(hi - 2, 0, K - 4);
    // Log-log cubic when the sign is uniform, linear fallback otherwise.
    bool positive = true, negative = true;
    for (int a = 0; a < 4; ++a) {
        if (value(k0 + a) <= 0.0) positive = false;
        if (value(k0 + a) >= 0.0) negative = false;
    }
    const double lt = std::log(t);
    if (positive || negative) {
        double acc = 0.0;
        for (int a = 0; a < 4; ++a) {
            double l = 1.0;
            const double xa = std::log(lattice_[k0 + a]);
            for (int b = 0; b < 4; ++b) {
                if (a == b) continue;
                l *= (lt - std::log(lattice_[k0 + b])) / (xa - std::log(lattice_[k0 + b]));
            }
            acc += l * std::log(std::fabs(value(k0 + a)));
        }
        const double v = std::exp(acc);
        return positive ? v : -v;
    }
    const int k1 = std::clamp(hi, 1, K - 1);
    const double t0 = lattice_[k1 - 1], t1 = lattice_[k1];
    const double w = (t - t0) / (t1 - t0);
    return (1.0 - w) * value(k1 - 1) + w * value(k1);
}

double VolterraEngine::contract(double tau, double r, const std::vector<double>& f_prev,
                                const std::function<double(double)>* exact_gamma,
                                const std::vector<Window>& extra_windows) const {
    const auto& zs = grid_.space_nodes;
    const auto& edges = grid_.space_panel_edges;
    const int nz = static_cast<int>(zs.size());
    const double alpha = base_.self_similar_alpha;
    const double h = grid_.log_spacing;

    auto gamma_at = [&](double z) {
        if (exact_gamma) return (*exact_gamma)(z);
        return potential_(z) * interp_row(f_prev, z);
    };

    // Collect under-resolved spikes.
    std::vector<Window> windows;
    const double wb = std::pow(tau, 1.0 / alpha);
    if (wb < 3.0 * r * h) windows.push_back({r, wb});
    for (const Window& w : extra_windows)
        if (w.width < 3.0 * w.center * h) windows.push_back(w);

    // Panel ranges to replace by fine quadrature.
    const int n_panels = static_cast<int>(edges.size()) - 1;
    std::vector<std::pair<int, int>> ranges;
    for (const Window& w : windows) {
        const double half = std::min(opts_.window_half_widths * w.width, 0.8 * w.center);
        const double lo = std::max(w.center - half, edges.front());
        const double hi = std::min(w.center + half, edges.back());
        if (lo >= hi) continue;
        int pa = static_cast<int>(std::upper_bound(edges.begin(), edges.end(), lo) -
                                  edges.begin()) - 1;
        int pb = static_cast<int>(std::lower_bound(edges.begin(), edges.end(), hi) -
                                  edges.begin()) - 1;
        pa = std::clamp(pa, 0, n_panels - 1);
        pb = std::clamp(pb, 0, n_panels - 1);
        ranges.emplace_back(pa, pb);
    }
    std::sort(ranges.begin(), ranges.end());
    std::vector<std::pair<int, int>> merged;
    for (const auto& rg : ranges) {
        if (!merged.empty() && rg.first <= merged.back().second + 1)
            merged.back().second = std::max(merged.back().second, rg.second);
        else
            merged.push_back(rg);
    }

    auto in_excluded = [&](int panel) {
        for (const auto& rg : merged)
            if (panel >= rg.first && panel <= rg.second) return true;
        return false;
    };

    double sum = 0.0;
    if (merged.empty()) {
        for (int m = 0; m < nz; ++m) {
            const double g = exact_gamma ? (*exact_gamma)(zs[m]) : q_cache_[m] * f_prev[m];
            if (g == 0.0) continue;
            sum += weights_cache_[m] * base_value(tau, r, zs[m]) * g;
        }
        return sum;
    }
    const int npp = grid_.nodes_per_panel;
    for (int m = 0; m < nz; ++m) {
        if (in_excluded(m / npp)) continue;
        const double g = exact_gamma ? (*exact_gamma)(zs[m]) : q_cache_[m] * f_prev[m];
        if (g == 0.0) continue;
        sum += weights_cache_[m] * base_value(tau, r, zs[m]) * g;
    }
    // Fine quadrature over the excluded spans, subdivided around each spike.
    for (const auto& rg : merged) {
        const double lo = edges[rg.first], hi = edges[rg.second + 1];
        std::vector<double> cuts{lo, hi};
        for (const Window& w : windows) {
            for (double c : {w.center - 2.0 * w.width, w.center - 0.5 * w.width,
                             w.center + 0.5 * w.width, w.center + 2.0 * w.width})
                if (c > lo && c < hi) cuts.push_back(c);
        }
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            double zn[4], zw[4];
            gl4_panel(cuts[c], cuts[c + 1], zn, zw);
            for (int j = 0; j < 4; ++j) {
                const double z = zn[j];
                const double g = gamma_at(z);
                if (g == 0.0) continue;
                sum += zw[j] * base_.weight(z) * base_value(tau, r, z) * g;
            }
        }
    }
    return sum;
}

std::vector<double> VolterraEngine::next_rows(int n) {
    const int nz = static_cast<int>(grid_.space_nodes.size());
    const int K = static_cast<int>(lattice_.size());
    std::vector<double> rows(static_cast<std::size_t>(K) * nz, 0.0);
    std::vector<double> f_rem(nz);
    const double alpha = base_.self_similar_alpha;
    for (int k = 0; k < K; ++k) {
        const double tk = lattice_[k];
        for (std::size_t j = 0; j < tau_unit_.size(); ++j) {
            const double tau = tk * tau_unit_[j];
            const double wt = tk * tau_unit_w_[j];
            const double t_rem = tk - tau;
            if (!(t_rem > 0.0)) continue;
            std::vector<Window> extra;
            std::function<double(double)> exact;
            const std::function<double(double)>* exact_ptr = nullptr;
            if (n == 1) {
                exact = [this, t_rem](double z) {
                    return potential_(z) * base_value(t_rem, z, s_target_);
                };
                exact_ptr = &exact;
                extra.push_back({s_target_, std::pow(t_rem, 1.0 / alpha)});
            } else {
                for (int m = 0; m < nz; ++m) f_rem[m] = interp_time(n - 1, t_rem, m);
            }
            for (int i = 0; i < nz; ++i) {
                rows[static_cast<std::size_t>(k) * nz + i] +=
                    wt * contract(tau, grid_.space_nodes[i], f_rem, exact_ptr, extra);
            }
        }
    }
    return rows;
}

double VolterraEngine::target_value(int n, double r) const {
    const double T = grid_.t_final;
    const double alpha = base_.self_similar_alpha;
    const int nz = static_cast<int>(grid_.space_nodes.size());
    if (n == 0) return base_value(T, r, s_target_);
    double acc = 0.0;
    std::vector<double> f_rem(nz);
    for (std::size_t j = 0; j < tau_unit_.size(); ++j) {
        const double tau = T * tau_unit_[j];
        const double wt = T * tau_unit_w_[j];
        const double t_rem = T - tau;
        if (!(t_rem > 0.0)) continue;
        std::vector<Window> extra;
        std::function<double(double)> exact;
        const std::function<double(double)>* exact_ptr = nullptr;
        if (n == 1) {
            exact = [this, t_rem](double z) {
                return potential_(z) * base_value(t_rem, z, s_target_);
            };
            exact_ptr = &exact;
            extra.push_back({s_target_, std::pow(t_rem, 1.0 / alpha)});
        } else {
            for (int m = 0; m < nz; ++m) f_rem[m] = interp_time(n - 1, t_rem, m);
        }
        acc += wt * contract(tau, r, f_rem, exact_ptr, extra);
    }
    return acc;
}

SeriesReport VolterraEngine::run(double r_monitor) {
    SeriesAccumulator acc(opts_.series);
    acc.push(target_value(0, r_monitor));
    const int nz = static_cast<int>(grid_.space_nodes.size());
    const int K = static_cast<int>(lattice_.size());
    for (int n = 1; n <= opts_.series.max_terms; ++n) {
        std::vector<double> rows = next_rows(n);
        n_terms_ = n;
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < nz; ++i)
                row_sum_[k][i] += rows[static_cast<std::size_t>(k) * nz + i];
        term_rows_.push_back(std::move(rows));
        const double v = target_value(n, r_monitor);
        if (acc.push(v)) break;
        if (acc.diverging() && n >= opts_.series.max_terms) break;
    }
    if (acc.stopped_by_tail) {
        // Per-row geometric continuation with the stabilized signed ratio.
        const auto& last = term_rows_.back();
        const double r1 = acc.signed_ratio;
        const double f = r1 / (1.0 - r1);
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < nz; ++i)
                row_sum_[k][i] += last[static_cast<std::size_t>(k) * nz + i] * f;
        tail_ratio_ = r1;
    }
    monitor_report_ = acc.report;
    return acc.report;
}

SeriesReport VolterraEngine::run_terms(double r_monitor, int n_terms) {
    SeriesReport report;
    report.terms.push_back(target_value(0, r_monitor));
    const int nz = static_cast<int>(grid_.space_nodes.size());
    const int K = static_cast<int>(lattice_.size());
    for (int n = 1; n <= n_terms; ++n) {
        std::vector<double> rows = next_rows(n);
        n_terms_ = n;
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < nz; ++i)
                row_sum_[k][i] += rows[static_cast<std::size_t>(k) * nz + i];
        term_rows_.push_back(std::move(rows));
        report.terms.push_back(target_value(n, r_monitor));
    }
    if (report.terms.size() >= 2) {
        const double a = report.terms[report.terms.size() - 2];
        report.growth_ratio = a != 0.0 ? std::fabs(report.terms.back() / a)
                                       : std::numeric_limits<double>::infinity();
    }
    report.truncation_index = n_terms;
    monitor_report_ = report;
    return report;
}

double VolterraEngine::summed(int k, int i) const { return row_sum_[k][i]; }

double VolterraEngine::base_at(int k, int i) const {
    return term_rows_[0][static_cast<std::size_t>(k) * grid_.space_nodes.size() + i];
}

double VolterraEngine::value_at(double r) const {
    double v = target_value(0, r);
    double prev = 0.0, last = 0.0;
    for (int n = 1; n <= n_terms_; ++n) {
        prev = last;
        last = target_value(n, r);
        v += last;
    }
    if (tail_ratio_ != 0.0 && n_terms_ >= 1) {
        (void)prev;
        v += last * tail_ratio_ / (1.0 - tail_ratio_);
    }
    return v;
}

double VolterraEngine::term_at(int n, double r) const { return target_value(n, r); }

// ---------------------------------------------------------------------------
// Hardy specialization

namespace {

TensorGrid make_engine_grid(const ModelParams& params, double s_target, double r_hint,
                            const EngineOptions& opts) {
    const double lo_scale = std::min({1.0, s_target, r_hint});
    const double z_lo = std::min(1e-3, 0.02 * lo_scale);
    const double z_hi = std::max({300.0, 40.0 * s_target, 40.0 * r_hint});
    QuadratureSpec spec(1e-9, opts.grid_abs_tol);
    TensorGrid grid = build_grid(params, 1.0, spec, z_lo * 50.0, z_hi / 40.0,
                                 opts.panels_per_decade, 24);
    // build_grid sizes the span from the mass bound; clamp to the engine's
    // compact working range (moment tails are restored analytically by the
    // verification integrals).
    if (grid.z_min < z_lo || grid.z_max > z_hi) {
        TensorGrid compact;
        compact.t_final = 1.0;
        compact.z_min = z_lo;
        compact.z_max = z_hi;
        const double decades = std::log10(z_hi / z_lo);
        const int n_panels = std::max(8, static_cast<int>(std::ceil(decades *
                                     opts.panels_per_decade)));
        const double ulo = std::log(z_lo), uhi = std::log(z_hi);
        const double h = (uhi - ulo) / n_panels;
        compact.space_panel_edges.push_back(z_lo);
        for (int p = 0; p < n_panels; ++p) {
            double zn[4], zw[4];
            gl4_panel(ulo + p * h, ulo + (p + 1) * h, zn, zw);
            for (int j = 0; j < 4; ++j) {
                compact.space_nodes.push_back(std::exp(zn[j]));
                compact.space_weights.push_back(zw[j] * std::exp(zn[j]));
            }
            compact.space_panel_edges.push_back(std::exp(ulo + (p + 1) * h));
        }
        compact.log_spacing = (uhi - ulo) / compact.space_nodes.size();
        compact.time_nodes = grid.time_nodes;
        compact.time_weights = grid.time_weights;
        return compact;
    }
    return grid;
}

KernelEvaluator make_hardy_base(const ModelParams& params) {
    KernelEvaluator base;
    auto kernel = CachedKernel::shared(params);
    base.density = [kernel](double t, double x, double y) { return kernel->value(t, x, y); };
    const double two_zeta = 2.0 * params.zeta;
    base.weight = [two_zeta](double z) { return std::pow(z, two_zeta); };
    base.self_similar_alpha = params.alpha;
    return base;
}

} // namespace

double duhamel_iterate(const KernelEvaluator& base,
                       const std::function<double(double)>& potential,
                       const TensorGrid& grid, int n, double t, double r, double s,
                       const EngineOptions& opts) {
    if (n < 0) throw DomainError("duhamel_iterate: n must be nonnegative");
    if (!(t > 0.0) || t > grid.t_final)
        throw DomainError("duhamel_iterate: t outside the grid horizon");
    if (!(r >= grid.z_min && r <= grid.z_max && s >= grid.z_min && s <= grid.z_max))
        throw DomainError("duhamel_iterate: point outside the grid coverage");
    TensorGrid g = grid;
    g.t_final = t;
    VolterraEngine engine(base, potential, std::move(g), s, opts);
    if (n == 0) return engine.term_at(0, r);
    engine.run_terms(r, std::max(0, n - 1));
    return engine.term_at(n, r);
}

double first_duhamel_term(const ModelParams& params,
                          const std::function<double(double)>& potential, double t,
                          double r, double s, const EngineOptions& opts) {
    TensorGrid grid = make_engine_grid(params, s, r, opts);
    grid.t_final = t;
    VolterraEngine engine(make_hardy_base(params), potential, std::move(grid), s, opts);
    return engine.term_at(1, r);
}

namespace {

struct ScaledPoint {
    double r, s, scale;
    bool clamped;
};

ScaledPoint scale_to_unit_time(const ModelParams& params, double t, double r, double s,
                               const EngineOptions& opts) {
    const double sc = std::pow(t, -1.0 / params.alpha);
    double rs = r * sc, ss = s * sc;
    bool clamped = false;
    if (rs < opts.near_origin_clamp) { rs = opts.near_origin_clamp; clamped = true; }
    if (ss < opts.near_origin_clamp) { ss = opts.near_origin_clamp; clamped = true; }
    return {rs, ss, std::pow(t, -(2.0 * params.zeta + 1.0) / params.alpha), clamped};
}

// Signed series evaluation at (1, r, s) with an arbitrary potential.
std::pair<double, SeriesReport> run_point_series(const ModelParams& params,
                                                 const std::function<double(double)>& q,
                                                 double r, double s,
                                                 const EngineOptions& opts) {
    TensorGrid grid = make_engine_grid(params, s, r, opts);
    VolterraEngine engine(make_hardy_base(params), q, std::move(grid), s, opts);
    SeriesReport report = engine.run(r);
    double v = 0.0;
    for (double term : report.terms) v += term;
    v += report.tail_correction;
    return {v, std::move(report)};
}

} // namespace

HardyValue hardy_perturbed(const ModelParams& params, double eta, double t, double r,
                           double s, const EngineOptions& opts) {
    if (!(t > 0.0) || !(r > 0.0) || !(s > 0.0))
        throw DomainError("hardy_perturbed: t, r, s must be positive");
    if (!params.is_subcritical_branch(eta))
        throw DomainError("hardy_perturbed: eta = " + std::to_string(eta) +
                          " outside the branch (-M, (2 zeta + 1 - alpha)/2]");
    HardyValue out;
    const ScaledPoint pt = scale_to_unit_time(params, t, r, s, opts);
    out.clamped = pt.clamped;

    if (eta == 0.0) {
        out.value = p_alpha(params, t, r, s);
        out.report.terms = {out.value};
        out.report.converged = true;
        return out;
    }

    const double psi_v = psi(params, eta);
    const double alpha = params.alpha;
    auto q_full = [psi_v, alpha](double z) { return psi_v * std::pow(z, -alpha); };

    auto [value, report] = run_point_series(params, q_full, pt.r, pt.s, opts);
    if (!report.converged) {
        if (report.growth_ratio >= 1.0)
            throw SupercriticalError(
                "hardy_perturbed: series diverging (growth ratio " +
                std::to_string(report.growth_ratio) + " after " +
                std::to_string(report.terms.size()) + " terms)");
        throw ConvergenceError("hardy_perturbed: series tolerance not met after " +
                               std::to_string(report.terms.size()) + " terms, last ratio " +
                               std::to_string(report.growth_ratio));
    }

    if (eta < 0.0 && opts.dual_negative) {
        // Truncated-potential construction q ^ n of the negative perturbation:
        // bounded signed series at increasing truncation depth, floored where
        // the bounded series would lose too many digits to cancellation.
        const double psi_abs = std::fabs(psi_v);
        const double q_floor_z = std::pow(psi_abs / 22.0, 1.0 / alpha);
        double z_level = 0.5 * std::min({pt.r, pt.s, 1.0});
        double prev_level = 0.0;
        bool have_prev = false;
        double v_trunc = value;
        for (int level = 0; level < 4; ++level) {
            const double zl = std::max(z_level, q_floor_z);
            const double cap = psi_abs * std::pow(zl, -alpha);
            auto q_cut = [psi_v, alpha, cap](double z) {
                const double q = psi_v * std::pow(z, -alpha);
                return std::max(q, -cap);
            };
            EngineOptions trunc_opts = opts;
            trunc_opts.series.max_terms = std::max(opts.series.max_terms,
                                                   static_cast<int>(3.0 * cap) + 24);
            trunc_opts.series.growth_cap = 0.999;
            auto [v_level, rep_level] = run_point_series(params, q_cut, pt.r, pt.s,
                                                         trunc_opts);
            (void)rep_level;
            v_trunc = v_level;
            if (have_prev &&
                std::fabs(v_level - prev_level) <=
                    opts.cross_gate * std::max(std::fabs(v_level), 1e-300))
                break;
            prev_level = v_level;
            have_prev = true;
            if (zl <= q_floor_z * (1.0 + 1e-12)) break; // floor reached
            z_level *= 0.5;
        }
        const double scale_ref = std::max(std::fabs(value), std::fabs(v_trunc));
        if (std::fabs(value - v_trunc) > opts.cross_gate * scale_ref * 3.0)
            throw ConvergenceError(
                "hardy_perturbed: alternating series and truncated-potential limit "
                "disagree: " + std::to_string(value) + " vs " + std::to_string(v_trunc));
    }

    out.value = value * pt.scale;
    out.report = std::move(report);
    return out;
}

double cmc_lower_bound(const ModelParams& params, double eta, double t, double r,
                       double s, const EngineOptions& opts) {
    if (!(eta < 0.0))
        throw DomainError("cmc_lower_bound: eta must be negative");
    if (!params.is_subcritical_branch(eta))
        throw DomainError("cmc_lower_bound: eta outside the admissible branch");
    const double psi_abs = std::fabs(psi(params, eta));
    const double alpha = params.alpha;
    const ScaledPoint pt = scale_to_unit_time(params, t, r, s, opts);
    auto q_abs = [psi_abs, alpha](double z) { return psi_abs * std::pow(z, -alpha); };
    const double p1 = first_duhamel_term(params, q_abs, 1.0, pt.r, pt.s, opts);
    const double p0 = p_alpha(params, 1.0, pt.r, pt.s);
    return pt.scale * p0 * std::exp(-p1 / p0);
}

// ---------------------------------------------------------------------------
// Appendix toy example: one-point space, Dirac reference measure,
// base kernel (t-s)_+. The Volterra operator is exact double integration on
// polynomial coefficients; term summation runs through the shared driver.

namespace {

// p_n as polynomial coefficients in u = t - s (index = power).
std::vector<double> toy_next(const std::vector<double>& prev) {
    std::vector<double> next(prev.size() + 2, 0.0);
    for (std::size_t m = 0; m < prev.size(); ++m)
        next[m + 2] = prev[m] / ((m + 1.0) * (m + 2.0));
    return next;
}

double poly_eval(const std::vector<double>& coeff, double u) {
    double v = 0.0;
    for (std::size_t i = coeff.size(); i-- > 0;) v = v * u + coeff[i];
    return v;
}

} // namespace

double toy_base(double s, double t) { return std::max(t - s, 0.0); }

double toy_term(int n, double s, double t) {
    if (n < 0) throw DomainError("toy_term: n must be nonnegative");
    const double u = t - s;
    if (u <= 0.0) return 0.0;
    std::vector<double> coeff{0.0, 1.0}; // p_0(u) = u
    for (int k = 0; k < n; ++k) coeff = toy_next(coeff);
    return poly_eval(coeff, u);
}

double toy_perturbed(double lambda, double s, double t) {
    const double u = t - s;
    if (u <= 0.0) return 0.0;
    SeriesOptions so;
    so.rel_tol = 1e-15;
    so.min_terms = 2;
    so.max_terms = 80;
    SeriesAccumulator acc(so);
    std::vector<double> coeff{0.0, 1.0};
    double scale = 1.0;
    acc.push(poly_eval(coeff, u));
    for (int n = 1; n <= so.max_terms; ++n) {
        coeff = toy_next(coeff);
        scale *= lambda;
        if (acc.push(scale * poly_eval(coeff, u))) break;
        if (acc.diverging()) break;
    }
    return acc.sum;
}

} // namespace hardyheat
