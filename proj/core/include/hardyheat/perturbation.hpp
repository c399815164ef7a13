#pragma once

#include "hardyheat/couplings.hpp"
#include "hardyheat/quadrature.hpp"
#include "hardyheat/subordinated_kernel.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace hardyheat {

/// Abstract time-homogeneous transition density with its reference-measure
/// weight; here density = p_zeta^(alpha) and weight(z) = z^(2 zeta).
struct KernelEvaluator {
    std::function<double(double t, double x, double y)> density;
    std::function<double(double z)> weight;
};

struct SeriesReport {
    std::vector<double> terms; // p_n at the monitored point
    int truncation_index = 0;
    bool converged = false;
    double growth_ratio = 0.0; // |p_(n+1)/p_n| of the last two terms
    /// Geometric tail correction added to the sum when the growth ratio has
    /// stabilized below 1; zero when the series was cut by the plain rule.
    double tail_correction = 0.0;
};

struct SeriesOptions {
    double rel_tol = 1e-6;
    int min_terms = 3;
    int max_terms = 40;
    double growth_cap = 0.9;
    /// Ratio window in which the stabilized-ratio geometric tail estimate is
    /// accepted (slowly convergent near-critical series).
    double tail_ratio_max = 0.995;
};

struct EngineOptions {
    SeriesOptions series;
    int n_time_lattice = 24;      // graded interpolation rows on (0, 1]
    double lattice_grading = 2.2;
    int n_tau = 20;               // clustered quadrature nodes per time integral
    double grid_abs_tol = 3e-5;   // omitted-mass target of the space grid
    int panels_per_decade = 10;   // 40 nodes per decade
    double window_half_widths = 10.0; // near-field window, in spike widths
    double near_origin_clamp = 1e-4;  // clamp fraction of t^(1/alpha)
    double cross_gate = 1e-3;     // alternating vs truncated agreement, eta < 0
    bool dual_negative = true;    // run the truncated-potential construction
};

struct HardyValue {
    double value = 0.0;
    SeriesReport report;
    bool clamped = false; // evaluated at near-origin clamped coordinates
};

/// Volterra tensor-grid evaluator of the Duhamel iterates
///   p_0 = base,  p_n(t,r,s) = int_0^t dtau int dz w(z) base(tau,r,z) q(z)
///                              p_(n-1)(t-tau,z,s)
/// for a fixed target s. Rows live on a graded time lattice; each iterate is
/// a weighted contraction of the precomputable base against the previous
/// rows, with panel-snapped fine quadrature where the base spike drops under
/// the grid resolution.
class VolterraEngine {
public:
    VolterraEngine(KernelEvaluator base, std::function<double(double)> potential,
                   TensorGrid grid, double s_target, EngineOptions opts);

    /// Compute terms until the stop rule fires, monitoring values at
    /// (t = 1, r_monitor, s_target). Accumulated rows are kept.
    SeriesReport run(double r_monitor);

    /// Advance exactly n_terms terms (no stop rule); used by the blow-up
    /// probe and the iterate inspector.
    SeriesReport run_terms(double r_monitor, int n_terms);

    const std::vector<double>& lattice_times() const { return lattice_; }
    const TensorGrid& grid() const { return grid_; }

    /// Summed series (including the base term and tail correction) at
    /// lattice time index k, grid node i.
    double summed(int k, int i) const;
    /// Base kernel value at lattice time index k, grid node i.
    double base_at(int k, int i) const;
    /// Summed series at (t = 1, r, s_target) for arbitrary r > 0.
    double value_at(double r) const;
    /// Individual term value p_n(1, r, s_target); valid for n <= computed.
    double term_at(int n, double r) const;

private:
    struct Window {
        double center;
        double width;
    };

    double base_value(double t, double x, double y) const;
    // Weighted space contraction sum_m w_m weight(z_m) base(tau,r,z_m) g(z_m)
    // with fine panel-replacement quadrature around the listed spikes.
    double contract(double tau, double r, const std::vector<double>& f_prev,
                    const std::function<double(double)>* exact_gamma,
                    const std::vector<Window>& windows) const;
    double interp_row(const std::vector<double>& row, double z) const;
    double interp_time(int term_index, double t, int node) const;
    std::vector<double> next_rows(int n);
    double target_value(int n, double r) const;

    KernelEvaluator base_;
    std::function<double(double)> potential_;
    TensorGrid grid_;
    double s_target_;
    EngineOptions opts_;
    std::vector<double> lattice_;          // ascending, last = 1
    std::vector<double> tau_unit_, tau_unit_w_;
    std::vector<std::vector<double>> term_rows_; // [n][k * nz + i]
    std::vector<std::vector<double>> row_sum_;   // [k][i] sum over computed terms
    std::vector<double> row_ratio_;              // L1 ratio per term
    double tail_ratio_ = 0.0;                    // applied tail ratio, 0 if none
    int n_terms_ = 0;
    std::vector<double> weights_cache_;          // w_m * weight(z_m)
    std::vector<double> q_cache_;                // potential(z_m)
};

/// n-th Duhamel iterate of `base` with `potential` on the given grid.
double duhamel_iterate(const KernelEvaluator& base,
                       const std::function<double(double)>& potential,
                       const TensorGrid& grid, int n, double t, double r, double s,
                       const EngineOptions& opts = {});

/// First Duhamel iterate computed with both spike windows exact; used by the
/// complete-monotonicity lower bound and as the n = 1 reference.
double first_duhamel_term(const ModelParams& params,
                          const std::function<double(double)>& potential, double t,
                          double r, double s, const EngineOptions& opts = {});

/// Hardy-perturbed kernel p_(zeta,eta)^(alpha)(t,r,s).
/// eta = 0 returns p_alpha; eta > 0 sums the perturbation series; eta < 0
/// evaluates the alternating series and, by default, cross-checks it against
/// the truncated-potential construction q ^ n at increasing truncation
/// levels. Scaling reduces the evaluation to t = 1 internally.
HardyValue hardy_perturbed(const ModelParams& params, double eta, double t, double r,
                           double s, const EngineOptions& opts = {});

/// Lower bound p_alpha exp(-p_1(|Psi|)/p_alpha) for the repulsive case.
double cmc_lower_bound(const ModelParams& params, double eta, double t, double r,
                       double s, const EngineOptions& opts = {});

/// Appendix toy example on the one-point space with Dirac reference measure.
/// Base kernel (t - s)_+; all series terms are computed by the generic
/// series driver with exact repeated integration in time.
double toy_base(double s, double t);
/// sum_n lambda^n (t-s)^(2n+1)/(2n+1)!: sinh-type for lambda > 0, sin-type
/// for lambda < 0, computed through the series engine.
double toy_perturbed(double lambda, double s, double t);
/// Engine-computed n-th toy term p_n(s,t) = (t-s)^(2n+1)/(2n+1)!.
double toy_term(int n, double s, double t);

} // namespace hardyheat
