#pragma once

#include <functional>
#include <vector>

namespace hardyheat {

struct ModelParams;

enum class TailCutoff { Fixed, BoundDriven };

/// Tolerances and transformation controls for the adaptive integrator.
struct QuadratureSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-14;
    int max_subdivisions = 400;
    /// Power-law substitution exponents z = a + (..)*u^p concentrating nodes
    /// at the endpoint; 1 means no substitution.
    double endpoint_power_left = 1.0;
    double endpoint_power_right = 1.0;
    TailCutoff tail_cutoff_policy = TailCutoff::BoundDriven;
    /// Truncation length used when tail_cutoff_policy == Fixed and the
    /// upper limit is infinite.
    double fixed_tail_cutoff = 1e6;

    QuadratureSpec() = default;
    QuadratureSpec(double rel, double abs) : rel_tol(rel), abs_tol(abs) {}
};

struct IntegralResult {
    double value;
    double error_estimate;
};

/// Adaptive Gauss-Kronrod (G7,K15) integration of f over (a, b); b may be
/// +infinity. The reported error estimate is the accumulated |K15 - G7|
/// over the final subdivision, a deliberate overestimate of the true error.
///
/// Throws ConvergenceError when the subdivision budget is exhausted above
/// tolerance (the worst subinterval is reported) or when f produces a
/// non-finite value.
IntegralResult integrate(const std::function<double(double)>& f, double a, double b,
                         const QuadratureSpec& spec = {});

/// Nodes and weights for the Volterra-style Duhamel iteration.
/// space_weights are plain dz-weights: sum_i w_i g(z_i) ~ int g(z) dz.
struct TensorGrid {
    std::vector<double> space_nodes;   // strictly increasing, log-spaced panels
    std::vector<double> space_weights;
    /// Panel boundaries: nodes_per_panel consecutive nodes live between
    /// space_panel_edges[p] and space_panel_edges[p+1].
    std::vector<double> space_panel_edges;
    int nodes_per_panel = 4;
    std::vector<double> time_nodes;    // in (0, t), clustered at both endpoints
    std::vector<double> time_weights;
    double t_final = 1.0;
    double z_min = 0.0;
    double z_max = 0.0;
    /// Typical logarithmic node spacing, used to decide when a kernel spike
    /// is too narrow for the grid.
    double log_spacing = 0.0;

    /// sum_i w_i f(z_i)
    double space_integral(const std::function<double(double)>& f) const;
};

/// Build a tensor grid whose span [z_min, z_max] keeps the omitted mass of
/// p_zeta^(alpha)(t, r, .) below spec.abs_tol for r in [window_lo, window_hi]
/// (upper-envelope tail bound), and whose weights reproduce
/// int z^(2 zeta) dz over the span to spec.rel_tol.
TensorGrid build_grid(const ModelParams& params, double t, const QuadratureSpec& spec,
                      double window_lo = 0.05, double window_hi = 20.0,
                      int panels_per_decade = 5, int n_time = 24);

} // namespace hardyheat
