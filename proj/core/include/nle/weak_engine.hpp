#pragma once

// Weak solutions of u_t = (c0 * chi + c1) |Du| built as limits of the
// regularized problems where chi is replaced by psi_eps(u). Each regularized
// problem is solved by Picard iteration on whole space-time trajectories,
// warm-started along a decreasing eps schedule.

#include <cstddef>
#include <vector>

#include "nle/kernel_velocity.hpp"
#include "nle/local_eikonal.hpp"

namespace nle {

struct PsiEps {
    double eps;

    explicit PsiEps(double e);
    double operator()(double s) const {
        if (s >= 0.0) return 1.0;
        if (s <= -eps) return 0.0;
        return 1.0 + s / eps;
    }
    OccupancyField apply(const ScalarField& u) const;
};

struct FixedPointConfig {
    std::vector<double> eps_schedule;  // empty: {8h, 4h, 2h, h}
    int max_picard = 200;
    double tol = 1e-6;
    double relax = 1.0;
    StepControl stepper;
    ConvolutionBackend backend = ConvolutionBackend::fft;

    static std::vector<double> default_schedule(double h) { return {8 * h, 4 * h, 2 * h, h}; }
    /// Throws ConfigError naming the offending field.
    void validate() const;
};

struct SandwichReport {
    std::size_t violations = 0;       // all nodes and stored times
    std::size_t out_of_band = 0;      // violations farther than the band from the zero level
    std::size_t max_band_cells = 0;   // largest zero-band cell count over stored times
    bool ok() const { return out_of_band == 0; }
};

struct WeakSolution {
    Trajectory u;                     // every time step is stored
    std::vector<OccupancyField> chi;  // occupancy used on [t_s, t_s + dt)
    double residual = 0.0;
    std::vector<double> residual_history;    // one entry per Picard iterate
    std::vector<int> iterations_per_eps;
    std::vector<double> final_residual_per_eps;
    bool converged = false;
    bool classical = false;
    bool residual_monotone_over_eps = true;
    double eps_final = 0.0;
    SandwichReport sandwich;
};

/// One application of the fixed-point map: the trajectory driven by
/// c0 * psi_eps(u(., t_s)) + c1 on each step. `u` must hold one frame per step.
Trajectory map_T(const Trajectory& u, double eps, const KernelSpec& kernel, const ExternalVelocity& c1,
                 const ScalarField& u0, const StepControl& ctrl, ConvolutionBackend backend = ConvolutionBackend::fft);

/// Trajectory driven by the given occupancy (one field per step).
Trajectory solve_with_occupancy(const std::vector<OccupancyField>& chi, const KernelSpec& kernel,
                                const ExternalVelocity& c1, const ScalarField& u0, const StepControl& ctrl,
                                ConvolutionBackend backend = ConvolutionBackend::fft);

/// Step control with speed bound M0 + M1 and every step stored.
StepControl weak_step_control(const KernelSpec& kernel, const ExternalVelocity& c1, StepControl base);

WeakSolution solve_weak(const ScalarField& u0, const KernelSpec& kernel, const ExternalVelocity& c1,
                        FixedPointConfig cfg);

/// Nodes where 1{u>0} <= chi <= 1{u>=0} fails. `band` marks the tolerated zone.
SandwichReport check_sandwich(const Trajectory& u, const std::vector<OccupancyField>& chi, double band);

/// True when every stored frame has fattening {|u| <= h Lip} at most
/// 4 h per({u >= 0}) plus four cells.
bool is_classical(const Trajectory& u);

struct VelocityBounds {
    std::vector<double> times;
    std::vector<double> max_violation;  // per stored time
    std::vector<double> band_fraction;  // zero-band cells / all cells
    double worst = 0.0;
};

/// Compares the realized speed c0 * chi + c1 with
///   c0+ * 1{u>0} - c0- * 1{u>=0} + c1  <=  cbar  <=  c0+ * 1{u>=0} - c0- * 1{u>0} + c1.
VelocityBounds check_velocity_bounds(const WeakSolution& ws, const KernelSpec& kernel, const ExternalVelocity& c1);

}  // namespace nle
