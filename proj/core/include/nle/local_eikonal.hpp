#pragma once

// Explicit monotone solver for u_t = a(x,t) |Du| with sign-changing speed.
//
// The update is first-order upwind in Godunov form. For a >= 0 (dilation)
//   u_new = u + dt a sqrt( sum_k max((u_w - u)+, (u_e - u)+)^2 ) / h
// and for a < 0 (erosion)
//   u_new = u + dt a sqrt( sum_k max((u - u_w)+, (u - u_e)+)^2 ) / h,
// where w/e are the axis neighbours. Under dt |a| dim / h <= 1 the update is
// nondecreasing in every stencil value and in a, so discrete comparison holds
// exactly. Missing neighbours at the box faces repeat the centre value.

#include <functional>
#include <optional>
#include <vector>

#include "nle/grid_field.hpp"

namespace nle {

struct SpeedField {
    std::vector<double> values;
    double sup = 0.0;

    SpeedField() = default;
    explicit SpeedField(std::vector<double> v);
    static SpeedField constant(const Grid& grid, double a);
};

struct StepControl {
    double cfl = 0.5;
    double t_end = 1.0;
    /// Bound on |a| over the run; fixes dt = cfl h / (dim speed_bound).
    double speed_bound = 1.0;
    std::optional<double> max_dt;
    int store_every = 1;
    /// Nodes within this many cells of a face are pinned to -1 after every step.
    int collar_cells = 1;
    /// DomainTooSmall is raised when a node on the first ring inside the collar
    /// exceeds this level. nullopt disables the check.
    std::optional<double> tracked_level = -1.0 + 1e-12;
    bool reclamp = false;

    /// Uniform step used by the solvers (t_end split into whole steps).
    double step_size(const Grid& grid) const;
    int step_count(const Grid& grid) const;
};

/// One-node view of the upwind stencil.
struct Stencil {
    double center = 0.0;
    double lo = 0.0;        // min over centre and axis neighbours
    double hi = 0.0;        // max over centre and axis neighbours
    double dilation = 0.0;  // Godunov |Du| * h for a >= 0
    double erosion = 0.0;   // Godunov |Du| * h for a < 0
};

Stencil stencil_at(const ScalarField& u, std::size_t idx);

/// u_new at one node for speed a; `ratio` is dt / h.
inline double upwind_update(const Stencil& s, double a, double ratio) {
    return a >= 0.0 ? s.center + (ratio * a) * s.dilation : s.center + (ratio * a) * s.erosion;
}

struct StepOptions {
    double cfl_limit = 1.0;
    int collar_cells = 1;
};

/// Largest admissible dt for speed bound `sup` at the given CFL factor.
double admissible_dt(const Grid& grid, double sup, double cfl);

/// One explicit step. Throws CflError when dt exceeds cfl_limit h / (dim sup).
ScalarField eikonal_step(const ScalarField& u, const SpeedField& a, double dt, const StepOptions& opts = {});

/// Applies the collar reset and the tracked-level domain check of `ctrl`.
void enforce_collar(ScalarField& u, const StepControl& ctrl);

struct Trajectory {
    std::vector<ScalarField> frames;
    double dt = 0.0;
    int steps = 0;
    int store_every = 1;

    std::vector<double> times() const;
    const ScalarField& back() const { return frames.back(); }
    /// Frame with the largest time <= t (+ a tiny tolerance).
    const ScalarField& at_time(double t) const;
};

/// Speed on [t, t + dt): receives the step start and the step size.
using SpeedFn = std::function<SpeedField(double t, double dt)>;

Trajectory solve_fixed_speed(const ScalarField& u0, const SpeedFn& speed, const StepControl& ctrl);

enum class Extremum { inf, sup };

/// inf or sup of u0 over [x - radius, x + radius]: dense sampling with
/// `samples` points followed by golden-section refinement to `tol`.
double oleinik_lax_1d(const std::function<double(double)>& u0, double x, Extremum which, double radius,
                      int samples = 10000, double tol = 1e-12);

}  // namespace nle
