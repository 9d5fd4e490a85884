#pragma once

// Level-set-invariant nonlocal evolution for nonnegative kernels:
//   u_t = (c1 + c0 * 1{u(., t) >= u(x, t)}) |Du|.
//
// Advancing with the explicit speed c+[u](x) evaluated at u(x) is not
// monotone: raising a neighbour can lower the occupancy seen at x. The step
// used here is implicit in the level instead. With
//   S_l(x) = upwind_update(stencil(x), c1(x) + F_l(x)),  F_l(x) = (c0 * 1{I[u] >= l})(x),
// the new value is u_new(x) = sup{ l : S_l(x) >= l }. S_l is nonincreasing in l,
// nondecreasing in the stencil and in F, and F is nondecreasing in u since
// c0 >= 0, so the step preserves nodal order exactly. The supremum lies in
// [min stencil, max stencil] and is found by walking the sampled values
// inside that range. I[u] is the piecewise (bi)linear interpolant, sampled
// on sub-cells; counting whole nodes instead biases the measure of thin sets
// by a full cell.

#include <functional>

#include "nle/kernel_velocity.hpp"
#include "nle/local_eikonal.hpp"

namespace nle {

struct SlepcevConfig {
    SlepcevMode mode = SlepcevMode::exact();
    StepControl stepper;
    int store_every = 1;

    void validate() const;
};

/// Step control with speed bound M0 + M1 (plus snapping slack).
StepControl slepcev_step_control(const KernelSpec& kernel, const ExternalVelocity& c1, StepControl base);

/// Occupancy of a node's cell is measured on q^dim sub-points carrying the
/// linear (1-D) or bilinear (2-D) interpolant of u; each sub-point holds
/// w / q^dim of the kernel weight. q is a power of two, so sub-weights stay
/// exact multiples of the weight quantum.
inline int subcells_per_axis(int dim) { return dim == 1 ? 8 : 4; }

struct SubcellValues {
    std::size_t per_node = 1;
    std::vector<double> values;  // per_node entries per node
    std::vector<double> min, max;
};

SubcellValues subcell_values(const ScalarField& u);

/// One implicit-level step of size dt from u at time u.time.
ScalarField slepcev_step(const ScalarField& u, Convolver& conv, const ExternalVelocity& c1, double dt,
                         SlepcevMode mode = SlepcevMode::exact());

/// Throws ConfigError when the kernel has a negative sample.
Trajectory solve_slepcev(const ScalarField& u0, const KernelSpec& kernel, const ExternalVelocity& c1,
                         const SlepcevConfig& cfg);

/// Level used to read {u >= 0} and {u > 0} off numerical plateaus: values
/// within this distance of 0 count as 0.
inline constexpr double kLevelRoundoff = 1e-9;

struct SetCheck {
    double time = 0.0;
    double plus_symdiff = 0.0;   // |{v+ >= 0} ^ {u >= 0}|
    double minus_symdiff = 0.0;  // |{v- > 0} ^ {u > 0}|
    double tolerance = 0.0;      // 4 h per({u >= 0}) (at least two cells)
    std::size_t inclusion_violations = 0;  // outside a one-cell neighbourhood of the front
};

struct ExtremalPair {
    Trajectory u;
    std::vector<IndicatorField> rho_plus, rho_minus;
    Trajectory v_plus, v_minus;
    std::vector<SetCheck> checks;
    double sup_gap = 0.0;  // sup over stored times of |v+ - v-|
    bool unique = false;   // sup_gap <= 5h
    bool sets_match = true;
};

/// rho+ = 1{u >= 0}, rho- = 1{u > 0} at every stored time and the solutions
/// v+- of the local problems with speeds c0 * rho+- + c1 (frozen between
/// stored times). `u_traj` should store every step.
ExtremalPair extremal_solutions(const Trajectory& u_traj, const KernelSpec& kernel, const ExternalVelocity& c1,
                                const StepControl& ctrl, double roundoff = kLevelRoundoff);

struct Counterexample {
    Trajectory u;                     // U_gamma, every step stored
    std::vector<OccupancyField> chi;  // gamma(t) 1[-y, y] for t >= 1, 1[-x1, x1] before
    std::vector<double> y;            // plateau half-length at each stored time (0 before t = 1)
};

/// sup (dilation) or inf (erosion) of the linear interpolant of a 1-D field
/// over [x - radius, x + radius]; the exact solution operator of the local
/// equation with a speed that is constant in space.
ScalarField window_extremum(const ScalarField& u, double radius, bool sup);

/// U_gamma of the counterexample: the local equation with the spatially
/// constant speed c1 + 2 x1 on [0,1] and c1 + 2 gamma y_gamma on [1,2]. The
/// displacement of each step is exact (x1 closed form, y_gamma by RK4) and each
/// same-sign run is one window_extremum of the frame that opened it.
Counterexample counterexample_family(const std::function<double(double)>& gamma, const Grid& grid,
                                     double t_end = 2.0, double cfl = 0.5);

}  // namespace nle
