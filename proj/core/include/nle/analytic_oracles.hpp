#pragma once

// Reference solutions for the 1-D counterexample (c0 = 1, c1(t) = 2(t-1)(2-t),
// u0 = 1 - |x|) and a radial ODE for flat kernels in 2-D.

#include <functional>

#include "nle/local_eikonal.hpp"

namespace nle {

/// gamma(t) in [0,1], the occupancy of the zero plateau after t = 1.
using GammaFn = std::function<double(double)>;

struct Example32Spec {
    static double c1(double t) { return 2.0 * (t - 1.0) * (2.0 - t); }
    static double u0(double x) { return 1.0 - (x < 0 ? -x : x); }
    static constexpr double horizon = 2.0;
};

struct OdeState {
    double t = 0.0;
    double y = 0.0;
};

inline constexpr double kOracleDt = 1e-4;

/// Half-length of the shrinking interval on [0,1].
double x1(double t);

/// Plateau half-length on [1,2]: y' = c1 + 2 gamma y, y(1) = 0. gamma is
/// frozen at the start of each RK4 step.
double y_gamma(const GammaFn& gamma, double t, double rk4_dt = kOracleDt);

/// All intermediate RK4 states from t = 1 up to t.
std::vector<OdeState> y_gamma_path(const GammaFn& gamma, double t, double rk4_dt = kOracleDt);

double y_closed_form_one(double t);   // gamma = 1
double y_closed_form_zero(double t);  // gamma = 0

/// Exact level-set function of the counterexample family.
double exact_U(const GammaFn& gamma, double x, double t, double rk4_dt = kOracleDt);

/// Front radius of r' = c1 + kernel_total(r), e.g. kernel_total(r) = k0 pi r^2
/// for a flat kernel of height k0. Throws NumericalError once r exceeds max_radius.
double radial_oracle(double c1_const, const std::function<double(double)>& kernel_total, double r0, double t,
                     double rk4_dt = kOracleDt, double max_radius = 1e6);

}  // namespace nle
