#pragma once

// Geometric observables of level-set trajectories.

#include <iosfwd>
#include <optional>
#include <vector>

#include "nle/local_eikonal.hpp"

namespace nle {

/// h times the discrete Lipschitz constant away from the collar ring; the
/// default resolvable zero band.
double default_band(const ScalarField& u);

/// Measure of {|u| <= band}.
double fattening_measure(const ScalarField& u, double band);

/// 1-D: number of 0/1 transitions. 2-D: marching-squares length of the 1/2
/// contour over grid cells (the box faces are not part of the boundary).
double perimeter(const IndicatorField& ind);

/// Exact Euclidean distance from each node to the nearest node outside the
/// set, counting a virtual ring of outside nodes one cell beyond the box.
/// Zero outside the set.
std::vector<double> distance_to_complement(const IndicatorField& ind);

/// Largest r such that every boundary node of the set lies in a ball of
/// radius r inside the set, less half a cell. Boundary nodes are set nodes
/// with an axis neighbour outside the set. Throws NumericalError when empty.
double interior_ball_radius(const IndicatorField& ind);

/// Radius of the largest ball inside the set (same discretization).
double inradius(const IndicatorField& ind);

struct ArrivalTime {
    ScalarField w;               // +inf where never reached
    bool non_monotone = false;   // some node left {u >= 0} after entering it
};

ArrivalTime arrival_time(const Trajectory& traj);

struct CoareaCheck {
    double perimeter_integral = 0.0;  // int_0^t per({w <= s}) ds
    double gradient_integral = 0.0;   // int_{0 < w <= t} |Dw|
    double relative_gap() const;
};

CoareaCheck coarea_check(const ScalarField& w, double t, int samples = 64);

struct LowerGradient {
    bool pass = false;
    double min_value = 0.0;  // min over the band of |u| + |Du|; +inf on an empty band
};

LowerGradient lower_gradient_check(const ScalarField& u, double eta, double band);

/// Running sup over stored times of ||a - b||_inf. Frames are matched by index
/// and must share grid and time.
std::vector<double> alpha_series(const Trajectory& a, const Trajectory& b);

struct RunReport {
    std::vector<double> times, fattening, perimeter, interior_ball, alpha, lgb_min;

    void write_csv(std::ostream& os) const;
};

/// Per-frame diagnostics of {u >= 0}. `band` <= 0 picks default_band per frame.
RunReport build_report(const Trajectory& traj, const Trajectory* reference = nullptr, double band = 0.0);

}  // namespace nle
