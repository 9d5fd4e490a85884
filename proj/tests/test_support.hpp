#pragma once

// Small measurement helpers shared by the unit and acceptance tests.

#include <cmath>
#include <numbers>

#include "nle/grid_field.hpp"

namespace nle::test {

/// Rightmost zero crossing of a 1-D field (linear interpolation between the
/// last node with u >= level and its right neighbour). -inf when u < level everywhere.
inline double right_crossing(const ScalarField& u, double level = 0.0) {
    const Grid& g = u.grid;
    for (int i = g.n() - 1; i >= 0; --i) {
        if (u[std::size_t(i)] >= level) {
            if (i + 1 == g.n()) return g.coord(0, i);
            const double a = u[std::size_t(i)], b = u[std::size_t(i) + 1];
            const double f = a == b ? 0.0 : (a - level) / (a - b);
            return g.coord(0, i) + f * g.h();
        }
    }
    return -INFINITY;
}

/// Leftmost crossing, mirrored.
inline double left_crossing(const ScalarField& u, double level = 0.0) {
    const Grid& g = u.grid;
    for (int i = 0; i < g.n(); ++i) {
        if (u[std::size_t(i)] >= level) {
            if (i == 0) return g.coord(0, 0);
            const double a = u[std::size_t(i)], b = u[std::size_t(i) - 1];
            const double f = a == b ? 0.0 : (a - level) / (a - b);
            return g.coord(0, i) - f * g.h();
        }
    }
    return INFINITY;
}

/// Radius of the disk with the area of {u >= 0}.
inline double area_radius(const ScalarField& u) {
    return std::sqrt(lebesgue_measure(superlevel_indicator(u, 0.0, false)) / std::numbers::pi);
}

}  // namespace nle::test
