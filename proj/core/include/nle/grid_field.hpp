#pragma once

// Uniform vertex-centred grids in one or two dimensions and the scalar,
// indicator and occupancy fields that live on them.
//
// Node (i, j) of a 2-D grid sits at (x0 - A + i h, y0 - A + j h) and is stored
// row-major with j as the row index: index = j * n + i.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nle/errors.hpp"

namespace nle {

using Point = std::array<double, 2>;

class Grid {
public:
    Grid() = default;

    /// Throws ConfigError if dim is not 1 or 2, n < 3 or half_width <= 0.
    static Grid make(int dim, double half_width, int n, Point origin = {0.0, 0.0});

    /// Builds a grid with spacing h whose box covers at least [origin-A, origin+A].
    static Grid with_spacing(int dim, double half_width, double h, Point origin = {0.0, 0.0});

    int dim() const { return dim_; }
    int n() const { return n_; }
    double h() const { return h_; }
    double half_width() const { return half_width_; }
    const Point& origin() const { return origin_; }
    std::size_t size() const { return dim_ == 1 ? std::size_t(n_) : std::size_t(n_) * std::size_t(n_); }

    /// Lower-left corner along one axis.
    double lower(int axis) const { return origin_[axis] - half_width_; }
    double coord(int axis, int i) const { return lower(axis) + i * h_; }

    /// Node position for a flat index.
    Point position(std::size_t idx) const;
    std::size_t index(int i, int j = 0) const { return std::size_t(j) * std::size_t(n_) + std::size_t(i); }

    /// Distance of a node to the nearest face of the box, in cells.
    int cells_to_edge(std::size_t idx) const;

    bool same_as(const Grid& other) const;
    double cell_measure() const { return dim_ == 1 ? h_ : h_ * h_; }

private:
    int dim_ = 1;
    int n_ = 3;
    double h_ = 1.0;
    double half_width_ = 1.0;
    Point origin_{0.0, 0.0};
};

struct ScalarField {
    Grid grid;
    std::vector<double> values;
    double time = 0.0;

    ScalarField() = default;
    ScalarField(Grid g, double fill, double t = 0.0);
    ScalarField(Grid g, std::vector<double> v, double t = 0.0);

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

struct IndicatorField {
    Grid grid;
    std::vector<std::uint8_t> values;

    IndicatorField() = default;
    IndicatorField(Grid g, std::uint8_t fill);

    std::uint8_t operator[](std::size_t i) const { return values[i]; }
    std::size_t count() const;
};

/// Occupancy chi in [0,1].
struct OccupancyField {
    Grid grid;
    std::vector<double> values;
    double time = 0.0;

    OccupancyField() = default;
    OccupancyField(Grid g, double fill, double t = 0.0);
    static OccupancyField from_indicator(const IndicatorField& ind, double t = 0.0);
};

// Initial shapes. Signed distances are positive inside.
struct IntervalShape {
    double center = 0.0;
    double half_length = 1.0;
};
struct DiskShape {
    Point center{0.0, 0.0};
    double radius = 1.0;
};
struct DiskUnionShape {
    std::vector<DiskShape> disks;
};
struct CallableShape {
    std::function<double(const Point&)> signed_distance;
    /// Radius of a ball around the origin outside of which the shape is empty.
    double bounding_radius = 0.0;
};
using ShapeSpec = std::variant<IntervalShape, DiskShape, DiskUnionShape, CallableShape>;

double signed_distance(const ShapeSpec& shape, const Point& p);

/// Radius (about the grid origin) beyond which the shape's signed distance is <= -1.
double clamp_support_radius(const ShapeSpec& shape, const Point& origin);

/// u0 = clamp(signed_distance, -1, 1). `margin` is the planned growth of the
/// support over the run; the clamped support plus margin must fit strictly
/// inside the box, otherwise ConfigError names the extent required.
ScalarField make_signed_initial(const Grid& grid, const ShapeSpec& shape, double margin = 0.0);

IndicatorField superlevel_indicator(const ScalarField& f, double level, bool strict);

/// h^dim * popcount.
double lebesgue_measure(const IndicatorField& ind);

/// max |a - b|; GridMismatch if the grids differ.
double sup_distance(const ScalarField& a, const ScalarField& b);

/// Max over axis-adjacent node pairs of |difference| / h, skipping pairs that
/// touch the outermost `skip_edge_cells` rings.
double discrete_lipschitz(const ScalarField& f, int skip_edge_cells = 0);

/// Measure of the symmetric difference of two indicators on one grid.
double symmetric_difference(const IndicatorField& a, const IndicatorField& b);

/// Largest |x - origin| over nodes where the indicator is set; 0 when empty.
double max_radius(const IndicatorField& ind);

/// Largest |x - origin| over nodes with f > -1 + tol (the support of u + 1).
double support_radius(const ScalarField& f, double tol = 0.0);

}  // namespace nle
