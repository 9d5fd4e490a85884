#include "nle/grid_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nle {

Grid Grid::make(int dim, double half_width, int n, Point origin) {
    if (dim != 1 && dim != 2) throw ConfigError("grid.dim must be 1 or 2, got " + std::to_string(dim));
    if (n < 3) throw ConfigError("grid.n must be >= 3, got " + std::to_string(n));
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ConfigError("grid.half_width must be positive");
    Grid g;
    g.dim_ = dim;
    g.n_ = n;
    g.half_width_ = half_width;
    g.h_ = 2.0 * half_width / double(n - 1);
    g.origin_ = origin;
    if (dim == 1) g.origin_[1] = 0.0;
    return g;
}

Grid Grid::with_spacing(int dim, double half_width, double h, Point origin) {
    if (!(h > 0.0)) throw ConfigError("grid spacing must be positive");
    const int cells = int(std::ceil(2.0 * half_width / h - 1e-9));
    const double a = 0.5 * cells * h;
    return make(dim, a, cells + 1, origin);
}

Point Grid::position(std::size_t idx) const {
    if (dim_ == 1) return {coord(0, int(idx)), 0.0};
    const int i = int(idx % std::size_t(n_));
    const int j = int(idx / std::size_t(n_));
    return {coord(0, i), coord(1, j)};
}

int Grid::cells_to_edge(std::size_t idx) const {
    if (dim_ == 1) return std::min(int(idx), n_ - 1 - int(idx));
    const int i = int(idx % std::size_t(n_));
    const int j = int(idx / std::size_t(n_));
    return std::min({i, n_ - 1 - i, j, n_ - 1 - j});
}

bool Grid::same_as(const Grid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && h_ == o.h_ && half_width_ == o.half_width_ && origin_ == o.origin_;
}

ScalarField::ScalarField(Grid g, double fill, double t) : grid(g), values(g.size(), fill), time(t) {}

ScalarField::ScalarField(Grid g, std::vector<double> v, double t) : grid(g), values(std::move(v)), time(t) {
    if (values.size() != grid.size()) throw GridMismatch("value count does not match grid size");
}

IndicatorField::IndicatorField(Grid g, std::uint8_t fill) : grid(g), values(g.size(), fill) {}

std::size_t IndicatorField::count() const {
    return std::size_t(std::count(values.begin(), values.end(), std::uint8_t{1}));
}

OccupancyField::OccupancyField(Grid g, double fill, double t) : grid(g), values(g.size(), fill), time(t) {}

OccupancyField OccupancyField::from_indicator(const IndicatorField& ind, double t) {
    OccupancyField occ(ind.grid, 0.0, t);
    for (std::size_t i = 0; i < ind.values.size(); ++i) occ.values[i] = ind.values[i] ? 1.0 : 0.0;
    return occ;
}

namespace {

double distance(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

struct SignedDistance {
    const Point& p;
    double operator()(const IntervalShape& s) const { return s.half_length - std::abs(p[0] - s.center); }
    double operator()(const DiskShape& s) const { return s.radius - distance(p, s.center); }
    double operator()(const DiskUnionShape& s) const {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& d : s.disks) best = std::max(best, d.radius - distance(p, d.center));
        return best;
    }
    double operator()(const CallableShape& s) const { return s.signed_distance(p); }
};

struct SupportRadius {
    const Point& o;
    // The clamped field reaches -1 one unit outside the zero level.
    double operator()(const IntervalShape& s) const { return std::abs(s.center - o[0]) + s.half_length + 1.0; }
    double operator()(const DiskShape& s) const { return distance(s.center, o) + s.radius + 1.0; }
    double operator()(const DiskUnionShape& s) const {
        double r = 0.0;
        for (const auto& d : s.disks) r = std::max(r, distance(d.center, o) + d.radius + 1.0);
        return r;
    }
    double operator()(const CallableShape& s) const { return s.bounding_radius; }
};

}  // namespace

double signed_distance(const ShapeSpec& shape, const Point& p) { return std::visit(SignedDistance{p}, shape); }

double clamp_support_radius(const ShapeSpec& shape, const Point& origin) {
    return std::visit(SupportRadius{origin}, shape);
}

ScalarField make_signed_initial(const Grid& grid, const ShapeSpec& shape, double margin) {
    // Two collar cells stay pinned at -1 during evolution.
    const double needed = clamp_support_radius(shape, grid.origin()) + margin + 2.0 * grid.h();
    const double available = grid.half_width();
    const bool is_callable = std::holds_alternative<CallableShape>(shape);
    if (!is_callable || std::get<CallableShape>(shape).bounding_radius > 0.0) {
        // Axis-aligned box: the shape's support ball must fit along every axis.
        if (needed > available + 1e-12) {
            std::ostringstream os;
            os << "initial shape does not fit: support radius + margin requires half_width >= " << needed
               << " but grid.half_width = " << available;
            throw ConfigError(os.str());
        }
    }
    ScalarField u(grid, -1.0, 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double d = signed_distance(shape, grid.position(k));
        u.values[k] = std::clamp(d, -1.0, 1.0);
    }
    return u;
}

IndicatorField superlevel_indicator(const ScalarField& f, double level, bool strict) {
    IndicatorField ind(f.grid, 0);
    for (std::size_t k = 0; k < f.values.size(); ++k)
        ind.values[k] = strict ? (f.values[k] > level) : (f.values[k] >= level);
    return ind;
}

double lebesgue_measure(const IndicatorField& ind) { return ind.grid.cell_measure() * double(ind.count()); }

double sup_distance(const ScalarField& a, const ScalarField& b) {
    if (!a.grid.same_as(b.grid)) throw GridMismatch("sup_distance: fields live on different grids");
    double m = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
    return m;
}

double discrete_lipschitz(const ScalarField& f, int skip_edge_cells) {
    const Grid& g = f.grid;
    const int n = g.n();
    const int lo = skip_edge_cells, hi = n - skip_edge_cells;  // nodes in [lo, hi)
    double m = 0.0;
    if (g.dim() == 1) {
        for (int i = lo; i + 1 < hi; ++i) m = std::max(m, std::abs(f.values[i + 1] - f.values[i]));
    } else {
        for (int j = lo; j < hi; ++j)
            for (int i = lo; i < hi; ++i) {
                const double c = f.values[g.index(i, j)];
                if (i + 1 < hi) m = std::max(m, std::abs(f.values[g.index(i + 1, j)] - c));
                if (j + 1 < hi) m = std::max(m, std::abs(f.values[g.index(i, j + 1)] - c));
            }
    }
    return m / g.h();
}

double symmetric_difference(const IndicatorField& a, const IndicatorField& b) {
    if (!a.grid.same_as(b.grid)) throw GridMismatch("symmetric_difference: indicators live on different grids");
    std::size_t c = 0;
    for (std::size_t k = 0; k < a.values.size(); ++k) c += (a.values[k] != b.values[k]);
    return a.grid.cell_measure() * double(c);
}

double max_radius(const IndicatorField& ind) {
    double r = 0.0;
    const Point o = ind.grid.origin();
    for (std::size_t k = 0; k < ind.values.size(); ++k)
        if (ind.values[k]) r = std::max(r, distance(ind.grid.position(k), o));
    return r;
}

double support_radius(const ScalarField& f, double tol) {
    double r = 0.0;
    const Point o = f.grid.origin();
    for (std::size_t k = 0; k < f.values.size(); ++k)
        if (f.values[k] > -1.0 + tol) r = std::max(r, distance(f.grid.position(k), o));
    return r;
}

}  // namespace nle
