#include "nle/local_eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nle {

SpeedField::SpeedField(std::vector<double> v) : values(std::move(v)) {
    for (double a : values) sup = std::max(sup, std::abs(a));
}

SpeedField SpeedField::constant(const Grid& grid, double a) { return SpeedField(std::vector<double>(grid.size(), a)); }

double StepControl::step_size(const Grid& grid) const { return t_end / double(step_count(grid)); }

int StepControl::step_count(const Grid& grid) const {
    if (!(t_end > 0.0)) return 0;
    double dt = admissible_dt(grid, speed_bound, cfl);
    if (max_dt) dt = std::min(dt, *max_dt);
    if (!std::isfinite(dt)) return 1;
    return std::max(1, int(std::ceil(t_end / dt - 1e-9)));
}

double admissible_dt(const Grid& grid, double sup, double cfl) {
    return cfl * grid.h() / (double(grid.dim()) * std::max(sup, 1e-300));
}

Stencil stencil_at(const ScalarField& u, std::size_t idx) {
    const Grid& g = u.grid;
    const int n = g.n();
    const double c = u.values[idx];
    Stencil s;
    s.center = s.lo = s.hi = c;
    double dil2 = 0.0, ero2 = 0.0;
    auto axis = [&](double w, double e) {
        s.lo = std::min({s.lo, w, e});
        s.hi = std::max({s.hi, w, e});
        const double up = std::max({w - c, e - c, 0.0});
        const double down = std::max({c - w, c - e, 0.0});
        dil2 += up * up;
        ero2 += down * down;
    };
    if (g.dim() == 1) {
        const int i = int(idx);
        axis(i > 0 ? u.values[idx - 1] : c, i + 1 < n ? u.values[idx + 1] : c);
    } else {
        const int i = int(idx % std::size_t(n)), j = int(idx / std::size_t(n));
        axis(i > 0 ? u.values[idx - 1] : c, i + 1 < n ? u.values[idx + 1] : c);
        axis(j > 0 ? u.values[idx - std::size_t(n)] : c, j + 1 < n ? u.values[idx + std::size_t(n)] : c);
    }
    s.dilation = std::sqrt(dil2);
    s.erosion = std::sqrt(ero2);
    return s;
}

ScalarField eikonal_step(const ScalarField& u, const SpeedField& a, double dt, const StepOptions& opts) {
    if (a.values.size() != u.size()) throw GridMismatch("speed field size does not match grid");
    const double limit = admissible_dt(u.grid, a.sup, opts.cfl_limit);
    if (dt > limit * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "CFL violated: dt = " << dt << " exceeds admissible dt = " << limit << " (sup|a| = " << a.sup << ")";
        throw CflError(os.str(), limit);
    }
    ScalarField out(u.grid, std::vector<double>(u.size()), u.time + dt);
    const double ratio = dt / u.grid.h();
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double ak = a.values[k];
        out.values[k] = ak == 0.0 ? u.values[k] : upwind_update(stencil_at(u, k), ak, ratio);
    }
    if (opts.collar_cells > 0)
        for (std::size_t k = 0; k < out.size(); ++k)
            if (u.grid.cells_to_edge(k) < opts.collar_cells) out.values[k] = -1.0;
    return out;
}

void enforce_collar(ScalarField& u, const StepControl& ctrl) {
    const Grid& g = u.grid;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const int d = g.cells_to_edge(k);
        if (d < ctrl.collar_cells) {
            u.values[k] = -1.0;
        } else if (ctrl.tracked_level && d == ctrl.collar_cells && u.values[k] > *ctrl.tracked_level) {
            const Point p = g.position(k);
            std::ostringstream os;
            os << "domain too small: level " << *ctrl.tracked_level << " reached the boundary collar at t = " << u.time
               << " near (" << p[0] << ", " << p[1] << "); enlarge grid.half_width";
            throw DomainTooSmall(os.str());
        }
        if (ctrl.reclamp) u.values[k] = std::clamp(u.values[k], -1.0, 1.0);
    }
}

std::vector<double> Trajectory::times() const {
    std::vector<double> t;
    t.reserve(frames.size());
    for (const auto& f : frames) t.push_back(f.time);
    return t;
}

const ScalarField& Trajectory::at_time(double t) const {
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    std::size_t best = 0;
    for (std::size_t k = 0; k < frames.size(); ++k)
        if (frames[k].time <= t + tol) best = k;
    return frames[best];
}

Trajectory solve_fixed_speed(const ScalarField& u0, const SpeedFn& speed, const StepControl& ctrl) {
    Trajectory traj;
    traj.steps = ctrl.step_count(u0.grid);
    traj.dt = traj.steps > 0 ? ctrl.t_end / double(traj.steps) : 0.0;
    traj.store_every = std::max(1, ctrl.store_every);
    ScalarField u = u0;
    enforce_collar(u, ctrl);
    traj.frames.push_back(u);
    StepOptions opts;
    opts.collar_cells = 0;  // enforce_collar handles the collar and the domain check
    for (int s = 0; s < traj.steps; ++s) {
        const double t = u0.time + s * traj.dt;
        const SpeedField a = speed(t, traj.dt);
        if (a.sup > ctrl.speed_bound * (1.0 + 1e-9) + 1e-12) {
            std::ostringstream os;
            os << "speed bound exceeded at t = " << t << ": sup|a| = " << a.sup << " > " << ctrl.speed_bound;
            throw CflError(os.str(), admissible_dt(u.grid, a.sup, ctrl.cfl));
        }
        u = eikonal_step(u, a, traj.dt, opts);
        u.time = u0.time + (s + 1) * traj.dt;
        enforce_collar(u, ctrl);
        if ((s + 1) % traj.store_every == 0 || s + 1 == traj.steps) traj.frames.push_back(u);
    }
    return traj;
}

double oleinik_lax_1d(const std::function<double(double)>& u0, double x, Extremum which, double radius, int samples,
                      double tol) {
    if (radius <= 0.0) return u0(x);
    const bool want_min = which == Extremum::inf;
    auto better = [want_min](double a, double b) { return want_min ? a < b : a > b; };
    const int m = std::max(3, samples | 1);  // odd, so x itself is sampled
    const double lo = x - radius, hi = x + radius;
    const double step = (hi - lo) / double(m - 1);
    int best_k = 0;
    double best = u0(lo);
    for (int k = 1; k < m; ++k) {
        const double y = k + 1 == m ? hi : lo + k * step;
        const double v = u0(y);
        if (better(v, best)) {
            best = v;
            best_k = k;
        }
    }
    // Golden-section refinement on the bracketing cells.
    double a = std::max(lo, lo + (best_k - 1) * step);
    double b = std::min(hi, lo + (best_k + 1) * step);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = u0(c), fd = u0(d);
    while (b - a > tol) {
        if (better(fc, fd)) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = u0(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = u0(d);
        }
    }
    for (double v : {fc, fd, u0(0.5 * (a + b))})
        if (better(v, best)) best = v;
    return best;
}

}  // namespace nle
