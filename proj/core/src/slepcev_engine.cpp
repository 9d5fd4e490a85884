#include "nle/slepcev_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nle/analytic_oracles.hpp"
#include "nle/diagnostics.hpp"

namespace nle {

namespace {

struct Breakpoint {
    double level;
    double F;  // occupancy sum for levels in (next lower breakpoint, level]
};

// sup{ l in [lo, hi] : S_l >= l } where S is constant between breakpoints.
double walk_levels(const Stencil& st, double c1x, double ratio, double F_top, const std::vector<Breakpoint>& bps) {
    double upper = st.hi;
    double F = F_top;
    for (std::size_t k = 0; k <= bps.size(); ++k) {
        const double lower = k < bps.size() ? bps[k].level : st.lo;
        const double S = upwind_update(st, c1x + F, ratio);
        if (S >= upper) return upper;
        if (S > lower) return S;
        if (k < bps.size()) {
            upper = bps[k].level;
            F = bps[k].F;
        }
    }
    // S_lo >= lo always holds under the CFL bound.
    return st.lo;
}

void require_nonnegative(const KernelSpec& kernel) {
    if (!kernel.nonnegative())
        throw ConfigError(
            "kernel has negative samples; the level-set-invariant formulation requires c0 >= 0 "
            "(comparison fails otherwise)");
}

}  // namespace

void SlepcevConfig::validate() const {
    if (mode.kind == SlepcevMode::Kind::binned && mode.bins < 2)
        throw ConfigError("solver.bins must be >= 2 in binned mode");
    if (!(stepper.cfl > 0.0 && stepper.cfl <= 1.0)) throw ConfigError("solver.cfl must lie in (0, 1]");
    if (store_every < 1) throw ConfigError("solver.store_every must be >= 1");
}

StepControl slepcev_step_control(const KernelSpec& kernel, const ExternalVelocity& c1, StepControl base) {
    const double taps = std::pow(double(kernel.width()), kernel.dim());
    base.speed_bound = std::max(kernel.M0() + c1.M1 + taps * kWeightQuantum, 1e-12);
    return base;
}

ScalarField slepcev_step(const ScalarField& u, Convolver& conv, const ExternalVelocity& c1, double dt,
                         SlepcevMode mode) {
    const Grid& g = u.grid;
    const std::size_t N = u.size();
    const double t = u.time;
    const double ratio = dt / g.h();
    const ScalarField ext = c1.sample(g, t);

    // CFL against the largest speed any level can see.
    double total = 0.0;
    for (const auto& tap : conv.taps(t)) total += tap.w;
    double sup = 0.0;
    for (double c : ext.values) sup = std::max({sup, std::abs(c), std::abs(c + total)});
    const double limit = admissible_dt(g, sup, 1.0);
    if (dt > limit * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "CFL violated in nonlocal step: dt = " << dt << " > " << limit;
        throw CflError(os.str(), limit);
    }

    const SubcellValues sv = subcell_values(u);
    const std::size_t Q = sv.per_node;
    const double inv_q = 1.0 / double(Q);

    std::vector<Stencil> st(N);
    std::vector<double> hi(N);
    for (std::size_t k = 0; k < N; ++k) {
        st[k] = stencil_at(u, k);
        hi[k] = st[k].hi;
    }

    ScalarField out(g, std::vector<double>(N), t + dt);
    const auto& taps = conv.taps(t);
    const int n = g.n();
    std::vector<Breakpoint> bps;
    std::vector<std::pair<double, double>> vals;

    // Sorted (value, weight) pairs in (lo, hi) to breakpoints with running sums.
    auto collect = [&](double F_top) {
        std::sort(vals.begin(), vals.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        bps.clear();
        double F = F_top;
        for (std::size_t m = 0; m < vals.size();) {
            const double level = vals[m].first;
            while (m < vals.size() && vals[m].first == level) F += vals[m++].second;
            bps.push_back({level, F});
        }
    };

    if (mode.kind == SlepcevMode::Kind::exact) {
        // Nodes whose whole cell lies above hi(x) enter with their full weight.
        const auto F_full = conv.level_sums(sv.min, hi, true, t);
        for (std::size_t k = 0; k < N; ++k) {
            const Stencil& s = st[k];
            if (s.lo == s.hi) {
                out.values[k] = s.center;
                continue;
            }
            vals.clear();
            double F_top = F_full[k];
            const int xi = g.dim() == 1 ? int(k) : int(k % std::size_t(n));
            const int xj = g.dim() == 1 ? 0 : int(k / std::size_t(n));
            for (const auto& tap : taps) {
                // w(x - y) with y = x - offset
                const int yi = xi - tap.di, yj = xj - tap.dj;
                if (yi < 0 || yi >= n || yj < 0 || (g.dim() == 2 ? yj >= n : yj != 0)) continue;
                const std::size_t y = g.dim() == 1 ? std::size_t(yi) : g.index(yi, yj);
                if (sv.min[y] >= s.hi || sv.max[y] <= s.lo) continue;
                const double w = tap.w * inv_q;
                for (std::size_t q = 0; q < Q; ++q) {
                    const double v = sv.values[y * Q + q];
                    if (v >= s.hi) {
                        F_top += w;
                    } else if (v > s.lo) {
                        vals.emplace_back(v, w);
                    }
                }
            }
            collect(F_top);
            out.values[k] = walk_levels(s, ext.values[k], ratio, F_top, bps);
        }
        return out;
    }

    const auto th = binned_thresholds(u.values, mode.bins);
    std::vector<std::vector<double>> C(th.size());
    std::vector<double> frac(N);
    for (std::size_t b = 0; b < th.size(); ++b) {
        for (std::size_t k = 0; k < N; ++k) {
            std::size_t c = 0;
            for (std::size_t q = 0; q < Q; ++q) c += sv.values[k * Q + q] >= th[b];
            frac[k] = double(c) * inv_q;
        }
        C[b] = conv.convolve_indicator(frac, t, kWeightQuantum * inv_q);
    }
    for (std::size_t k = 0; k < N; ++k) {
        const Stencil& s = st[k];
        if (s.lo == s.hi) {
            out.values[k] = s.center;
            continue;
        }
        // Levels in (th[b-1], th[b]] read the occupancy of {I[u] >= th[b]}.
        const auto top = std::lower_bound(th.begin(), th.end(), s.hi);
        const double F_top = top == th.end() ? 0.0 : C[std::size_t(top - th.begin())][k];
        bps.clear();
        for (auto it = top; it != th.begin();) {
            --it;
            if (*it <= s.lo) break;
            if (*it < s.hi) bps.push_back({*it, C[std::size_t(it - th.begin())][k]});
        }
        out.values[k] = walk_levels(s, ext.values[k], ratio, F_top, bps);
    }
    return out;
}

SubcellValues subcell_values(const ScalarField& u) {
    const Grid& g = u.grid;
    const int n = g.n();
    const int q = subcells_per_axis(g.dim());
    SubcellValues sv;
    sv.per_node = g.dim() == 1 ? std::size_t(q) : std::size_t(q) * std::size_t(q);
    sv.values.resize(u.size() * sv.per_node);
    sv.min.resize(u.size());
    sv.max.resize(u.size());
    const auto uq = static_cast<std::size_t>(q);
    std::vector<double> off(uq), wgt(uq);
    for (int j = 0; j < q; ++j) {
        off[std::size_t(j)] = (j + 0.5) / q - 0.5;  // in cells, symmetric about the node
        wgt[std::size_t(j)] = std::abs(off[std::size_t(j)]);
    }
    auto at = [&](int i, int j) {
        i = std::clamp(i, 0, n - 1);
        j = g.dim() == 1 ? 0 : std::clamp(j, 0, n - 1);
        return u.values[g.dim() == 1 ? std::size_t(i) : g.index(i, j)];
    };
    for (std::size_t k = 0; k < u.size(); ++k) {
        const int i = g.dim() == 1 ? int(k) : int(k % std::size_t(n));
        const int j = g.dim() == 1 ? 0 : int(k / std::size_t(n));
        const double c = u.values[k];
        double lo = c, hi = c;
        double* dst = &sv.values[k * sv.per_node];
        if (g.dim() == 1) {
            for (int a = 0; a < q; ++a) {
                const double s = wgt[std::size_t(a)];
                const double nb = at(off[std::size_t(a)] < 0 ? i - 1 : i + 1, 0);
                const double v = (1.0 - s) * c + s * nb;
                dst[a] = v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        } else {
            for (int b = 0; b < q; ++b)
                for (int a = 0; a < q; ++a) {
                    const double sx = wgt[std::size_t(a)], sy = wgt[std::size_t(b)];
                    const int di = off[std::size_t(a)] < 0 ? -1 : 1, dj = off[std::size_t(b)] < 0 ? -1 : 1;
                    const double v = (1.0 - sx) * (1.0 - sy) * c + sx * (1.0 - sy) * at(i + di, j) +
                                     (1.0 - sx) * sy * at(i, j + dj) + sx * sy * at(i + di, j + dj);
                    dst[std::size_t(b) * q + a] = v;
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
        }
        sv.min[k] = lo;
        sv.max[k] = hi;
    }
    return sv;
}

Trajectory solve_slepcev(const ScalarField& u0, const KernelSpec& kernel, const ExternalVelocity& c1,
                         const SlepcevConfig& cfg) {
    require_nonnegative(kernel);
    cfg.validate();
    StepControl ctrl = slepcev_step_control(kernel, c1, cfg.stepper);
    ctrl.store_every = cfg.store_every;
    Convolver conv(kernel, u0.grid);
    Trajectory traj;
    traj.steps = ctrl.step_count(u0.grid);
    traj.dt = traj.steps > 0 ? ctrl.t_end / traj.steps : 0.0;
    traj.store_every = ctrl.store_every;
    ScalarField u = u0;
    enforce_collar(u, ctrl);
    traj.frames.push_back(u);
    for (int s = 0; s < traj.steps; ++s) {
        u = slepcev_step(u, conv, c1, traj.dt, cfg.mode);
        u.time = u0.time + (s + 1) * traj.dt;
        enforce_collar(u, ctrl);
        if ((s + 1) % traj.store_every == 0 || s + 1 == traj.steps) traj.frames.push_back(u);
    }
    return traj;
}

ExtremalPair extremal_solutions(const Trajectory& u_traj, const KernelSpec& kernel, const ExternalVelocity& c1,
                                const StepControl& ctrl, double roundoff) {
    require_nonnegative(kernel);
    ExtremalPair p;
    p.u = u_traj;
    const Grid& g = u_traj.frames.front().grid;
    for (const auto& f : u_traj.frames) {
        p.rho_plus.push_back(superlevel_indicator(f, -roundoff, false));
        p.rho_minus.push_back(superlevel_indicator(f, roundoff, true));
    }
    Convolver conv(kernel, g);
    const auto times = u_traj.times();
    // Occupancy of rho+- measured on the sub-cell samples of u, as in the step.
    const std::size_t Q = std::size_t(subcells_per_axis(g.dim())) * (g.dim() == 2 ? subcells_per_axis(2) : 1);
    std::vector<std::vector<double>> frac_plus, frac_minus;
    for (const auto& f : u_traj.frames) {
        const SubcellValues sv = subcell_values(f);
        std::vector<double> fp(f.size()), fm(f.size());
        for (std::size_t k = 0; k < f.size(); ++k) {
            std::size_t cp = 0, cm = 0;
            for (std::size_t q = 0; q < Q; ++q) {
                const double v = sv.values[k * Q + q];
                cp += v >= -roundoff;
                cm += v > roundoff;
            }
            fp[k] = double(cp) / double(Q);
            fm[k] = double(cm) / double(Q);
        }
        frac_plus.push_back(std::move(fp));
        frac_minus.push_back(std::move(fm));
    }
    auto frozen = [&](const std::vector<std::vector<double>>& frac) {
        return [&, frac_ptr = &frac](double t, double) {
            std::size_t s = 0;
            for (std::size_t k = 0; k < times.size(); ++k)
                if (times[k] <= t + 1e-9 * std::max(1.0, t)) s = k;
            auto v = conv.convolve_indicator((*frac_ptr)[s], t, kWeightQuantum / double(Q));
            const ScalarField ext = c1.sample(g, t);
            for (std::size_t k = 0; k < v.size(); ++k) v[k] += ext.values[k];
            return SpeedField(std::move(v));
        };
    };
    StepControl c = slepcev_step_control(kernel, c1, ctrl);
    c.t_end = times.back() - times.front();
    c.store_every = u_traj.store_every;
    const int steps = c.step_count(g);
    if (steps != u_traj.steps)
        throw NumericalError("extremal_solutions: step control does not reproduce the trajectory's time grid");
    p.v_plus = solve_fixed_speed(u_traj.frames.front(), frozen(frac_plus), c);
    p.v_minus = solve_fixed_speed(u_traj.frames.front(), frozen(frac_minus), c);

    const double h = g.h();
    for (std::size_t s = 0; s < u_traj.frames.size(); ++s) {
        const auto& u = u_traj.frames[s];
        const auto& vp = p.v_plus.frames[s];
        const auto& vm = p.v_minus.frames[s];
        SetCheck chk;
        chk.time = u.time;
        const auto vp_closed = superlevel_indicator(vp, -roundoff, false);
        const auto vm_open = superlevel_indicator(vm, roundoff, true);
        chk.plus_symdiff = symmetric_difference(vp_closed, p.rho_plus[s]);
        chk.minus_symdiff = symmetric_difference(vm_open, p.rho_minus[s]);
        const double per = std::max(perimeter(p.rho_plus[s]), perimeter(p.rho_minus[s]));
        chk.tolerance = std::max(4.0 * h * per, 2.0 * g.cell_measure());
        // {v+ > 0} c {u >= 0} c {v+ >= 0} away from a one-cell front neighbourhood.
        const double band = default_band(u);
        for (std::size_t k = 0; k < u.size(); ++k) {
            if (std::abs(u.values[k]) <= band || std::abs(vp.values[k]) <= band) continue;
            const bool u_in = u.values[k] >= -roundoff;
            const bool vp_open = vp.values[k] > roundoff, vp_cl = vp.values[k] >= -roundoff;
            if ((vp_open && !u_in) || (u_in && !vp_cl)) ++chk.inclusion_violations;
        }
        if (chk.plus_symdiff > chk.tolerance || chk.minus_symdiff > chk.tolerance || chk.inclusion_violations)
            p.sets_match = false;
        p.sup_gap = std::max(p.sup_gap, sup_distance(vp, vm));
        p.checks.push_back(chk);
    }
    p.unique = p.sup_gap <= 5.0 * h;
    return p;
}

ScalarField window_extremum(const ScalarField& u, double radius, bool sup) {
    const Grid& g = u.grid;
    if (g.dim() != 1) throw ConfigError("window_extremum is one-dimensional");
    const int n = g.n();
    const double h = g.h();
    auto interp = [&](double x) {
        const double s = std::clamp((x - g.lower(0)) / h, 0.0, double(n - 1));
        const int i = std::min(int(s), n - 2);
        const double f = s - i;
        return (1.0 - f) * u.values[std::size_t(i)] + f * u.values[std::size_t(i) + 1];
    };
    ScalarField out(g, std::vector<double>(u.size()), u.time);
    const int reach = int(std::floor(radius / h + 1e-12));
    for (int i = 0; i < n; ++i) {
        const double x = g.coord(0, i);
        double best = interp(x - radius);
        const double right = interp(x + radius);
        best = sup ? std::max(best, right) : std::min(best, right);
        for (int k = std::max(0, i - reach); k <= std::min(n - 1, i + reach); ++k)
            best = sup ? std::max(best, u.values[std::size_t(k)]) : std::min(best, u.values[std::size_t(k)]);
        out.values[std::size_t(i)] = best;
    }
    return out;
}

Counterexample counterexample_family(const std::function<double(double)>& gamma, const Grid& grid, double t_end,
                                     double cfl) {
    if (grid.dim() != 1) throw ConfigError("the counterexample family is one-dimensional");
    if (!(t_end > 0.0 && t_end <= 2.0)) throw ConfigError("counterexample horizon must lie in (0, 2]");
    // |speed| <= 2 on [0, 2]; steps are aligned with t = 1.
    const double dt_max = cfl * grid.h() / 2.0;
    const int per_unit = int(std::ceil(1.0 / dt_max - 1e-9));
    const double dt = 1.0 / per_unit;
    const int steps = int(std::lround(t_end * per_unit));

    Counterexample ce;
    StepControl ctrl;
    ctrl.collar_cells = 1;
    ScalarField u = make_signed_initial(grid, IntervalShape{0.0, 1.0}, 0.0);
    enforce_collar(u, ctrl);
    ce.u.dt = dt;
    ce.u.steps = steps;
    ce.u.store_every = 1;

    auto occupancy = [&](double t, double half) {
        OccupancyField chi(grid, 0.0, t);
        const double weight = t < 1.0 ? 1.0 : gamma(t);
        for (std::size_t k = 0; k < grid.size(); ++k)
            if (std::abs(grid.coord(0, int(k))) <= half + 1e-12) chi.values[k] = weight;
        return chi;
    };

    // The speed is constant in space, so the local equation acts as an erosion
    // (a < 0) or dilation (a > 0) by the accumulated displacement. Each run of
    // one sign is evaluated from the frame where it started.
    ScalarField base = u;
    double radius = 0.0;
    int sign = 0;
    double y = 0.0;
    for (int s = 0; s <= steps; ++s) {
        const double t = s < per_unit ? s * dt : 1.0 + (s - per_unit) * dt;
        const bool phase2 = s >= per_unit;
        ce.u.frames.push_back(u);
        ce.chi.push_back(occupancy(t, phase2 ? y : x1(t)));
        ce.y.push_back(phase2 ? y : 0.0);
        if (s == steps) break;
        double disp;
        if (!phase2) {
            disp = x1((s + 1) * dt) - x1(t);
        } else {
            const double g = gamma(t);
            if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("gamma must take values in [0, 1]");
            auto f = [g](double tt, double yy) { return Example32Spec::c1(tt) + 2.0 * g * yy; };
            const double k1 = f(t, y);
            const double k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1);
            const double k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2);
            const double k4 = f(t + dt, y + dt * k3);
            const double y_next = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            disp = y_next - y;
            y = y_next;
        }
        const int step_sign = disp > 0.0 ? 1 : disp < 0.0 ? -1 : 0;
        if (step_sign != 0 && step_sign != sign) {
            base = u;
            radius = 0.0;
            sign = step_sign;
        }
        radius += std::abs(disp);
        if (sign != 0) u = window_extremum(base, radius, sign > 0);
        u.time = phase2 || s + 1 == per_unit ? 1.0 + (s + 1 - per_unit) * dt : (s + 1) * dt;
        enforce_collar(u, ctrl);
    }
    return ce;
}

}  // namespace nle
