#include "nle/weak_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nle/diagnostics.hpp"

namespace nle {

PsiEps::PsiEps(double e) : eps(e) {
    if (!(e > 0.0)) throw ConfigError("psi_eps needs eps > 0");
}

OccupancyField PsiEps::apply(const ScalarField& u) const {
    OccupancyField occ(u.grid, 0.0, u.time);
    for (std::size_t k = 0; k < u.size(); ++k) occ.values[k] = (*this)(u.values[k]);
    return occ;
}

void FixedPointConfig::validate() const {
    for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
        if (!(eps_schedule[k] > 0.0)) throw ConfigError("solver.eps_schedule entries must be positive");
        if (k > 0 && !(eps_schedule[k] < eps_schedule[k - 1]))
            throw ConfigError("solver.eps_schedule must be strictly decreasing");
    }
    if (max_picard < 1) throw ConfigError("solver.max_picard must be >= 1");
    if (!(tol > 0.0)) throw ConfigError("solver.tol must be positive");
    if (!(relax > 0.0 && relax <= 1.0)) throw ConfigError("solver.relax must lie in (0, 1]");
    if (!(stepper.cfl > 0.0 && stepper.cfl <= 1.0)) throw ConfigError("solver.cfl must lie in (0, 1]");
}

namespace {

std::vector<double> velocity(Convolver& conv, const ExternalVelocity& c1, std::span<const double> chi, double t,
                             ConvolutionBackend backend) {
    std::vector<double> v = conv.kernel().is_zero() ? std::vector<double>(chi.size(), 0.0)
                                                    : conv.convolve(chi, t, backend);
    const Grid& g = conv.grid();
    if (c1.spatially_constant) {
        const double c = c1.eval(g.position(0), t);
        for (double& x : v) x += c;
    } else {
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += c1.eval(g.position(k), t);
    }
    return v;
}

Trajectory drive(Convolver& conv, const std::vector<OccupancyField>& chi, const ExternalVelocity& c1,
                 const ScalarField& u0, const StepControl& ctrl, ConvolutionBackend backend) {
    const int steps = ctrl.step_count(u0.grid);
    if (int(chi.size()) < std::max(steps, 1))
        throw NumericalError("occupancy trajectory shorter than the time grid");
    const double dt = steps > 0 ? ctrl.t_end / steps : 0.0;
    auto speed = [&](double t, double) {
        const auto s = std::size_t(std::clamp<long>(std::lround((t - u0.time) / dt), 0, long(chi.size()) - 1));
        return SpeedField(velocity(conv, c1, chi[s].values, t, backend));
    };
    return solve_fixed_speed(u0, speed, ctrl);
}

std::vector<OccupancyField> occupancy_of(const Trajectory& u, const PsiEps& psi, std::size_t steps) {
    std::vector<OccupancyField> chi;
    chi.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s) chi.push_back(psi.apply(u.frames[std::min(s, u.frames.size() - 1)]));
    return chi;
}

double trajectory_distance(const Trajectory& a, const Trajectory& b) {
    double d = 0.0;
    for (std::size_t s = 0; s < std::min(a.frames.size(), b.frames.size()); ++s)
        d = std::max(d, sup_distance(a.frames[s], b.frames[s]));
    return d;
}

}  // namespace

StepControl weak_step_control(const KernelSpec& kernel, const ExternalVelocity& c1, StepControl base) {
    // Snapped weights may exceed the unsnapped L1 norm by half a quantum per tap.
    const double taps = std::pow(double(kernel.width()), kernel.dim());
    base.speed_bound = std::max(kernel.M0() + c1.M1 + taps * kWeightQuantum, 1e-12);
    base.store_every = 1;
    return base;
}

Trajectory solve_with_occupancy(const std::vector<OccupancyField>& chi, const KernelSpec& kernel,
                                const ExternalVelocity& c1, const ScalarField& u0, const StepControl& ctrl,
                                ConvolutionBackend backend) {
    Convolver conv(kernel, u0.grid);
    return drive(conv, chi, c1, u0, ctrl, backend);
}

Trajectory map_T(const Trajectory& u, double eps, const KernelSpec& kernel, const ExternalVelocity& c1,
                 const ScalarField& u0, const StepControl& ctrl, ConvolutionBackend backend) {
    const PsiEps psi(eps);
    const auto chi = occupancy_of(u, psi, std::size_t(std::max(ctrl.step_count(u0.grid), 1)));
    return solve_with_occupancy(chi, kernel, c1, u0, ctrl, backend);
}

WeakSolution solve_weak(const ScalarField& u0, const KernelSpec& kernel, const ExternalVelocity& c1,
                        FixedPointConfig cfg) {
    if (cfg.eps_schedule.empty()) cfg.eps_schedule = FixedPointConfig::default_schedule(u0.grid.h());
    cfg.validate();
    const StepControl ctrl = weak_step_control(kernel, c1, cfg.stepper);
    const std::size_t steps = std::size_t(std::max(ctrl.step_count(u0.grid), 1));
    Convolver conv(kernel, u0.grid);

    WeakSolution ws;
    // Initial guess: occupancy frozen at its t = 0 value.
    std::vector<OccupancyField> chi(steps, PsiEps(cfg.eps_schedule.front()).apply(u0));
    Trajectory u = drive(conv, chi, c1, u0, ctrl, cfg.backend);

    for (double eps : cfg.eps_schedule) {
        const PsiEps psi(eps);
        chi = occupancy_of(u, psi, steps);
        int it = 0;
        double res = 0.0;
        bool done = false;
        while (it < cfg.max_picard && !done) {
            Trajectory next = drive(conv, chi, c1, u0, ctrl, cfg.backend);
            res = trajectory_distance(next, u);
            u = std::move(next);
            ++it;
            ws.residual_history.push_back(res);
            done = res <= cfg.tol;
            if (!done) {
                for (std::size_t s = 0; s < steps; ++s) {
                    const auto& f = u.frames[std::min(s, u.frames.size() - 1)];
                    for (std::size_t k = 0; k < f.size(); ++k)
                        chi[s].values[k] = (1.0 - cfg.relax) * chi[s].values[k] + cfg.relax * psi(f.values[k]);
                }
            }
        }
        if (!ws.final_residual_per_eps.empty() && res > ws.final_residual_per_eps.back())
            ws.residual_monotone_over_eps = false;
        ws.iterations_per_eps.push_back(it);
        ws.final_residual_per_eps.push_back(res);
        ws.residual = res;
        ws.converged = done;
        ws.eps_final = eps;
    }
    ws.u = std::move(u);
    ws.chi = std::move(chi);
    ws.classical = is_classical(ws.u);
    const double band = std::max(ws.eps_final, default_band(ws.u.frames.front()));
    ws.sandwich = check_sandwich(ws.u, ws.chi, band);
    return ws;
}

SandwichReport check_sandwich(const Trajectory& u, const std::vector<OccupancyField>& chi, double band) {
    SandwichReport r;
    const std::size_t n = std::min(u.frames.size(), chi.size());
    for (std::size_t s = 0; s < n; ++s) {
        const auto& f = u.frames[s];
        const double b = std::max(band, default_band(f));
        std::size_t band_cells = 0;
        for (std::size_t k = 0; k < f.size(); ++k) {
            const double v = f.values[k], c = chi[s].values[k];
            const bool in_band = std::abs(v) <= b;
            band_cells += in_band;
            const double lower = v > 0.0 ? 1.0 : 0.0, upper = v >= 0.0 ? 1.0 : 0.0;
            if (c < lower - 1e-12 || c > upper + 1e-12) {
                ++r.violations;
                if (!in_band) ++r.out_of_band;
            }
        }
        r.max_band_cells = std::max(r.max_band_cells, band_cells);
    }
    return r;
}

bool is_classical(const Trajectory& u) {
    for (const auto& f : u.frames) {
        const double h = f.grid.h();
        const double fat = fattening_measure(f, default_band(f));
        const double per = perimeter(superlevel_indicator(f, 0.0, false));
        if (fat > 4.0 * h * per + 4.0 * f.grid.cell_measure()) return false;
    }
    return true;
}

VelocityBounds check_velocity_bounds(const WeakSolution& ws, const KernelSpec& kernel, const ExternalVelocity& c1) {
    VelocityBounds r;
    const KernelSpec kp = kernel.part(true), km = kernel.part(false);
    const Grid& g = ws.u.frames.front().grid;
    Convolver cv(kernel, g), cp(kp, g), cm(km, g);
    const std::size_t n = std::min(ws.u.frames.size(), ws.chi.size());
    for (std::size_t s = 0; s < n; ++s) {
        const auto& f = ws.u.frames[s];
        const double t = f.time;
        std::vector<double> pos(f.size()), nonneg(f.size());
        std::size_t band_cells = 0;
        const double band = default_band(f);
        for (std::size_t k = 0; k < f.size(); ++k) {
            pos[k] = f.values[k] > 0.0;
            nonneg[k] = f.values[k] >= 0.0;
            band_cells += std::abs(f.values[k]) <= band;
        }
        const auto cbar = velocity(cv, c1, ws.chi[s].values, t, ConvolutionBackend::direct);
        const auto p_pos = cp.convolve(pos, t, ConvolutionBackend::direct);
        const auto p_nn = cp.convolve(nonneg, t, ConvolutionBackend::direct);
        const auto m_pos = cm.convolve(pos, t, ConvolutionBackend::direct);
        const auto m_nn = cm.convolve(nonneg, t, ConvolutionBackend::direct);
        double worst = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) {
            const double c = cbar[k] - (c1.spatially_constant ? c1.eval(g.position(0), t) : c1.eval(g.position(k), t));
            const double lo = p_pos[k] - m_nn[k], hi = p_nn[k] - m_pos[k];
            worst = std::max({worst, lo - c, c - hi});
        }
        r.times.push_back(t);
        r.max_violation.push_back(std::max(worst, 0.0));
        r.band_fraction.push_back(double(band_cells) / double(f.size()));
        r.worst = std::max(r.worst, worst);
    }
    r.worst = std::max(r.worst, 0.0);
    return r;
}

}  // namespace nle
