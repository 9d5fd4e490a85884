#include "nle/analytic_oracles.hpp"

#include <cmath>
#include <sstream>

namespace nle {

double x1(double t) { return (t - 1.0) * (t - 1.0); }

double y_closed_form_one(double t) { return (t - 1.0) * (t - 1.0); }

double y_closed_form_zero(double t) { return -2.0 / 3.0 * t * t * t + 3.0 * t * t - 4.0 * t + 5.0 / 3.0; }

std::vector<OdeState> y_gamma_path(const GammaFn& gamma, double t, double rk4_dt) {
    if (!(rk4_dt > 0.0)) throw ConfigError("rk4_dt must be positive");
    std::vector<OdeState> path{{1.0, 0.0}};
    if (t <= 1.0) return path;
    const int steps = int(std::ceil((t - 1.0) / rk4_dt - 1e-9));
    const double dt = (t - 1.0) / steps;
    double y = 0.0;
    for (int s = 0; s < steps; ++s) {
        const double ts = 1.0 + s * dt;
        const double g = gamma(ts);
        if (!(g >= 0.0 && g <= 1.0)) {
            std::ostringstream os;
            os << "gamma(" << ts << ") = " << g << " lies outside [0,1]";
            throw ConfigError(os.str());
        }
        auto f = [g](double tt, double yy) { return Example32Spec::c1(tt) + 2.0 * g * yy; };
        const double k1 = f(ts, y);
        const double k2 = f(ts + 0.5 * dt, y + 0.5 * dt * k1);
        const double k3 = f(ts + 0.5 * dt, y + 0.5 * dt * k2);
        const double k4 = f(ts + dt, y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        path.push_back({1.0 + (s + 1) * dt, y});
    }
    return path;
}

double y_gamma(const GammaFn& gamma, double t, double rk4_dt) { return y_gamma_path(gamma, t, rk4_dt).back().y; }

double exact_U(const GammaFn& gamma, double x, double t, double rk4_dt) {
    const double ax = std::abs(x);
    if (t <= 1.0) return Example32Spec::u0(ax - x1(t) + 1.0);
    const double y = y_gamma(gamma, t, rk4_dt);
    // u(., 1) = -|x|; the sup over |x - z| <= y flattens it to 0 on [-y, y].
    return ax <= y ? 0.0 : -(ax - y);
}

double radial_oracle(double c1_const, const std::function<double(double)>& kernel_total, double r0, double t,
                     double rk4_dt, double max_radius) {
    if (t <= 0.0) return r0;
    const int steps = int(std::ceil(t / rk4_dt - 1e-9));
    const double dt = t / steps;
    auto f = [&](double r) { return c1_const + kernel_total(r); };
    double r = r0;
    for (int s = 0; s < steps; ++s) {
        const double k1 = f(r);
        const double k2 = f(r + 0.5 * dt * k1);
        const double k3 = f(r + 0.5 * dt * k2);
        const double k4 = f(r + dt * k3);
        r += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(r) || r > max_radius) {
            std::ostringstream os;
            os << "radial front blows up before t = " << t << " (radius " << r << " at t = " << (s + 1) * dt << ")";
            throw NumericalError(os.str());
        }
    }
    return r;
}

}  // namespace nle
