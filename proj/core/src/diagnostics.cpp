#include "nle/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace nle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared distance transform (lower envelope of parabolas).
void sdt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
    const int n = int(f.size());
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (f[v[k]] == kInf) {
            v[k] = q;
            continue;
        }
        double s;
        while (true) {
            s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * (q - v[k]));
            if (s <= z[k] && k > 0) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double diff = q - v[k];
        d[q] = f[v[k]] == kInf ? kInf : diff * diff + f[v[k]];
    }
}

// Upwind magnitude: per axis the largest drop towards a neighbour.
double upwind_gradient(const ScalarField& u, std::size_t k) {
    const Stencil s = stencil_at(u, k);
    return s.erosion / u.grid.h();
}

// Per axis the largest one-sided difference in magnitude.
double max_one_sided_gradient(const ScalarField& u, std::size_t k) {
    const Grid& g = u.grid;
    const int n = g.n();
    const double c = u.values[k];
    auto axis = [&](std::size_t stride, int i) {
        double m = 0.0;
        if (i > 0) m = std::max(m, std::abs(c - u.values[k - stride]));
        if (i + 1 < n) m = std::max(m, std::abs(u.values[k + stride] - c));
        return m;
    };
    double s2 = 0.0;
    if (g.dim() == 1) {
        const double a = axis(1, int(k));
        s2 = a * a;
    } else {
        const double a = axis(1, int(k % std::size_t(n)));
        const double b = axis(std::size_t(n), int(k / std::size_t(n)));
        s2 = a * a + b * b;
    }
    return std::sqrt(s2) / g.h();
}

bool is_boundary_node(const IndicatorField& ind, std::size_t k) {
    if (!ind.values[k]) return false;
    const Grid& g = ind.grid;
    const int n = g.n();
    auto outside = [&](std::size_t m) { return !ind.values[m]; };
    if (g.dim() == 1) {
        const int i = int(k);
        return (i > 0 && outside(k - 1)) || (i + 1 < n && outside(k + 1));
    }
    const int i = int(k % std::size_t(n)), j = int(k / std::size_t(n));
    const std::size_t sn = std::size_t(n);
    return (i > 0 && outside(k - 1)) || (i + 1 < n && outside(k + 1)) || (j > 0 && outside(k - sn)) ||
           (j + 1 < n && outside(k + sn));
}

double node_distance(const Grid& g, std::size_t a, std::size_t b) {
    const Point pa = g.position(a), pb = g.position(b);
    return std::hypot(pa[0] - pb[0], pa[1] - pb[1]);
}

}  // namespace

// The collar reset leaves a jump at the box faces that says nothing about the front.
double default_band(const ScalarField& u) { return u.grid.h() * std::max(discrete_lipschitz(u, 1), 1e-12); }

double fattening_measure(const ScalarField& u, double band) {
    std::size_t c = 0;
    for (double v : u.values) c += std::abs(v) <= band;
    return u.grid.cell_measure() * double(c);
}

double perimeter(const IndicatorField& ind) {
    const Grid& g = ind.grid;
    const int n = g.n();
    if (g.dim() == 1) {
        int c = 0;
        for (int i = 0; i + 1 < n; ++i) c += ind.values[i] != ind.values[i + 1];
        return double(c);
    }
    const double h = g.h();
    const double diag = h / std::sqrt(2.0);
    double len = 0.0;
    for (int j = 0; j + 1 < n; ++j)
        for (int i = 0; i + 1 < n; ++i) {
            const int a = ind.values[g.index(i, j)], b = ind.values[g.index(i + 1, j)];
            const int c = ind.values[g.index(i + 1, j + 1)], d = ind.values[g.index(i, j + 1)];
            const int inside = a + b + c + d;
            if (inside == 0 || inside == 4) continue;
            if (inside == 1 || inside == 3) {
                len += diag;
            } else if (a == c) {
                len += 2.0 * diag;  // saddle: two corner cuts
            } else {
                len += h;
            }
        }
    return len;
}

std::vector<double> distance_to_complement(const IndicatorField& ind) {
    const Grid& g = ind.grid;
    const int n = g.n(), m = n + 2;  // padded with one outside ring
    const int dim = g.dim();
    const std::size_t total = dim == 1 ? std::size_t(m) : std::size_t(m) * std::size_t(m);
    std::vector<double> f(total, 0.0);
    auto inner = [&](int pi, int pj) -> std::size_t {
        return dim == 1 ? std::size_t(pi - 1) : g.index(pi - 1, pj - 1);
    };
    if (dim == 1) {
        for (int p = 1; p <= n; ++p) f[std::size_t(p)] = ind.values[inner(p, 0)] ? kInf : 0.0;
    } else {
        for (int pj = 1; pj <= n; ++pj)
            for (int pi = 1; pi <= n; ++pi)
                f[std::size_t(pj) * m + pi] = ind.values[inner(pi, pj)] ? kInf : 0.0;
    }
    const auto um = static_cast<std::size_t>(m);
    std::vector<double> line(um), out(um), z(um + 1);
    std::vector<int> v(um);
    if (dim == 1) {
        sdt_1d(f, out, v, z);
        f = out;
    } else {
        for (int pj = 0; pj < m; ++pj) {
            for (int pi = 0; pi < m; ++pi) line[pi] = f[std::size_t(pj) * m + pi];
            sdt_1d(line, out, v, z);
            for (int pi = 0; pi < m; ++pi) f[std::size_t(pj) * m + pi] = out[pi];
        }
        for (int pi = 0; pi < m; ++pi) {
            for (int pj = 0; pj < m; ++pj) line[pj] = f[std::size_t(pj) * m + pi];
            sdt_1d(line, out, v, z);
            for (int pj = 0; pj < m; ++pj) f[std::size_t(pj) * m + pi] = out[pj];
        }
    }
    std::vector<double> d(g.size(), 0.0);
    const double h = g.h();
    if (dim == 1) {
        for (int p = 1; p <= n; ++p) d[inner(p, 0)] = std::sqrt(f[std::size_t(p)]) * h;
    } else {
        for (int pj = 1; pj <= n; ++pj)
            for (int pi = 1; pi <= n; ++pi) d[inner(pi, pj)] = std::sqrt(f[std::size_t(pj) * m + pi]) * h;
    }
    return d;
}

double inradius(const IndicatorField& ind) {
    if (ind.count() == 0) throw NumericalError("inradius of an empty set");
    const auto d = distance_to_complement(ind);
    return *std::max_element(d.begin(), d.end()) - 0.5 * ind.grid.h();
}

double interior_ball_radius(const IndicatorField& ind) {
    if (ind.count() == 0) throw NumericalError("interior ball radius of an empty set");
    const Grid& g = ind.grid;
    const auto d = distance_to_complement(ind);
    std::vector<std::size_t> centres;
    for (std::size_t k = 0; k < d.size(); ++k)
        if (ind.values[k]) centres.push_back(k);
    std::stable_sort(centres.begin(), centres.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
    double r = d[centres.front()];
    for (std::size_t b = 0; b < d.size(); ++b) {
        if (!is_boundary_node(ind, b)) continue;
        double best = 0.0;
        // The largest covering ball is the first hit in decreasing-radius order.
        for (std::size_t y : centres) {
            if (d[y] <= best) break;
            if (node_distance(g, b, y) <= d[y] + 1e-12 * g.h()) {
                best = d[y];
                break;
            }
        }
        r = std::min(r, best);
    }
    return std::max(0.0, r - 0.5 * g.h());
}

ArrivalTime arrival_time(const Trajectory& traj) {
    if (traj.frames.empty()) throw NumericalError("arrival_time needs a nonempty trajectory");
    ArrivalTime out{ScalarField(traj.frames.front().grid, kInf, 0.0), false};
    for (const auto& f : traj.frames) {
        for (std::size_t k = 0; k < f.size(); ++k) {
            const bool in = f.values[k] >= 0.0;
            if (in && out.w.values[k] == kInf) out.w.values[k] = f.time;
            if (!in && out.w.values[k] != kInf) out.non_monotone = true;
        }
    }
    return out;
}

double CoareaCheck::relative_gap() const {
    const double scale = std::max(std::abs(perimeter_integral), std::abs(gradient_integral));
    return scale > 0.0 ? std::abs(perimeter_integral - gradient_integral) / scale : 0.0;
}

CoareaCheck coarea_check(const ScalarField& w, double t, int samples) {
    CoareaCheck c;
    const double ds = t / samples;
    for (int s = 0; s < samples; ++s) {
        const double level = (s + 0.5) * ds;
        IndicatorField ind(w.grid, 0);
        for (std::size_t k = 0; k < w.size(); ++k) ind.values[k] = w.values[k] <= level;
        c.perimeter_integral += perimeter(ind) * ds;
    }
    // Replace +inf by a large finite value so the upwind stencil stays finite;
    // only nodes with 0 < w <= t contribute.
    ScalarField wf = w;
    for (double& v : wf.values)
        if (!std::isfinite(v)) v = 2.0 * t + 1.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double v = w.values[k];
        if (v > 0.0 && v <= t) {
            c.gradient_integral += upwind_gradient(wf, k) * w.grid.cell_measure();
        }
    }
    return c;
}

LowerGradient lower_gradient_check(const ScalarField& u, double eta, double band) {
    LowerGradient r;
    r.min_value = kInf;
    for (std::size_t k = 0; k < u.size(); ++k)
        if (std::abs(u.values[k]) <= band)
            r.min_value = std::min(r.min_value, std::abs(u.values[k]) + max_one_sided_gradient(u, k));
    r.pass = r.min_value >= eta;
    return r;
}

std::vector<double> alpha_series(const Trajectory& a, const Trajectory& b) {
    if (a.frames.size() != b.frames.size()) throw GridMismatch("alpha_series: trajectories store different times");
    std::vector<double> out;
    double run = 0.0;
    for (std::size_t s = 0; s < a.frames.size(); ++s) {
        const double ta = a.frames[s].time, tb = b.frames[s].time;
        if (std::abs(ta - tb) > 1e-9 * std::max(1.0, std::abs(ta)))
            throw GridMismatch("alpha_series: stored times differ");
        run = std::max(run, sup_distance(a.frames[s], b.frames[s]));
        out.push_back(run);
    }
    return out;
}

void RunReport::write_csv(std::ostream& os) const {
    os << "time,fattening,perimeter,interior_ball,alpha,lgb_min\n";
    os.precision(12);
    for (std::size_t s = 0; s < times.size(); ++s) {
        os << times[s] << ',' << fattening[s] << ',' << perimeter[s] << ',' << interior_ball[s] << ',';
        if (s < alpha.size()) os << alpha[s];
        os << ',' << lgb_min[s] << '\n';
    }
}

RunReport build_report(const Trajectory& traj, const Trajectory* reference, double band) {
    RunReport r;
    for (const auto& f : traj.frames) {
        const double b = band > 0.0 ? band : default_band(f);
        const IndicatorField ind = superlevel_indicator(f, 0.0, false);
        r.times.push_back(f.time);
        r.fattening.push_back(fattening_measure(f, b));
        r.perimeter.push_back(perimeter(ind));
        r.interior_ball.push_back(ind.count() ? interior_ball_radius(ind) : 0.0);
        const double lg = lower_gradient_check(f, 0.0, b).min_value;
        r.lgb_min.push_back(std::isfinite(lg) ? lg : 0.0);
    }
    if (reference) r.alpha = alpha_series(traj, *reference);
    return r;
}

}  // namespace nle
