#include "nle/kernel_velocity.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace nle {

namespace {

double snap(double w) { return std::nearbyint(w / kWeightQuantum) * kWeightQuantum; }

int next_pow2(int v) {
    int p = 1;
    while (p < v) p <<= 1;
    return p;
}

}  // namespace

// ---------------------------------------------------------------- KernelSpec

KernelSpec KernelSpec::from_function(int dim, double h, double radius, const std::function<double(const Point&)>& c0) {
    if (dim != 1 && dim != 2) throw ConfigError("kernel dim must be 1 or 2");
    if (!(h > 0.0)) throw ConfigError("kernel spacing must be positive");
    if (radius < 0.0) throw ConfigError("kernel radius must be nonnegative");
    KernelSpec k;
    k.dim_ = dim;
    k.h_ = h;
    k.radius_cells_ = int(std::floor(radius / h + 1e-9));
    k.frames_.clear();
    k.add_frame(0.0, [radius, &c0](const Point& p) {
        return std::hypot(p[0], p[1]) <= radius * (1.0 + 1e-12) ? c0(p) : 0.0;
    });
    return k;
}

KernelSpec KernelSpec::zero(int dim, double h) {
    return from_function(dim, h, 0.0, [](const Point&) { return 0.0; });
}

KernelSpec KernelSpec::box(int dim, double h, double radius, double height) {
    return from_function(dim, h, radius, [height](const Point&) { return height; });
}

KernelSpec KernelSpec::gaussian_truncated(int dim, double h, double sigma, double radius, double amplitude) {
    if (!(sigma > 0.0)) throw ConfigError("gaussian kernel sigma must be positive");
    return from_function(dim, h, radius, [=](const Point& p) {
        const double r2 = p[0] * p[0] + p[1] * p[1];
        return amplitude * std::exp(-0.5 * r2 / (sigma * sigma));
    });
}

KernelSpec KernelSpec::cone(int dim, double h, double radius, double height) {
    if (!(radius > 0.0)) throw ConfigError("cone kernel radius must be positive");
    return from_function(dim, h, radius,
                         [=](const Point& p) { return height * std::max(0.0, 1.0 - std::hypot(p[0], p[1]) / radius); });
}

KernelSpec KernelSpec::from_field(const ScalarField& samples) {
    const Grid& g = samples.grid;
    if (g.n() % 2 == 0) throw ConfigError("kernel field must have an odd node count per axis");
    KernelSpec k;
    k.dim_ = g.dim();
    k.h_ = g.h();
    k.radius_cells_ = (g.n() - 1) / 2;
    KernelFrame f;
    f.samples = samples.values;
    k.frames_.push_back(std::move(f));
    k.recompute_constants();
    return k;
}

void KernelSpec::add_frame(double t_start, const std::function<double(const Point&)>& c0) {
    if (!frames_.empty() && t_start <= frames_.back().t_start)
        throw ConfigError("kernel frames must have increasing start times");
    const int w = width();
    const int R = radius_cells_;
    KernelFrame f;
    f.t_start = t_start;
    f.samples.assign(dim_ == 1 ? std::size_t(w) : std::size_t(w) * std::size_t(w), 0.0);
    if (dim_ == 1) {
        for (int i = -R; i <= R; ++i) f.samples[std::size_t(i + R)] = c0({i * h_, 0.0});
    } else {
        for (int j = -R; j <= R; ++j)
            for (int i = -R; i <= R; ++i) f.samples[std::size_t(j + R) * w + std::size_t(i + R)] = c0({i * h_, j * h_});
    }
    frames_.push_back(std::move(f));
    recompute_constants();
}

void KernelSpec::recompute_constants() {
    const double cell = dim_ == 1 ? h_ : h_ * h_;
    const int w = width();
    M0_ = L0_ = m0_ = 0.0;
    for (auto& f : frames_) {
        f.weights.resize(f.samples.size());
        double l1 = 0.0, tv = 0.0;
        for (std::size_t k = 0; k < f.samples.size(); ++k) {
            f.weights[k] = snap(f.samples[k] * cell);
            l1 += std::abs(f.samples[k]) * cell;
            m0_ = std::max(m0_, std::abs(f.samples[k]));
        }
        // |D c0|_L1 from forward differences, samples outside the stencil are 0.
        auto at = [&](int i, int j) -> double {
            if (i < 0 || i >= w || j < 0 || j >= (dim_ == 1 ? 1 : w)) return 0.0;
            return f.samples[std::size_t(j) * w + std::size_t(i)];
        };
        const int rows = dim_ == 1 ? 1 : w;
        for (int j = -1; j < rows; ++j)
            for (int i = -1; i < w; ++i) {
                const double c = at(i, j);
                const double dx = (at(i + 1, j) - c) / h_;
                const double dy = dim_ == 1 ? 0.0 : (at(i, j + 1) - c) / h_;
                tv += std::hypot(dx, dy) * cell;
            }
        M0_ = std::max(M0_, l1);
        L0_ = std::max(L0_, tv);
    }
}

std::size_t KernelSpec::frame_index(double t) const {
    std::size_t idx = 0;
    for (std::size_t k = 1; k < frames_.size(); ++k)
        if (frames_[k].t_start <= t) idx = k;
    return idx;
}

bool KernelSpec::nonnegative() const {
    for (const auto& f : frames_)
        for (double s : f.samples)
            if (s < 0.0) return false;
    return true;
}

bool KernelSpec::is_zero() const {
    for (const auto& f : frames_)
        for (double w : f.weights)
            if (w != 0.0) return false;
    return true;
}

KernelSpec KernelSpec::part(bool positive) const {
    KernelSpec k = *this;
    k.N0.reset();
    for (auto& f : k.frames_)
        for (double& s : f.samples) s = positive ? std::max(s, 0.0) : std::max(-s, 0.0);
    k.recompute_constants();
    return k;
}

ScalarField KernelSpec::as_field(double t) const {
    const Grid g = Grid::make(dim_, std::max(1, radius_cells_) * h_, 2 * std::max(1, radius_cells_) + 1);
    ScalarField out(g, 0.0, t);
    const auto& f = frame_at(t);
    if (radius_cells_ >= 1) {
        out.values = f.samples;
    } else if (dim_ == 1) {
        out.values[1] = f.samples[0];
    } else {
        out.values[4] = f.samples[0];
    }
    return out;
}

double kernel_l1(const KernelSpec& kernel, double t) {
    double s = 0.0;
    for (double w : kernel.frame_at(t).weights) s += std::abs(w);
    return s;
}

// ---------------------------------------------------------- ExternalVelocity

ExternalVelocity ExternalVelocity::constant(double value) {
    ExternalVelocity v;
    v.eval = [value](const Point&, double) { return value; };
    v.M1 = std::abs(value);
    v.L1 = 0.0;
    v.N1 = 0.0;
    v.spatially_constant = true;
    return v;
}

ExternalVelocity ExternalVelocity::of_time(std::function<double(double)> f, double M1) {
    ExternalVelocity v;
    v.eval = [f = std::move(f)](const Point&, double t) { return f(t); };
    v.M1 = M1;
    v.L1 = 0.0;
    v.N1 = 0.0;
    v.spatially_constant = true;
    return v;
}

ExternalVelocity ExternalVelocity::of_space_time(std::function<double(const Point&, double)> f, double M1, double L1) {
    ExternalVelocity v;
    v.eval = std::move(f);
    v.M1 = M1;
    v.L1 = L1;
    return v;
}

ScalarField ExternalVelocity::sample(const Grid& grid, double t) const {
    if (spatially_constant) return ScalarField(grid, eval(grid.origin(), t), t);
    ScalarField out(grid, 0.0, t);
    for (std::size_t k = 0; k < grid.size(); ++k) out.values[k] = eval(grid.position(k), t);
    return out;
}

double ExternalVelocity::observed_sup(const Grid& grid, std::span<const double> times) const {
    double m = 0.0;
    for (double t : times) {
        const ScalarField s = sample(grid, t);
        for (double v : s.values) m = std::max(m, std::abs(v));
    }
    return m;
}

// ------------------------------------------------------------------ Convolver

struct Convolver::FftState {
    int dim = 1;
    int pad = 0;
    std::size_t real_size = 0;
    std::size_t complex_size = 0;
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    // Kernel spectra per frame, computed lazily.
    std::vector<std::vector<std::array<double, 2>>> kernel_spectra;

    FftState(int d, int p) : dim(d), pad(p) {
        real_size = d == 1 ? std::size_t(p) : std::size_t(p) * std::size_t(p);
        complex_size = d == 1 ? std::size_t(p / 2 + 1) : std::size_t(p) * std::size_t(p / 2 + 1);
        real = fftw_alloc_real(real_size);
        spec = fftw_alloc_complex(complex_size);
        if (d == 1) {
            forward = fftw_plan_dft_r2c_1d(p, real, spec, FFTW_ESTIMATE);
            backward = fftw_plan_dft_c2r_1d(p, spec, real, FFTW_ESTIMATE);
        } else {
            forward = fftw_plan_dft_r2c_2d(p, p, real, spec, FFTW_ESTIMATE);
            backward = fftw_plan_dft_c2r_2d(p, p, spec, real, FFTW_ESTIMATE);
        }
    }
    ~FftState() {
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
        fftw_free(real);
        fftw_free(spec);
    }
    FftState(const FftState&) = delete;
    FftState& operator=(const FftState&) = delete;
};

Convolver::Convolver(const KernelSpec& kernel, const Grid& grid, std::optional<int> fft_size)
    : kernel_(&kernel), grid_(grid) {
    if (kernel.dim() != grid.dim()) throw GridMismatch("kernel and grid dimensions differ");
    if (std::abs(kernel.h() - grid.h()) > 1e-12 * grid.h())
        throw GridMismatch("kernel spacing " + std::to_string(kernel.h()) + " differs from grid spacing " +
                           std::to_string(grid.h()));
    const int R = kernel.radius_cells();
    const int w = kernel.width();
    pad_ = fft_size ? *fft_size : next_pow2(grid.n() + w);
    if (pad_ < grid.n() + R)
        throw ConfigError("kernel wider than padded transform: need fft size >= " + std::to_string(grid.n() + R) +
                          ", got " + std::to_string(pad_));
    for (const auto& f : kernel.frames()) {
        std::vector<KernelTap> taps;
        if (grid.dim() == 1) {
            for (int i = -R; i <= R; ++i) {
                const double wt = f.weights[std::size_t(i + R)];
                if (wt != 0.0) taps.push_back({i, 0, wt});
            }
        } else {
            for (int j = -R; j <= R; ++j)
                for (int i = -R; i <= R; ++i) {
                    const double wt = f.weights[std::size_t(j + R) * w + std::size_t(i + R)];
                    if (wt != 0.0) taps.push_back({i, j, wt});
                }
        }
        taps_.push_back(std::move(taps));
    }
}

Convolver::~Convolver() = default;
Convolver::Convolver(Convolver&&) noexcept = default;
Convolver& Convolver::operator=(Convolver&&) noexcept = default;

const std::vector<KernelTap>& Convolver::taps(double t) const { return taps_[kernel_->frame_index(t)]; }

std::vector<double> Convolver::convolve(std::span<const double> occ, double t, ConvolutionBackend backend) {
    if (occ.size() != grid_.size()) throw GridMismatch("occupancy size does not match grid");
    const std::size_t frame = kernel_->frame_index(t);
    if (taps_[frame].empty()) return std::vector<double>(grid_.size(), 0.0);
    return backend == ConvolutionBackend::direct ? convolve_direct(occ, taps_[frame]) : convolve_fft(occ, frame);
}

std::vector<double> Convolver::convolve_indicator(std::span<const double> indicator, double t, double quantum) {
    auto out = convolve(indicator, t, ConvolutionBackend::fft);
    for (double& v : out) v = std::nearbyint(v / quantum) * quantum;
    return out;
}

std::vector<double> Convolver::convolve_direct(std::span<const double> occ, const std::vector<KernelTap>& taps) const {
    const int n = grid_.n();
    std::vector<double> out(grid_.size(), 0.0);
    if (grid_.dim() == 1) {
        for (int x = 0; x < n; ++x) {
            double s = 0.0;
            for (const auto& tap : taps) {
                const int y = x - tap.di;
                if (y >= 0 && y < n) s += tap.w * occ[std::size_t(y)];
            }
            out[std::size_t(x)] = s;
        }
        return out;
    }
    for (int xj = 0; xj < n; ++xj)
        for (int xi = 0; xi < n; ++xi) {
            double s = 0.0;
            for (const auto& tap : taps) {
                const int yi = xi - tap.di, yj = xj - tap.dj;
                if (yi >= 0 && yi < n && yj >= 0 && yj < n) s += tap.w * occ[grid_.index(yi, yj)];
            }
            out[grid_.index(xi, xj)] = s;
        }
    return out;
}

std::vector<double> Convolver::convolve_fft(std::span<const double> occ, std::size_t frame) {
    const int n = grid_.n();
    const int P = pad_;
    const int dim = grid_.dim();
    if (!fft_) fft_ = std::make_unique<FftState>(dim, P);
    auto& st = *fft_;
    if (st.kernel_spectra.size() < taps_.size()) st.kernel_spectra.resize(taps_.size());
    auto& kspec = st.kernel_spectra[frame];
    if (kspec.empty()) {
        std::fill(st.real, st.real + st.real_size, 0.0);
        for (const auto& tap : taps_[frame]) {
            const int i = (tap.di % P + P) % P;
            const int j = (tap.dj % P + P) % P;
            st.real[dim == 1 ? std::size_t(i) : std::size_t(j) * P + std::size_t(i)] += tap.w;
        }
        fftw_execute(st.forward);
        kspec.resize(st.complex_size);
        for (std::size_t k = 0; k < st.complex_size; ++k) kspec[k] = {st.spec[k][0], st.spec[k][1]};
    }
    std::fill(st.real, st.real + st.real_size, 0.0);
    if (dim == 1) {
        std::copy(occ.begin(), occ.end(), st.real);
    } else {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) st.real[std::size_t(j) * P + std::size_t(i)] = occ[grid_.index(i, j)];
    }
    fftw_execute(st.forward);
    for (std::size_t k = 0; k < st.complex_size; ++k) {
        const double a = st.spec[k][0], b = st.spec[k][1];
        const double c = kspec[k][0], d = kspec[k][1];
        st.spec[k][0] = a * c - b * d;
        st.spec[k][1] = a * d + b * c;
    }
    fftw_execute(st.backward);
    const double norm = 1.0 / double(st.real_size);
    std::vector<double> out(grid_.size());
    if (dim == 1) {
        for (int i = 0; i < n; ++i) out[std::size_t(i)] = st.real[i] * norm;
    } else {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) out[grid_.index(i, j)] = st.real[std::size_t(j) * P + std::size_t(i)] * norm;
    }
    return out;
}

std::vector<double> Convolver::level_sums(std::span<const double> u, std::span<const double> q, bool inclusive,
                                          double t) const {
    const std::size_t N = grid_.size();
    if (u.size() != N || q.size() != N) throw GridMismatch("level_sums: field size does not match grid");
    const auto& tp = taps(t);
    std::vector<std::size_t> nodes(N), queries(N);
    std::iota(nodes.begin(), nodes.end(), std::size_t{0});
    std::iota(queries.begin(), queries.end(), std::size_t{0});
    std::stable_sort(nodes.begin(), nodes.end(), [&](std::size_t a, std::size_t b) { return u[a] > u[b]; });
    std::stable_sort(queries.begin(), queries.end(), [&](std::size_t a, std::size_t b) { return q[a] > q[b]; });

    std::vector<double> acc(N, 0.0), out(N, 0.0);
    const int n = grid_.n();
    const bool one_d = grid_.dim() == 1;
    auto insert = [&](std::size_t y) {
        if (one_d) {
            const int yi = int(y);
            for (const auto& tap : tp) {
                const int x = yi + tap.di;
                if (x >= 0 && x < n) acc[std::size_t(x)] += tap.w;
            }
        } else {
            const int yi = int(y % std::size_t(n)), yj = int(y / std::size_t(n));
            for (const auto& tap : tp) {
                const int xi = yi + tap.di, xj = yj + tap.dj;
                if (xi >= 0 && xi < n && xj >= 0 && xj < n) acc[grid_.index(xi, xj)] += tap.w;
            }
        }
    };
    std::size_t p = 0;
    for (std::size_t x : queries) {
        const double level = q[x];
        while (p < N && (inclusive ? u[nodes[p]] >= level : u[nodes[p]] > level)) insert(nodes[p++]);
        out[x] = acc[x];
    }
    return out;
}

// ---------------------------------------------------------------- operations

ScalarField convolve(const KernelSpec& kernel, const OccupancyField& occ, double t, ConvolutionBackend backend) {
    Convolver conv(kernel, occ.grid);
    return ScalarField(occ.grid, conv.convolve(occ.values, t, backend), t);
}

ScalarField assemble_cbar(const KernelSpec& kernel, const ExternalVelocity& c1, const OccupancyField& occ, double t,
                          ConvolutionBackend backend) {
    ScalarField out = convolve(kernel, occ, t, backend);
    const ScalarField ext = c1.sample(occ.grid, t);
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += ext.values[k];
    return out;
}

std::vector<double> binned_thresholds(std::span<const double> u, int bins) {
    if (bins < 2) throw ConfigError("binned mode needs at least 2 bins, got " + std::to_string(bins));
    std::set<double> distinct;
    for (double v : u) {
        distinct.insert(v);
        if (distinct.size() > std::size_t(bins)) break;
    }
    if (distinct.size() <= std::size_t(bins)) return {distinct.begin(), distinct.end()};
    const auto [lo_it, hi_it] = std::minmax_element(u.begin(), u.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> th(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) th[std::size_t(b)] = lo + (hi - lo) * double(b) / double(bins - 1);
    th.back() = hi;
    return th;
}

double binned_error_bound(const KernelSpec& kernel, const ScalarField& u, int bins) {
    const auto th = binned_thresholds(u.values, bins);
    std::vector<std::size_t> counts(th.size(), 0);
    for (double v : u.values) {
        const auto it = std::upper_bound(th.begin(), th.end(), v);
        const std::size_t b = std::size_t(std::distance(th.begin(), it)) - 1;
        // Nodes exactly on a threshold are resolved exactly.
        if (th[b] != v) ++counts[b];
    }
    const std::size_t worst = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
    return kernel.m0() * u.grid.cell_measure() * double(worst);
}

ScalarField slepcev_velocity(const KernelSpec& kernel, const ExternalVelocity& c1, const ScalarField& u, double t,
                             SlepcevSign sign, SlepcevMode mode) {
    Convolver conv(kernel, u.grid);
    const ScalarField ext = c1.sample(u.grid, t);
    ScalarField out(u.grid, 0.0, t);
    const bool plus = sign == SlepcevSign::plus;
    if (mode.kind == SlepcevMode::Kind::exact) {
        const auto sums = conv.level_sums(u.values, u.values, plus, t);
        for (std::size_t k = 0; k < sums.size(); ++k) out.values[k] = ext.values[k] + sums[k];
        return out;
    }
    const auto th = binned_thresholds(u.values, mode.bins);
    std::vector<std::vector<double>> fields(th.size());
    std::vector<double> ind(u.size());
    for (std::size_t b = 0; b < th.size(); ++b) {
        for (std::size_t k = 0; k < u.size(); ++k) ind[k] = u.values[k] >= th[b] ? 1.0 : 0.0;
        fields[b] = conv.convolve_indicator(ind, t);
    }
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double v = u.values[k];
        double s = 0.0;
        if (plus) {
            // largest threshold <= v
            const auto it = std::upper_bound(th.begin(), th.end(), v);
            if (it != th.begin()) s = fields[std::size_t(std::distance(th.begin(), it)) - 1][k];
        } else {
            // smallest threshold > v
            const auto it = std::upper_bound(th.begin(), th.end(), v);
            if (it != th.end()) s = fields[std::size_t(std::distance(th.begin(), it))][k];
        }
        out.values[k] = ext.values[k] + s;
    }
    return out;
}

}  // namespace nle
