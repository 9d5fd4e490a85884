#pragma once

// The interaction kernel c0, the external velocity c1, and the nonlocal
// velocity fields built from them:
//
//   cbar(x,t)   = (c0(.,t) * chi(.,t))(x) + c1(x,t)
//   c+[u](x,t)  = c1(x,t) + (c0(.,t) * 1{u(.,t) >= u(x,t)})(x)
//   c-[u](x,t)  = c1(x,t) + (c0(.,t) * 1{u(.,t) >  u(x,t)})(x)
//
// Convolutions are discrete stencils: kernel samples at node offsets are
// multiplied by h^dim and snapped to multiples of 2^-36. With the snapped
// weights every partial sum of the direct backend is exact, so sums over a
// set do not depend on insertion order, and FFT convolutions of indicators
// can be rounded back onto the exact quantum.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nle/grid_field.hpp"

namespace nle {

/// Quantum used for kernel weights.
inline constexpr double kWeightQuantum = 0x1p-36;

struct KernelFrame {
    double t_start = 0.0;
    std::vector<double> samples;  // c0 at offsets, (2R+1)^dim row-major
    std::vector<double> weights;  // snapped h^dim * c0
};

class KernelSpec {
public:
    KernelSpec() = default;

    static KernelSpec from_function(int dim, double h, double radius, const std::function<double(const Point&)>& c0);
    static KernelSpec zero(int dim, double h);
    static KernelSpec box(int dim, double h, double radius, double height = 1.0);
    static KernelSpec gaussian_truncated(int dim, double h, double sigma, double radius, double amplitude = 1.0);
    static KernelSpec cone(int dim, double h, double radius, double height = 1.0);
    /// Kernel from a sampled field centred on its grid origin; spacing is taken from the field.
    static KernelSpec from_field(const ScalarField& samples);

    /// Adds a frame active from t_start on (piecewise constant in time).
    void add_frame(double t_start, const std::function<double(const Point&)>& c0);

    int dim() const { return dim_; }
    double h() const { return h_; }
    int radius_cells() const { return radius_cells_; }
    int width() const { return 2 * radius_cells_ + 1; }
    bool time_dependent() const { return frames_.size() > 1; }
    const std::vector<KernelFrame>& frames() const { return frames_; }
    std::size_t frame_index(double t) const;
    const KernelFrame& frame_at(double t) const { return frames_[frame_index(t)]; }

    double M0() const { return M0_; }  // sup_t sum |c0| h^dim
    double L0() const { return L0_; }  // sup_t sum |D c0| h^dim
    double m0() const { return m0_; }  // sup |c0|
    std::optional<double> N0;          // metadata only

    bool nonnegative() const;
    bool is_zero() const;

    /// Positive part max(c0, 0) (positive = true) or negative part max(-c0, 0).
    KernelSpec part(bool positive) const;

    /// Kernel samples as a field on a centred grid (snapshot export).
    ScalarField as_field(double t = 0.0) const;

private:
    void recompute_constants();

    int dim_ = 1;
    double h_ = 1.0;
    int radius_cells_ = 0;
    std::vector<KernelFrame> frames_;
    double M0_ = 0.0, L0_ = 0.0, m0_ = 0.0;
};

struct ExternalVelocity {
    std::function<double(const Point&, double)> eval;
    double M1 = 0.0;
    double L1 = 0.0;
    std::optional<double> N1;
    /// True when eval ignores x (lets solvers skip per-node sampling).
    bool spatially_constant = false;

    static ExternalVelocity constant(double value);
    static ExternalVelocity of_time(std::function<double(double)> f, double M1);
    static ExternalVelocity of_space_time(std::function<double(const Point&, double)> f, double M1, double L1);

    ScalarField sample(const Grid& grid, double t) const;
    /// Max |c1| over grid nodes and the given times, to spot-check M1.
    double observed_sup(const Grid& grid, std::span<const double> times) const;
};

enum class ConvolutionBackend { direct, fft };
enum class SlepcevSign { plus, minus };

struct SlepcevMode {
    enum class Kind { exact, binned } kind = Kind::exact;
    int bins = 64;
    static SlepcevMode exact() { return {}; }
    static SlepcevMode binned(int b) { return {Kind::binned, b}; }
};

/// Nonzero entries of a kernel frame as grid offsets.
struct KernelTap {
    int di = 0, dj = 0;
    double w = 0.0;
};

/// Reusable convolution engine for one kernel on one grid. Owns its FFT
/// plans and scratch; not safe to share between threads.
class Convolver {
public:
    Convolver(const KernelSpec& kernel, const Grid& grid, std::optional<int> fft_size = std::nullopt);
    ~Convolver();
    Convolver(Convolver&&) noexcept;
    Convolver& operator=(Convolver&&) noexcept;
    Convolver(const Convolver&) = delete;
    Convolver& operator=(const Convolver&) = delete;

    const Grid& grid() const { return grid_; }
    const KernelSpec& kernel() const { return *kernel_; }
    int fft_size() const { return pad_; }

    /// h^dim-weighted discrete convolution of `occupancy` with c0(., t).
    std::vector<double> convolve(std::span<const double> occupancy, double t, ConvolutionBackend backend);

    /// Convolution of a 0/1 field (or of fractions k/Q with quantum
    /// kWeightQuantum/Q for a power of two Q), rounded onto `quantum` so the
    /// result equals the exact direct sum.
    std::vector<double> convolve_indicator(std::span<const double> indicator, double t,
                                           double quantum = kWeightQuantum);

    /// Taps of the frame active at time t.
    const std::vector<KernelTap>& taps(double t) const;

    /// F(x) = sum of w(x - y) over nodes y with u(y) >= q(x) (inclusive) or
    /// u(y) > q(x). Exact by cumulative insertion in decreasing level order.
    std::vector<double> level_sums(std::span<const double> u, std::span<const double> q, bool inclusive,
                                   double t) const;

private:
    struct FftState;

    std::vector<double> convolve_direct(std::span<const double> occ, const std::vector<KernelTap>& taps) const;
    std::vector<double> convolve_fft(std::span<const double> occ, std::size_t frame);

    const KernelSpec* kernel_;
    Grid grid_;
    int pad_ = 0;
    std::vector<std::vector<KernelTap>> taps_;
    std::unique_ptr<FftState> fft_;
};

ScalarField convolve(const KernelSpec& kernel, const OccupancyField& occ, double t, ConvolutionBackend backend);

ScalarField assemble_cbar(const KernelSpec& kernel, const ExternalVelocity& c1, const OccupancyField& occ, double t,
                          ConvolutionBackend backend = ConvolutionBackend::fft);

ScalarField slepcev_velocity(const KernelSpec& kernel, const ExternalVelocity& c1, const ScalarField& u, double t,
                             SlepcevSign sign, SlepcevMode mode = SlepcevMode::exact());

/// Level thresholds used by binned mode: the distinct values of u when there
/// are at most `bins` of them, otherwise `bins` uniform levels on [min u, max u].
std::vector<double> binned_thresholds(std::span<const double> u, int bins);

/// Pointwise bound on |binned - exact|: m0 h^dim times the most populated
/// half-open threshold bin.
double binned_error_bound(const KernelSpec& kernel, const ScalarField& u, int bins);

/// The L1 bound of the kernel (M0) checked against |c0 * chi| for testing.
double kernel_l1(const KernelSpec& kernel, double t);

}  // namespace nle
