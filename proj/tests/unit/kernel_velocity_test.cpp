#include <doctest.h>

#include <cmath>
#include <random>

#include "nle/analytic_oracles.hpp"
#include "nle/diagnostics.hpp"
#include "nle/errors.hpp"
#include "nle/kernel_velocity.hpp"

using namespace nle;

namespace {

OccupancyField interval_occ(const Grid& g, double a, double b, double w = 1.0) {
    OccupancyField o(g, 0.0);
    for (int i = 0; i < g.n(); ++i)
        if (g.coord(0, i) >= a - 1e-12 && g.coord(0, i) <= b + 1e-12) o.values[std::size_t(i)] = w;
    return o;
}

KernelSpec random_kernel(std::mt19937& rng, int dim, double h, bool nonnegative) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double radius = 0.05 + 0.3 * U(rng);
    const double a = U(rng), b = U(rng), c = nonnegative ? 0.0 : U(rng);
    return KernelSpec::from_function(dim, h, radius, [=](const Point& p) {
        const double r = std::hypot(p[0], p[1]);
        return a + b * std::cos(7 * r) - c;
    });
}

OccupancyField random_occ(std::mt19937& rng, const Grid& g) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    OccupancyField o(g, 0.0);
    for (double& v : o.values) v = U(rng) < 0.4 ? 0.0 : U(rng);
    return o;
}

}  // namespace

TEST_CASE("box kernel overlap integrals") {
    const Grid g = Grid::make(1, 6.0, 1201);
    const KernelSpec k = KernelSpec::box(1, g.h(), 2.0);
    const OccupancyField occ = interval_occ(g, 0.0, 1.0);
    for (auto backend : {ConvolutionBackend::direct, ConvolutionBackend::fft}) {
        const ScalarField c = convolve(k, occ, 0.0, backend);
        CHECK(std::abs(c[600] - 1.0) <= 2 * g.h());  // x = 0
        CHECK(std::abs(c[900]) <= g.h() + 1e-12);    // x = 3
    }
}

TEST_CASE("a kernel wider than the set integrates the set") {
    const Grid g = Grid::make(2, 1.0, 41);
    const KernelSpec k = KernelSpec::box(2, g.h(), 4.0);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    IndicatorField ind(g, 0);
    for (auto& v : ind.values) v = U(rng) < 0.3;
    const ScalarField c = convolve(k, OccupancyField::from_indicator(ind), 0.0, ConvolutionBackend::fft);
    // Weights are snapped to kWeightQuantum, so the sum is exact up to one quantum per tap.
    const double slack = double(ind.count()) * kWeightQuantum;
    for (double v : c.values) CHECK(std::abs(v - lebesgue_measure(ind)) <= slack);
}

TEST_CASE("direct and FFT backends agree") {
    std::mt19937 rng(5);
    for (int dim : {1, 2}) {
        for (int trial = 0; trial < 6; ++trial) {
            const int n = dim == 1 ? 257 : 65 + 32 * (trial % 3);
            const Grid g = Grid::make(dim, 1.0, n);
            const KernelSpec k = random_kernel(rng, dim, g.h(), trial % 2);
            const OccupancyField occ = random_occ(rng, g);
            const ScalarField a = convolve(k, occ, 0.0, ConvolutionBackend::direct);
            const ScalarField b = convolve(k, occ, 0.0, ConvolutionBackend::fft);
            CHECK(sup_distance(a, b) <= 1e-10);
        }
    }
}

TEST_CASE("convolution is bounded by M0 and monotone in occupancy") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const Grid g = Grid::make(2, 1.0, 81);
    for (int trial = 0; trial < 5; ++trial) {
        const KernelSpec k = random_kernel(rng, 2, g.h(), true);
        const OccupancyField lo = random_occ(rng, g);
        OccupancyField hi = lo;
        for (double& v : hi.values) v = std::min(1.0, v + U(rng) * 0.5);
        const ScalarField a = convolve(k, lo, 0.0, ConvolutionBackend::fft);
        const ScalarField b = convolve(k, hi, 0.0, ConvolutionBackend::fft);
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(a[i] <= b[i] + 1e-12);
            CHECK(std::abs(b[i]) <= k.M0() + 1e-12);
        }
    }
}

TEST_CASE("cbar with trivial inputs is c1") {
    const Grid g = Grid::make(1, 2.0, 101);
    const ExternalVelocity c1 = ExternalVelocity::of_space_time([](const Point& p, double) { return p[0]; }, 2.0, 1.0);
    const ScalarField ref = c1.sample(g, 0.0);
    const KernelSpec k = KernelSpec::box(1, g.h(), 0.5);
    CHECK(sup_distance(assemble_cbar(k, c1, OccupancyField(g, 0.0), 0.0), ref) == 0.0);
    CHECK(sup_distance(assemble_cbar(KernelSpec::zero(1, g.h()), c1, interval_occ(g, -1, 1), 0.0), ref) == 0.0);
}

TEST_CASE("counterexample velocity is constant on the shrinking phase") {
    const Grid g = Grid::make(1, 4.0, 801);
    const KernelSpec k = KernelSpec::box(1, g.h(), 3.0);
    const ExternalVelocity c1 = ExternalVelocity::of_time(Example32Spec::c1, 0.5);
    for (double t : {0.25, 0.5, 0.75}) {
        const ScalarField c = assemble_cbar(k, c1, interval_occ(g, -x1(t), x1(t)), t);
        // The set occupies nodes |x| <= x1, i.e. 2 x1 / h + 1 cells.
        for (int i = 0; i < g.n(); ++i)
            if (std::abs(g.coord(0, i)) <= 1.0) CHECK(std::abs(c[i] - (Example32Spec::c1(t) + 2 * x1(t))) <= 2 * g.h());
    }
}

TEST_CASE("slepcev velocity") {
    const Grid g = Grid::make(1, 4.0, 401);
    const ExternalVelocity c1 = ExternalVelocity::constant(0.3);
    const KernelSpec k = KernelSpec::box(1, g.h(), 2.0);

    const ScalarField flat(g, 0.2);
    const ScalarField plus = slepcev_velocity(k, c1, flat, 0.0, SlepcevSign::plus);
    const ScalarField minus = slepcev_velocity(k, c1, flat, 0.0, SlepcevSign::minus);
    CHECK(plus[200] == doctest::Approx(0.3 + k.M0()));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(minus[i] == doctest::Approx(0.3));

    ScalarField tent(g, 0.0);
    for (int i = 0; i < g.n(); ++i) tent[i] = std::max(-1.0, 1.0 - std::abs(g.coord(0, i)));
    const ScalarField p = slepcev_velocity(k, c1, tent, 0.0, SlepcevSign::plus);
    CHECK(std::abs(p[200] - (0.3 + g.h())) <= kWeightQuantum);  // only the node x = 0 lies at level >= 1
    CHECK(std::abs(p[250] - (0.3 + 2.0)) <= 2 * g.h());  // x = 1, level 0: the set is [-1, 1]
}

TEST_CASE("slepcev velocity ordering and binned consistency") {
    std::mt19937 rng(13);
    std::uniform_int_distribution<int> level(0, 7);
    for (int dim : {1, 2}) {
        const Grid g = Grid::make(dim, 1.0, dim == 1 ? 201 : 41);
        const ExternalVelocity c1 = ExternalVelocity::constant(-0.1);
        for (int trial = 0; trial < 4; ++trial) {
            const KernelSpec k = random_kernel(rng, dim, g.h(), true);
            ScalarField u(g, 0.0);
            for (double& v : u.values) v = level(rng) / 7.0;  // 8 distinct values
            const auto ep = slepcev_velocity(k, c1, u, 0.0, SlepcevSign::plus);
            const auto em = slepcev_velocity(k, c1, u, 0.0, SlepcevSign::minus);
            for (std::size_t i = 0; i < g.size(); ++i) CHECK(ep[i] >= em[i]);
            for (auto sign : {SlepcevSign::plus, SlepcevSign::minus}) {
                const auto ex = slepcev_velocity(k, c1, u, 0.0, sign);
                const auto bn = slepcev_velocity(k, c1, u, 0.0, sign, SlepcevMode::binned(8));
                CHECK(sup_distance(ex, bn) == 0.0);
            }
        }
    }
}

TEST_CASE("any sandwiched occupancy gives a velocity between the plus and minus variants") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const Grid g = Grid::make(1, 1.0, 61);
    const KernelSpec k = KernelSpec::box(1, g.h(), 0.3);
    const ExternalVelocity c1 = ExternalVelocity::constant(0.0);
    ScalarField u(g, 0.0);
    for (double& v : u.values) v = std::round(3 * U(rng)) / 3;
    const auto plus = slepcev_velocity(k, c1, u, 0.0, SlepcevSign::plus);
    const auto minus = slepcev_velocity(k, c1, u, 0.0, SlepcevSign::minus);
    for (std::size_t x = 0; x < g.size(); ++x) {
        OccupancyField chi(g, 0.0);
        for (std::size_t y = 0; y < g.size(); ++y)
            chi.values[y] = u[y] > u[x] ? 1.0 : u[y] == u[x] ? U(rng) : 0.0;
        const double c = assemble_cbar(k, c1, chi, 0.0, ConvolutionBackend::direct)[x];
        CHECK(c >= minus[x] - 1e-12);
        CHECK(c <= plus[x] + 1e-12);
    }
}

TEST_CASE("time-dependent kernels switch frames") {
    const Grid g = Grid::make(1, 2.0, 101);
    KernelSpec k = KernelSpec::box(1, g.h(), 0.5, 1.0);
    k.add_frame(1.0, [](const Point& p) { return std::abs(p[0]) <= 0.5 ? 2.0 : 0.0; });
    CHECK(k.time_dependent());
    const OccupancyField occ(g, 1.0);
    const ScalarField a = convolve(k, occ, 0.5, ConvolutionBackend::fft);
    const ScalarField b = convolve(k, occ, 1.5, ConvolutionBackend::fft);
    CHECK(b[50] == doctest::Approx(2 * a[50]));
}
