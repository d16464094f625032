#include "sptree/errors.hpp"
#include "sptree/fractal.hpp"
#include "sptree/jacobi.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

using namespace sptree;
using jacobi::SpectralMeasure;

namespace {

SpectralMeasure lebesgue_like(std::size_t atoms, double lo = 0.0, double hi = 4.0) {
    SpectralMeasure mu;
    for (std::size_t i = 0; i < atoms; ++i) {
        mu.lambda.push_back(lo + (hi - lo) * (static_cast<double>(i) + 0.5) /
                                     static_cast<double>(atoms));
        mu.weight.push_back(1.0 / static_cast<double>(atoms));
    }
    mu.total = 1.0;
    return mu;
}

// middle-thirds hierarchy truncated at the given depth
SpectralMeasure cantor_measure(int depth) {
    std::vector<double> xs{0.0};
    for (int d = 0; d < depth; ++d) {
        std::vector<double> next;
        double step = std::pow(3.0, -(d + 1));
        for (double x : xs) {
            next.push_back(x);
            next.push_back(x + 2.0 * step);
        }
        xs = std::move(next);
    }
    SpectralMeasure mu;
    double w = std::pow(0.5, depth);
    for (double x : xs) {
        mu.lambda.push_back(x);
        mu.weight.push_back(w);
    }
    mu.total = 1.0;
    return mu;
}

} // namespace

TEST_CASE("local exponent of reference measures") {
    // at an atom the ball mass freezes
    SpectralMeasure atom;
    atom.lambda = {1.0, 2.0};
    atom.weight = {0.5, 0.5};
    atom.total = 1.0;
    auto grid = fractal::geometric_grid(1e-4, 1e-1, 24);
    CHECK(fractal::local_dimension(atom, 1.0, grid) == doctest::Approx(0.0).scale(1.0));

    // discretized Lebesgue measure scales linearly
    auto leb = lebesgue_like(4000);
    auto grid2 = fractal::geometric_grid(1e-2, 1e-1, 24);
    CHECK(fractal::local_dimension(leb, 2.0, grid2) == doctest::Approx(1.0).epsilon(0.05));

    // middle-thirds hierarchy at depth 8
    auto cantor = cantor_measure(8);
    auto grid3 = fractal::geometric_grid(3e-4, 0.3, 30);
    double expect = std::log(2.0) / std::log(3.0);
    CHECK(fractal::local_dimension(cantor, 0.25, grid3) ==
          doctest::Approx(expect).epsilon(0.08));

    // probing below the support resolution raises
    CHECK_THROWS_AS(
        fractal::local_dimension(leb, 2.0002345, fractal::geometric_grid(1e-9, 1e-7, 8)),
        ResolutionError);
}

TEST_CASE("dimension bounds by weighted quantiles") {
    SpectralMeasure one;
    one.lambda = {2.0};
    one.weight = {1.0};
    one.total = 1.0;
    auto d1 = fractal::dim_bounds(one, 50);
    CHECK(d1.dim_lower == 0.0);
    CHECK(d1.dim_upper == 0.0);

    auto leb = lebesgue_like(4000);
    auto dl = fractal::dim_bounds(leb, 100, 7);
    CHECK(dl.dim_lower == doctest::Approx(1.0).epsilon(0.05));
    CHECK(dl.dim_upper == doctest::Approx(1.0).epsilon(0.05));

    // half atom, half continuum
    SpectralMeasure mix = lebesgue_like(2000);
    for (auto& w : mix.weight) w *= 0.5;
    mix.lambda.push_back(5.0);
    mix.weight.push_back(0.5);
    mix.total = 1.0;
    auto dm = fractal::dim_bounds(mix, 200, 11);
    CHECK(dm.dim_lower <= 0.1);
    CHECK(dm.dim_upper >= 0.9);
}

TEST_CASE("uniform scaling constants over dyadic sweeps") {
    auto leb = lebesgue_like(4000);
    auto rep = fractal::holder_constant(leb, 1.0);
    CHECK(!rep.divergent);
    CHECK(rep.constant == doctest::Approx(0.25).epsilon(0.1));  // mass/length = 1/4

    SpectralMeasure with_atom = lebesgue_like(2000);
    for (auto& w : with_atom.weight) w *= 0.6;
    with_atom.lambda.insert(with_atom.lambda.begin() + 1000, 2.0000001);
    with_atom.weight.insert(with_atom.weight.begin() + 1000, 0.4);
    with_atom.total = 1.0;
    CHECK(fractal::holder_constant(with_atom, 0.5).divergent);
    CHECK(fractal::holder_constant(with_atom, 0.9).divergent);

    auto cantor = cantor_measure(10);
    double ac = std::log(2.0) / std::log(3.0);
    auto at_dim = fractal::holder_constant(cantor, ac);
    CHECK(!at_dim.divergent);
    CHECK(std::isfinite(at_dim.constant));
    auto above = fractal::holder_constant(cantor, 0.8);
    CHECK(above.divergent);

    // monotonicity: finite at alpha implies finite below it
    auto below = fractal::holder_constant(cantor, 0.5);
    CHECK(!below.divergent);
    CHECK(below.trend_slope <= at_dim.trend_slope + 1e-9);
}

TEST_CASE("closed-form exponential Fourier average") {
    // two symmetric atoms: the transform is cos(t)
    SpectralMeasure two;
    two.lambda = {-1.0, 1.0};
    two.weight = {0.5, 0.5};
    two.total = 1.0;
    std::vector<double> ones{1.0, 1.0};
    for (double T : {0.7, 3.0, 50.0}) {
        double closed = fractal::abel_fourier_closed(two, ones, T);
        double expect = T / 2.0 + T / (2.0 * (1.0 + 4.0 * T * T));
        CHECK(closed == doctest::Approx(expect).epsilon(1e-12));
    }

    // direct time quadrature oracle on a small measure
    SpectralMeasure mu;
    for (int i = 0; i < 37; ++i) {
        mu.lambda.push_back(0.1 * i + 0.03 * std::sin(i));
        mu.weight.push_back((1.0 + std::cos(i)) / 37.0);
    }
    mu.total = 0;
    for (double w : mu.weight) mu.total += w;
    std::vector<double> f(37);
    for (int i = 0; i < 37; ++i) f[static_cast<std::size_t>(i)] = std::sin(0.4 * i) + 1.2;
    double T = 12.0;
    double closed = fractal::abel_fourier_closed(mu, f, T);
    // |^(f mu)(t)|^2 integrated against exp(-t/T) by composite Simpson,
    // with per-atom rotating phasors
    const int steps = 1000000;  // even
    const double tmax = T * 42.0, dt = tmax / steps;
    std::vector<std::complex<double>> amp(mu.size()), rot(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        amp[i] = f[i] * mu.weight[i];
        rot[i] = std::exp(std::complex<double>(0.0, -mu.lambda[i] * dt));
    }
    double acc = 0;
    for (int s = 0; s <= steps; ++s) {
        std::complex<double> sum = 0;
        for (std::size_t i = 0; i < mu.size(); ++i) sum += amp[i];
        double val = std::exp(-dt * s / T) * std::norm(sum);
        double w = (s == 0 || s == steps) ? 1.0 : (s % 2 == 1 ? 4.0 : 2.0);
        acc += w * val;
        for (std::size_t i = 0; i < mu.size(); ++i) amp[i] *= rot[i];
    }
    acc *= dt / 3.0;
    CHECK(closed == doctest::Approx(acc).epsilon(1e-8));
}

TEST_CASE("scaled Fourier averages flag atomic measures and pass regular ones") {
    SpectralMeasure one;
    one.lambda = {1.5};
    one.weight = {1.0};
    one.total = 1.0;
    auto grid = fractal::geometric_grid(1.0, 1e4, 12);
    auto flagged = fractal::fourier_abel_check(one, {1.0}, 0.5, grid);
    CHECK(!flagged.bounded);
    CHECK(flagged.trend_slope == doctest::Approx(0.5).epsilon(0.02));

    auto cantor = cantor_measure(12);
    std::vector<double> ones(cantor.size(), 1.0);
    double ac = std::log(2.0) / std::log(3.0);
    auto ok = fractal::fourier_abel_check(cantor, ones, 0.9 * ac, grid);
    CHECK(ok.bounded);
    CHECK(std::isfinite(ok.sup));
}
