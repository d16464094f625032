#include "sptree/chebfun.hpp"
#include "sptree/errors.hpp"
#include "sptree/hsfc.hpp"
#include "sptree/jacobi.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

using namespace sptree;
using hsfc::SmoothTestFunction;
using jacobi::cdouble;

TEST_CASE("smoothstep endpoints and monotonicity") {
    CHECK(hsfc::smoothstep(-0.2) == 0.0);
    CHECK(hsfc::smoothstep(1.3) == 1.0);
    CHECK(hsfc::smoothstep(0.5) == doctest::Approx(0.5));
    double prev = 0;
    for (int i = 0; i <= 100; ++i) {
        double v = hsfc::smoothstep(i / 100.0);
        CHECK(v >= prev - 1e-15);
        prev = v;
    }
}

TEST_CASE("first kind test function lives inside the energy window") {
    auto f = hsfc::make_test_function(hsfc::Kind::first, 0.5);
    CHECK(f.support_lo() == doctest::Approx(0.5));
    CHECK(f.support_hi() == doctest::Approx(3.5));
    CHECK(f(0.4) == 0.0);
    CHECK(f(3.6) == 0.0);
    CHECK(f(2.0) == doctest::Approx(1.0).epsilon(1e-10));  // plateau
    CHECK(std::abs(f(f.x0)) > 0);
    double sup = 0;
    for (int i = 0; i <= 500; ++i) sup = std::max(sup, std::abs(f(4.0 * i / 500.0)));
    CHECK(sup == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mollifier is one on the inner window") {
    auto f = hsfc::make_mollifier(4);
    for (double x : {0.55, 1.0, 2.0, 3.0, 3.45})
        CHECK(f(x) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(f(0.2) == 0.0);
    CHECK(f(3.9) == 0.0);
}

TEST_CASE("second kind stays above its floor near the reference energy") {
    auto f = hsfc::make_test_function(hsfc::Kind::second, 0.3,
                                      {.center = 2.0, .c_lower = 0.5});
    for (int i = 0; i <= 100; ++i) {
        double x = 1.7 + 0.6 * i / 100.0;
        CHECK(std::abs(f(x)) >= 0.5 - 1e-12);
    }
    // a plateau cutoff divided by f is smooth where |f| >= c
    auto g = hsfc::make_plateau_bump(1.7, 2.3, 0.1);
    for (int i = 1; i < 100; ++i) {
        double x = 1.7 + 0.6 * i / 100.0;
        CHECK(std::isfinite(g(x) / f(x)));
    }
    CHECK_THROWS_AS(hsfc::make_test_function(hsfc::Kind::second, 0.3,
                                             {.center = 0.1, .c_lower = 0.5}),
                    ParamError);
}

TEST_CASE("weighted derivative norm") {
    auto f = hsfc::make_plateau_bump(1.0, 3.0, 0.5);

    // homogeneity under scaling
    auto f3 = hsfc::make_plateau_bump(1.0, 3.0, 0.5, -3.0);
    double n1 = hsfc::triple_norm(f, 3);
    double n3 = hsfc::triple_norm(f3, 3);
    CHECK(n3 == doctest::Approx(3.0 * n1).epsilon(1e-7));

    // brute-force composite quadrature oracle
    for (int r = 0; r <= 3; ++r) {
        const int pts = 1000000;
        double acc = 0;
        for (int i = 0; i < pts; ++i) {
            double x = 1.0 + 2.0 * (i + 0.5) / pts;
            acc += std::abs(f.deriv(r, x)) * std::pow(std::sqrt(1.0 + x * x), r - 1);
        }
        acc *= 2.0 / pts;
        auto one = [&](const SmoothTestFunction& fn) {
            return cheb::integrate_adaptive(
                [&](double x) {
                    return std::abs(fn.deriv(r, x)) *
                           std::pow(std::sqrt(1.0 + x * x), r - 1);
                },
                1.0, 3.0, 1e-9);
        };
        CHECK(one(f) == doctest::Approx(acc).epsilon(1e-6));
    }
}

TEST_CASE("extension derivative respects its envelope") {
    auto f = hsfc::make_plateau_bump(1.0, 3.0, 0.6);
    for (int order : {2, 4}) {
        for (int ix = 0; ix <= 40; ++ix) {
            double x = 0.9 + (3.2 - 0.9) * ix / 40.0;
            double ax = std::sqrt(1.0 + x * x);
            for (int iy = 1; iy <= 30; ++iy) {
                double y = 2.2 * ax * iy / 30.0;
                auto v = hsfc::dbar_extension(f, order, x, y);
                CHECK(std::abs(v.value) <=
                      (v.envelope_interior + v.envelope_band) * (1.0 + 1e-9) + 1e-12);
            }
        }
    }
}

TEST_CASE("operator function column against the eigensum oracle") {
    auto f = hsfc::make_plateau_bump(1.0, 3.0, 0.5);
    auto c = jacobi::free_block(60);
    auto es = jacobi::eigendecompose(c);
    auto oracle = [&](std::size_t i, std::size_t j) {
        double s = 0;
        for (std::size_t l = 0; l < es.n; ++l)
            s += f(es.values[l]) * es.vec(i, l) * es.vec(j, l);
        return s;
    };
    auto col = hsfc::hs_apply(f, c, 0);
    double dev = 0;
    for (std::size_t i = 0; i < 60; ++i)
        dev = std::max(dev, std::abs(col[i] - cdouble(oracle(i, 0))));
    CHECK(dev <= 1e-4);

    // real-symmetric kernel
    auto col7 = hsfc::hs_apply(f, c, 7);
    CHECK(std::abs(col7[0].real() - col[7].real()) <= 2e-4);

    // additivity over disjoint bumps
    auto fa = hsfc::make_plateau_bump(0.8, 1.6, 0.2);
    auto fb = hsfc::make_plateau_bump(2.2, 3.2, 0.25);
    auto ca = hsfc::hs_apply(fa, c, 0);
    auto cb = hsfc::hs_apply(fb, c, 0);
    auto esum = [&](std::size_t i) {
        double s = 0;
        for (std::size_t l = 0; l < es.n; ++l)
            s += (fa(es.values[l]) + fb(es.values[l])) * es.vec(i, l) * es.vec(0, l);
        return s;
    };
    for (std::size_t i = 0; i < 60; i += 5)
        CHECK(std::abs(ca[i] + cb[i] - cdouble(esum(i))) <= 2e-4);
}

TEST_CASE("polynomial functional calculus matches the eigensum") {
    auto f = hsfc::make_test_function(hsfc::Kind::first, 0.5);
    auto c = jacobi::free_block(300);
    std::vector<double> psi(300, 0.0);
    psi[0] = 1.0;
    auto fast = hsfc::cheb_apply(f, c, psi);
    auto es = jacobi::eigendecompose(c);
    double dev = 0;
    for (std::size_t i = 0; i < 300; ++i) {
        double s = 0;
        for (std::size_t l = 0; l < es.n; ++l)
            s += f(es.values[l]) * es.vec(i, l) * es.vec(0, l);
        dev = std::max(dev, std::abs(fast[i] - s));
    }
    CHECK(dev <= 1e-8);
}

TEST_CASE("kernel decay with a fitted polynomial weight") {
    auto f = hsfc::make_test_function(hsfc::Kind::first, 0.5);
    auto c = jacobi::free_block(200);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < 200; i += 17)
        for (std::size_t dist = 1; dist <= 64; dist *= 2)
            if (i + dist < 200) pairs.emplace_back(i, i + dist);
    auto rep = hsfc::kernel_decay_check(f, c, 2, pairs, 1);
    CHECK(std::isfinite(rep.c_fit));
    CHECK(rep.stable);
    CHECK(rep.hs_cross_dev <= 1e-4);
    REQUIRE(rep.windows.size() >= 5);
}

TEST_CASE("chebyshev resolution errors surface for series-only functions") {
    // a function carried only by a loose series cannot honestly provide
    // high-order derivatives
    auto series = cheb::ChebSeries::fit([](double x) { return std::exp(-x * x); },
                                        -1.0, 1.0, 1e-6, 16, 16);
    SmoothTestFunction f;
    f.series = series;
    CHECK_THROWS_AS(hsfc::triple_norm(f, 11), ResolutionError);

    // jet-backed profiles cap at the configured order
    auto bump = hsfc::make_plateau_bump(1.0, 3.0, 0.5);
    CHECK_THROWS_AS(bump.require_order(40), ResolutionError);
    CHECK_NOTHROW(bump.require_order(16));
}
