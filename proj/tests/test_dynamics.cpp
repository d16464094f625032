#include "sptree/decompose.hpp"
#include "sptree/dynamics.hpp"
#include "sptree/errors.hpp"
#include "sptree/hsfc.hpp"
#include "sptree/jacobi.hpp"
#include "sptree/tree.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sptree;
using dynamics::Method;
using jacobi::JacobiCoeffs;

namespace {

JacobiCoeffs random_block(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> ddist(0.0, 4.0), bdist(0.3, 1.5);
    JacobiCoeffs c;
    c.d.resize(n);
    c.b.resize(n - 1);
    for (auto& d : c.d) d = ddist(rng);
    for (auto& b : c.b) b = bdist(rng);
    return c;
}

std::vector<double> delta(std::size_t n, std::size_t site) {
    std::vector<double> v(n, 0.0);
    v[site] = 1.0;
    return v;
}

} // namespace

TEST_CASE("short-time limit recovers the initial distribution") {
    std::mt19937_64 rng(2);
    auto c = random_block(rng, 50);
    std::vector<double> psi(50);
    for (auto& x : psi) x = std::uniform_real_distribution<double>(-1, 1)(rng);
    auto prof = dynamics::profile_eigensum(c, psi, 1e-6);
    for (std::size_t i = 0; i < 50; ++i)
        CHECK(prof.a[i] == doctest::Approx(psi[i] * psi[i]).epsilon(1e-6).scale(1.0));
}

TEST_CASE("mass conservation for both evaluation routes") {
    std::mt19937_64 rng(3);
    auto c = random_block(rng, 200);
    auto psi = delta(200, 0);
    dynamics::QuadratureOptions opts;
    opts.workers = 2;
    for (double T : {1.0, 10.0, 100.0}) {
        auto eig = dynamics::profile_eigensum(c, psi, T);
        CHECK(std::abs(eig.mass - 1.0) <= 1e-8);
        auto quad = dynamics::profile_quadrature(c, psi, T, opts);
        CHECK(std::abs(quad.mass - 1.0) <= 1e-4);
        double peak = 0, dev = 0;
        for (double x : eig.a) peak = std::max(peak, x);
        for (std::size_t i = 0; i < 200; ++i)
            dev = std::max(dev, std::abs(eig.a[i] - quad.a[i]));
        CHECK(dev / peak <= 1e-6);
    }
}

TEST_CASE("stationary state moments") {
    JacobiCoeffs c;
    c.d = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
    c.b.assign(6, 0.0);
    auto psi = delta(7, 4);  // site 5
    for (double T : {0.5, 20.0, 500.0}) {
        auto prof = dynamics::profile_eigensum(c, psi, T);
        CHECK(dynamics::moment(prof, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dynamics::moment(prof, 2.0) == doctest::Approx(25.0).epsilon(1e-10));
        CHECK(dynamics::moment(prof, 1.0) == doctest::Approx(5.0).epsilon(1e-10));
    }
}

TEST_CASE("moments are monotone in the order") {
    std::mt19937_64 rng(5);
    auto c = random_block(rng, 80);
    auto psi = delta(80, 0);
    auto prof = dynamics::profile_eigensum(c, psi, 30.0);
    double prev = dynamics::moment(prof, 0.5);
    for (double p : {1.0, 2.0, 3.0, 4.0}) {
        double m = dynamics::moment(prof, p);
        CHECK(m >= prev * (1.0 - 1e-12));
        prev = m;
    }
}

TEST_CASE("escape mass windows") {
    std::mt19937_64 rng(7);
    auto c = random_block(rng, 60);
    auto psi = delta(60, 3);
    auto prof = dynamics::profile_eigensum(c, psi, 12.0);
    CHECK(dynamics::escape_mass(prof, 1) == doctest::Approx(prof.mass));
    CHECK(dynamics::escape_mass(prof, 61) == 0.0);
    double head = dynamics::escape_mass(prof, 1, 30);
    double tail = dynamics::escape_mass(prof, 31);
    CHECK(head + tail == doctest::Approx(prof.mass).epsilon(1e-12));
}

TEST_CASE("escape threshold bound from the energy integrals") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 12; ++rep) {
        auto c = random_block(rng, 120);
        auto psi = delta(120, 0);
        auto mu = jacobi::spectral_measure(c, psi);
        std::uniform_real_distribution<double> tdist(2.0, 200.0);
        double T = tdist(rng);
        double lo = 0.7, hi = 3.1;
        auto ints = dynamics::energy_integrals(mu, 1.0 / T, lo, hi);
        if (ints.window_mass <= 0.05) continue;
        auto prof = dynamics::profile_eigensum(c, psi, T);
        auto from = static_cast<std::size_t>(std::ceil(ints.M_T));
        double escape = dynamics::escape_mass(prof, std::max<std::size_t>(from, 1));
        CHECK(escape >= ints.window_mass / 2.0 - 1e-10);
    }
}

TEST_CASE("energy integral closed forms") {
    jacobi::SpectralMeasure one;
    one.lambda = {2.0};
    one.weight = {0.6};
    one.total = 0.6;
    auto ints = dynamics::energy_integrals(one, 0.05, 1.0, 3.0);
    CHECK(ints.J == doctest::Approx(0.36).epsilon(1e-12));  // w^2
    CHECK(ints.I > 0);
    CHECK(ints.M_T == doctest::Approx(0.36 / (16.0 * 0.36)).epsilon(1e-12));

    // kernel flattens to 1 for huge widths: J -> mu(B) mu(R)
    jacobi::SpectralMeasure two;
    two.lambda = {0.5, 1.5, 2.5};
    two.weight = {0.2, 0.3, 0.5};
    two.total = 1.0;
    auto flat = dynamics::energy_integrals(two, 1e7, 1.0, 3.0);
    CHECK(flat.J == doctest::Approx(0.8 * 1.0).epsilon(1e-10));
}

TEST_CASE("window integral dominates the double sum at all scales") {
    std::mt19937_64 rng(13);
    auto c = random_block(rng, 200);
    auto psi = delta(200, 0);
    auto mu = jacobi::spectral_measure(c, psi);
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        auto ints = dynamics::energy_integrals(mu, eps, 1.0, 3.0);
        rmin = std::min(rmin, ints.ji_ratio);
        rmax = std::max(rmax, ints.ji_ratio);
    }
    CHECK(rmax / rmin <= 2.0);
    CHECK(std::isfinite(rmax));
}

TEST_CASE("exponent estimation on synthetic curves") {
    dynamics::MomentCurve flat;
    flat.p = 2.0;
    dynamics::MomentCurve ramp;
    ramp.p = 2.0;
    for (int i = 0; i < 16; ++i) {
        double T = std::pow(10.0, 0.25 * i);
        flat.T.push_back(T);
        flat.value.push_back(25.0 * (1.0 + 0.01 * std::sin(i)));
        ramp.T.push_back(T);
        ramp.value.push_back(3.0 * std::pow(T, 1.7));
    }
    auto ef = dynamics::beta_estimate(flat);
    CHECK(ef.beta_hat == doctest::Approx(0.0).epsilon(0.02).scale(1.0));
    auto er = dynamics::beta_estimate(ramp);
    CHECK(er.beta_hat == doctest::Approx(0.85).epsilon(0.01));

    dynamics::MomentCurve narrow = flat;
    narrow.T.resize(6);
    narrow.value.resize(6);
    CHECK_THROWS_AS(dynamics::beta_estimate(narrow), InsufficientDataError);
}

TEST_CASE("bound-state exponent is zero") {
    JacobiCoeffs c;
    c.d.resize(64);
    for (std::size_t i = 0; i < 64; ++i)
        c.d[i] = 2.0 + std::sin(0.9 * static_cast<double>(i + 1));
    c.b.assign(63, 0.0);
    auto psi = delta(64, 4);
    dynamics::MomentCurve curve;
    curve.p = 2.0;
    for (int i = 0; i < 12; ++i) {
        double T = std::pow(10.0, 0.3 * i);
        auto prof = dynamics::profile_eigensum(c, psi, T);
        curve.T.push_back(T);
        curve.value.push_back(dynamics::moment(prof, 2.0));
    }
    auto est = dynamics::beta_estimate(curve);
    CHECK(std::abs(est.beta_hat) <= 0.02);
}

TEST_CASE("structural envelope fitting on a synthetic sandwich") {
    std::vector<std::int64_t> positions{8, 64};
    double gamma = 0.5, p = 2.0;
    double ln = 64.0;
    dynamics::MomentCurve curve;
    curve.p = p;
    for (int i = 0; i < 24; ++i) {
        double T = 16.0 * std::pow(4096.0 / 16.0, i / 23.0);
        double shape = std::pow(std::pow(ln, p + 1.0) +
                                    std::pow(T, p + 1.0) * std::pow(ln, (gamma - 1.0) / gamma),
                                p / (p + 1.0));
        curve.T.push_back(T);
        curve.value.push_back(0.37 * shape * (1.0 + 0.05 * std::sin(3.0 * i)));
    }
    auto rep = dynamics::bound_envelopes(positions, gamma, p, 2, curve);
    CHECK(rep.l_n == 64.0);
    CHECK(rep.pivot_structural == doctest::Approx(std::pow(64.0, 4.0 / 3.0)));
    CHECK(rep.crossover_exponent == doctest::Approx(4.0 / 3.0));
    CHECK(rep.inside_fraction >= 0.95);
    CHECK(std::abs(rep.pivot_octaves) <= 0.5);
    // the synthetic curve follows the lower shape exactly, so the knee
    // lands on the structural pivot too
    CHECK(std::abs(rep.knee_octaves) <= 0.5);

    dynamics::MomentCurve outside;
    outside.p = p;
    for (int i = 0; i < 8; ++i) {
        outside.T.push_back(1e6 + i);
        outside.value.push_back(1.0);
    }
    CHECK_THROWS_AS(dynamics::bound_envelopes(positions, gamma, p, 2, outside),
                    HypothesisWindowError);
}

TEST_CASE("profiles of a filtered state on the free line spread ballistically") {
    auto c = jacobi::free_block(3000);
    std::vector<double> e1(3000, 0.0);
    e1[0] = 1.0;
    auto f = hsfc::make_test_function(hsfc::Kind::first, 0.5);
    auto psi = hsfc::cheb_apply(f, c, e1);
    dynamics::QuadratureOptions opts;
    opts.workers = 2;
    dynamics::MomentCurve curve;
    curve.p = 2.0;
    for (int i = 0; i < 9; ++i) {
        double T = 0.3 * std::pow(10.0, 3.0 * i / 8.0);
        auto prof = dynamics::profile_quadrature(c, psi, T, opts);
        curve.T.push_back(T);
        curve.value.push_back(dynamics::moment(prof, 2.0));
    }
    auto est = dynamics::beta_estimate(curve);
    CHECK(est.beta_hat == doctest::Approx(1.0).epsilon(0.05));
}
