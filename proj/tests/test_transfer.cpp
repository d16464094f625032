#include "sptree/decompose.hpp"
#include "sptree/errors.hpp"
#include "sptree/transfer.hpp"
#include "sptree/tree.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

using namespace sptree;
using transfer::cdouble;
using transfer::Mat2;

namespace {

std::vector<std::int64_t> surrogate_g(double gamma, std::vector<std::int64_t> pos,
                                      int depth) {
    tree::TreeParams p;
    p.gamma = gamma;
    p.depth = depth;
    p.sparse_positions = std::move(pos);
    return tree::build_tree(p).g;
}

} // namespace

TEST_CASE("one-step transfer matrices") {
    auto g = surrogate_g(0.5, {16}, 40);
    auto t0 = transfer::transfer_matrix(g, 0.0, 0);
    CHECK(t0.a[0] == cdouble(0.0));
    CHECK(t0.a[1] == cdouble(1.0));
    CHECK(t0.a[2] == cdouble(-1.0));
    CHECK(t0.a[3] == cdouble(1.0));

    cdouble z(0.7, 0.3);
    auto tf = transfer::transfer_matrix(g, z, 5);  // free interior
    CHECK(std::abs(tf.a[2] - cdouble(-1.0)) <= 1e-15);
    CHECK(std::abs(tf.a[3] - (2.0 - z)) <= 1e-15);
    CHECK(std::abs(tf.det() - 1.0) <= 1e-12);

    // barrier entry: g jumps from 1 to 16, so det = sqrt(1/16)
    auto tb = transfer::transfer_matrix(g, z, 16);
    CHECK(std::abs(tb.det() - 0.25) <= 1e-12);
    // barrier exit one shell later: det = sqrt(16/1)
    auto tx = transfer::transfer_matrix(g, z, 17);
    CHECK(std::abs(tx.det() - 4.0) <= 1e-12);
}

TEST_CASE("determinants telescope through products") {
    auto g = surrogate_g(0.5, {4, 9, 20}, 60);
    cdouble z(1.3, 0.05);
    auto s = transfer::transfer_product(g, z, 50, 0);
    cdouble expect = 1.0;
    for (std::int64_t j = 0; j <= 50; ++j)
        expect *= transfer::transfer_matrix(g, z, j).det();
    CHECK(std::abs(s.det() - expect) <= 1e-10 * std::abs(expect));

    auto single = transfer::transfer_product(g, z, 7, 7);
    auto direct = transfer::transfer_matrix(g, z, 7);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(single.a[i] - direct.a[i]) <= 1e-15);
}

TEST_CASE("free products stay bounded inside the band") {
    std::vector<std::int64_t> g(2001, 1);
    for (double e : {0.5, 2.0, 3.5}) {
        double sup = 0;
        Mat2 acc{{1.0, 0.0, 0.0, 1.0}};
        auto r = transfer::transfer_matrix(g, e, 1);
        for (int n = 1; n <= 2000; ++n) {
            acc = r * acc;
            sup = std::max(sup, acc.norm());
        }
        CHECK(sup < 1e3);
        CHECK(std::isfinite(sup));
    }
    // small imaginary part: bounded within the n * eps < K window
    double eps = 1e-3, big_k = 1.0;
    Mat2 acc{{1.0, 0.0, 0.0, 1.0}};
    auto r = transfer::transfer_matrix(g, cdouble(2.0, eps), 1);
    double sup = 0;
    for (int n = 1; n <= static_cast<int>(big_k / eps); ++n) {
        acc = r * acc;
        sup = std::max(sup, acc.norm());
    }
    CHECK(std::isfinite(sup));
    CHECK(sup < 1e4);
}

TEST_CASE("product columns propagate recursion solutions") {
    auto g = surrogate_g(0.5, {8}, 60);
    tree::TreeParams p;
    p.gamma = 0.5;
    p.depth = 60;
    p.sparse_positions = {8};
    auto t = tree::build_tree(p);
    auto c = decompose::jacobi_coeffs(t, 1, 40);
    cdouble z(1.2, 0.4);

    // f from the three-term recursion with boundary weight 1 below the origin
    std::vector<cdouble> f(42);
    f[0] = 1.0;
    f[1] = cdouble(0.3, -0.2);  // arbitrary seed
    for (std::size_t n = 1; n + 1 < f.size(); ++n) {
        double blo = n >= 2 ? c.b[n - 2] : 1.0;
        f[n + 1] = ((c.d[n - 1] - z) * f[n] - blo * f[n - 1]) / c.b[n - 1];
    }
    for (std::int64_t n : {1, 5, 12, 30}) {
        auto s = transfer::transfer_product(g, z, n - 1, 0);
        auto v = s * std::array<cdouble, 2>{f[0], f[1]};
        auto fn = f[static_cast<std::size_t>(n)];
        auto fn1 = f[static_cast<std::size_t>(n) + 1];
        CHECK(std::abs(v[0] - fn) <= 1e-9 * std::abs(fn));
        CHECK(std::abs(v[1] - fn1) <= 1e-9 * std::abs(fn1));
    }
}

TEST_CASE("resolvent column follows the transfer recursion") {
    auto free_c = jacobi::free_block(500);
    auto rep = transfer::recursion_consistency(free_c, cdouble(2.0, 1.0 / 50.0), 100);
    CHECK(rep.max_rel_dev <= 1e-8);
    CHECK(rep.compared == 100);

    // n = 1 compares f(1) = m(z) against the solved column by construction
    auto rep1 = transfer::recursion_consistency(free_c, cdouble(2.0, 0.5), 1);
    CHECK(rep1.max_rel_dev <= 1e-10);

    tree::TreeParams p;
    p.gamma = 0.5;
    p.depth = 600;
    p.sparse_positions = {8, 64};
    auto t = tree::build_tree(p);
    auto sparse_c = decompose::jacobi_coeffs(t, 1, 480);
    auto rep2 = transfer::recursion_consistency(sparse_c, cdouble(1.0, 1.0 / 20.0), 120);
    CHECK(rep2.max_rel_dev <= 1e-6);
}

TEST_CASE("inverse norm bound sweep fits a stable per-barrier constant") {
    tree::TreeParams p;
    p.gamma = 0.5;
    p.depth = 200;
    p.sparse_positions = {8, 24, 60};
    p.validate();
    cdouble z(2.3, 1e-4);
    auto rep = transfer::inverse_norm_bound_check(p, z, 1.0, 150);
    REQUIRE(!rep.entries.empty());
    CHECK(std::isfinite(rep.c_fit_max));
    CHECK(rep.c_fit_max < 50.0);

    // before the first barrier there is no structural factor
    for (auto& e : rep.entries)
        if (e.n < 8) {
            CHECK(e.barriers == 0);
            CHECK(e.structural == 1.0);
            CHECK(e.norm < 50.0);
        }

    // crossing one barrier of height g = 8 lifts the inverse norm by ~sqrt(g)
    double before = 0, after = 0;
    for (auto& e : rep.entries) {
        if (e.n >= 4 && e.n <= 7) before = std::max(before, e.norm);
        if (e.n >= 10 && e.n <= 13) after = std::max(after, e.norm);
    }
    double jump = after / before;
    CHECK(jump > std::sqrt(8.0) / 4.0);
    CHECK(jump < 4.0 * std::sqrt(8.0) * 4.0);

    CHECK_THROWS_AS(transfer::inverse_norm_bound_check(p, z, 1e-6, 150),
                    HypothesisWindowError);
}

TEST_CASE("transfer product overflow reporting") {
    std::vector<std::int64_t> g(5001, 1);
    // far outside the band the free factors grow exponentially
    CHECK_THROWS_AS(transfer::transfer_product(g, cdouble(60.0, 0.0), 5000, 0),
                    OverflowError);
    auto scaled = transfer::transfer_product_scaled(g, cdouble(60.0, 0.0), 5000, 0);
    CHECK(scaled.log2_norm() > 996.0);  // representable only in log scale
}
