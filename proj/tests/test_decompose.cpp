#include "sptree/decompose.hpp"
#include "sptree/errors.hpp"
#include "sptree/jacobi.hpp"
#include "sptree/tree.hpp"

#include <doctest.h>

#include <random>

using namespace sptree;
using tree::TreeParams;

namespace {

tree::ShTree paper_tree(double gamma, int depth) {
    TreeParams p;
    p.gamma = gamma;
    p.depth = depth;
    p.sparse_positions = tree::paper_positions(depth);
    return tree::build_tree(p);
}

tree::ShTree surrogate_tree(double gamma, std::vector<std::int64_t> pos, int depth) {
    TreeParams p;
    p.gamma = gamma;
    p.depth = depth;
    p.sparse_positions = std::move(pos);
    return tree::build_tree(p);
}

} // namespace

TEST_CASE("level index sandwich") {
    auto t = paper_tree(0.5, 6);  // alpha = 1,1,1,2,2,2,2
    CHECK(decompose::level_index(t, 1) == 0);
    CHECK(decompose::level_index(t, 2) == 3);
    CHECK(decompose::level_index(t, t.alpha.back()) <= t.depth());
    CHECK_THROWS_AS(decompose::level_index(t, t.alpha.back() + 1), RangeError);
}

TEST_CASE("jacobi coefficients of the first block") {
    // free region: d = (1, 2, 2, ...), b = (1, 1, ...)
    auto t = surrogate_tree(0.5, {}, 6);
    auto c = decompose::jacobi_coeffs(t, 1, 7);
    CHECK(c.k == 1);
    CHECK(c.offset == 0);
    CHECK(c.d[0] == 1.0);
    for (std::size_t i = 1; i + 1 < c.size(); ++i) CHECK(c.d[i] == 2.0);
    CHECK(c.d.back() == 1.0);  // leaf shell
    for (double b : c.b) CHECK(b == 1.0);

    // a sparse shell with g = 16 gives a diagonal 17 next to an off-diagonal 4
    auto ts = surrogate_tree(0.5, {16}, 20);
    auto cs = decompose::jacobi_coeffs(ts, 1, 20);
    CHECK(cs.d[16] == 17.0);  // site n = 17 sits on shell 16
    CHECK(cs.b[16] == 4.0);
    CHECK(cs.g_exact[16] == 16);
}

TEST_CASE("second blocks start with d = b^2 + 1") {
    auto t = surrogate_tree(0.5, {2, 4}, 8);
    for (std::int64_t k = 2; k <= t.alpha.back(); ++k) {
        auto len = decompose::block_length(t, k);
        if (len < 2) continue;
        auto c = decompose::jacobi_coeffs(t, k, len);
        CHECK(c.d[0] == doctest::Approx(c.b[0] * c.b[0] + 1.0));
    }
}

TEST_CASE("structural identity is exact in integers to depth 20") {
    for (double gamma : {0.2, 0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0}) {
        auto t = paper_tree(gamma, 20);
        CHECK(decompose::check_structural_identity(t) > 0);
    }
    auto s = surrogate_tree(0.4, {2, 5, 9, 14}, 20);
    CHECK(decompose::check_structural_identity(s) > 0);
}

TEST_CASE("block lengths partition the vertex set") {
    auto t = surrogate_tree(0.5, {2, 3, 5}, 9);
    std::int64_t total = 0;
    for (std::int64_t k = 1; k <= t.alpha.back(); ++k)
        total += decompose::block_length(t, k);
    CHECK(total == t.vertex_count);
}

TEST_CASE("path tree basis is the identity") {
    auto t = surrogate_tree(0.5, {}, 5);
    auto u = decompose::build_cons_unitary(t);
    for (std::int64_t i = 0; i < u.dimension; ++i)
        for (std::int64_t j = 0; j < u.dimension; ++j)
            CHECK(u.entry(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
}

TEST_CASE("basis columns live on single shells, blocks on consecutive shells") {
    auto t = paper_tree(0.5, 4);
    auto u = decompose::build_cons_unitary(t);
    for (std::int64_t col = 0; col < u.dimension; ++col) {
        auto key = u.columns[static_cast<std::size_t>(col)];
        CHECK(key.n >= decompose::level_index(t, key.k));
        for (std::int64_t row = 0; row < u.dimension; ++row) {
            if (u.entry(row, col) == 0.0) continue;
            auto [shell, pos] = t.locate(row);
            CHECK(shell == key.n);
        }
    }
}

TEST_CASE("unitary equivalence of tree and block direct sum") {
    auto t = paper_tree(0.5, 4);
    auto rep = decompose::verify_equivalence(t);
    CHECK(rep.orthonormality <= 1e-12);
    CHECK(rep.off_block <= 1e-12);
    CHECK(rep.in_block <= 1e-12);
    CHECK(rep.eigen_linf <= 1e-12);

    auto rep6 = decompose::verify_equivalence(paper_tree(0.5, 6));
    CHECK(rep6.off_block <= 1e-10);
    CHECK(rep6.eigen_linf <= 1e-10);

    auto rep5 = decompose::verify_equivalence(paper_tree(1.0 / 3.0, 5));
    CHECK(rep5.off_block <= 1e-10);
    CHECK(rep5.eigen_linf <= 1e-10);

    auto reps = decompose::verify_equivalence(surrogate_tree(0.5, {2, 3, 4}, 6));
    CHECK(reps.orthonormality <= 1e-12);
    CHECK(reps.off_block <= 1e-10);
    CHECK(reps.in_block <= 1e-10);
    CHECK(reps.eigen_linf <= 1e-10);
}

TEST_CASE("dense limit is enforced") {
    auto t = surrogate_tree(0.5, {2, 3, 4, 5, 6, 7}, 10);
    REQUIRE(t.vertex_count > 100);
    CHECK_THROWS_AS(decompose::build_cons_unitary(t, 100), DenseLimitError);
}

TEST_CASE("spectrum is invariant under off-diagonal sign flips") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> bdist(0.2, 3.0), ddist(-1.0, 5.0);
    std::bernoulli_distribution flip(0.5);
    for (int rep = 0; rep < 10; ++rep) {
        std::size_t n = 5 + static_cast<std::size_t>(rng() % 45);
        jacobi::JacobiCoeffs c;
        c.d.resize(n);
        c.b.resize(n - 1);
        for (auto& d : c.d) d = ddist(rng);
        for (auto& b : c.b) b = bdist(rng);
        auto base = jacobi::eigendecompose(c);
        // conjugation by diag(+-1) flips off-diagonal signs pairwise; the
        // solver only sees magnitudes, so flip signs via a similarity check:
        // rebuild with some b negated and compare spectra
        jacobi::JacobiCoeffs flipped = c;
        for (auto& b : flipped.b)
            if (flip(rng)) b = -b;
        auto other = jacobi::eigendecompose(flipped);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(base.values[i] == doctest::Approx(other.values[i]).epsilon(1e-10));
    }
}
