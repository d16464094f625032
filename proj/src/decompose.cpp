#include "sptree/decompose.hpp"

#include "sptree/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace sptree::decompose {

using tree::ShTree;

int level_index(const ShTree& t, std::int64_t k) {
    if (k < 1) throw RangeError("block index must be >= 1");
    if (k > t.alpha.back())
        throw RangeError("block index " + std::to_string(k) +
                         " exceeds the truncation width " + std::to_string(t.alpha.back()));
    auto it = std::lower_bound(t.alpha.begin(), t.alpha.end(), k);
    return static_cast<int>(it - t.alpha.begin());
}

std::int64_t block_length(const ShTree& t, std::int64_t k) {
    return t.depth() - level_index(t, k) + 1;
}

jacobi::JacobiCoeffs jacobi_coeffs(const ShTree& t, std::int64_t k, std::int64_t n) {
    const int nk = level_index(t, k);
    const int D = t.depth();
    if (n < 1 || nk + n - 1 > D)
        throw RangeError("block length " + std::to_string(n) +
                         " passes the truncation boundary");
    jacobi::JacobiCoeffs c;
    c.k = static_cast<int>(std::min<std::int64_t>(k, 2));  // only the k=1 corner is special
    c.offset = nk;
    c.d.resize(static_cast<std::size_t>(n));
    c.d_exact.resize(static_cast<std::size_t>(n));
    c.b.resize(static_cast<std::size_t>(n - 1));
    c.g_exact.resize(static_cast<std::size_t>(n - 1));
    for (std::int64_t i = 1; i <= n; ++i) {
        const int shell = nk + static_cast<int>(i) - 1;
        std::int64_t deg;
        if (shell == D) deg = 1;
        else if (shell == 0) deg = t.g[0];
        else deg = t.g[shell] + 1;
        c.d_exact[static_cast<std::size_t>(i - 1)] = deg;
        c.d[static_cast<std::size_t>(i - 1)] = static_cast<double>(deg);
        if (i < n) {
            c.g_exact[static_cast<std::size_t>(i - 1)] = t.g[shell];
            c.b[static_cast<std::size_t>(i - 1)] = std::sqrt(static_cast<double>(t.g[shell]));
        }
    }
    return c;
}

std::int64_t check_structural_identity(const ShTree& t) {
    const int D = t.depth();
    std::int64_t checked = 0;
    for (int nk = 0; nk <= D; ++nk) {
        // all blocks starting at shell nk share one coefficient sequence
        std::int64_t k = nk == 0 ? 1 : t.alpha[static_cast<std::size_t>(nk) - 1] + 1;
        if (nk > 0 && t.alpha[static_cast<std::size_t>(nk)] == t.alpha[static_cast<std::size_t>(nk) - 1])
            continue;  // no block starts at this shell
        auto c = jacobi_coeffs(t, k, D - nk + 1);
        for (std::size_t i = 0; i + 1 < c.d_exact.size(); ++i) {
            std::int64_t corner = (c.k == 1 && i == 0) ? 1 : 0;
            if (c.d_exact[i] != c.g_exact[i] + 1 - corner)
                throw Error("structural identity d = g + 1 - corner failed at shell start " +
                            std::to_string(nk) + ", site " + std::to_string(i + 1));
        }
        ++checked;
    }
    // block lengths partition the vertex set
    std::int64_t cells = 0;
    for (int nk = 0; nk <= D; ++nk) {
        std::int64_t count = t.alpha[static_cast<std::size_t>(nk)] -
                             (nk == 0 ? 0 : t.alpha[static_cast<std::size_t>(nk) - 1]);
        cells += count * (D - nk + 1);
    }
    if (cells != t.vertex_count)
        throw Error("block lengths do not partition the vertex set");
    return checked;
}

UnitaryBasis build_cons_unitary(const ShTree& t, std::int64_t dense_limit) {
    const std::int64_t dim = t.vertex_count;
    if (dim > dense_limit)
        throw DenseLimitError("tree has " + std::to_string(dim) +
                              " vertices, dense limit is " + std::to_string(dense_limit));
    const int D = t.depth();

    UnitaryBasis basis;
    basis.dimension = dim;
    basis.u.assign(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), 0.0);
    basis.columns.resize(static_cast<std::size_t>(dim));

    // Column layout: block k occupies consecutive columns for shells
    // n = N(k) .. D. col_start[k-1] is its first column.
    std::vector<std::int64_t> col_start(static_cast<std::size_t>(t.alpha.back()) + 1, 0);
    {
        std::int64_t acc = 0;
        for (std::int64_t k = 1; k <= t.alpha.back(); ++k) {
            col_start[static_cast<std::size_t>(k - 1)] = acc;
            acc += block_length(t, k);
        }
    }
    auto column_of = [&](std::int64_t k, int shell) {
        return col_start[static_cast<std::size_t>(k - 1)] + (shell - level_index(t, k));
    };

    // shell-by-shell construction; vectors stored over shell-local coordinates
    std::vector<std::vector<double>> current;  // current[k-1], length alpha[n]
    current.push_back({1.0});                  // root shell

    auto store = [&](int shell, std::int64_t k, const std::vector<double>& e) {
        const std::int64_t col = column_of(k, shell);
        const std::int64_t base = t.shell_offset[static_cast<std::size_t>(shell)];
        for (std::size_t i = 0; i < e.size(); ++i)
            basis.u[static_cast<std::size_t>(col) * dim + base + static_cast<std::int64_t>(i)] = e[i];
        basis.columns[static_cast<std::size_t>(col)] = {k, shell};
    };
    store(0, 1, current[0]);

    for (int n = 0; n < D; ++n) {
        const std::int64_t an = t.alpha[static_cast<std::size_t>(n)];
        const std::int64_t an1 = t.alpha[static_cast<std::size_t>(n) + 1];
        const std::int64_t g = t.g[static_cast<std::size_t>(n)];
        const double inv_norm = 1.0 / std::sqrt(static_cast<double>(g));
        std::vector<std::vector<double>> next;
        next.reserve(static_cast<std::size_t>(an1));

        // propagate: each child copies its parent's value, normalized by sqrt(g)
        for (std::int64_t k = 1; k <= an; ++k) {
            const auto& e = current[static_cast<std::size_t>(k - 1)];
            std::vector<double> e1(static_cast<std::size_t>(an1), 0.0);
            for (std::int64_t child = 0; child < an1; ++child)
                e1[static_cast<std::size_t>(child)] =
                    e[static_cast<std::size_t>(child / g)] * inv_norm;
            next.push_back(std::move(e1));
        }
        // complement: orthogonalize coordinate seeds of the new shell
        std::int64_t seed = 0;
        for (std::int64_t k = an + 1; k <= an1; ++k) {
            std::vector<double> v;
            double nrm = 0;
            for (; seed < an1; ++seed) {
                v.assign(static_cast<std::size_t>(an1), 0.0);
                v[static_cast<std::size_t>(seed)] = 1.0;
                for (int pass = 0; pass < 2; ++pass) {  // modified GS + reorthogonalization
                    for (const auto& e : next) {
                        double dot = 0;
                        for (std::size_t i = 0; i < v.size(); ++i) dot += e[i] * v[i];
                        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * e[i];
                    }
                }
                nrm = 0;
                for (double x : v) nrm += x * x;
                nrm = std::sqrt(nrm);
                if (nrm >= 1e-10) { ++seed; break; }
            }
            if (nrm < 1e-10)
                throw NumericalRankError("no independent seed for shell " +
                                         std::to_string(n + 1));
            for (double& x : v) x /= nrm;
            next.push_back(std::move(v));
        }
        for (std::int64_t k = 1; k <= an1; ++k)
            store(n + 1, k, next[static_cast<std::size_t>(k - 1)]);
        current = std::move(next);
    }
    return basis;
}

namespace {

Eigen::MatrixXd dense_laplacian(const ShTree& t) {
    auto L = tree::assemble_laplacian(t);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(L.dimension, L.dimension);
    for (std::int64_t i = 0; i < L.dimension; ++i)
        h(i, i) = L.diag[static_cast<std::size_t>(i)];
    for (auto& [p, c] : L.edges) {
        h(p, c) = -1.0;
        h(c, p) = -1.0;
    }
    return h;
}

} // namespace

EquivalenceReport verify_equivalence(const ShTree& t, std::int64_t dense_limit) {
    const auto basis = build_cons_unitary(t, dense_limit);
    const std::int64_t dim = basis.dimension;
    Eigen::Map<const Eigen::MatrixXd> u(basis.u.data(), dim, dim);

    EquivalenceReport rep;
    rep.blocks = t.alpha.back();
    rep.orthonormality = (u.transpose() * u - Eigen::MatrixXd::Identity(dim, dim))
                             .cwiseAbs().maxCoeff();

    Eigen::MatrixXd h = dense_laplacian(t);
    Eigen::MatrixXd m = u.transpose() * h * u;

    // expected block pattern
    std::vector<jacobi::JacobiCoeffs> blocks;
    std::vector<std::int64_t> start;  // first column of each block
    {
        std::int64_t col = 0;
        for (std::int64_t k = 1; k <= t.alpha.back(); ++k) {
            start.push_back(col);
            std::int64_t len = block_length(t, k);
            blocks.push_back(jacobi_coeffs(t, k, len));
            col += len;
        }
    }
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const auto& c = blocks[bi];
        const std::int64_t s = start[bi];
        for (std::size_t i = 0; i < c.size(); ++i) {
            expected(s + static_cast<std::int64_t>(i), s + static_cast<std::int64_t>(i)) = c.d[i];
            if (i + 1 < c.size()) {
                expected(s + static_cast<std::int64_t>(i), s + static_cast<std::int64_t>(i) + 1) = -c.b[i];
                expected(s + static_cast<std::int64_t>(i) + 1, s + static_cast<std::int64_t>(i)) = -c.b[i];
            }
        }
    }
    for (std::int64_t i = 0; i < dim; ++i)
        for (std::int64_t j = 0; j < dim; ++j) {
            if (expected(i, j) != 0.0)
                rep.in_block = std::max(rep.in_block, std::abs(m(i, j) - expected(i, j)));
            else
                rep.off_block = std::max(rep.off_block, std::abs(m(i, j)));
        }

    // eigenvalue multisets
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    std::vector<double> full(es.eigenvalues().data(), es.eigenvalues().data() + dim);
    std::vector<double> parts;
    parts.reserve(static_cast<std::size_t>(dim));
    for (const auto& c : blocks) {
        auto bl = jacobi::eigendecompose(c, static_cast<std::size_t>(dim));
        parts.insert(parts.end(), bl.values.begin(), bl.values.end());
    }
    std::sort(parts.begin(), parts.end());
    for (std::size_t i = 0; i < full.size(); ++i)
        rep.eigen_linf = std::max(rep.eigen_linf, std::abs(full[i] - parts[i]));
    return rep;
}

} // namespace sptree::decompose
