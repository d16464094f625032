#pragma once

#include "sptree/jacobi.hpp"
#include "sptree/tree.hpp"

#include <cstdint>
#include <vector>

namespace sptree::decompose {

/// Smallest shell index N(k) with alpha_{N(k)-1} < k <= alpha_{N(k)}.
int level_index(const tree::ShTree& t, std::int64_t k);

/// Number of Jacobi sites of block k inside the truncation: D - N(k) + 1.
std::int64_t block_length(const tree::ShTree& t, std::int64_t k);

/// Jacobi coefficients of block k, truncated to n sites. The diagonal is the
/// vertex degree of the underlying shell (so the leaf shell contributes 1);
/// off-diagonal magnitudes are sqrt(g) of the shell below.
jacobi::JacobiCoeffs jacobi_coeffs(const tree::ShTree& t, std::int64_t k,
                                   std::int64_t n);

/// Shell-local orthonormal basis that block-tridiagonalizes H. Columns are
/// grouped by block index k and ordered by shell inside each block.
struct UnitaryBasis {
    std::int64_t dimension = 0;
    std::vector<double> u;  // column-major, dimension x dimension
    struct ColumnKey {
        std::int64_t k;  // block index
        int n;           // shell index
    };
    std::vector<ColumnKey> columns;

    double entry(std::int64_t row, std::int64_t col) const {
        return u[static_cast<std::size_t>(col) * dimension + row];
    }
};

inline constexpr std::int64_t kUnitaryDenseLimit = 2000;

UnitaryBasis build_cons_unitary(const tree::ShTree& t,
                                std::int64_t dense_limit = kUnitaryDenseLimit);

struct EquivalenceReport {
    double orthonormality = 0;     // max |U^T U - I|
    double off_block = 0;          // max |(U^T H U)_{ij}| outside the block pattern
    double in_block = 0;           // max deviation from the block coefficients
    double eigen_linf = 0;         // sorted-eigenvalue distance H vs direct sum
    std::int64_t blocks = 0;
};

/// Brute-force verification that U^T H U equals the direct sum of the Jacobi
/// blocks, plus a sorted-eigenvalue comparison of the two sides.
EquivalenceReport verify_equivalence(const tree::ShTree& t,
                                     std::int64_t dense_limit = kUnitaryDenseLimit);

/// Exact integer check of d(n) = g(n) + 1 - [k==1][n==1] on every distinct
/// block of the truncation; returns the number of distinct block shapes
/// checked. Throws on failure.
std::int64_t check_structural_identity(const tree::ShTree& t);

} // namespace sptree::decompose
