#pragma once

#include "sptree/jacobi.hpp"
#include "sptree/tree.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace sptree::transfer {

using cdouble = std::complex<double>;

/// 2x2 complex matrix in row-major order.
struct Mat2 {
    std::array<cdouble, 4> a{};  // [ a00 a01 ; a10 a11 ]

    cdouble det() const { return a[0] * a[3] - a[1] * a[2]; }
    /// Spectral norm from the closed-form 2x2 singular values.
    double norm() const;
    double max_abs() const;
    Mat2 inverse() const;

    friend Mat2 operator*(const Mat2& x, const Mat2& y);
    std::array<cdouble, 2> operator*(const std::array<cdouble, 2>& v) const;
};

/// Product with a power-of-two exponent carried separately, so norms of
/// products across large gaps stay representable.
struct ScaledMat2 {
    Mat2 m;
    std::int64_t exp2 = 0;

    void normalize();
    double log2_norm() const;
    /// Plain matrix; throws OverflowError if any entry would exceed 1e300.
    Mat2 to_mat2() const;
};

/// One-step transfer matrix of the three-term recursion at shell n, built from
/// a forward branching sequence. g must cover indices n-1 and n (index -1 and
/// the n = 0 case use the root convention g = 1).
Mat2 transfer_matrix(const std::vector<std::int64_t>& g, cdouble z, std::int64_t n);

/// Ordered product T(n) T(n-1) ... T(m).
Mat2 transfer_product(const std::vector<std::int64_t>& g, cdouble z,
                      std::int64_t n, std::int64_t m);

ScaledMat2 transfer_product_scaled(const std::vector<std::int64_t>& g, cdouble z,
                                   std::int64_t n, std::int64_t m);

/// || (T(n) ... T(m))^{-1} ||, evaluated from inverse factors in reverse order.
double inverse_product_norm(const std::vector<std::int64_t>& g, cdouble z,
                            std::int64_t n, std::int64_t m, double* log2_out = nullptr);

struct RecursionReport {
    double max_rel_dev = 0;     // transfer-propagated vs resolvent column
    std::size_t compared = 0;   // sites before the overflow guard tripped
    cdouble m_value;            // boundary value f(1)
};

/// Propagates the resolvent column of delta_1 by the three-term recursion from
/// (f(0), f(1)) = (1, m(z)) and compares against the directly solved column.
RecursionReport recursion_consistency(const jacobi::JacobiCoeffs& coeffs, cdouble z,
                                      std::size_t n_max,
                                      std::size_t dense_limit = jacobi::kDenseLimit);

struct InverseNormEntry {
    std::int64_t n = 0;
    double norm = 0;            // ||S_z(n)^{-1}||
    double structural = 0;      // prod_j L_j^{(1-Gamma)/(2 Gamma)} over crossed barriers
    std::int64_t barriers = 0;  // m
    double c_fit = 0;           // (norm / structural)^{1/(m+1)}
};

struct InverseNormReport {
    std::vector<InverseNormEntry> entries;
    double c_fit_max = 0;
    double c_fit_min = 0;
};

/// Sweeps n over [1, n_max] at fixed z = E + i*eps (E in (0,4), n*eps < K) and
/// fits the per-barrier constant implied by the inverse-norm bound.
InverseNormReport inverse_norm_bound_check(const tree::TreeParams& params, cdouble z,
                                           double big_k, std::int64_t n_max);

} // namespace sptree::transfer
