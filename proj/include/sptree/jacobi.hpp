#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace sptree::jacobi {

using cdouble = std::complex<double>;

/// One half-line Jacobi block: symmetric tridiagonal with diagonal d and
/// off-diagonal entries -b (b > 0 for tree-derived blocks, b >= 0 allowed
/// for synthetic ones).
///
/// Tree-derived blocks carry the integer data they were generated from
/// (d_exact and the branching numbers g_exact behind b = sqrt(g)), so the
/// structural identity d(n) = b(n)^2 + 1 - [k==1][n==1] can be checked in
/// exact integer arithmetic. Synthetic blocks leave those vectors empty.
struct JacobiCoeffs {
    int k = 1;           // block index (1-based)
    int offset = 0;      // shell where the block starts, N(k)
    std::vector<double> d;   // length N
    std::vector<double> b;   // length N-1
    std::vector<std::int64_t> d_exact;  // optional, length N
    std::vector<std::int64_t> g_exact;  // optional, length N-1

    std::size_t size() const { return d.size(); }

    /// Gershgorin bounds on the spectrum.
    std::pair<double, double> spectral_hull() const;

    /// y = H x
    std::vector<double> apply(const std::vector<double>& x) const;
};

/// Free half-line block: d = 2, b = 1 (length N).
JacobiCoeffs free_block(std::size_t n);

/// Atomic spectral measure of a truncated operator with respect to a state.
struct SpectralMeasure {
    std::vector<double> lambda;  // strictly increasing after merging
    std::vector<double> weight;  // nonnegative
    double total = 0;            // sum of weights

    std::size_t size() const { return lambda.size(); }
    /// mu([lo, hi]) by binary search over atoms.
    double mass(double lo, double hi) const;
};

struct EigenSystem {
    std::vector<double> values;          // ascending
    std::vector<double> vectors;         // column-major, N x N
    std::size_t n = 0;
    double vec(std::size_t row, std::size_t col) const { return vectors[col * n + row]; }
};

inline constexpr std::size_t kDenseLimit = 4000;

/// Solves (H - z) u = v for Im z != 0 in O(N); the solution is verified and
/// refined until the residual is below 1e-10 * ||v||.
std::vector<cdouble> resolvent_apply(const JacobiCoeffs& coeffs, cdouble z,
                                     const std::vector<cdouble>& v);

/// Workspace-reusing tridiagonal solver for resolvent sweeps. No residual
/// check; accuracy of sweeps is controlled by their own invariants.
class ShiftedSolver {
public:
    explicit ShiftedSolver(const JacobiCoeffs& coeffs);
    /// u = (H - z)^{-1} v, unchecked.
    void solve(cdouble z, const std::vector<cdouble>& v, std::vector<cdouble>& u);

private:
    const JacobiCoeffs& coeffs_;
    std::vector<cdouble> piv_, y_;
};

EigenSystem eigendecompose(const JacobiCoeffs& coeffs,
                           std::size_t dense_limit = kDenseLimit);

SpectralMeasure spectral_measure(const JacobiCoeffs& coeffs,
                                 const std::vector<double>& psi,
                                 std::size_t dense_limit = kDenseLimit);

SpectralMeasure measure_from_eigensystem(const EigenSystem& es,
                                         const std::vector<double>& psi);

/// Borel transform sum_i w_i / (lambda_i - z); Herglotz for Im z > 0.
cdouble m_function(const SpectralMeasure& mu, cdouble z);

/// Consistency report for the shift-operator factorization of H.
/// P f(n) = b(n) f(n+1), Delta = P - I, M_beta f(n) = beta^n f(n).
struct ShiftOpsReport {
    double dev_factorization = 0;  // H f vs (Delta Delta* - corner) f
    double dev_adjoint = 0;        // <P g, f> vs <g, P* f>
    double dev_delta_beta = 0;     // M^{-1} Delta M f vs (beta P - I) f
    double dev_delta_star_beta = 0;
    double max() const;
};

ShiftOpsReport shift_ops_check(const JacobiCoeffs& coeffs, double beta,
                               const std::vector<double>& f);

/// Quantities of the resolvent kernel bound at a complex energy z:
/// eta = dist(z, spectrum), m = eta / (sqrt(eta + |z|) + 1),
/// alpha(gamma) = (gamma m + sqrt((gamma m)^2 + 16)) / 4.
struct KernelBoundParams {
    double eta = 0;
    double m = 0;
    double gamma = 0;
    double alpha() const;
    /// Bound on |<delta_i, (H - z)^{-1} delta_j>|.
    double bound(std::int64_t dist) const;
};

KernelBoundParams kernel_bound_params(const std::vector<double>& spectrum,
                                      cdouble z, double gamma);

struct KernelBoundEntry {
    std::size_t i = 0, j = 0;
    double lhs = 0, rhs = 0;
    bool violated = false;
};

struct KernelBoundReport {
    KernelBoundParams params;
    std::vector<KernelBoundEntry> entries;
    bool any_violation = false;
    double worst_margin = 0;  // max lhs/rhs
};

KernelBoundReport kernel_bound_check(const JacobiCoeffs& coeffs, cdouble z,
                                     double gamma,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                     std::size_t dense_limit = kDenseLimit);

/// Block equal to `coeffs` through index cut, free (d = 2, b = 1) beyond.
JacobiCoeffs truncated_free(const JacobiCoeffs& coeffs, std::size_t cut,
                            std::size_t size);

} // namespace sptree::jacobi
