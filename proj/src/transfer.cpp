#include "sptree/transfer.hpp"

#include "sptree/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sptree::transfer {

double Mat2::norm() const {
    // largest singular value of a 2x2: sqrt of the top eigenvalue of M^H M
    double a00 = std::norm(a[0]) + std::norm(a[2]);
    double a11 = std::norm(a[1]) + std::norm(a[3]);
    cdouble a01 = std::conj(a[0]) * a[1] + std::conj(a[2]) * a[3];
    double mean = 0.5 * (a00 + a11);
    double disc = std::sqrt(0.25 * (a00 - a11) * (a00 - a11) + std::norm(a01));
    return std::sqrt(std::max(0.0, mean + disc));
}

double Mat2::max_abs() const {
    double m = 0;
    for (auto& x : a) m = std::max(m, std::abs(x));
    return m;
}

Mat2 Mat2::inverse() const {
    cdouble dt = det();
    if (std::abs(dt) < 1e-300) throw SingularSolveError("singular 2x2 matrix");
    return Mat2{{a[3] / dt, -a[1] / dt, -a[2] / dt, a[0] / dt}};
}

Mat2 operator*(const Mat2& x, const Mat2& y) {
    return Mat2{{x.a[0] * y.a[0] + x.a[1] * y.a[2], x.a[0] * y.a[1] + x.a[1] * y.a[3],
                 x.a[2] * y.a[0] + x.a[3] * y.a[2], x.a[2] * y.a[1] + x.a[3] * y.a[3]}};
}

std::array<cdouble, 2> Mat2::operator*(const std::array<cdouble, 2>& v) const {
    return {a[0] * v[0] + a[1] * v[1], a[2] * v[0] + a[3] * v[1]};
}

void ScaledMat2::normalize() {
    double mx = m.max_abs();
    if (mx == 0.0) return;
    int e = 0;
    std::frexp(mx, &e);
    if (e > 256 || e < -256) {
        double s = std::ldexp(1.0, -e);
        for (auto& x : m.a) x *= s;
        exp2 += e;
    }
}

double ScaledMat2::log2_norm() const {
    return std::log2(std::max(m.norm(), 1e-300)) + static_cast<double>(exp2);
}

Mat2 ScaledMat2::to_mat2() const {
    double l2 = std::log2(std::max(m.max_abs(), 1e-300)) + static_cast<double>(exp2);
    if (l2 > 996.0)  // 1e300
        throw OverflowError("transfer product entry exceeds 1e300");
    double s = std::ldexp(1.0, static_cast<int>(exp2));
    Mat2 out = m;
    for (auto& x : out.a) x *= s;
    return out;
}

namespace {

std::int64_t g_at(const std::vector<std::int64_t>& g, std::int64_t n) {
    if (n < 0) return 1;  // root convention
    if (static_cast<std::size_t>(n) >= g.size())
        throw RangeError("branching sequence not defined at shell " + std::to_string(n));
    return g[static_cast<std::size_t>(n)];
}

} // namespace

Mat2 transfer_matrix(const std::vector<std::int64_t>& g, cdouble z, std::int64_t n) {
    if (n < 0) throw RangeError("transfer_matrix: shell index must be >= 0");
    if (n == 0) return Mat2{{0.0, 1.0, -1.0, 1.0 - z}};
    double gn = static_cast<double>(g_at(g, n));
    double gp = static_cast<double>(g_at(g, n - 1));
    double rt = std::sqrt(gn);
    return Mat2{{0.0, 1.0, -std::sqrt(gp / gn), (gn + 1.0 - z) / rt}};
}

ScaledMat2 transfer_product_scaled(const std::vector<std::int64_t>& g, cdouble z,
                                   std::int64_t n, std::int64_t m) {
    if (n < m) throw RangeError("transfer_product: need n >= m");
    ScaledMat2 acc{Mat2{{1.0, 0.0, 0.0, 1.0}}, 0};
    for (std::int64_t j = m; j <= n; ++j) {
        acc.m = transfer_matrix(g, z, j) * acc.m;
        acc.normalize();
    }
    return acc;
}

Mat2 transfer_product(const std::vector<std::int64_t>& g, cdouble z,
                      std::int64_t n, std::int64_t m) {
    if (n < m) throw RangeError("transfer_product: need n >= m");
    Mat2 acc{{1.0, 0.0, 0.0, 1.0}};
    for (std::int64_t j = m; j <= n; ++j) {
        acc = transfer_matrix(g, z, j) * acc;
        if (acc.max_abs() > 1e300)
            throw OverflowError("transfer product overflow at index " + std::to_string(j));
    }
    return acc;
}

double inverse_product_norm(const std::vector<std::int64_t>& g, cdouble z,
                            std::int64_t n, std::int64_t m, double* log2_out) {
    if (n < m) throw RangeError("inverse_product_norm: need n >= m");
    ScaledMat2 acc{Mat2{{1.0, 0.0, 0.0, 1.0}}, 0};
    for (std::int64_t j = n; j >= m; --j) {
        acc.m = acc.m * transfer_matrix(g, z, j).inverse();  // reverse order
        acc.normalize();
    }
    double l2 = acc.log2_norm();
    if (log2_out) *log2_out = l2;
    if (l2 > 996.0) throw OverflowError("inverse product norm exceeds 1e300");
    return std::ldexp(acc.m.norm(), static_cast<int>(acc.exp2));
}

RecursionReport recursion_consistency(const jacobi::JacobiCoeffs& coeffs, cdouble z,
                                      std::size_t n_max, std::size_t dense_limit) {
    if (z.imag() <= 0) throw ParamError("recursion_consistency requires Im z > 0");
    const std::size_t n = coeffs.size();
    n_max = std::min(n_max, n > 0 ? n - 1 : 0);

    // resolvent column, solved directly
    std::vector<cdouble> e1(n, 0.0);
    e1[0] = 1.0;
    auto col = jacobi::resolvent_apply(coeffs, z, e1);

    // boundary value from the spectral measure (independent of the solve)
    std::vector<double> delta1(n, 0.0);
    delta1[0] = 1.0;
    auto mu = jacobi::spectral_measure(coeffs, delta1, dense_limit);
    cdouble mz = jacobi::m_function(mu, z);

    RecursionReport rep;
    rep.m_value = mz;
    // three-term recursion with boundary weight 1 below the origin:
    // b(n) f(n+1) = (d(n) - z) f(n) - b(n-1) f(n-1), b(0) = 1
    cdouble fprev = 1.0, fcur = mz;
    double scale = 0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(col[i]));
    for (std::size_t i = 1; i <= n_max; ++i) {
        double dev = std::abs(fcur - col[i - 1]);
        rep.max_rel_dev = std::max(rep.max_rel_dev, dev / scale);
        rep.compared = i;
        if (i == n_max) break;
        double blo = (i >= 2) ? coeffs.b[i - 2] : 1.0;
        cdouble fnext = ((coeffs.d[i - 1] - z) * fcur - blo * fprev) / coeffs.b[i - 1];
        if (std::abs(fnext) > 1e300)
            throw OverflowError("recursion overflow at site " + std::to_string(i + 1));
        fprev = fcur;
        fcur = fnext;
    }
    return rep;
}

InverseNormReport inverse_norm_bound_check(const tree::TreeParams& params, cdouble z,
                                           double big_k, std::int64_t n_max) {
    params.validate();
    double E = z.real(), eps = z.imag();
    if (!(E > 0 && E < 4)) throw ParamError("inverse_norm_bound_check requires E in (0,4)");
    if (!(eps > 0)) throw ParamError("inverse_norm_bound_check requires eps > 0");
    if (static_cast<double>(n_max) * eps >= big_k)
        throw HypothesisWindowError("n*eps < K violated at the sweep end");

    std::vector<std::int64_t> g(static_cast<std::size_t>(n_max) + 1);
    for (std::int64_t i = 0; i <= n_max; ++i)
        g[static_cast<std::size_t>(i)] = tree::sparse_branching(params, i);

    const double expo = (1.0 - params.gamma) / (2.0 * params.gamma);

    InverseNormReport rep;
    rep.c_fit_min = std::numeric_limits<double>::infinity();

    ScaledMat2 acc{Mat2{{1.0, 0.0, 0.0, 1.0}}, 0};
    double log_struct = 0;
    std::int64_t barriers = 0;
    for (std::int64_t nn = 0; nn <= n_max; ++nn) {
        acc.m = acc.m * transfer_matrix(g, z, nn).inverse();
        acc.normalize();
        if (nn >= 1 && params.is_sparse_position(nn)) {
            ++barriers;
            log_struct += expo * std::log(static_cast<double>(nn));
        }
        if (nn == 0) continue;
        InverseNormEntry ent;
        ent.n = nn;
        double l2 = acc.log2_norm();
        ent.norm = l2 > 996.0 ? std::numeric_limits<double>::infinity()
                              : std::ldexp(acc.m.norm(), static_cast<int>(acc.exp2));
        ent.structural = std::exp(log_struct);
        ent.barriers = barriers;
        double logc = (l2 * std::log(2.0) - log_struct) / static_cast<double>(barriers + 1);
        ent.c_fit = std::exp(logc);
        rep.c_fit_max = std::max(rep.c_fit_max, ent.c_fit);
        rep.c_fit_min = std::min(rep.c_fit_min, ent.c_fit);
        rep.entries.push_back(ent);
    }
    return rep;
}

} // namespace sptree::transfer
