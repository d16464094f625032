#include "sptree/jacobi.hpp"

#include "sptree/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sptree::jacobi {

std::pair<double, double> JacobiCoeffs::spectral_hull() const {
    const std::size_t n = size();
    double lo = 0, hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double off = 0;
        if (i > 0) off += std::abs(b[i - 1]);
        if (i + 1 < n) off += std::abs(b[i]);
        lo = std::min(lo, d[i] - off);
        hi = std::max(hi, d[i] + off);
        if (i == 0) { lo = d[i] - off; hi = d[i] + off; }
    }
    return {lo, hi};
}

std::vector<double> JacobiCoeffs::apply(const std::vector<double>& x) const {
    const std::size_t n = size();
    if (x.size() != n) throw RangeError("apply: vector length mismatch");
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double v = d[i] * x[i];
        if (i > 0) v -= b[i - 1] * x[i - 1];
        if (i + 1 < n) v -= b[i] * x[i + 1];
        y[i] = v;
    }
    return y;
}

JacobiCoeffs free_block(std::size_t n) {
    JacobiCoeffs c;
    c.k = 2;  // no corner correction
    c.offset = 1;
    c.d.assign(n, 2.0);
    c.b.assign(n > 0 ? n - 1 : 0, 1.0);
    return c;
}

double SpectralMeasure::mass(double lo, double hi) const {
    auto first = std::lower_bound(lambda.begin(), lambda.end(), lo);
    auto last = std::upper_bound(lambda.begin(), lambda.end(), hi);
    double s = 0;
    for (auto it = first; it != last; ++it)
        s += weight[static_cast<std::size_t>(it - lambda.begin())];
    return s;
}

// ---------------------------------------------------------------------------
// resolvent solves

namespace {

// Thomas elimination without pivoting. Returns the smallest pivot magnitude
// relative to its row scale.
double thomas(const JacobiCoeffs& c, cdouble z, const std::vector<cdouble>& v,
              std::vector<cdouble>& u, std::vector<cdouble>& piv,
              std::vector<cdouble>& y) {
    const std::size_t n = c.size();
    piv.resize(n);
    y.resize(n);
    u.resize(n);
    double worst = std::numeric_limits<double>::infinity();
    cdouble p = c.d[0] - z;
    piv[0] = p;
    y[0] = v[0];
    {
        double scale = std::abs(c.d[0] - z) + (n > 1 ? std::abs(c.b[0]) : 0.0);
        worst = std::min(worst, std::abs(p) / std::max(scale, 1e-300));
        if (std::abs(p) < 1e-300)
            throw SingularSolveError("pivot underflow in tridiagonal solve");
    }
    for (std::size_t i = 1; i < n; ++i) {
        const double bi = c.b[i - 1];
        const cdouble w = bi / piv[i - 1];  // elimination multiplier (sign folded)
        p = (c.d[i] - z) - bi * w;
        piv[i] = p;
        y[i] = v[i] + w * y[i - 1];  // off-diagonal is -b
        double scale = std::abs(c.d[i] - z) + bi + (i + 1 < n ? std::abs(c.b[i]) : 0.0);
        worst = std::min(worst, std::abs(p) / std::max(scale, 1e-300));
        if (std::abs(p) < 1e-300)
            throw SingularSolveError("pivot underflow in tridiagonal solve");
    }
    u[n - 1] = y[n - 1] / piv[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        u[i] = (y[i] + c.b[i] * u[i + 1]) / piv[i];
    return worst;
}

// Banded LU with partial pivoting (one extra superdiagonal of fill-in).
void pivoted_tridiag(const JacobiCoeffs& c, cdouble z,
                     const std::vector<cdouble>& v, std::vector<cdouble>& u) {
    const std::size_t n = c.size();
    std::vector<cdouble> dl(n, 0), dm(n, 0), du(n, 0), du2(n, 0), rhs = v;
    for (std::size_t i = 0; i < n; ++i) {
        dm[i] = c.d[i] - z;
        if (i > 0) dl[i] = -c.b[i - 1];
        if (i + 1 < n) du[i] = -c.b[i];
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(dl[i + 1]) > std::abs(dm[i])) {
            std::swap(dm[i], dl[i + 1]);
            std::swap(du[i], dm[i + 1]);
            std::swap(du2[i], du[i + 1]);
            std::swap(rhs[i], rhs[i + 1]);
        }
        if (std::abs(dm[i]) < 1e-300)
            throw SingularSolveError("pivot underflow in pivoted tridiagonal solve");
        const cdouble m = dl[i + 1] / dm[i];
        dm[i + 1] -= m * du[i];
        du[i + 1] -= m * du2[i];
        rhs[i + 1] -= m * rhs[i];
    }
    if (std::abs(dm[n - 1]) < 1e-300)
        throw SingularSolveError("pivot underflow in pivoted tridiagonal solve");
    u.resize(n);
    u[n - 1] = rhs[n - 1] / dm[n - 1];
    if (n >= 2) u[n - 2] = (rhs[n - 2] - du[n - 2] * u[n - 1]) / dm[n - 2];
    if (n >= 3)
        for (std::size_t j = n - 2; j-- > 0;)
            u[j] = (rhs[j] - du[j] * u[j + 1] - du2[j] * u[j + 2]) / dm[j];
}

double residual_norm(const JacobiCoeffs& c, cdouble z,
                     const std::vector<cdouble>& u, const std::vector<cdouble>& v,
                     std::vector<cdouble>& r) {
    const std::size_t n = c.size();
    r.resize(n);
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cdouble w = (c.d[i] - z) * u[i];
        if (i > 0) w -= c.b[i - 1] * u[i - 1];
        if (i + 1 < n) w -= c.b[i] * u[i + 1];
        r[i] = v[i] - w;
        s += std::norm(r[i]);
    }
    return std::sqrt(s);
}

} // namespace

std::vector<cdouble> resolvent_apply(const JacobiCoeffs& coeffs, cdouble z,
                                     const std::vector<cdouble>& v) {
    if (z.imag() == 0.0) throw ParamError("resolvent_apply requires Im z != 0");
    if (v.size() != coeffs.size()) throw RangeError("resolvent_apply: length mismatch");
    if (coeffs.size() == 0) return {};

    std::vector<cdouble> u, piv, y;
    double worst = thomas(coeffs, z, v, u, piv, y);
    if (worst < 1e-8) {
        // near-real shift or strong cancellation: redo with partial pivoting
        pivoted_tridiag(coeffs, z, v, u);
    }
    double vnorm = std::sqrt(std::accumulate(v.begin(), v.end(), 0.0,
        [](double s, cdouble x) { return s + std::norm(x); }));
    if (vnorm == 0.0) return u;
    std::vector<cdouble> r, du, p2, y2;
    for (int pass = 0; pass < 3; ++pass) {
        if (residual_norm(coeffs, z, u, v, r) <= 1e-10 * vnorm) return u;
        thomas(coeffs, z, r, du, p2, y2);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] += du[i];
    }
    if (residual_norm(coeffs, z, u, v, r) > 1e-10 * vnorm)
        throw SingularSolveError("resolvent residual did not converge");
    return u;
}

ShiftedSolver::ShiftedSolver(const JacobiCoeffs& coeffs) : coeffs_(coeffs) {}

void ShiftedSolver::solve(cdouble z, const std::vector<cdouble>& v,
                          std::vector<cdouble>& u) {
    thomas(coeffs_, z, v, u, piv_, y_);
}

// ---------------------------------------------------------------------------
// eigendecomposition and spectral measures

EigenSystem eigendecompose(const JacobiCoeffs& coeffs, std::size_t dense_limit) {
    const std::size_t n = coeffs.size();
    if (n > dense_limit)
        throw DenseLimitError("eigendecompose: size " + std::to_string(n) +
                              " exceeds dense limit " + std::to_string(dense_limit));
    EigenSystem es;
    es.n = n;
    if (n == 0) return es;
    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(coeffs.d.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 0 ? n - 1 : 0));
    for (std::size_t i = 0; i + 1 < n; ++i) sub[static_cast<Eigen::Index>(i)] = -coeffs.b[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw Error("tridiagonal eigensolver failed to converge");
    es.values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    es.vectors.assign(solver.eigenvectors().data(), solver.eigenvectors().data() + n * n);
    return es;
}

SpectralMeasure measure_from_eigensystem(const EigenSystem& es,
                                         const std::vector<double>& psi) {
    if (psi.size() != es.n) throw RangeError("measure: state length mismatch");
    double nrm2 = 0;
    for (double x : psi) nrm2 += x * x;
    if (nrm2 == 0.0) throw ZeroStateError("spectral_measure of the zero state");

    double radius = 0;
    for (double v : es.values) radius = std::max(radius, std::abs(v));
    const double tol = 1e-12 * std::max(radius, 1.0);

    SpectralMeasure mu;
    std::size_t i = 0;
    while (i < es.n) {
        std::size_t j = i;
        double w = 0, lw = 0;
        while (j < es.n && es.values[j] - es.values[i] <= tol) {
            double c = 0;
            for (std::size_t r = 0; r < es.n; ++r) c += es.vec(r, j) * psi[r];
            w += c * c;
            lw += (c * c) * es.values[j];
            ++j;
        }
        mu.lambda.push_back(w > 0 ? lw / w : es.values[i]);
        mu.weight.push_back(w);
        i = j;
    }
    mu.total = std::accumulate(mu.weight.begin(), mu.weight.end(), 0.0);
    return mu;
}

SpectralMeasure spectral_measure(const JacobiCoeffs& coeffs,
                                 const std::vector<double>& psi,
                                 std::size_t dense_limit) {
    return measure_from_eigensystem(eigendecompose(coeffs, dense_limit), psi);
}

cdouble m_function(const SpectralMeasure& mu, cdouble z) {
    cdouble s = 0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        s += mu.weight[i] / (mu.lambda[i] - z);
    return s;
}

// ---------------------------------------------------------------------------
// shift-operator factorization

namespace {

std::vector<double> apply_p(const JacobiCoeffs& c, const std::vector<double>& f) {
    const std::size_t n = c.size();
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) y[i] = c.b[i] * f[i + 1];
    return y;
}

std::vector<double> apply_p_star(const JacobiCoeffs& c, const std::vector<double>& f) {
    const std::size_t n = c.size();
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) y[i] = c.b[i - 1] * f[i - 1];
    return y;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

double ShiftOpsReport::max() const {
    return std::max(std::max(dev_factorization, dev_adjoint),
                    std::max(dev_delta_beta, dev_delta_star_beta));
}

ShiftOpsReport shift_ops_check(const JacobiCoeffs& coeffs, double beta,
                               const std::vector<double>& f) {
    if (beta <= 0) throw ParamError("beta must be positive");
    const std::size_t n = coeffs.size();
    if (f.size() != n) throw RangeError("shift_ops_check: length mismatch");

    std::size_t top = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (f[i] != 0.0) top = i + 1;
    if (top > 0) {
        double extreme = static_cast<double>(top + 1) * std::abs(std::log(beta));
        if (extreme > 690.0)
            throw OverflowError("beta^n exceeds floating range on the support of f");
    }

    ShiftOpsReport rep;

    // H = Delta Delta^* (minus the corner correction when k = 1)
    auto pf = apply_p(coeffs, f);
    auto psf = apply_p_star(coeffs, f);
    std::vector<double> dstar(n), lhs(n);
    for (std::size_t i = 0; i < n; ++i) dstar[i] = psf[i] - f[i];
    auto pds = apply_p(coeffs, dstar);
    for (std::size_t i = 0; i < n; ++i) lhs[i] = pds[i] - dstar[i];
    if (coeffs.k == 1 && n > 0) lhs[0] -= f[0];
    rep.dev_factorization = max_abs_diff(lhs, coeffs.apply(f));

    // adjoint pairing against a deterministic companion vector
    std::vector<double> gvec(n);
    for (std::size_t i = 0; i < n; ++i)
        gvec[i] = std::sin(0.7 * static_cast<double>(i + 1)) + 0.3;
    auto pg = apply_p(coeffs, gvec);
    double lhs_ip = 0, rhs_ip = 0;
    for (std::size_t i = 0; i < n; ++i) {
        lhs_ip += pg[i] * f[i];
        rhs_ip += gvec[i] * psf[i];
    }
    rep.dev_adjoint = std::abs(lhs_ip - rhs_ip);

    // conjugation by M_beta
    std::vector<double> mf(n), t(n);
    for (std::size_t i = 0; i < n; ++i)
        mf[i] = std::pow(beta, static_cast<double>(i + 1)) * f[i];
    auto pmf = apply_p(coeffs, mf);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = std::pow(beta, -static_cast<double>(i + 1)) * (pmf[i] - mf[i]);
    std::vector<double> expect(n);
    for (std::size_t i = 0; i < n; ++i) expect[i] = beta * pf[i] - f[i];
    rep.dev_delta_beta = max_abs_diff(t, expect);

    auto psmf = apply_p_star(coeffs, mf);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = std::pow(beta, -static_cast<double>(i + 1)) * (psmf[i] - mf[i]);
    for (std::size_t i = 0; i < n; ++i) expect[i] = psf[i] / beta - f[i];
    rep.dev_delta_star_beta = max_abs_diff(t, expect);

    return rep;
}

// ---------------------------------------------------------------------------
// resolvent kernel bound

double KernelBoundParams::alpha() const {
    double gm = gamma * m;
    return 0.25 * (gm + std::sqrt(gm * gm + 16.0));
}

double KernelBoundParams::bound(std::int64_t dist) const {
    return std::pow(alpha(), -static_cast<double>(std::abs(dist))) / eta *
           std::pow((1.0 + gamma) / (1.0 - gamma), 2.0);
}

KernelBoundParams kernel_bound_params(const std::vector<double>& spectrum,
                                      cdouble z, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ParamError("gamma must lie in (0,1)");
    double eta = std::numeric_limits<double>::infinity();
    for (double lam : spectrum) eta = std::min(eta, std::abs(z - lam));
    KernelBoundParams p;
    p.eta = eta;
    p.m = eta / (std::sqrt(eta + std::abs(z)) + 1.0);
    p.gamma = gamma;
    return p;
}

KernelBoundReport kernel_bound_check(const JacobiCoeffs& coeffs, cdouble z, double gamma,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                     std::size_t dense_limit) {
    auto es = eigendecompose(coeffs, dense_limit);
    KernelBoundReport rep;
    rep.params = kernel_bound_params(es.values, z, gamma);

    const std::size_t n = coeffs.size();
    std::vector<std::size_t> cols;
    for (auto& [i, j] : pairs) {
        if (i >= n || j >= n) throw RangeError("kernel_bound_check: pair out of range");
        cols.push_back(j);
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());

    std::vector<std::vector<cdouble>> columns(n);
    std::vector<cdouble> e(n, 0.0);
    for (std::size_t j : cols) {
        e.assign(n, 0.0);
        e[j] = 1.0;
        columns[j] = resolvent_apply(coeffs, z, e);
    }
    for (auto& [i, j] : pairs) {
        KernelBoundEntry ent;
        ent.i = i;
        ent.j = j;
        ent.lhs = std::abs(columns[j][i]);
        ent.rhs = rep.params.bound(static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j));
        ent.violated = ent.lhs > ent.rhs * (1.0 + 1e-9);
        rep.any_violation = rep.any_violation || ent.violated;
        rep.worst_margin = std::max(rep.worst_margin, ent.lhs / ent.rhs);
        rep.entries.push_back(ent);
    }
    return rep;
}

JacobiCoeffs truncated_free(const JacobiCoeffs& coeffs, std::size_t cut,
                            std::size_t size) {
    if (cut > size)
        throw RangeError("truncated_free: cut exceeds the requested size");
    JacobiCoeffs out;
    out.k = coeffs.k;
    out.offset = coeffs.offset;
    out.d.resize(size);
    out.b.resize(size > 0 ? size - 1 : 0);
    for (std::size_t i = 0; i < size; ++i)
        out.d[i] = (i < cut && i < coeffs.d.size()) ? coeffs.d[i] : 2.0;
    for (std::size_t i = 0; i + 1 < size; ++i)
        out.b[i] = (i < cut && i < coeffs.b.size()) ? coeffs.b[i] : 1.0;
    return out;
}

} // namespace sptree::jacobi
