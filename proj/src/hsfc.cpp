#include "sptree/hsfc.hpp"

#include "sptree/errors.hpp"
#include "sptree/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sptree::hsfc {

double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double h0 = std::exp(-1.0 / t);
    double h1 = std::exp(-1.0 / (1.0 - t));
    return h0 / (h0 + h1);
}

double smoothstep_deriv(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    double h0 = std::exp(-1.0 / t);
    double h1 = std::exp(-1.0 / (1.0 - t));
    double d0 = h0 / (t * t);
    double d1 = h1 / ((1.0 - t) * (1.0 - t));
    double s = h0 + h1;
    return (d0 * h1 + h0 * d1) / (s * s);
}

namespace {

double tau_cut(double u) {
    return smoothstep(2.0 - std::abs(u));
}

double tau_cut_deriv(double u) {
    double s = smoothstep_deriv(2.0 - std::abs(u));
    return u >= 0 ? -s : s;
}

double tau_deriv_sup() {
    static const double sup = [] {
        double m = 0;
        for (int i = 0; i <= 2000; ++i)
            m = std::max(m, smoothstep_deriv(i / 2000.0));
        return m;
    }();
    return sup;
}

} // namespace

double SmoothTestFunction::operator()(double x) const {
    if (profile.active) {
        if (x <= profile.a || x >= profile.b) return 0.0;
        return profile.height * smoothstep((x - profile.a) / profile.w) *
               smoothstep((profile.b - x) / profile.w);
    }
    return series.eval(x);
}

void SmoothTestFunction::require_order(int order) const {
    if (profile.active) {
        if (order > max_jet_order)
            throw ResolutionError("derivative order " + std::to_string(order) +
                                  " exceeds the jet order limit");
        return;
    }
    for (int r = 0; r <= order; ++r)
        if (series.tail_ratio(r) > cheb::ChebSeries::deriv_tail_tol)
            throw ResolutionError("Chebyshev degree insufficient for derivative order " +
                                  std::to_string(r));
}

void SmoothTestFunction::derivs(double x, int upto, double* out) const {
    require_order(upto);
    if (profile.active) {
        taylor::plateau_bump_derivs(profile.a, profile.b, profile.w, profile.height,
                                    x, upto, out);
        return;
    }
    for (int r = 0; r <= upto; ++r) out[r] = series.deriv(r, x);
}

double SmoothTestFunction::deriv(int r, double x) const {
    if (!profile.active) return series.deriv(r, x);
    require_order(r);
    std::vector<double> buf(static_cast<std::size_t>(r) + 1);
    taylor::plateau_bump_derivs(profile.a, profile.b, profile.w, profile.height, x, r,
                                buf.data());
    return buf[static_cast<std::size_t>(r)];
}

SmoothTestFunction make_plateau_bump(double a, double b, double w, double height) {
    if (!(b > a) || !(w > 0) || 2.0 * w > (b - a))
        throw ParamError("make_plateau_bump: need a < b and 0 < w <= (b-a)/2");
    auto fn = [=](double x) {
        return height * smoothstep((x - a) / w) * smoothstep((b - x) / w);
    };
    SmoothTestFunction f;
    f.kind = Kind::generic;
    f.series = cheb::ChebSeries::fit(fn, a, b, 1e-12);
    f.sup_bound = std::abs(height);
    f.x0 = 0.5 * (a + b);
    f.profile = {true, a, b, w, height};
    return f;
}

SmoothTestFunction make_test_function(Kind kind, double nu,
                                      const TestFunctionParams& params) {
    if (!(nu > 0 && nu < 1))
        throw ParamError("make_test_function: nu must lie in (0,1)");
    const double lo = nu, hi = 4.0 - nu;
    if (kind == Kind::first) {
        double w = params.edge_fraction * (hi - lo);
        auto f = make_plateau_bump(lo, hi, w);
        f.kind = Kind::first;
        f.x0 = params.center;
        f.nu = nu;
        if (std::abs(f(params.center)) == 0.0)
            throw ParamError("make_test_function: f vanishes at the reference energy");
        return f;
    }
    if (kind == Kind::second) {
        const double e0 = params.center;
        if (!(e0 - nu >= lo && e0 + nu <= hi))
            throw ParamError("make_test_function: [E0-nu, E0+nu] not inside the energy window");
        if (!(params.c_lower > 0 && params.c_lower <= 1.0))
            throw ParamError("make_test_function: need 0 < c <= 1");
        double a = std::max(0.0, e0 - 2.0 * nu);
        double b = std::min(4.0, e0 + 2.0 * nu);
        double w = std::min(e0 - nu - a, b - (e0 + nu));
        if (!(w > 0)) throw ParamError("make_test_function: no room for the second-kind edges");
        auto f = make_plateau_bump(a, b, w);
        f.kind = Kind::second;
        f.x0 = e0;
        f.nu = nu;
        f.c_lower = params.c_lower;
        return f;
    }
    throw ParamError("make_test_function: kind must be first or second");
}

SmoothTestFunction make_mollifier(int n) {
    if (n < 1) throw ParamError("make_mollifier: n >= 1");
    double a = 1.0 / n, b = 4.0 - 1.0 / n, w = 1.0 / n;
    auto f = make_plateau_bump(a, b, w);
    f.kind = Kind::first;
    f.x0 = 2.0;
    f.nu = a;
    return f;
}

double triple_norm(const SmoothTestFunction& f, int n) {
    double total = 0;
    const double a = f.support_lo(), b = f.support_hi();
    f.require_order(n);
    for (int r = 0; r <= n; ++r) {
        auto integrand = [&](double x) {
            double w = std::pow(std::sqrt(1.0 + x * x), r - 1);
            return std::abs(f.deriv(r, x)) * w;
        };
        total += cheb::integrate_adaptive(integrand, a, b, 1e-9);
    }
    return total;
}

DbarValue dbar_extension(const SmoothTestFunction& f, int order, double x, double y) {
    const double ax = std::sqrt(1.0 + x * x);
    const double u = y / ax;
    DbarValue out;
    out.value = 0;
    if (std::abs(u) > 2.0) return out;

    // partial sums of the Taylor-in-y extension
    std::vector<double> dv(static_cast<std::size_t>(order) + 2);
    f.derivs(x, order + 1, dv.data());
    cdouble iy(0.0, y);
    cdouble sum = 0, pow_iy = 1.0;
    double factorial = 1.0;
    for (int r = 0; r <= order; ++r) {
        if (r > 0) {
            pow_iy *= iy;
            factorial *= r;
        }
        sum += dv[static_cast<std::size_t>(r)] * pow_iy / factorial;
    }
    const double fn1 = dv[static_cast<std::size_t>(order) + 1];
    const double tau = tau_cut(u);
    const double taud = tau_cut_deriv(u);

    cdouble interior = 0.5 * fn1 * pow_iy / factorial * tau;
    cdouble band = sum * taud * (cdouble(0.0, 1.0) - u * x / ax) / (2.0 * ax);
    out.value = interior + band;
    // |interior| <= 1/2 |f^(n+1)| |y|^n / n! on |u| <= 2
    out.envelope_interior = 0.5 * std::abs(fn1) * std::pow(std::abs(y), order) / factorial;
    out.envelope_band = (std::abs(u) >= 1.0 && std::abs(u) <= 2.0)
                            ? 1.5 * tau_deriv_sup() * std::abs(sum) / ax
                            : 0.0;
    return out;
}

std::vector<cdouble> hs_apply(const SmoothTestFunction& f,
                              const jacobi::JacobiCoeffs& coeffs, std::size_t j,
                              const HsConfig& config) {
    if (config.order < 1) throw ParamError("hs_apply: order must be >= 1");
    const std::size_t n = coeffs.size();
    if (j >= n) throw RangeError("hs_apply: column index out of range");
    f.require_order(config.order + 1);

    const double a = f.support_lo(), b = f.support_hi();
    const int order = config.order;

    // sup |f^(order+1)| on the support, for the small-y cutoff
    double mn = 0;
    for (int i = 0; i <= 400; ++i)
        mn = std::max(mn, std::abs(f.deriv(order + 1, a + (b - a) * i / 400.0)));
    double factorial = 1;
    for (int r = 1; r <= order; ++r) factorial *= r;
    // neglected tail below y_min is bounded by (b-a) mn y_min^order / (pi n! order)
    double y_min = std::pow(std::max(config.tol, 1e-14) * std::acos(-1.0) * factorial *
                                order / (4.0 * std::max(mn, 1e-30) * (b - a)),
                            1.0 / order);
    y_min = std::min(y_min, 0.5);

    auto run = [&](int x_panels, int gl_x, int gl_y, double ratio) {
        std::vector<double> xs, wx, ys, wy;
        cheb::gauss_legendre(gl_x, xs, wx);
        cheb::gauss_legendre(gl_y, ys, wy);
        std::vector<double> acc(n, 0.0);
        std::vector<cdouble> rhs(n, 0.0), col(n);
        rhs[j] = 1.0;
        jacobi::ShiftedSolver solver(coeffs);
        for (int px = 0; px < x_panels; ++px) {
            const double xa = a + (b - a) * px / x_panels;
            const double xb = a + (b - a) * (px + 1) / x_panels;
            for (int ix = 0; ix < gl_x; ++ix) {
                const double x = 0.5 * (xa + xb) + 0.5 * (xb - xa) * xs[static_cast<std::size_t>(ix)];
                const double wxx = 0.5 * (xb - xa) * wx[static_cast<std::size_t>(ix)];
                double y_top = 2.0 * std::sqrt(1.0 + x * x);
                // the cutoff band [y_top/2, y_top] carries a smooth layer of
                // its own; resolve it with uniform sub-panels before the
                // geometric descent toward the real axis
                std::vector<std::pair<double, double>> panels;
                const int band_panels = 4;
                for (int bp = band_panels; bp-- > 0;) {
                    double blo = y_top / 2.0 + y_top / 2.0 * bp / band_panels;
                    panels.emplace_back(blo, blo + y_top / (2.0 * band_panels));
                }
                for (double hi = y_top / 2.0; hi > y_min; hi /= ratio)
                    panels.emplace_back(std::max(hi / ratio, y_min), hi);
                for (auto& [plo, phi] : panels) {
                    double lo = plo, hi = phi;
                    for (int iy = 0; iy < gl_y; ++iy) {
                        const double y = 0.5 * (lo + hi) + 0.5 * (hi - lo) * ys[static_cast<std::size_t>(iy)];
                        const double wyy = 0.5 * (hi - lo) * wy[static_cast<std::size_t>(iy)];
                        auto dz = dbar_extension(f, order, x, y);
                        if (dz.value == cdouble(0.0, 0.0)) continue;
                        solver.solve(cdouble(x, y), rhs, col);
                        const cdouble factor = dz.value * (wxx * wyy);
                        for (std::size_t r = 0; r < n; ++r)
                            acc[r] += factor.real() * col[r].real() - factor.imag() * col[r].imag();
                    }
                }
            }
        }
        const double pi = std::acos(-1.0);
        for (auto& v : acc) v *= 2.0 / pi;
        return acc;
    };

    auto coarse = run(config.x_panels, config.gl_x, config.gl_y, 2.0);
    if (config.check) {
        auto fine = run(config.x_panels * 2, config.gl_x, config.gl_y + 2, std::sqrt(2.0));
        double dev = 0;
        for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(coarse[i] - fine[i]));
        if (dev > config.tol)
            throw QuadratureError("hs_apply: refinement did not confirm tolerance, dev = " +
                                  std::to_string(dev));
        coarse = std::move(fine);
    }
    std::vector<cdouble> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = coarse[i];
    return out;
}

std::vector<double> cheb_apply(const SmoothTestFunction& f,
                               const jacobi::JacobiCoeffs& coeffs,
                               const std::vector<double>& psi, double tail_tol) {
    const std::size_t n = coeffs.size();
    if (psi.size() != n) throw RangeError("cheb_apply: state length mismatch");
    auto [lo, hi] = coeffs.spectral_hull();
    const double margin = 1e-6 * (hi - lo) + 1e-12;
    lo -= margin;
    hi += margin;
    auto series = cheb::ChebSeries::fit([&](double x) { return f(x); }, lo, hi,
                                        tail_tol, 128, 8192);
    const auto& c = series.coeffs();

    // Clenshaw on vectors with the spectrum mapped to [-1, 1]
    const double alpha = 2.0 / (hi - lo), beta = -(hi + lo) / (hi - lo);
    auto op = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = coeffs.d[i] * v[i];
            if (i > 0) s -= coeffs.b[i - 1] * v[i - 1];
            if (i + 1 < n) s -= coeffs.b[i] * v[i + 1];
            out[i] = alpha * s + beta * v[i];
        }
    };
    std::vector<double> b1(n, 0.0), b2(n, 0.0), t(n), hb(n);
    for (std::size_t ci = c.size(); ci-- > 1;) {
        op(b1, hb);
        for (std::size_t i = 0; i < n; ++i) t[i] = 2.0 * hb[i] - b2[i] + c[ci] * psi[i];
        std::swap(b2, b1);
        std::swap(b1, t);
    }
    op(b1, hb);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = hb[i] - b2[i] + c[0] * psi[i];
    return out;
}

std::vector<double> filtered_corner_state(const SmoothTestFunction& f,
                                          const jacobi::JacobiCoeffs& coeffs,
                                          std::size_t slice) {
    const std::size_t n = coeffs.size();
    if (n == 0) return {};
    auto [lo, hi] = coeffs.spectral_hull();
    if (hi - lo <= 12.0 || n <= slice / 8) {
        std::vector<double> e1(n, 0.0);
        e1[0] = 1.0;
        return cheb_apply(f, coeffs, e1);
    }
    const std::size_t m = std::min(n, slice);
    jacobi::JacobiCoeffs head;
    head.k = coeffs.k;
    head.d.assign(coeffs.d.begin(), coeffs.d.begin() + static_cast<std::ptrdiff_t>(m));
    head.b.assign(coeffs.b.begin(),
                  coeffs.b.begin() + static_cast<std::ptrdiff_t>(m > 0 ? m - 1 : 0));
    auto es = jacobi::eigendecompose(head, m);
    std::vector<double> psi(n, 0.0);
    for (std::size_t l = 0; l < m; ++l) {
        double fl = f(es.values[l]);
        if (fl == 0.0) continue;
        double c1 = es.vec(0, l) * fl;
        for (std::size_t i = 0; i < m; ++i) psi[i] += c1 * es.vec(i, l);
    }
    return psi;
}

KernelDecayReport kernel_decay_check(const SmoothTestFunction& f,
                                     const jacobi::JacobiCoeffs& coeffs, int k,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                     std::size_t cross_check_columns,
                                     const HsConfig& config) {
    auto es = jacobi::eigendecompose(coeffs);
    const std::size_t n = coeffs.size();
    std::vector<double> fl(es.n);
    for (std::size_t i = 0; i < es.n; ++i) fl[i] = f(es.values[i]);

    KernelDecayReport rep;
    rep.triple = triple_norm(f, 2 * k + 3);

    auto kernel_entry = [&](std::size_t i, std::size_t j) {
        double s = 0;
        for (std::size_t l = 0; l < es.n; ++l)
            s += fl[l] * es.vec(i, l) * es.vec(j, l);
        return s;
    };

    std::vector<std::pair<std::int64_t, double>> fits;  // (|i-j|, weighted lhs)
    for (auto& [i, j] : pairs) {
        if (i >= n || j >= n) throw RangeError("kernel_decay_check: pair out of range");
        double lhs = std::abs(kernel_entry(i, j));
        std::int64_t dist = std::llabs(static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j));
        double weight = std::pow(std::sqrt(1.0 + static_cast<double>(dist) * static_cast<double>(dist)),
                                 static_cast<double>(k));
        double cfit = lhs * weight / rep.triple;
        rep.c_fit = std::max(rep.c_fit, cfit);
        fits.emplace_back(dist, cfit);
    }

    // cumulative dyadic windows over |i-j|: the fitted constant must settle
    // early instead of growing as farther pairs enter
    std::int64_t max_dist = 0;
    for (auto& [d, c] : fits) max_dist = std::max(max_dist, d);
    for (std::int64_t hi = 1;; hi *= 2) {
        KernelDecayWindow w;
        w.dist_lo = 0;
        w.dist_hi = std::min(hi, max_dist);
        for (auto& [d, c] : fits)
            if (d <= w.dist_hi) {
                w.c_fit = std::max(w.c_fit, c);
                ++w.count;
            }
        if (w.count > 0) rep.windows.push_back(w);
        if (hi >= max_dist) break;
    }
    if (rep.windows.size() >= 2) {
        // reference: the short-distance fit once it is non-degenerate
        // (symmetries can zero out entire distance classes)
        double ref = 0;
        for (auto& w : rep.windows) {
            ref = std::max(ref, w.c_fit);
            if (w.dist_hi >= std::min<std::int64_t>(8, max_dist)) break;
        }
        rep.stable = ref > 0 && rep.windows.back().c_fit <= 2.0 * ref;
    }

    // cross-check the resolvent-integral route on a few columns
    std::vector<std::size_t> cols;
    for (auto& [i, j] : pairs) {
        cols.push_back(j);
        if (cols.size() >= cross_check_columns) break;
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    HsConfig cfg = config;
    for (std::size_t j : cols) {
        auto col = hs_apply(f, coeffs, j, cfg);
        for (std::size_t i = 0; i < n; ++i)
            rep.hs_cross_dev = std::max(rep.hs_cross_dev,
                                        std::abs(col[i].real() - kernel_entry(i, j)));
    }
    return rep;
}

} // namespace sptree::hsfc
