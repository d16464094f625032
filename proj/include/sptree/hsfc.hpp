#pragma once

#include "sptree/chebfun.hpp"
#include "sptree/jacobi.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace sptree::hsfc {

using cdouble = std::complex<double>;

enum class Kind { first, second, generic };

/// Compactly supported smooth function with Chebyshev-backed derivative
/// access. "first" kind lives inside the energy window [nu, 4-nu]; "second"
/// kind is bounded with |f| >= c_lower on [x0 - nu, x0 + nu].
struct SmoothTestFunction {
    Kind kind = Kind::generic;
    cheb::ChebSeries series;  // support = fit interval; 0 outside
    double sup_bound = 1.0;   // declared bound on |f|
    double x0 = 0.0;          // reference energy
    double nu = 0.0;
    double c_lower = 0.0;     // second kind: lower bound near x0

    // closed-form plateau profile; when active, derivatives of any order come
    // from Taylor-jet propagation instead of differentiating the series
    struct Profile {
        bool active = false;
        double a = 0, b = 0, w = 0, height = 1.0;
    };
    Profile profile;
    static constexpr int max_jet_order = 24;

    double support_lo() const { return series.a(); }
    double support_hi() const { return series.b(); }
    double operator()(double x) const;
    double deriv(int r, double x) const;
    /// All derivative orders 0..upto at once.
    void derivs(double x, int upto, double* out) const;
    /// Throws ResolutionError if derivative access to this order is unsound.
    void require_order(int order) const;
};

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly monotone between.
double smoothstep(double t);
double smoothstep_deriv(double t);

/// Plateau bump: 1 on [a + w, b - w], 0 outside [a, b].
SmoothTestFunction make_plateau_bump(double a, double b, double w,
                                     double height = 1.0);

struct TestFunctionParams {
    double center = 2.0;      // x0 (first kind) / E0 (second kind)
    double edge_fraction = 0.25;
    double c_lower = 0.5;     // second kind floor
};

SmoothTestFunction make_test_function(Kind kind, double nu,
                                      const TestFunctionParams& params = {});

/// The mollifier family: support (1/n, 4 - 1/n), equal to 1 on (2/n, 4 - 2/n).
SmoothTestFunction make_mollifier(int n);

/// Weighted-derivative norm sum_{r=0}^{n} int |f^(r)(x)| <x>^(r-1) dx.
double triple_norm(const SmoothTestFunction& f, int n);

struct HsConfig {
    // low extension orders keep the Taylor-in-y terms well conditioned; the
    // integrand cancellation grows violently with the order
    int order = 2;
    int x_panels = 48;
    int gl_x = 12;
    int gl_y = 12;
    double tol = 1e-6;      // quadrature budget (absolute, per column entry)
    bool check = true;      // second pass at doubled resolution
    int max_refine = 2;
};

/// Almost-analytic extension derivative dbar f~ at z = x + i y, together with
/// the envelope pieces it must respect (interior term, cutoff-band term).
struct DbarValue {
    cdouble value;
    double envelope_interior = 0;
    double envelope_band = 0;
};
DbarValue dbar_extension(const SmoothTestFunction& f, int order, double x, double y);

/// Column f(H) delta_j evaluated by the resolvent-integral representation.
std::vector<cdouble> hs_apply(const SmoothTestFunction& f,
                              const jacobi::JacobiCoeffs& coeffs, std::size_t j,
                              const HsConfig& config = {});

/// f(H) psi through a Chebyshev expansion of f on the spectral hull.
std::vector<double> cheb_apply(const SmoothTestFunction& f,
                               const jacobi::JacobiCoeffs& coeffs,
                               const std::vector<double>& psi,
                               double tail_tol = 1e-12);

/// f(H) delta_1 for a compactly supported f. Narrow spectral hulls go through
/// the Chebyshev route; wide ones (barrier models) through an exact dense
/// filter on a head slice, zero-padded: the filtered corner state decays
/// faster than any power, so the slice is exact to rounding.
std::vector<double> filtered_corner_state(const SmoothTestFunction& f,
                                          const jacobi::JacobiCoeffs& coeffs,
                                          std::size_t slice = 512);

struct KernelDecayWindow {
    std::int64_t dist_lo = 0, dist_hi = 0;  // dyadic |i-j| window
    double c_fit = 0;
    std::size_t count = 0;
};

struct KernelDecayReport {
    double triple = 0;          // the weighted norm of order 2k+3
    double c_fit = 0;           // max over pairs of lhs <i-j>^k / triple
    double hs_cross_dev = 0;    // max |oracle - hs_apply| over checked columns
    std::vector<KernelDecayWindow> windows;
    bool stable = true;         // windowed fits within a factor 2
};

/// Verifies |<delta_i, f(H) delta_j>| <= C <i-j>^{-k} * (weighted norm), with
/// the constant fitted; cross-checks the resolvent-integral route on a few
/// columns against the eigendecomposition.
KernelDecayReport kernel_decay_check(const SmoothTestFunction& f,
                                     const jacobi::JacobiCoeffs& coeffs, int k,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                     std::size_t cross_check_columns = 2,
                                     const HsConfig& config = {});

} // namespace sptree::hsfc
