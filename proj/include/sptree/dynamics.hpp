#pragma once

#include "sptree/jacobi.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace sptree::dynamics {

enum class Method { eigensum, quadrature };

/// Exponentially time-averaged site distribution a(n, T) of a state.
struct TimeAverageProfile {
    double T = 0;
    Method method = Method::eigensum;
    std::vector<double> a;     // a(n), n = 1..N at index n-1
    double mass = 0;           // sum_n a(n)
    double state_norm2 = 0;    // ||psi||^2
};

struct QuadratureOptions {
    double core_margin = 10.0;  // window margin around the spectral hull, in eps
    double panel_width = 2.0;   // core panel width, in eps
    int gl_order = 13;          // keeps node spacing at eps/4 with 1e-10 panels
    double tail_frac = 1e-7;    // neglected Poisson mass fraction per side
    double tail_ratio = 1.5;
    double mass_tol = 1e-4;
    unsigned workers = 1;
    // optional cap on the dense core window (states with confined spectral
    // support do not need eps-resolution across the whole hull; the geometric
    // tails still cover the rest)
    double core_lo = -std::numeric_limits<double>::infinity();
    double core_hi = std::numeric_limits<double>::infinity();
};

/// a(n, T) by the exact eigenpair double sum (O(N^3), needs the dense limit).
TimeAverageProfile profile_eigensum(const jacobi::JacobiCoeffs& coeffs,
                                    const std::vector<double>& psi, double T,
                                    std::size_t dense_limit = jacobi::kDenseLimit);

/// a(n, T) as the energy integral of resolvent columns at eps = 1/(2T),
/// on a composite Gauss-Legendre grid resolving the eps scale.
/// Throws QuadratureError if the mass invariant fails the tolerance.
TimeAverageProfile profile_quadrature(const jacobi::JacobiCoeffs& coeffs,
                                      const std::vector<double>& psi, double T,
                                      const QuadratureOptions& opts = {});

TimeAverageProfile time_average_profile(const jacobi::JacobiCoeffs& coeffs,
                                        const std::vector<double>& psi, double T,
                                        Method method,
                                        const QuadratureOptions& opts = {},
                                        std::size_t dense_limit = jacobi::kDenseLimit);

/// sum_n n^p a(n). Sets *tail_warning when the profile has not decayed at the
/// truncation edge (a(N) above 1e-10 of the peak).
double moment(const TimeAverageProfile& profile, double p,
              bool* tail_warning = nullptr);

/// sum of a(n) over n in [from, to] (1-based, inclusive; to past the end is
/// treated as infinity).
double escape_mass(const TimeAverageProfile& profile, std::size_t from,
                   std::size_t to = SIZE_MAX);

/// Energy integrals of a spectral measure over a window B = [lo, hi]:
/// I = eps * int_B (Im m(E + i eps))^2 dE, J the double Poisson sum, and the
/// escape threshold M = A^2 / (16 J) with A = mu(B).
struct EnergyIntegrals {
    double epsilon = 0;
    double window_mass = 0;  // A
    double I = 0;
    double J = 0;
    double M_T = 0;
    double ji_ratio = 0;     // J / I
};

EnergyIntegrals energy_integrals(const jacobi::SpectralMeasure& mu, double epsilon,
                                 double lo, double hi);

struct MomentCurve {
    double p = 0;
    std::vector<double> T;
    std::vector<double> value;
};

struct BetaEstimate {
    double p = 0;
    double beta_hat = 0;
    double window_lo = 0, window_hi = 0;            // T range used
    std::vector<double> local_slopes;               // per sample (log-log)
    std::vector<double> window_slopes;              // per dyadic window
    std::optional<double> target;                   // (p+1)/(p+1/Gamma) when known
};

/// Growth exponent of the moment curve: least-squares slopes on dyadic
/// windows of T; the estimate is the minimum slope over the trailing half,
/// divided by p. Needs >= 8 samples spanning >= 3 decades.
BetaEstimate beta_estimate(const MomentCurve& curve);

struct EnvelopeReport {
    double p = 0;
    int barrier_count = 0;        // N
    double l_n = 0;               // L_N
    double window_lo = 0, window_hi = 0;
    double lower_constant = 0;    // fitted, lower structural form
    double upper_constant = 0;    // fitted, upper structural form
    double lower_sigma = 0, upper_sigma = 0;  // log-residual spread
    double inside_fraction = 0;   // grid points between the shifted envelopes
    double pivot_structural = 0;  // L_N^A, closed form
    double pivot_grid = 0;        // branch meet of the fitted lower envelope,
                                  // located on the measured grid
    double pivot_octaves = 0;     // log2(grid / closed form)
    double knee_empirical = 0;    // data-driven knee of the shared-constant
                                  // two-branch fit (diagnostic)
    double knee_octaves = 0;
    double crossover_exponent = 0;  // A = (p + 1/Gamma) / (p + 1)
    double q_n = 0;               // correction exponent at the fitted constant
    std::size_t points = 0;
};

/// Fits the structural lower and upper moment envelopes over the validity
/// window [L_N / 4, L_N^(1/Gamma)] and locates the branch crossover.
EnvelopeReport bound_envelopes(const std::vector<std::int64_t>& sparse_positions,
                               double gamma, double p, int barrier_count,
                               const MomentCurve& measured);

} // namespace sptree::dynamics
