#pragma once

#include "sptree/jacobi.hpp"

#include <cstdint>
#include <vector>

namespace sptree::fractal {

/// Local scaling exponent of mu at x over a geometric delta grid: the minimum
/// least-squares slope of log mu([x-d, x+d]) against log d over nested
/// trailing windows. Throws ResolutionError when the grid probes below the
/// measure's resolution at x (empty balls).
double local_dimension(const jacobi::SpectralMeasure& mu, double x,
                       const std::vector<double>& delta_grid);

std::vector<double> geometric_grid(double lo, double hi, std::size_t points);

struct DimensionProfile {
    std::vector<double> sample_x;
    std::vector<double> gamma_hat;
    double delta_lo = 0, delta_hi = 0;  // validity window of the estimates
    double dim_lower = 0;               // 5% weighted quantile
    double dim_upper = 0;               // 95% weighted quantile
};

/// Weight-proportional sampling of atoms, local exponent per sample, and
/// weighted-quantile proxies for the essential dimension bounds. The delta
/// window is clamped above the measure's level spacing.
DimensionProfile dim_bounds(const jacobi::SpectralMeasure& mu,
                            std::size_t sample_size, std::uint64_t seed = 1);

struct HolderReport {
    double alpha = 0;
    double constant = 0;                 // sup over the sweep of mu(I) / |I|^alpha
    bool divergent = false;              // growth trend as resolution refines
    double trend_slope = 0;              // log sup vs log(1/length), trailing fit
    std::vector<double> lengths;         // dyadic interval lengths
    std::vector<double> level_sup;       // sup at each length
};

/// Dyadic sweep of sup mu(I)/|I|^alpha; flags divergence when the per-level
/// suprema keep growing as the length refines.
HolderReport holder_constant(const jacobi::SpectralMeasure& mu, double alpha);

/// Exponentially averaged squared Fourier transform of f dmu, in closed form
/// over atom pairs: int_0^inf e^(-t/T) |(f mu)^(t)|^2 dt.
double abel_fourier_closed(const jacobi::SpectralMeasure& mu,
                           const std::vector<double>& f_atoms, double T);

struct FourierAbelReport {
    double alpha = 0;
    std::vector<double> T;
    std::vector<double> scaled;   // T^(alpha-1) * abel / ||f||^2
    double sup = 0;
    double trend_slope = 0;       // trailing log-log slope of scaled values
    bool bounded = false;
};

/// Sweep of the scaled Abel-Fourier average over a T grid; bounded verdict
/// when the trailing trend is flat.
FourierAbelReport fourier_abel_check(const jacobi::SpectralMeasure& mu,
                                     const std::vector<double>& f_atoms, double alpha,
                                     const std::vector<double>& t_grid);

} // namespace sptree::fractal
