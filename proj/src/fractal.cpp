#include "sptree/fractal.hpp"

#include "sptree/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace sptree::fractal {

using jacobi::SpectralMeasure;

std::vector<double> geometric_grid(double lo, double hi, std::size_t points) {
    if (!(hi > lo) || !(lo > 0) || points < 2)
        throw ParamError("geometric_grid: need 0 < lo < hi and >= 2 points");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(points - 1));
    return g;
}

namespace {

double ls_slope(const std::vector<double>& x, const std::vector<double>& y,
                std::size_t lo, std::size_t hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = static_cast<double>(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double den = n * sxx - sx * sx;
    return den > 1e-30 ? (n * sxy - sx * sy) / den : 0.0;
}

} // namespace

double local_dimension(const SpectralMeasure& mu, double x,
                       const std::vector<double>& delta_grid) {
    if (delta_grid.size() < 4)
        throw ParamError("local_dimension: need at least 4 grid points");
    std::vector<double> grid = delta_grid;
    std::sort(grid.begin(), grid.end());

    std::vector<double> ld, lm;
    for (double d : grid) {
        double m = mu.mass(x - d, x + d);
        if (m <= 0.0) {
            if (d == grid.front())
                throw ResolutionError("local_dimension: window below the measure's "
                                      "resolution at x (empty ball)");
            continue;
        }
        ld.push_back(std::log(d));
        lm.push_back(std::log(m));
    }
    if (ld.size() < 4)
        throw ResolutionError("local_dimension: too few non-empty balls");

    // nested trailing windows anchored at the smallest scales
    const std::size_t n = ld.size();
    double best = std::numeric_limits<double>::infinity();
    for (double frac : {1.0, 2.0 / 3.0, 0.5}) {
        auto hi = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n)));
        hi = std::max<std::size_t>(hi, 3);
        best = std::min(best, ls_slope(ld, lm, 0, hi));
    }
    return std::max(0.0, best);
}

DimensionProfile dim_bounds(const SpectralMeasure& mu, std::size_t sample_size,
                            std::uint64_t seed) {
    DimensionProfile prof;
    const std::size_t m = mu.size();
    if (m == 0) throw ParamError("dim_bounds: empty measure");
    if (m == 1) {
        prof.sample_x = {mu.lambda[0]};
        prof.gamma_hat = {0.0};
        return prof;
    }
    // scaling window: above the typical level spacing, below the diameter
    std::vector<double> gaps;
    gaps.reserve(m - 1);
    for (std::size_t i = 1; i < m; ++i) gaps.push_back(mu.lambda[i] - mu.lambda[i - 1]);
    std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2),
                     gaps.end());
    const double spacing = std::max(gaps[gaps.size() / 2], 1e-14);
    const double diameter = mu.lambda.back() - mu.lambda.front();
    double lo = 4.0 * spacing, hi = diameter / 8.0;
    if (!(hi > lo * 2.0)) {
        lo = spacing;
        hi = std::max(diameter, spacing * 16.0);
    }
    prof.delta_lo = lo;
    prof.delta_hi = hi;
    auto grid = geometric_grid(lo, hi, 24);

    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(mu.weight.begin(), mu.weight.end());
    prof.sample_x.reserve(sample_size);
    prof.gamma_hat.reserve(sample_size);
    for (std::size_t s = 0; s < sample_size; ++s) {
        double x = mu.lambda[pick(rng)];
        double g;
        try {
            g = local_dimension(mu, x, grid);
        } catch (const ResolutionError&) {
            g = 0.0;  // atomic floor at this sample point
        }
        prof.sample_x.push_back(x);
        prof.gamma_hat.push_back(g);
    }
    std::vector<double> sorted = prof.gamma_hat;
    std::sort(sorted.begin(), sorted.end());
    auto quant = [&](double q) {
        double idx = q * static_cast<double>(sorted.size() - 1);
        auto i0 = static_cast<std::size_t>(idx);
        std::size_t i1 = std::min(i0 + 1, sorted.size() - 1);
        double w = idx - static_cast<double>(i0);
        return sorted[i0] * (1.0 - w) + sorted[i1] * w;
    };
    prof.dim_lower = quant(0.05);
    prof.dim_upper = quant(0.95);
    return prof;
}

HolderReport holder_constant(const SpectralMeasure& mu, double alpha) {
    if (!(alpha > 0 && alpha <= 1)) throw ParamError("holder_constant: alpha in (0,1]");
    HolderReport rep;
    rep.alpha = alpha;
    const std::size_t m = mu.size();
    if (m == 0) return rep;

    double diameter = m > 1 ? mu.lambda.back() - mu.lambda.front() : 0.0;
    if (diameter <= 0) diameter = 1.0;
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < m; ++i)
        min_gap = std::min(min_gap, mu.lambda[i] - mu.lambda[i - 1]);
    if (!std::isfinite(min_gap)) min_gap = diameter * std::pow(2.0, -16);
    const double floor_len = std::max(min_gap * 2.0, diameter * std::pow(2.0, -26));

    std::vector<double> prefix(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) prefix[i + 1] = prefix[i] + mu.weight[i];
    auto window_sup = [&](double len) {
        // sup over intervals of length len; the supremum is attained with the
        // left endpoint at an atom
        double sup = 0;
        std::size_t j = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (j < i) j = i;
            while (j < m && mu.lambda[j] <= mu.lambda[i] + len) ++j;
            sup = std::max(sup, prefix[j] - prefix[i]);
        }
        return sup;
    };

    for (double len = diameter; len >= floor_len && rep.lengths.size() < 40; len *= 0.5) {
        rep.lengths.push_back(len);
        rep.level_sup.push_back(window_sup(len) / std::pow(len, alpha));
    }
    for (double s : rep.level_sup) rep.constant = std::max(rep.constant, s);
    if (rep.level_sup.size() >= 4) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < rep.lengths.size(); ++i) {
            xs.push_back(-std::log(rep.lengths[i]));
            ys.push_back(std::log(std::max(rep.level_sup[i], 1e-300)));
        }
        std::size_t tail = std::max<std::size_t>(4, xs.size() / 2);
        rep.trend_slope = ls_slope(xs, ys, xs.size() - tail, xs.size());
        rep.divergent = rep.trend_slope >= 0.06;
    } else {
        rep.divergent = true;  // no scaling window at all
        rep.trend_slope = alpha;
    }
    return rep;
}

double abel_fourier_closed(const SpectralMeasure& mu,
                           const std::vector<double>& f_atoms, double T) {
    if (f_atoms.size() != mu.size())
        throw RangeError("abel_fourier_closed: f values must align with atoms");
    const std::size_t m = mu.size();
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double wi = f_atoms[i] * mu.weight[i];
        s += wi * wi * 0.5;  // diagonal split; doubled below
        for (std::size_t j = i + 1; j < m; ++j) {
            double dl = T * (mu.lambda[i] - mu.lambda[j]);
            s += wi * f_atoms[j] * mu.weight[j] / (1.0 + dl * dl);
        }
    }
    return 2.0 * T * s;
}

FourierAbelReport fourier_abel_check(const SpectralMeasure& mu,
                                     const std::vector<double>& f_atoms, double alpha,
                                     const std::vector<double>& t_grid) {
    FourierAbelReport rep;
    rep.alpha = alpha;
    double fnorm2 = 0;
    for (std::size_t i = 0; i < mu.size(); ++i)
        fnorm2 += f_atoms[i] * f_atoms[i] * mu.weight[i];
    if (fnorm2 <= 0) throw ZeroStateError("fourier_abel_check: f vanishes on the measure");
    for (double T : t_grid) {
        rep.T.push_back(T);
        rep.scaled.push_back(std::pow(T, alpha - 1.0) *
                             abel_fourier_closed(mu, f_atoms, T) / fnorm2);
    }
    for (double v : rep.scaled) rep.sup = std::max(rep.sup, v);
    if (rep.T.size() >= 4) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < rep.T.size(); ++i) {
            xs.push_back(std::log(rep.T[i]));
            ys.push_back(std::log(std::max(rep.scaled[i], 1e-300)));
        }
        std::size_t tail = std::max<std::size_t>(3, xs.size() / 2);
        rep.trend_slope = ls_slope(xs, ys, xs.size() - tail, xs.size());
        rep.bounded = rep.trend_slope <= 0.05;
    }
    return rep;
}

} // namespace sptree::fractal
