#pragma once

#include <functional>
#include <vector>

namespace sptree::cheb {

/// Chebyshev series on an interval [a, b]; evaluates to 0 outside.
/// Derivatives come from series differentiation and are cached per order.
class ChebSeries {
public:
    ChebSeries() = default;
    ChebSeries(double a, double b, std::vector<double> coeffs);

    /// Interpolates fn at Chebyshev points, doubling the degree until the
    /// coefficient tail falls below tail_tol relative to the largest
    /// coefficient. Throws ResolutionError if max_degree is insufficient.
    static ChebSeries fit(const std::function<double(double)>& fn, double a, double b,
                          double tail_tol = 1e-13, int min_degree = 64,
                          int max_degree = 4096);

    double a() const { return a_; }
    double b() const { return b_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<double>& coeffs() const { return coeffs_; }

    double eval(double x) const;          // 0 outside [a, b]
    double eval_inside(double x) const;   // no support clipping

    /// r-th derivative value; derivative series are computed on demand.
    /// Throws ResolutionError if the differentiated series has lost its
    /// resolution (relative tail above deriv_tail_tol).
    double deriv(int r, double x) const;

    /// Relative tail magnitude of the r-th derivative series.
    double tail_ratio(int r) const;

    static constexpr double deriv_tail_tol = 1e-6;

private:
    const std::vector<double>& deriv_coeffs(int r) const;

    double a_ = -1, b_ = 1;
    std::vector<double> coeffs_;
    mutable std::vector<std::vector<double>> deriv_cache_;
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Adaptive integration of fn over [a, b] to the given relative tolerance.
double integrate_adaptive(const std::function<double(double)>& fn, double a, double b,
                          double rel_tol, int max_depth = 32);

} // namespace sptree::cheb
