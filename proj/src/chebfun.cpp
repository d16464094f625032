#include "sptree/chebfun.hpp"

#include "sptree/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace sptree::cheb {

namespace {

// coefficients from values at Chebyshev points of the second kind (O(m^2))
std::vector<double> coeffs_from_values(const std::vector<double>& vals) {
    const int m = static_cast<int>(vals.size()) - 1;
    std::vector<double> c(static_cast<std::size_t>(m) + 1, 0.0);
    for (int k = 0; k <= m; ++k) {
        double s = 0.5 * (vals[0] + (k % 2 == 0 ? 1.0 : -1.0) * vals[static_cast<std::size_t>(m)]);
        for (int j = 1; j < m; ++j)
            s += vals[static_cast<std::size_t>(j)] * std::cos(std::numbers::pi * k * j / m);
        c[static_cast<std::size_t>(k)] = 2.0 * s / m;
    }
    c[0] *= 0.5;
    if (m >= 1) c[static_cast<std::size_t>(m)] *= 0.5;
    return c;
}

double tail_of(const std::vector<double>& c) {
    double mx = 0;
    for (double x : c) mx = std::max(mx, std::abs(x));
    if (mx == 0) return 0;
    const std::size_t n = c.size();
    const std::size_t tail = std::max<std::size_t>(2, n / 16);
    double t = 0;
    for (std::size_t i = n - tail; i < n; ++i) t = std::max(t, std::abs(c[i]));
    return t / mx;
}

} // namespace

ChebSeries::ChebSeries(double a, double b, std::vector<double> coeffs)
    : a_(a), b_(b), coeffs_(std::move(coeffs)) {
    if (!(b_ > a_)) throw ParamError("ChebSeries: empty interval");
    if (coeffs_.empty()) coeffs_.push_back(0.0);
}

ChebSeries ChebSeries::fit(const std::function<double(double)>& fn, double a, double b,
                           double tail_tol, int min_degree, int max_degree) {
    if (!(b > a)) throw ParamError("ChebSeries::fit: empty interval");
    for (int m = min_degree; m <= max_degree; m *= 2) {
        std::vector<double> vals(static_cast<std::size_t>(m) + 1);
        for (int j = 0; j <= m; ++j) {
            double u = std::cos(std::numbers::pi * j / m);
            vals[static_cast<std::size_t>(j)] = fn(0.5 * (a + b) + 0.5 * (b - a) * u);
        }
        auto c = coeffs_from_values(vals);
        if (tail_of(c) <= tail_tol) return ChebSeries(a, b, std::move(c));
    }
    throw ResolutionError("Chebyshev fit did not resolve at degree " +
                          std::to_string(max_degree));
}

double ChebSeries::eval_inside(double x) const {
    const double u = (2.0 * x - (a_ + b_)) / (b_ - a_);
    // Clenshaw
    double b1 = 0, b2 = 0;
    for (std::size_t i = coeffs_.size(); i-- > 1;) {
        double t = 2.0 * u * b1 - b2 + coeffs_[i];
        b2 = b1;
        b1 = t;
    }
    return u * b1 - b2 + coeffs_[0];
}

double ChebSeries::eval(double x) const {
    if (x < a_ || x > b_) return 0.0;
    return eval_inside(x);
}

const std::vector<double>& ChebSeries::deriv_coeffs(int r) const {
    if (deriv_cache_.empty()) deriv_cache_.push_back(coeffs_);
    while (static_cast<int>(deriv_cache_.size()) <= r) {
        const auto& c = deriv_cache_.back();
        const std::size_t n = c.size();
        std::vector<double> d(n, 0.0);
        if (n >= 2) {
            // standard recurrence, then scale by the interval map
            std::vector<double> work(n + 1, 0.0);
            for (std::size_t k = n - 1; k-- > 0;)
                work[k] = work[k + 2] + 2.0 * static_cast<double>(k + 1) * c[k + 1];
            work[0] *= 0.5;
            const double scale = 2.0 / (b_ - a_);
            for (std::size_t k = 0; k + 1 < n; ++k) d[k] = scale * work[k];
            d.resize(n - 1);
        } else {
            d.assign(1, 0.0);
        }
        deriv_cache_.push_back(std::move(d));
    }
    return deriv_cache_[static_cast<std::size_t>(r)];
}

double ChebSeries::tail_ratio(int r) const {
    return tail_of(deriv_coeffs(r));
}

double ChebSeries::deriv(int r, double x) const {
    if (r == 0) return eval(x);
    if (x < a_ || x > b_) return 0.0;
    const auto& c = deriv_coeffs(r);
    if (tail_of(c) > deriv_tail_tol)
        throw ResolutionError("Chebyshev degree insufficient for derivative order " +
                              std::to_string(r));
    const double u = (2.0 * x - (a_ + b_)) / (b_ - a_);
    double b1 = 0, b2 = 0;
    for (std::size_t i = c.size(); i-- > 1;) {
        double t = 2.0 * u * b1 - b2 + c[i];
        b2 = b1;
        b1 = t;
    }
    return u * b1 - b2 + c[0];
}

// ---------------------------------------------------------------------------

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    static std::mutex mu;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(n);
        if (it != cache.end()) {
            nodes = it->second.first;
            weights = it->second.second;
            return;
        }
    }
    nodes.resize(static_cast<std::size_t>(n));
    weights.resize(static_cast<std::size_t>(n));
    // Newton on the Legendre polynomial from the asymptotic initial guess
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = x;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    std::lock_guard<std::mutex> lock(mu);
    cache[n] = {nodes, weights};
}

namespace {

double gl_panel(const std::function<double(double)>& fn, double a, double b,
                const std::vector<double>& xs, const std::vector<double>& ws) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += ws[i] * fn(mid + half * xs[i]);
    return s * half;
}

double adapt(const std::function<double(double)>& fn, double a, double b, double whole,
             double tol, double floor, int depth, const std::vector<double>& xs,
             const std::vector<double>& ws) {
    const double mid = 0.5 * (a + b);
    const double left = gl_panel(fn, a, mid, xs, ws);
    const double right = gl_panel(fn, mid, b, xs, ws);
    // the floor keeps kinks of |f| from forcing refinement past the point
    // where the global answer can still change
    if (std::abs(left + right - whole) <= std::max(tol, floor))
        return left + right;
    if (depth <= 0)
        throw QuadratureError("adaptive quadrature depth exhausted");
    return adapt(fn, a, mid, left, 0.5 * tol, floor, depth - 1, xs, ws) +
           adapt(fn, mid, b, right, 0.5 * tol, floor, depth - 1, xs, ws);
}

} // namespace

double integrate_adaptive(const std::function<double(double)>& fn, double a, double b,
                          double rel_tol, int max_depth) {
    if (a == b) return 0.0;
    std::vector<double> xs, ws;
    gauss_legendre(12, xs, ws);
    double whole = gl_panel(fn, a, b, xs, ws);
    double scale = std::max(std::abs(whole), 1e-300);
    return adapt(fn, a, b, whole, rel_tol * scale, 1e-14 * scale, max_depth, xs, ws);
}

} // namespace sptree::cheb
