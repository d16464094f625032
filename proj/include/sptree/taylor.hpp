#pragma once

#include <cstddef>
#include <vector>

namespace sptree::taylor {

/// Truncated Taylor coefficients of a function at a point, used to propagate
/// exact high-order derivatives through closed-form compositions.
struct Jet {
    std::vector<long double> c;  // c[k] = f^(k)(x0) / k!

    explicit Jet(std::size_t order = 0) : c(order + 1, 0.0L) {}
    std::size_t order() const { return c.size() - 1; }
    long double value() const { return c[0]; }
};

Jet jet_const(long double v, std::size_t order);
Jet jet_var(long double x, std::size_t order);

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator-(long double a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(long double s, const Jet& a);
Jet reciprocal(const Jet& a);
Jet operator/(const Jet& a, const Jet& b);
Jet exp(const Jet& a);

/// Jet of the C-infinity step (0 below 0, 1 above 1) at the jet's base point.
Jet smoothstep_jet(const Jet& t);

/// Derivatives f^(0..upto)(x) of height * step((x-a)/w) * step((b-x)/w).
void plateau_bump_derivs(double a, double b, double w, double height, double x,
                         int upto, double* out);

} // namespace sptree::taylor
