#include "sptree/taylor.hpp"

#include <cmath>

namespace sptree::taylor {

Jet jet_const(long double v, std::size_t order) {
    Jet j(order);
    j.c[0] = v;
    return j;
}

Jet jet_var(long double x, std::size_t order) {
    Jet j(order);
    j.c[0] = x;
    if (order >= 1) j.c[1] = 1.0L;
    return j;
}

Jet operator+(const Jet& a, const Jet& b) {
    Jet r(a.order());
    for (std::size_t k = 0; k <= a.order(); ++k) r.c[k] = a.c[k] + b.c[k];
    return r;
}

Jet operator-(const Jet& a, const Jet& b) {
    Jet r(a.order());
    for (std::size_t k = 0; k <= a.order(); ++k) r.c[k] = a.c[k] - b.c[k];
    return r;
}

Jet operator-(long double a, const Jet& b) {
    Jet r = b;
    for (auto& x : r.c) x = -x;
    r.c[0] += a;
    return r;
}

Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.order());
    for (std::size_t k = 0; k <= a.order(); ++k) {
        long double s = 0;
        for (std::size_t j = 0; j <= k; ++j) s += a.c[j] * b.c[k - j];
        r.c[k] = s;
    }
    return r;
}

Jet operator*(long double s, const Jet& a) {
    Jet r = a;
    for (auto& x : r.c) x *= s;
    return r;
}

Jet reciprocal(const Jet& a) {
    Jet r(a.order());
    r.c[0] = 1.0L / a.c[0];
    for (std::size_t k = 1; k <= a.order(); ++k) {
        long double s = 0;
        for (std::size_t j = 1; j <= k; ++j) s += a.c[j] * r.c[k - j];
        r.c[k] = -s / a.c[0];
    }
    return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

Jet exp(const Jet& a) {
    Jet r(a.order());
    r.c[0] = std::exp(a.c[0]);
    for (std::size_t k = 1; k <= a.order(); ++k) {
        long double s = 0;
        for (std::size_t j = 1; j <= k; ++j)
            s += static_cast<long double>(j) * a.c[j] * r.c[k - j];
        r.c[k] = s / static_cast<long double>(k);
    }
    return r;
}

Jet smoothstep_jet(const Jet& t) {
    const std::size_t order = t.order();
    if (t.value() <= 0.0L) return Jet(order);
    if (t.value() >= 1.0L) return jet_const(1.0L, order);
    Jet h0 = exp(-1.0L * reciprocal(t));
    Jet h1 = exp(-1.0L * reciprocal(1.0L - t));
    return h0 / (h0 + h1);
}

void plateau_bump_derivs(double a, double b, double w, double height, double x,
                         int upto, double* out) {
    const auto order = static_cast<std::size_t>(upto);
    if (x <= a || x >= b) {
        for (int r = 0; r <= upto; ++r) out[r] = 0.0;
        return;
    }
    Jet xx = jet_var(x, order);
    Jet t1 = (1.0L / static_cast<long double>(w)) * (xx - jet_const(a, order));
    Jet t2 = (1.0L / static_cast<long double>(w)) * (jet_const(b, order) - xx);
    Jet f = static_cast<long double>(height) * (smoothstep_jet(t1) * smoothstep_jet(t2));
    long double fact = 1.0L;
    for (int r = 0; r <= upto; ++r) {
        if (r > 0) fact *= static_cast<long double>(r);
        out[r] = static_cast<double>(fact * f.c[static_cast<std::size_t>(r)]);
    }
}

} // namespace sptree::taylor
