#include "sptree/tree.hpp"

#include "sptree/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sptree::tree {

namespace {

constexpr std::int64_t kInt64Max = std::numeric_limits<std::int64_t>::max();

// n^p with overflow detection, p >= 0.
bool checked_ipow(std::int64_t n, int p, std::int64_t& out) {
    unsigned __int128 acc = 1;
    for (int i = 0; i < p; ++i) {
        acc *= static_cast<unsigned __int128>(n);
        if (acc > static_cast<unsigned __int128>(kInt64Max)) return false;
    }
    out = static_cast<std::int64_t>(acc);
    return true;
}

// Largest r with r^q <= m.
std::int64_t iroot(std::int64_t m, int q) {
    if (m <= 1) return m;
    std::int64_t lo = 1, hi = 2;
    auto pw_le = [&](std::int64_t r) {
        unsigned __int128 acc = 1;
        for (int i = 0; i < q; ++i) {
            acc *= static_cast<unsigned __int128>(r);
            if (acc > static_cast<unsigned __int128>(m)) return false;
        }
        return true;
    };
    while (pw_le(hi)) {
        lo = hi;
        if (hi > kInt64Max / 2) break;
        hi *= 2;
    }
    while (lo + 1 < hi) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (pw_le(mid)) lo = mid; else hi = mid;
    }
    return lo;
}

} // namespace

void TreeParams::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw ParamError("gamma must lie in (0,1), got " + std::to_string(gamma));
    if (depth < 1)
        throw ParamError("depth must be >= 1, got " + std::to_string(depth));
    std::int64_t prev = 0;
    for (std::int64_t p : sparse_positions) {
        if (p <= prev)
            throw ParamError("sparse_positions must be strictly increasing and >= 1");
        prev = p;
    }
}

bool TreeParams::is_sparse_position(std::int64_t n) const {
    return std::binary_search(sparse_positions.begin(), sparse_positions.end(), n);
}

std::int64_t floor_power(std::int64_t n, double e) {
    if (n < 1) throw ParamError("floor_power requires n >= 1");
    if (n == 1) return 1;
    if (e <= 0.0) return e == 0.0 ? 1 : 0;

    // Integer exponent: exact.
    double er = std::round(e);
    if (std::abs(e - er) <= 1e-12 * std::max(1.0, std::abs(e))) {
        std::int64_t out;
        if (!checked_ipow(n, static_cast<int>(er), out))
            throw OverflowError("branching number overflows 64-bit range");
        return out;
    }
    // Small rational exponent p/q: exact via integer q-th root of n^p.
    for (int q = 2; q <= 6; ++q) {
        double pq = e * q;
        double pr = std::round(pq);
        if (std::abs(pq - pr) <= 1e-10 * std::max(1.0, std::abs(pq)) && pr >= 1 && pr < 63) {
            std::int64_t np;
            if (!checked_ipow(n, static_cast<int>(pr), np))
                throw OverflowError("branching number overflows 64-bit range");
            return iroot(np, q);
        }
    }
    // Long-double fallback. The candidate from expl() is corrected against
    // log-space comparisons; within the guard band we keep the lower value.
    long double lx = static_cast<long double>(e) * std::log(static_cast<long double>(n));
    if (lx > 62.0L * 0.693147180559945L) // 2^62 in nats
        throw OverflowError("branching number overflows 64-bit range");
    long double x = std::exp(lx);
    std::int64_t m = static_cast<std::int64_t>(std::floor(static_cast<double>(x)));
    const long double guard = 4e-18L;
    while (m >= 1 && std::log(static_cast<long double>(m)) > lx * (1.0L + guard) + guard) --m;
    while (std::log(static_cast<long double>(m + 1)) <= lx * (1.0L - guard) - guard) ++m;
    return m;
}

std::int64_t sparse_branching(const TreeParams& params, std::int64_t n) {
    if (n < 0) throw RangeError("shell index must be >= 0");
    if (n == 0) return 1;
    if (!params.is_sparse_position(n)) return 1;
    return floor_power(n, (1.0 - params.gamma) / params.gamma);
}

std::vector<std::int64_t> paper_positions(std::int64_t limit) {
    std::vector<std::int64_t> out;
    for (std::int64_t m = 1;; ++m) {
        // exponent m^m
        std::int64_t expn;
        if (!checked_ipow(m, static_cast<int>(m), expn) || expn >= 63) break;
        std::int64_t pos = std::int64_t{1} << expn;
        if (pos > limit) break;
        out.push_back(pos);
    }
    return out;
}

ShTree build_tree(const TreeParams& params) {
    params.validate();
    ShTree t;
    const int D = params.depth;
    t.g.resize(D);
    t.alpha.resize(D + 1);
    t.alpha[0] = 1;
    for (int n = 0; n < D; ++n) {
        t.g[n] = sparse_branching(params, n);
        if (t.alpha[n] > kInt64Max / t.g[n])
            throw OverflowError("shell size overflows 64-bit range at shell " + std::to_string(n + 1));
        t.alpha[n + 1] = t.alpha[n] * t.g[n];
    }
    t.shell_offset.resize(D + 2);
    t.shell_offset[0] = 0;
    for (int n = 0; n <= D; ++n) {
        if (t.shell_offset[n] > kInt64Max - t.alpha[n])
            throw OverflowError("vertex count overflows 64-bit range");
        t.shell_offset[n + 1] = t.shell_offset[n] + t.alpha[n];
    }
    t.vertex_count = t.shell_offset[D + 1];
    return t;
}

std::pair<int, std::int64_t> ShTree::locate(std::int64_t v) const {
    if (v < 0 || v >= vertex_count)
        throw RangeError("vertex index out of range");
    auto it = std::upper_bound(shell_offset.begin(), shell_offset.end(), v);
    int n = static_cast<int>(it - shell_offset.begin()) - 1;
    return {n, v - shell_offset[n]};
}

std::int64_t ShTree::parent(std::int64_t v) const {
    auto [n, pos] = locate(v);
    if (n == 0) throw RangeError("root has no parent");
    return shell_offset[n - 1] + pos / g[n - 1];
}

std::int64_t ShTree::degree(std::int64_t v) const {
    auto [n, pos] = locate(v);
    (void)pos;
    const int D = depth();
    if (n == D) return 1;          // leaf: parent only (depth >= 1 so D >= 1)
    if (n == 0) return g[0];       // root: children only
    return g[n] + 1;
}

SparseLaplacian assemble_laplacian(const ShTree& t) {
    SparseLaplacian L;
    L.dimension = t.vertex_count;
    L.diag.resize(static_cast<std::size_t>(t.vertex_count));
    for (std::int64_t v = 0; v < t.vertex_count; ++v)
        L.diag[static_cast<std::size_t>(v)] = static_cast<double>(t.degree(v));
    // one edge per non-root vertex, stored as (parent, child)
    L.edges.reserve(static_cast<std::size_t>(t.vertex_count - 1));
    for (std::int64_t v = 1; v < t.vertex_count; ++v)
        L.edges.emplace_back(t.parent(v), v);
    return L;
}

std::int64_t tree_distance(const ShTree& t, std::int64_t u, std::int64_t v) {
    auto [nu, pu] = t.locate(u);
    auto [nv, pv] = t.locate(v);
    (void)pu; (void)pv;
    std::int64_t a = u, b = v, dist = 0;
    while (nu > nv) { a = t.parent(a); --nu; ++dist; }
    while (nv > nu) { b = t.parent(b); --nv; ++dist; }
    while (a != b) {
        a = t.parent(a);
        b = t.parent(b);
        dist += 2;
    }
    return dist;
}

} // namespace sptree::tree
