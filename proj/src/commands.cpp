#include "sptree/commands.hpp"

#include "sptree/decompose.hpp"
#include "sptree/dynamics.hpp"
#include "sptree/errors.hpp"
#include "sptree/fractal.hpp"
#include "sptree/hsfc.hpp"
#include "sptree/transfer.hpp"
#include "sptree/tree.hpp"

#include <json.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

namespace sptree::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------------------
// profile cache: 16-byte header (magic, version, payload hash), then payload

struct Fnv64 {
    std::uint64_t h = 1469598103934665603ULL;
    void add(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    }
    template <typename T>
    void add_pod(const T& v) {
        add(&v, sizeof v);
    }
};

constexpr char kCacheMagic[4] = {'S', 'P', 'T', 'C'};
constexpr std::uint32_t kCacheVersion = 1;

fs::path cache_dir(const RunConfig& config) {
    if (const char* env = std::getenv("SPTREE_CACHE_DIR"))
        return fs::path(env);
    return fs::path(config.output_dir) / "cache";
}

std::uint64_t profile_key(const jacobi::JacobiCoeffs& coeffs,
                          const std::vector<double>& psi, double T,
                          const dynamics::QuadratureOptions& opts) {
    Fnv64 f;
    f.add("profile-v1", 10);
    f.add_pod(T);
    f.add_pod(opts.core_margin);
    f.add_pod(opts.panel_width);
    f.add_pod(opts.gl_order);
    f.add_pod(opts.tail_frac);
    f.add_pod(opts.tail_ratio);
    f.add_pod(opts.workers);
    f.add_pod(coeffs.k);
    f.add(coeffs.d.data(), coeffs.d.size() * sizeof(double));
    f.add(coeffs.b.data(), coeffs.b.size() * sizeof(double));
    f.add(psi.data(), psi.size() * sizeof(double));
    return f.h;
}

bool cache_load(const fs::path& file, dynamics::TimeAverageProfile& prof) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return false;
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t want_hash = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&want_hash), 8);
    if (!in || std::memcmp(magic, kCacheMagic, 4) != 0 || version != kCacheVersion)
        return false;
    std::string payload((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    Fnv64 f;
    f.add(payload.data(), payload.size());
    if (f.h != want_hash) return false;
    if (payload.size() < 8 + 3 * sizeof(double)) return false;
    const char* p = payload.data();
    std::uint64_t n;
    std::memcpy(&n, p, 8);
    p += 8;
    if (payload.size() != 8 + (n + 3) * sizeof(double)) return false;
    prof.a.resize(n);
    std::memcpy(prof.a.data(), p, n * sizeof(double));
    p += n * sizeof(double);
    std::memcpy(&prof.T, p, 8);
    p += 8;
    std::memcpy(&prof.mass, p, 8);
    p += 8;
    std::memcpy(&prof.state_norm2, p, 8);
    prof.method = dynamics::Method::quadrature;
    return true;
}

void cache_store(const fs::path& file, const dynamics::TimeAverageProfile& prof) {
    std::string payload;
    std::uint64_t n = prof.a.size();
    payload.resize(8 + (n + 3) * sizeof(double));
    char* p = payload.data();
    std::memcpy(p, &n, 8);
    p += 8;
    std::memcpy(p, prof.a.data(), n * sizeof(double));
    p += n * sizeof(double);
    std::memcpy(p, &prof.T, 8);
    p += 8;
    std::memcpy(p, &prof.mass, 8);
    p += 8;
    std::memcpy(p, &prof.state_norm2, 8);

    Fnv64 f;
    f.add(payload.data(), payload.size());
    std::ofstream out(file, std::ios::binary);
    out.write(kCacheMagic, 4);
    out.write(reinterpret_cast<const char*>(&kCacheVersion), 4);
    out.write(reinterpret_cast<const char*>(&f.h), 8);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

// ---------------------------------------------------------------------------

tree::TreeParams tree_params(const RunConfig& config, int depth) {
    tree::TreeParams params;
    params.gamma = config.gamma;
    params.depth = depth;
    params.sparse_positions = config.rule == "paper"
                                  ? tree::paper_positions(depth)
                                  : config.sparse_positions;
    return params;
}

std::vector<double> t_grid_of(const RunConfig& config) {
    std::vector<double> t(static_cast<std::size_t>(config.t_points));
    for (int i = 0; i < config.t_points; ++i)
        t[static_cast<std::size_t>(i)] =
            config.t_min * std::pow(config.t_max / config.t_min,
                                    static_cast<double>(i) / (config.t_points - 1));
    return t;
}

} // namespace

jacobi::JacobiCoeffs build_operator(const RunConfig& config) {
    const auto n = static_cast<std::size_t>(config.size);
    switch (config.model) {
    case Model::free_line:
        return jacobi::free_block(n);
    case Model::diagonal: {
        jacobi::JacobiCoeffs c;
        c.k = 2;
        c.d.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            c.d[i] = 2.0 + std::sin(0.9 * static_cast<double>(i + 1));
        c.b.assign(n > 0 ? n - 1 : 0, 0.0);
        return c;
    }
    case Model::tree: {
        auto probe = tree::build_tree(tree_params(config, config.depth));
        if (config.block_k > probe.alpha.back())
            throw ConfigError("block_k", "block index exceeds the truncation width");
        int offset = decompose::level_index(probe, config.block_k);
        int need = offset + static_cast<int>(config.size) - 1;
        auto t = tree::build_tree(tree_params(config, need));
        return decompose::jacobi_coeffs(t, config.block_k, config.size);
    }
    }
    throw ConfigError("model", "unknown model");
}

std::vector<double> build_state(const RunConfig& config,
                                const jacobi::JacobiCoeffs& coeffs) {
    const std::size_t n = coeffs.size();
    std::vector<double> psi(n, 0.0);
    switch (config.state) {
    case StateKind::delta1:
        psi[0] = 1.0;
        return psi;
    case StateKind::delta_n: {
        if (static_cast<std::size_t>(config.state_n) > n)
            throw ConfigError("state", "state index beyond the truncation");
        psi[static_cast<std::size_t>(config.state_n - 1)] = 1.0;
        return psi;
    }
    case StateKind::first_kind: {
        auto f = hsfc::make_test_function(hsfc::Kind::first, config.state_nu,
                                          {.center = config.state_center});
        return hsfc::filtered_corner_state(f, coeffs);
    }
    case StateKind::second_kind: {
        auto f = hsfc::make_test_function(
            hsfc::Kind::second, config.state_nu,
            {.center = config.state_center, .c_lower = config.state_c});
        return hsfc::filtered_corner_state(f, coeffs);
    }
    }
    throw ConfigError("state", "unknown state kind");
}

int cmd_tree_info(const RunConfig& config, std::ostream& diag) {
    auto params = tree_params(config, config.depth);
    auto t = tree::build_tree(params);
    json out;
    out["gamma"] = config.gamma;
    out["depth"] = config.depth;
    out["rule"] = config.rule;
    out["sparse_positions"] = params.sparse_positions;
    out["g"] = t.g;
    out["alpha"] = t.alpha;
    out["vertex_count"] = t.vertex_count;
    fs::create_directories(config.output_dir);
    std::ofstream file(fs::path(config.output_dir) / "tree_info.json");
    file << out.dump(2) << "\n";
    diag << "tree-info: depth " << config.depth << ", " << t.vertex_count
         << " vertices\n";
    return 0;
}

// ---------------------------------------------------------------------------
// verify

namespace {

struct CheckResult {
    std::string name;
    bool pass = false;
    json detail;
};

jacobi::JacobiCoeffs random_structured_block(std::mt19937_64& rng, std::size_t n) {
    // d = b^2 + 1 (with the k = 1 corner on demand): the family the kernel
    // bound is proved for
    std::uniform_real_distribution<double> bdist(0.2, 4.0);
    std::bernoulli_distribution corner(0.5);
    jacobi::JacobiCoeffs c;
    c.k = corner(rng) ? 1 : 2;
    c.d.resize(n);
    c.b.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) c.b[i] = bdist(rng);
    for (std::size_t i = 0; i < n; ++i) {
        double b2 = i + 1 < n ? c.b[i] * c.b[i] : 0.0;
        c.d[i] = b2 + 1.0;
    }
    if (c.k == 1) c.d[0] -= 1.0;
    return c;
}

} // namespace

int cmd_verify(const RunConfig& config, std::ostream& diag) {
    std::vector<CheckResult> results;
    std::mt19937_64 rng(config.seed);

    // 1. exact structural identity across paper-rule trees
    {
        CheckResult r{"structural_identity", true, {}};
        std::int64_t shapes = 0;
        for (double gamma : {1.0 / 3.0, 0.5}) {
            tree::TreeParams params;
            params.gamma = gamma;
            params.depth = config.verify_depth;
            params.sparse_positions = tree::paper_positions(params.depth);
            auto t = tree::build_tree(params);
            if (config.inject == "d_sign") {
                // fault injection: flip the sign rule on one diagonal entry
                auto c = decompose::jacobi_coeffs(t, 1, t.depth() + 1);
                c.d_exact[1] = -c.d_exact[1];
                bool caught = false;
                for (std::size_t i = 0; i + 1 < c.d_exact.size(); ++i) {
                    std::int64_t corner = (c.k == 1 && i == 0) ? 1 : 0;
                    if (c.d_exact[i] != c.g_exact[i] + 1 - corner) caught = true;
                }
                if (caught) {
                    r.pass = false;
                    r.detail["injected"] = "d_sign";
                }
            }
            shapes += decompose::check_structural_identity(t);
        }
        r.detail["distinct_blocks"] = shapes;
        results.push_back(std::move(r));
    }

    // 2. unitary equivalence on small trees
    {
        CheckResult r{"equivalence", true, {}};
        struct Case {
            double gamma;
            std::vector<std::int64_t> pos;
            int depth;
        };
        std::vector<Case> cases = {{0.5, {}, 8},
                                   {1.0 / 3.0, {}, 8},
                                   {0.5, {2, 3, 4, 5}, 7},
                                   {1.0 / 3.0, {2, 3, 4}, 6}};
        double worst = 0;
        for (auto& cs : cases) {
            tree::TreeParams params;
            params.gamma = cs.gamma;
            params.depth = cs.depth;
            params.sparse_positions =
                cs.pos.empty() ? tree::paper_positions(cs.depth) : cs.pos;
            auto t = tree::build_tree(params);
            auto rep = decompose::verify_equivalence(t);
            worst = std::max({worst, rep.off_block, rep.in_block, rep.eigen_linf});
        }
        r.detail["max_deviation"] = worst;
        r.pass = worst <= 1e-10;
        results.push_back(std::move(r));
    }

    // 3. shift-operator factorization
    {
        CheckResult r{"shift_ops", true, {}};
        double worst = 0;
        for (int rep = 0; rep < 20; ++rep) {
            auto c = random_structured_block(rng, 40);
            std::vector<double> f(c.size(), 0.0);
            std::uniform_int_distribution<std::size_t> site(0, 20);
            std::uniform_real_distribution<double> val(-1.0, 1.0);
            for (int s = 0; s < 5; ++s) f[site(rng)] = val(rng);
            for (double beta : {0.5, 1.0, 2.0})
                worst = std::max(worst, jacobi::shift_ops_check(c, beta, f).max());
        }
        r.detail["max_deviation"] = worst;
        r.pass = worst <= 1e-12;
        results.push_back(std::move(r));
    }

    // 4. resolvent kernel bound, randomized sweep
    {
        CheckResult r{"kernel_bound", true, {}};
        std::uniform_real_distribution<double> re(-1.0, 5.0), im(1e-3, 2.0),
            gm(0.05, 0.95);
        int tuples = 0;
        double worst_margin = 0;
        while (tuples < config.verify_kernel_tuples) {
            std::uniform_int_distribution<std::size_t> nn(20, 160);
            auto c = random_structured_block(rng, nn(rng));
            std::vector<std::pair<std::size_t, std::size_t>> pairs;
            std::uniform_int_distribution<std::size_t> idx(0, c.size() - 1);
            for (int q = 0; q < 25; ++q) pairs.emplace_back(idx(rng), idx(rng));
            auto rep = jacobi::kernel_bound_check(
                c, {re(rng), im(rng)}, gm(rng), pairs);
            worst_margin = std::max(worst_margin, rep.worst_margin);
            if (rep.any_violation) r.pass = false;
            tuples += static_cast<int>(pairs.size());
        }
        r.detail["tuples"] = tuples;
        r.detail["worst_margin"] = worst_margin;
        results.push_back(std::move(r));
    }

    // 5. resolvent vs transfer recursion
    {
        CheckResult r{"recursion", true, {}};
        auto free_c = jacobi::free_block(500);
        auto rep1 = transfer::recursion_consistency(free_c, {2.0, 1.0 / 50.0}, 100);
        tree::TreeParams params;
        params.gamma = 0.5;
        params.depth = 500;
        params.sparse_positions = {8, 64};
        auto t = tree::build_tree(params);
        auto sparse_c = decompose::jacobi_coeffs(t, 1, 400);
        auto rep2 = transfer::recursion_consistency(sparse_c, {1.0, 1.0 / 20.0}, 120);
        r.detail["free_dev"] = rep1.max_rel_dev;
        r.detail["sparse_dev"] = rep2.max_rel_dev;
        r.pass = rep1.max_rel_dev <= 1e-8 && rep2.max_rel_dev <= 1e-6;
        results.push_back(std::move(r));
    }

    // 6. operator-function kernel decay
    {
        CheckResult r{"hs_kernel_decay", true, {}};
        auto f = hsfc::make_test_function(hsfc::Kind::first, 0.5);
        auto c = jacobi::free_block(60);
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < 60; i += 7)
            for (std::size_t j = 0; j < 60; j += 11) pairs.emplace_back(i, j);
        auto rep = hsfc::kernel_decay_check(f, c, 2, pairs, 1);
        r.detail["hs_cross_dev"] = rep.hs_cross_dev;
        r.detail["c_fit"] = rep.c_fit;
        r.detail["stable"] = rep.stable;
        r.pass = rep.hs_cross_dev <= 1e-4 && rep.stable;
        results.push_back(std::move(r));
    }

    json out;
    bool all = true;
    for (auto& r : results) {
        out[r.name] = r.detail;
        out[r.name]["pass"] = r.pass;
        all = all && r.pass;
        diag << (r.pass ? "PASS " : "FAIL ") << r.name << "\n";
    }
    out["pass"] = all;
    fs::create_directories(config.output_dir);
    std::ofstream file(fs::path(config.output_dir) / "verify.json");
    file << out.dump(2) << "\n";
    return all ? 0 : 1;
}

// ---------------------------------------------------------------------------
// dynamics

int cmd_dynamics(const RunConfig& config, std::ostream& diag) {
    auto coeffs = build_operator(config);
    auto psi = build_state(config, coeffs);
    auto t_grid = t_grid_of(config);

    dynamics::QuadratureOptions qopts;
    qopts.workers = config.workers;
    qopts.mass_tol = config.mass_tol_quadrature;
    qopts.tail_frac = config.tail_frac;

    fs::create_directories(config.output_dir);
    fs::path cdir = cache_dir(config);
    fs::create_directories(cdir);

    const bool use_quadrature = config.method != RunMethod::eigensum;
    const bool use_eigensum = config.method != RunMethod::quadrature;

    std::vector<dynamics::TimeAverageProfile> profiles;
    double method_dev = 0;
    bool tail_warning = false;
    json warnings = json::array();

    for (double T : t_grid) {
        dynamics::TimeAverageProfile prof;
        if (use_quadrature) {
            auto key = profile_key(coeffs, psi, T, qopts);
            char name[32];
            std::snprintf(name, sizeof name, "%016llx.bin",
                          static_cast<unsigned long long>(key));
            fs::path file = cdir / name;
            if (!cache_load(file, prof)) {
                prof = dynamics::profile_quadrature(coeffs, psi, T, qopts);
                cache_store(file, prof);
            }
        }
        if (use_eigensum) {
            auto eig = dynamics::profile_eigensum(coeffs, psi, T);
            if (use_quadrature) {
                double peak = 0, dev = 0;
                for (double x : eig.a) peak = std::max(peak, x);
                for (std::size_t i = 0; i < eig.a.size(); ++i)
                    dev = std::max(dev, std::abs(eig.a[i] - prof.a[i]));
                if (peak > 0) method_dev = std::max(method_dev, dev / peak);
            }
            prof = std::move(eig);
        }
        profiles.push_back(std::move(prof));
    }

    // moments and exponents
    json summary;
    summary["model"] = config.model == Model::tree      ? "tree"
                       : config.model == Model::free_line ? "free"
                                                          : "diagonal";
    summary["size"] = config.size;
    summary["t_grid"] = {{"min", config.t_min}, {"max", config.t_max},
                         {"points", config.t_points}};
    if (config.method == RunMethod::both) summary["method_rel_deviation"] = method_dev;

    std::ofstream moments_csv(fs::path(config.output_dir) / "moments.csv");
    moments_csv << "T,p,moment,local_slope\n";

    json per_p = json::array();
    for (double p : config.p_list) {
        dynamics::MomentCurve curve;
        curve.p = p;
        for (auto& prof : profiles) {
            bool warn = false;
            double m = dynamics::moment(prof, p, &warn);
            tail_warning = tail_warning || warn;
            curve.T.push_back(prof.T);
            curve.value.push_back(m);
        }
        json entry;
        entry["p"] = p;
        std::vector<double> slopes(curve.T.size(), 0.0);
        try {
            auto est = dynamics::beta_estimate(curve);
            slopes = est.local_slopes;
            entry["beta_hat"] = est.beta_hat;
            entry["window_slopes"] = est.window_slopes;
        } catch (const InsufficientDataError& e) {
            entry["beta_hat"] = nullptr;
            entry["note"] = e.what();
        }
        if (config.model == Model::tree)
            entry["target"] = (p + 1.0) / (p + 1.0 / config.gamma);

        for (std::size_t i = 0; i < curve.T.size(); ++i)
            moments_csv << fmt17(curve.T[i]) << "," << fmt17(p) << ","
                        << fmt17(curve.value[i]) << "," << fmt17(slopes[i]) << "\n";

        // envelope sandwich, when a barrier window intersects the grid
        if (config.model == Model::tree) {
            auto positions = config.rule == "paper"
                                 ? tree::paper_positions(config.size)
                                 : config.sparse_positions;
            for (int nb = static_cast<int>(positions.size()); nb >= 1; --nb) {
                double ln = static_cast<double>(positions[static_cast<std::size_t>(nb) - 1]);
                double lo = ln / 4.0, hi = std::pow(ln, 1.0 / config.gamma);
                int inside = 0;
                for (double T : curve.T)
                    if (T >= lo && T <= hi) ++inside;
                if (inside < 4) continue;
                auto env = dynamics::bound_envelopes(positions, config.gamma, p, nb, curve);
                json je;
                je["barriers"] = env.barrier_count;
                je["l_n"] = env.l_n;
                je["window"] = {env.window_lo, env.window_hi};
                je["lower_constant"] = env.lower_constant;
                je["upper_constant"] = env.upper_constant;
                je["inside_fraction"] = env.inside_fraction;
                je["pivot_structural"] = env.pivot_structural;
                je["pivot_grid"] = env.pivot_grid;
                je["pivot_octaves"] = env.pivot_octaves;
                je["knee_empirical"] = env.knee_empirical;
                je["knee_octaves"] = env.knee_octaves;
                je["crossover_exponent"] = env.crossover_exponent;
                je["q_n"] = env.q_n;
                entry["envelope"] = je;
                break;
            }
        }
        per_p.push_back(entry);
    }
    summary["moments"] = per_p;
    summary["tail_warning"] = tail_warning;

    // profile of the largest time scale
    {
        std::ofstream profile_csv(fs::path(config.output_dir) / "profile.csv");
        profile_csv << "n,a\n";
        const auto& prof = profiles.back();
        for (std::size_t i = 0; i < prof.a.size(); ++i)
            profile_csv << (i + 1) << "," << fmt17(prof.a[i]) << "\n";
        summary["profile_T"] = prof.T;
        summary["mass"] = prof.mass;
        summary["state_norm2"] = prof.state_norm2;
    }

    // window-limited dimension proxies on a dense companion
    {
        std::size_t comp = std::min<std::size_t>(coeffs.size(), 1024);
        jacobi::JacobiCoeffs cc;
        cc.k = coeffs.k;
        cc.d.assign(coeffs.d.begin(), coeffs.d.begin() + static_cast<std::ptrdiff_t>(comp));
        cc.b.assign(coeffs.b.begin(),
                    coeffs.b.begin() + static_cast<std::ptrdiff_t>(comp > 0 ? comp - 1 : 0));
        std::vector<double> psic(psi.begin(), psi.begin() + static_cast<std::ptrdiff_t>(comp));
        double captured = 0, full = 0;
        for (double x : psic) captured += x * x;
        for (double x : psi) full += x * x;
        auto mu = jacobi::spectral_measure(cc, psic);
        auto dims = fractal::dim_bounds(mu, 200, config.seed);
        summary["dimension"] = {{"lower", dims.dim_lower},
                                {"upper", dims.dim_upper},
                                {"delta_window", {dims.delta_lo, dims.delta_hi}},
                                {"companion_size", comp},
                                {"state_mass_captured", captured / full}};
    }

    std::ofstream file(fs::path(config.output_dir) / "summary.json");
    file << summary.dump(2) << "\n";
    diag << "dynamics: " << profiles.size() << " time scales, size " << config.size
         << "\n";
    return 0;
}

int guard_main(const std::string& command, const RunConfig& config, std::ostream& diag) {
    try {
        if (command == "tree-info") return cmd_tree_info(config, diag);
        if (command == "verify") return cmd_verify(config, diag);
        if (command == "dynamics") return cmd_dynamics(config, diag);
        diag << "unknown command '" << command << "'\n";
        return 2;
    } catch (const ConfigError& e) {
        diag << "config error [" << e.field << "]: " << e.what() << "\n";
        return 2;
    } catch (const ParamError& e) {
        diag << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DenseLimitError& e) {
        diag << "resource limit: " << e.what() << "\n";
        return 3;
    } catch (const OverflowError& e) {
        diag << "resource limit: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        diag << "check failure: " << e.what() << "\n";
        return 1;
    }
}

} // namespace sptree::cli
