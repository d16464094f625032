#include "sptree/run_config.hpp"

#include "sptree/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace sptree::cli {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key, "field '" + key + "': " + e.what());
    }
}

} // namespace

void RunConfig::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw ConfigError("gamma", "gamma must lie in (0,1)");
    if (rule != "paper" && rule != "explicit")
        throw ConfigError("rule", "rule must be 'paper' or 'explicit'");
    if (depth < 1) throw ConfigError("depth", "depth must be >= 1");
    if (size < 1) throw ConfigError("size", "size must be >= 1");
    if (block_k < 1) throw ConfigError("block_k", "block_k must be >= 1");
    std::int64_t prev = 0;
    for (auto p : sparse_positions) {
        if (p <= prev)
            throw ConfigError("sparse_positions",
                              "sparse_positions must be strictly increasing and >= 1");
        prev = p;
    }
    if (!(t_min > 0) || !(t_max > t_min))
        throw ConfigError("t_grid", "need 0 < t_min < t_max");
    if (t_points < 2) throw ConfigError("t_grid", "need at least 2 points");
    for (double p : p_list)
        if (!(p > 0)) throw ConfigError("p_list", "moment orders must be positive");
    if (!(state_nu > 0 && state_nu < 1))
        throw ConfigError("state", "nu must lie in (0,1)");
    if (state_n < 1) throw ConfigError("state", "state index must be >= 1");
    if (!(mass_tol_quadrature > 0))
        throw ConfigError("tolerances", "mass tolerance must be positive");
    if (workers < 1) throw ConfigError("workers", "workers must be >= 1");
    if (inject != "none" && inject != "d_sign")
        throw ConfigError("inject", "inject must be 'none' or 'd_sign'");
}

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("(root)", std::string("invalid JSON: ") + e.what());
    }
    RunConfig c;
    std::string model = get_or<std::string>(j, "model", "free");
    if (model == "tree") c.model = Model::tree;
    else if (model == "free") c.model = Model::free_line;
    else if (model == "diagonal") c.model = Model::diagonal;
    else throw ConfigError("model", "model must be 'tree', 'free', or 'diagonal'");

    if (j.contains("tree")) {
        const auto& t = j.at("tree");
        c.gamma = get_or<double>(t, "gamma", c.gamma);
        c.rule = get_or<std::string>(t, "rule", c.rule);
        c.sparse_positions =
            get_or<std::vector<std::int64_t>>(t, "sparse_positions", {});
        c.depth = get_or<int>(t, "depth", c.depth);
        if (!c.sparse_positions.empty() && !t.contains("rule")) c.rule = "explicit";
    }
    c.block_k = get_or<std::int64_t>(j, "block_k", c.block_k);
    c.size = get_or<std::int64_t>(j, "size", c.size);

    if (j.contains("state")) {
        const auto& s = j.at("state");
        std::string kind = get_or<std::string>(s, "type", "delta1");
        if (kind == "delta1") c.state = StateKind::delta1;
        else if (kind == "delta_n") c.state = StateKind::delta_n;
        else if (kind == "first_kind") c.state = StateKind::first_kind;
        else if (kind == "second_kind") c.state = StateKind::second_kind;
        else throw ConfigError("state", "unknown state type '" + kind + "'");
        c.state_nu = get_or<double>(s, "nu", c.state_nu);
        c.state_center = get_or<double>(s, "center", c.state_center);
        c.state_c = get_or<double>(s, "c", c.state_c);
        c.state_n = get_or<std::int64_t>(s, "n", c.state_n);
    }
    if (j.contains("t_grid")) {
        const auto& t = j.at("t_grid");
        c.t_min = get_or<double>(t, "min", c.t_min);
        c.t_max = get_or<double>(t, "max", c.t_max);
        c.t_points = get_or<int>(t, "points", c.t_points);
    }
    c.p_list = get_or<std::vector<double>>(j, "p_list", c.p_list);

    std::string method = get_or<std::string>(j, "method", "quadrature");
    if (method == "eigensum") c.method = RunMethod::eigensum;
    else if (method == "quadrature") c.method = RunMethod::quadrature;
    else if (method == "both") c.method = RunMethod::both;
    else throw ConfigError("method", "method must be 'eigensum', 'quadrature', or 'both'");

    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        c.mass_tol_quadrature = get_or<double>(t, "mass_quadrature", c.mass_tol_quadrature);
        c.tail_frac = get_or<double>(t, "tail_frac", c.tail_frac);
    }
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.workers = get_or<unsigned>(j, "workers", c.workers);
    if (j.contains("verify")) {
        const auto& v = j.at("verify");
        c.verify_kernel_tuples = get_or<int>(v, "kernel_tuples", c.verify_kernel_tuples);
        c.verify_depth = get_or<int>(v, "depth", c.verify_depth);
    }
    c.inject = get_or<std::string>(j, "inject", c.inject);
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("(file)", "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace sptree::cli
