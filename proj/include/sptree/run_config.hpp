#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sptree::cli {

enum class Model { tree, free_line, diagonal };
enum class StateKind { delta1, delta_n, first_kind, second_kind };
enum class RunMethod { eigensum, quadrature, both };

struct RunConfig {
    Model model = Model::free_line;

    // tree model
    double gamma = 0.5;
    std::string rule = "explicit";            // "paper" or "explicit"
    std::vector<std::int64_t> sparse_positions;
    int depth = 1;                              // tree-info truncation depth
    std::int64_t block_k = 1;

    std::int64_t size = 512;                    // Jacobi truncation length

    StateKind state = StateKind::delta1;
    double state_nu = 0.5;
    double state_center = 2.0;
    double state_c = 0.5;
    std::int64_t state_n = 1;

    double t_min = 1.0, t_max = 1e4;
    int t_points = 13;
    std::vector<double> p_list{1.0, 2.0, 4.0};
    RunMethod method = RunMethod::quadrature;

    double mass_tol_quadrature = 1e-4;
    double tail_frac = 1e-7;

    std::string output_dir = ".";
    std::uint64_t seed = 1;
    unsigned workers = 2;

    // verify command sizing
    int verify_kernel_tuples = 2000;
    int verify_depth = 20;

    // fault-injection hook for the verifier's own failure path
    std::string inject = "none";  // "none" or "d_sign"

    void validate() const;  // throws ConfigError with the offending field
};

RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

} // namespace sptree::cli
