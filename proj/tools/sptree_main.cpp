#include "sptree/commands.hpp"
#include "sptree/errors.hpp"
#include "sptree/run_config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"spectral laboratory for sparse-tree Jacobi operators"};
    app.require_subcommand(1);

    std::string config_path, out_dir, command;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    bool have_seed = false, have_workers = false;

    for (const char* name : {"tree-info", "verify", "dynamics"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration (JSON)")
            ->required();
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--workers", workers, "worker thread count override")
            ->each([&](const std::string&) { have_workers = true; });
        sub->add_option("--seed", seed, "seed override")
            ->each([&](const std::string&) { have_seed = true; });
        sub->callback([&, name] { command = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = sptree::cli::load_config(config_path);
        if (!out_dir.empty()) config.output_dir = out_dir;
        if (have_workers) config.workers = workers;
        if (have_seed) config.seed = seed;
        config.validate();
        return sptree::cli::guard_main(command, config, std::cerr);
    } catch (const sptree::ConfigError& e) {
        std::cerr << "config error [" << e.field << "]: " << e.what() << "\n";
        return 2;
    }
}
