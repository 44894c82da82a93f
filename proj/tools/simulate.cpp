// SPDX-License-Identifier: Apache-2.0
//
// Campaign driver. Typical use:
//   simulate --config run.cfg --out results/
//   simulate --config train.cfg --phase train --checkpoint agents.ckpt
#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <iostream>

#include "irssim/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Adaptive IRS limited-feedback simulator"};

    std::string config_path;
    std::string out_dir;
    std::string phase;
    std::string checkpoint;
    std::uint64_t seed = 0;
    int episodes = 0;
    bool have_seed = false, have_episodes = false;

    app.add_option("--config", config_path, "configuration file")->required();
    auto* seed_opt = app.add_option("--seed", seed, "override run.seed");
    app.add_option("--out", out_dir, "override run.out_dir");
    auto* ep_opt = app.add_option("--episodes", episodes, "override run.n_episodes");
    app.add_option("--phase", phase, "override run.phase (train|utilize)");
    app.add_option("--checkpoint", checkpoint, "agent checkpoint to read (utilize) or write (train)");

    CLI11_PARSE(app, argc, argv);
    have_seed = seed_opt->count() > 0;
    have_episodes = ep_opt->count() > 0;

    try {
        irssim::RunConfig cfg = irssim::RunConfig::load_file(config_path);
        if (have_seed) cfg.seed = seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (have_episodes) cfg.n_episodes = episodes;
        if (!phase.empty()) cfg.phase = phase;
        if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
        cfg.validate();
        irssim::run_campaign(cfg);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
