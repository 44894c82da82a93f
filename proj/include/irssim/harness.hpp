// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "irssim/config.hpp"

namespace irssim {

struct Stats {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
    long long n = 0;
};

Stats grand_stats(const std::vector<double>& xs);

// Per-timestep mean/std across episodes; every inner vector must have the
// same length.
std::vector<Stats> per_timestep_stats(const std::vector<std::vector<double>>& per_episode);

// Trailing moving average: row e holds the mean of max(0, e-window+1)..e.
std::vector<double> moving_average(const std::vector<double>& xs, int window);

// Seed-derived 16-hex-digit episode tag carried on every per-episode row.
std::string episode_id(std::uint64_t seed, std::uint64_t cell, std::uint64_t episode);

// Runs the configured (strategy x M x T_reconf) campaign and writes
// manifest.txt, run.log, plot_results.py and the CSV set into cfg.out_dir.
// CSV columns are documented in the README; all numeric output uses 9
// significant digits and reruns of the same config are byte-identical.
void run_campaign(const RunConfig& cfg);

}  // namespace irssim
