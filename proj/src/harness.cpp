// SPDX-License-Identifier: Apache-2.0
#include "irssim/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace irssim {

namespace fs = std::filesystem;

Stats grand_stats(const std::vector<double>& xs) {
    Stats s;
    s.n = static_cast<long long>(xs.size());
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / xs.size();
    if (xs.size() > 1) {
        double acc = 0.0;
        for (double x : xs) acc += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(acc / (xs.size() - 1));
    }
    return s;
}

std::vector<Stats> per_timestep_stats(const std::vector<std::vector<double>>& per_episode) {
    std::vector<Stats> out;
    if (per_episode.empty()) return out;
    const std::size_t n_t = per_episode.front().size();
    for (const auto& ep : per_episode)
        if (ep.size() != n_t)
            throw std::invalid_argument("per_timestep_stats: ragged episode lengths");
    out.resize(n_t);
    std::vector<double> column(per_episode.size());
    for (std::size_t t = 0; t < n_t; ++t) {
        for (std::size_t e = 0; e < per_episode.size(); ++e) column[e] = per_episode[e][t];
        out[t] = grand_stats(column);
    }
    return out;
}

std::vector<double> moving_average(const std::vector<double>& xs, int window) {
    if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
    std::vector<double> out(xs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        acc += xs[i];
        if (i >= static_cast<std::size_t>(window)) acc -= xs[i - window];
        const std::size_t n = std::min<std::size_t>(i + 1, window);
        out[i] = acc / n;
    }
    return out;
}

std::string episode_id(std::uint64_t seed, std::uint64_t cell, std::uint64_t episode) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(stream_seed(seed, "episode-id", cell, episode)));
    return buf;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

struct EpisodeOutcome {
    bool ok = false;
    std::string error;
    std::vector<double> rates;      // rate_true per block
    std::vector<double> eff_rates;  // rate_effective per block
    std::vector<BlockReport> reports;
};

struct Cell {
    std::size_t index = 0;
    int m = 0;
    double t_reconf = 0.0;
};

// Episodes are independent in the utilization phase; distribute them over a
// small pool and collect into index-addressed slots so the reduction order
// never depends on scheduling.
std::vector<EpisodeOutcome> run_utilization_cell(const RunConfig& cfg, const ProtocolContext& ctx,
                                                 const StrategyConfig& strat,
                                                 std::vector<Agent>* agents,
                                                 const DirectionCodebook* directions,
                                                 std::uint64_t cell_id) {
    std::vector<EpisodeOutcome> out(cfg.n_episodes);
    std::atomic<int> next{0};
    const unsigned n_threads = cfg.threads > 0
                                   ? static_cast<unsigned>(cfg.threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
    auto worker = [&]() {
        for (;;) {
            const int e = next.fetch_add(1);
            if (e >= cfg.n_episodes) return;
            EpisodeOutcome& slot = out[e];
            try {
                EpisodeRngs rngs =
                    make_episode_rngs(cfg.seed, cell_id, static_cast<std::uint64_t>(e));
                const std::vector<BlockReport> reports = run_episode(
                    ctx, strat, agents, directions, cfg.n_blocks, 0.0, rngs, nullptr);
                slot.rates.reserve(reports.size());
                slot.eff_rates.reserve(reports.size());
                for (const auto& r : reports) {
                    slot.rates.push_back(r.rate_true);
                    slot.eff_rates.push_back(r.rate_effective);
                }
                if (cfg.dump_blocks) slot.reports = reports;
                slot.ok = true;
            } catch (const std::exception& ex) {
                slot.error = ex.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i + 1 < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return out;
}

std::string checkpoint_path(const RunConfig& cfg, const Cell& cell, std::size_t n_cells) {
    if (!cfg.checkpoint.empty() && n_cells == 1) return cfg.checkpoint;
    std::ostringstream name;
    name << cfg.out_dir << "/agents_M" << cell.m << "_cell" << cell.index << ".ckpt";
    return name.str();
}

const char kPlotScript[] = R"PY(#!/usr/bin/env python3
"""Plots the campaign CSVs living next to this script."""
import csv
import os
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def read(name):
    path = os.path.join(HERE, name)
    if not os.path.exists(path):
        return []
    with open(path) as fh:
        return list(csv.DictReader(fh))


def save(fig, name):
    out = os.path.join(HERE, name)
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    print("wrote", out)


rows = read("timestep_rate.csv")
if rows:
    fig, ax = plt.subplots(figsize=(6, 4))
    series = defaultdict(list)
    for r in rows:
        key = (r["strategy"], r["M"], r["T_reconf"])
        series[key].append((int(r["t"]), float(r["rate_mean"])))
    for (strategy, m, tr), pts in sorted(series.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                label=f"{strategy} M={m} Tr={tr}")
    ax.set_xlabel("timestep")
    ax.set_ylabel("data rate [bits/s/Hz]")
    ax.legend(fontsize=7)
    save(fig, "rate_vs_timestep.png")

for name, ycol, out in [("rate_vs_M.csv", "rate_mean", "rate_vs_M.png"),
                        ("effrate_vs_M.csv", "effrate_mean", "effrate_vs_M.png")]:
    rows = read(name)
    if not rows:
        continue
    fig, ax = plt.subplots(figsize=(6, 4))
    series = defaultdict(list)
    for r in rows:
        series[(r["strategy"], r["T_reconf"])].append((int(r["M"]), float(r[ycol])))
    for (strategy, tr), pts in sorted(series.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                label=f"{strategy} Tr={tr}")
    ax.set_xlabel("M")
    ax.set_ylabel(ycol)
    ax.set_xscale("log", base=2)
    ax.legend(fontsize=7)
    save(fig, out)

rows = read("training_curve.csv")
if rows:
    fig, ax = plt.subplots(figsize=(6, 4))
    series = defaultdict(list)
    for r in rows:
        key = (r["strategy"], r["M"], r["T_reconf"])
        series[key].append((int(r["episode"]), float(r["effrate_moving_avg"])))
    for (strategy, m, tr), pts in sorted(series.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts],
                label=f"{strategy} M={m} Tr={tr}")
    ax.set_xlabel("episode")
    ax.set_ylabel("effective rate, moving avg [bits/s/Hz]")
    ax.legend(fontsize=7)
    save(fig, "training_curve.png")

print("done")
)PY";

}  // namespace

void run_campaign(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    std::ofstream manifest(cfg.out_dir + "/manifest.txt");
    if (!manifest)
        throw std::runtime_error("run_campaign: output directory not writable: " + cfg.out_dir);

    const CircuitParamTable table = cfg.circuit_table_path.empty()
                                        ? CircuitParamTable::default_table()
                                        : CircuitParamTable::load_file(cfg.circuit_table_path);

    std::vector<Cell> cells;
    for (double tr : cfg.t_reconf_list)
        for (int m : cfg.m_list) cells.push_back({cells.size(), m, tr});

    manifest << "# irssim campaign manifest\n";
    manifest << cfg.echo();
    manifest << "derived.rho = " << fmt(cfg.rho()) << "\n";
    manifest << "derived.lambda = " << fmt(kSpeedOfLight / cfg.f_hz) << "\n";
    manifest << "derived.n_cells = " << cells.size() << "\n";
    for (const Cell& c : cells)
        manifest << "cell " << c.index << ": M = " << c.m << ", T_reconf = " << fmt(c.t_reconf)
                 << "\n";
    manifest.close();

    {
        std::ofstream plot(cfg.out_dir + "/plot_results.py");
        plot << kPlotScript;
    }

    std::ofstream log(cfg.out_dir + "/run.log");
    const Phase phase = cfg.run_phase();
    const StrategyKind kind = cfg.strategy_kind();

    std::ofstream episode_csv, timestep_csv, rate_m_csv, effrate_m_csv, training_csv, blocks_csv;
    if (phase == Phase::kUtilization) {
        episode_csv.open(cfg.out_dir + "/episode_summary.csv");
        episode_csv << "strategy,M,T_reconf,episode,episode_id,status,mean_rate,mean_effrate\n";
        timestep_csv.open(cfg.out_dir + "/timestep_rate.csv");
        timestep_csv << "strategy,M,T_reconf,t,rate_mean,rate_std,effrate_mean,effrate_std,"
                        "n_episodes\n";
        rate_m_csv.open(cfg.out_dir + "/rate_vs_M.csv");
        rate_m_csv << "strategy,M,T_reconf,rate_mean,rate_std,n\n";
        effrate_m_csv.open(cfg.out_dir + "/effrate_vs_M.csv");
        effrate_m_csv << "strategy,M,T_reconf,effrate_mean,effrate_std,n\n";
        if (cfg.dump_blocks) {
            blocks_csv.open(cfg.out_dir + "/blocks.csv");
            blocks_csv << "strategy,M,T_reconf,episode,episode_id," << block_report_csv_header()
                       << "\n";
        }
    } else {
        training_csv.open(cfg.out_dir + "/training_curve.csv");
        training_csv << "strategy,M,T_reconf,episode,episode_id,epsilon,mean_rate,mean_effrate,"
                        "effrate_moving_avg\n";
    }

    // Agents for DPIC utilization come from a checkpoint trained earlier.
    std::vector<Agent> loaded_agents;
    const bool needs_agents = !(kind == StrategyKind::kRvq || kind == StrategyKind::kRa);
    if (phase == Phase::kUtilization && needs_agents) {
        if (cfg.checkpoint.empty())
            throw std::runtime_error("run_campaign: DPIC utilization needs run.checkpoint");
        loaded_agents = load_agents(cfg.checkpoint);
        if (loaded_agents.empty())
            throw std::runtime_error("run_campaign: checkpoint holds no agents");
        const bool single = kind == StrategyKind::kSdpic || kind == StrategyKind::kRaSdpic;
        if (single && loaded_agents.size() != 1)
            throw std::runtime_error("run_campaign: single-agent strategy, multi-agent checkpoint");
        if (!single && loaded_agents.size() < 2)
            throw std::runtime_error("run_campaign: multi-agent strategy needs > 1 agent");
    }

    for (const Cell& cell : cells) {
        const ProtocolContext ctx = cfg.make_context(table, cell.t_reconf);
        const char* strat_name = strategy_name(kind);

        if (phase == Phase::kTraining) {
            if (!needs_agents)
                throw std::runtime_error("run_campaign: only DPIC strategies have a training phase");
            const StrategyConfig strat = StrategyConfig::make(kind, phase, cell.m, cfg.m_a);
            TrainingResult res =
                run_training(ctx, strat, cfg.n_episodes, cfg.n_blocks, cfg.seed, cell.index);
            std::vector<double> eff;
            for (const auto& em : res.episodes) eff.push_back(em.mean_rate_effective);
            const std::vector<double> ma = moving_average(eff, 100);
            for (std::size_t i = 0; i < res.episodes.size(); ++i) {
                const auto& em = res.episodes[i];
                training_csv << strat_name << ',' << cell.m << ',' << fmt(cell.t_reconf) << ','
                             << em.episode << ','
                             << episode_id(cfg.seed, cell.index,
                                           static_cast<std::uint64_t>(em.episode))
                             << ',' << fmt(em.epsilon) << ',' << fmt(em.mean_rate) << ','
                             << fmt(em.mean_rate_effective) << ',' << fmt(ma[i]) << "\n";
            }
            const std::string ckpt = checkpoint_path(cfg, cell, cells.size());
            save_agents(res.agents, ckpt);
            log << "cell " << cell.index << " " << strat_name << " M=" << cell.m
                << " trained episodes=" << res.episodes.size() << " checkpoint=" << ckpt << "\n";
            if (res.aborted)
                log << "cell " << cell.index << " ABORTED: " << res.abort_reason
                    << " (checkpoint holds the last good state)\n";
            continue;
        }

        const StrategyConfig strat =
            StrategyConfig::make(kind, phase, cell.m,
                                 needs_agents ? static_cast<int>(loaded_agents.size()) : cfg.m_a);
        DirectionCodebook directions;
        if (needs_agents) directions = make_direction_codebook(ctx, cfg.seed);
        const std::vector<EpisodeOutcome> outcomes = run_utilization_cell(
            cfg, ctx, strat, needs_agents ? &loaded_agents : nullptr,
            needs_agents ? &directions : nullptr, cell.index);

        std::vector<std::vector<double>> rates, eff_rates;
        std::vector<double> all_rates, all_eff;
        int n_aborted = 0;
        for (int e = 0; e < cfg.n_episodes; ++e) {
            const EpisodeOutcome& oc = outcomes[e];
            const std::string id = episode_id(cfg.seed, cell.index, static_cast<std::uint64_t>(e));
            if (!oc.ok) {
                ++n_aborted;
                episode_csv << strat_name << ',' << cell.m << ',' << fmt(cell.t_reconf) << ',' << e
                            << ',' << id << ",aborted,,\n";
                log << "cell " << cell.index << " episode " << e << " ABORTED: " << oc.error
                    << "\n";
                continue;
            }
            episode_csv << strat_name << ',' << cell.m << ',' << fmt(cell.t_reconf) << ',' << e
                        << ',' << id << ",ok," << fmt(grand_stats(oc.rates).mean) << ','
                        << fmt(grand_stats(oc.eff_rates).mean) << "\n";
            rates.push_back(oc.rates);
            eff_rates.push_back(oc.eff_rates);
            all_rates.insert(all_rates.end(), oc.rates.begin(), oc.rates.end());
            all_eff.insert(all_eff.end(), oc.eff_rates.begin(), oc.eff_rates.end());
            if (cfg.dump_blocks)
                for (const auto& r : oc.reports)
                    blocks_csv << strat_name << ',' << cell.m << ',' << fmt(cell.t_reconf) << ','
                               << e << ',' << id << ',' << block_report_csv_row(r) << "\n";
        }

        const std::vector<Stats> ts_rate = per_timestep_stats(rates);
        const std::vector<Stats> ts_eff = per_timestep_stats(eff_rates);
        for (std::size_t t = 0; t < ts_rate.size(); ++t)
            timestep_csv << strat_name << ',' << cell.m << ',' << fmt(cell.t_reconf) << ',' << t
                         << ',' << fmt(ts_rate[t].mean) << ',' << fmt(ts_rate[t].stddev) << ','
                         << fmt(ts_eff[t].mean) << ',' << fmt(ts_eff[t].stddev) << ','
                         << ts_rate[t].n << "\n";

        const Stats g_rate = grand_stats(all_rates);
        const Stats g_eff = grand_stats(all_eff);
        rate_m_csv << strat_name << ',' << cell.m << ',' << fmt(cell.t_reconf) << ','
                   << fmt(g_rate.mean) << ',' << fmt(g_rate.stddev) << ',' << g_rate.n << "\n";
        effrate_m_csv << strat_name << ',' << cell.m << ',' << fmt(cell.t_reconf) << ','
                      << fmt(g_eff.mean) << ',' << fmt(g_eff.stddev) << ',' << g_eff.n << "\n";
        log << "cell " << cell.index << " " << strat_name << " M=" << cell.m
            << " T_reconf=" << fmt(cell.t_reconf) << " episodes_ok=" << (cfg.n_episodes - n_aborted)
            << " aborted=" << n_aborted << "\n";
    }
}

}  // namespace irssim
