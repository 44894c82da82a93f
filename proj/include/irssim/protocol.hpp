// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irssim/channel.hpp"
#include "irssim/codebook.hpp"
#include "irssim/drl.hpp"
#include "irssim/system.hpp"

namespace irssim {

enum class StrategyKind { kRvq, kRa, kSdpic, kMdpic, kRaSdpic, kRaMdpic };
enum class Phase { kTraining, kUtilization };

const char* strategy_name(StrategyKind k);
StrategyKind strategy_from_name(const std::string& name);

// Slot partition for one run. Slots 1..m_dpic receive DPIC updates, the rest
// RA updates around the global winner (RVQ regenerates everything instead).
// In the training phase the DPIC slots are exactly the M_A agent slots.
struct StrategyConfig {
    StrategyKind kind = StrategyKind::kRa;
    Phase phase = Phase::kUtilization;
    int m = 8;       // codebook size
    int m_a = 0;     // number of agents
    int m_dpic = 0;  // DPIC-updated slots
    int m_ra = 0;    // RA-updated slots

    // Derives the partition from the strategy kind; m_a_cfg is the agent
    // count for the multi-agent kinds (clamped to m, single-agent kinds
    // force 1). Throws on inconsistent combinations.
    static StrategyConfig make(StrategyKind kind, Phase phase, int m, int m_a_cfg);

    bool uses_agents() const { return m_dpic > 0; }
    FeedbackKind feedback_kind() const;
    int direction_slots() const { return phase == Phase::kTraining ? m_a : m_dpic; }
};

// Everything fixed over a run: physics table, surface tiling, link budget,
// channel constants and derived scalings.
struct ProtocolContext {
    const CircuitParamTable* table = nullptr;
    GroupMap group;
    CapacitanceRange range;
    LinkBudget budget;
    ChannelParams channel;
    Scenario scenario = Scenario::kNlosUeIrs;
    double f_hz = 5.195e9;
    double v_ue_mps = 3.0 / 3.6;
    int k_directions = 2048;
    int l1 = 400;
    int l2 = 300;
    double gamma = 0.9;
    double tau = 0.005;
    double lr_actor = 3e-4;
    double lr_critic = 3e-3;
    int n_batch = 32;
    std::size_t buffer_capacity = 500000;

    MdpScaling scaling() const;
    double delta_ra() const { return range.delta_ra(); }
    AgentConfig agent_config() const;
};

// Named random streams for one episode.
struct EpisodeRngs {
    Rng channel;
    Rng codebook;
    Rng measurement;
    Rng exploration;
};

EpisodeRngs make_episode_rngs(std::uint64_t master_seed, std::uint64_t cell_id,
                              std::uint64_t episode);

// Awaiting the next block's measured rate before it becomes a transition.
struct PendingTransition {
    Eigen::VectorXd s;
    Eigen::VectorXd a;
    int n_clip = 0;
    bool valid = false;
};

struct ProtocolState {
    Codebook codebook;
    Eigen::VectorXd q_star;
    int t = 0;
    std::vector<PendingTransition> pending;  // one per DPIC slot
};

// One coherence block: sound all M codewords, select on measured rates, do
// the feedback-bit and overhead accounting, update the codebook, and (in
// training) complete pending transitions and train the agents.
BlockReport run_block(ProtocolState& ps, const Geometry& geom, const ChannelState& chan,
                      const ProtocolContext& ctx, const StrategyConfig& strat,
                      std::vector<Agent>* agents, const DirectionCodebook* directions,
                      double epsilon, EpisodeRngs& rngs, std::vector<Rng>* agent_rngs);

// Full episode: fresh random codebook and channels, n_blocks protocol rounds
// with the environment stepping in between.
std::vector<BlockReport> run_episode(const ProtocolContext& ctx, const StrategyConfig& strat,
                                     std::vector<Agent>* agents,
                                     const DirectionCodebook* directions, int n_blocks,
                                     double epsilon, EpisodeRngs& rngs,
                                     std::vector<Rng>* agent_rngs);

struct EpisodeMetrics {
    int episode = 0;
    double epsilon = 0.0;
    double mean_rate = 0.0;
    double mean_rate_effective = 0.0;
};

struct TrainingResult {
    std::vector<Agent> agents;
    DirectionCodebook directions;
    std::vector<EpisodeMetrics> episodes;
    bool aborted = false;
    std::string abort_reason;
};

// Algorithm-2 style training: agents persist across episodes, codebook and
// channels reset per episode, exploration variance decays geometrically. On
// divergence the run stops with the agents as of the last completed episode.
TrainingResult run_training(const ProtocolContext& ctx, const StrategyConfig& strat,
                            int n_episodes, int n_blocks, std::uint64_t master_seed,
                            std::uint64_t cell_id);

// The direction codebook is drawn once per run from the codebook stream
// family; both protocol sides see the same instance.
DirectionCodebook make_direction_codebook(const ProtocolContext& ctx, std::uint64_t master_seed);

}  // namespace irssim
