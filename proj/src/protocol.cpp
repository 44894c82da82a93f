// SPDX-License-Identifier: Apache-2.0
#include "irssim/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace irssim {

const char* strategy_name(StrategyKind k) {
    switch (k) {
        case StrategyKind::kRvq: return "RVQ";
        case StrategyKind::kRa: return "RA";
        case StrategyKind::kSdpic: return "SDPIC";
        case StrategyKind::kMdpic: return "MDPIC";
        case StrategyKind::kRaSdpic: return "RA_SDPIC";
        case StrategyKind::kRaMdpic: return "RA_MDPIC";
    }
    return "?";
}

StrategyKind strategy_from_name(const std::string& name) {
    for (StrategyKind k : {StrategyKind::kRvq, StrategyKind::kRa, StrategyKind::kSdpic,
                           StrategyKind::kMdpic, StrategyKind::kRaSdpic, StrategyKind::kRaMdpic})
        if (name == strategy_name(k)) return k;
    throw std::invalid_argument("unknown strategy: " + name);
}

StrategyConfig StrategyConfig::make(StrategyKind kind, Phase phase, int m, int m_a_cfg) {
    if (m < 1) throw std::invalid_argument("StrategyConfig: M must be >= 1");
    StrategyConfig c;
    c.kind = kind;
    c.phase = phase;
    c.m = m;
    switch (kind) {
        case StrategyKind::kRvq:
        case StrategyKind::kRa:
            c.m_a = 0;
            c.m_dpic = 0;
            c.m_ra = m;
            break;
        case StrategyKind::kSdpic:
        case StrategyKind::kRaSdpic:
            c.m_a = 1;
            if (phase == Phase::kTraining)
                c.m_dpic = 1;
            else
                c.m_dpic = (kind == StrategyKind::kSdpic) ? m : std::min(1, m);
            c.m_ra = m - c.m_dpic;
            break;
        case StrategyKind::kMdpic:
        case StrategyKind::kRaMdpic:
            if (m_a_cfg < 2)
                throw std::invalid_argument("StrategyConfig: multi-agent kinds need M_A > 1");
            c.m_a = std::min(m_a_cfg, m);
            if (phase == Phase::kTraining)
                c.m_dpic = c.m_a;
            else
                c.m_dpic = (kind == StrategyKind::kMdpic) ? m : std::min(m, m_a_cfg);
            c.m_ra = m - c.m_dpic;
            break;
    }
    if (c.m_dpic + c.m_ra != c.m) throw std::logic_error("StrategyConfig: broken partition");
    return c;
}

FeedbackKind StrategyConfig::feedback_kind() const {
    if (m_dpic == 0) return FeedbackKind::kIndexOnly;
    return phase == Phase::kTraining ? FeedbackKind::kDpicTraining
                                     : FeedbackKind::kDpicUtilization;
}

MdpScaling ProtocolContext::scaling() const {
    return make_scaling(budget.p_tx_w, budget.sigma2_w, channel.n_bs, group.n_groups);
}

AgentConfig ProtocolContext::agent_config() const {
    AgentConfig c;
    c.state_dim = 2 * channel.n_bs + group.n_groups;
    c.l1 = l1;
    c.l2 = l2;
    c.action_dim = group.n_groups;
    c.action_scale = range.delta_dpic() * scaling().action;
    c.gamma = gamma;
    c.tau = tau;
    c.lr_actor = lr_actor;
    c.lr_critic = lr_critic;
    c.batch = n_batch;
    c.buffer_capacity = buffer_capacity;
    return c;
}

EpisodeRngs make_episode_rngs(std::uint64_t master_seed, std::uint64_t cell_id,
                              std::uint64_t episode) {
    return EpisodeRngs{make_stream(master_seed, "channel", cell_id, episode),
                       make_stream(master_seed, "codebook", cell_id, episode),
                       make_stream(master_seed, "measurement", cell_id, episode),
                       make_stream(master_seed, "exploration", cell_id, episode)};
}

DirectionCodebook make_direction_codebook(const ProtocolContext& ctx, std::uint64_t master_seed) {
    // Tag 0xd1 keeps the draw apart from per-episode codebook streams.
    Rng rng = make_stream(master_seed, "codebook", 0xd1, 0);
    return rvq_directions(ctx.k_directions, ctx.group.n_groups, ctx.range.delta_dpic(), rng);
}

BlockReport run_block(ProtocolState& ps, const Geometry& geom, const ChannelState& chan,
                      const ProtocolContext& ctx, const StrategyConfig& strat,
                      std::vector<Agent>* agents, const DirectionCodebook* directions,
                      double epsilon, EpisodeRngs& rngs, std::vector<Rng>* agent_rngs) {
    const int m_total = strat.m;
    if (ps.codebook.size() != m_total)
        throw std::invalid_argument("run_block: codebook size does not match strategy");
    if (strat.uses_agents() && (!agents || !directions))
        throw std::invalid_argument("run_block: strategy needs agents and a direction codebook");

    const Eigen::VectorXcd h_ub = assemble_ue_bs(chan, geom, ctx.channel);
    const Eigen::MatrixXcd h_ib = assemble_irs_bs(chan, geom, ctx.channel);
    const std::vector<UeIrsPath> paths = assemble_ue_irs_paths(chan, geom, ctx.channel);

    // Step 1 + 2: sound every codeword, measure, rate on the measurement.
    std::vector<Eigen::VectorXcd> h_true(m_total), h_meas(m_total);
    std::vector<double> rate_meas(m_total);
    for (int m = 0; m < m_total; ++m) {
        const Eigen::VectorXd c_full = expand_group(ps.codebook.codewords[m], ctx.group);
        h_true[m] = effective_channel(h_ub, h_ib, paths, c_full, *ctx.table);
        h_meas[m] = measure_effective_channel(h_true[m], ctx.budget.p_tx_w, ctx.budget.sigma2_w,
                                              rngs.measurement);
        rate_meas[m] = data_rate(h_meas[m], ctx.budget.p_tx_w, ctx.budget.sigma2_w);
    }
    const int m_star = select_codeword(rate_meas);
    ps.q_star = ps.codebook.codewords[m_star - 1];

    // DPIC inference on this block's states.
    const int n_dpic = strat.m_dpic;
    std::vector<Eigen::VectorXd> states(n_dpic);
    std::vector<Eigen::VectorXd> actions(n_dpic);
    std::vector<int> k_indices(n_dpic, 0);
    const MdpScaling scaling = ctx.scaling();
    std::vector<int> slot_agent;
    if (n_dpic > 0) {
        slot_agent = allocate_agents(n_dpic, strat.m_a);
        for (int i = 0; i < n_dpic; ++i) {
            states[i] = scale_state(h_meas[i], ps.codebook.codewords[i], scaling);
            Agent& ag = (*agents)[slot_agent[i] - 1];
            if (strat.phase == Phase::kTraining) {
                BehaviorResult br =
                    behavior_train(ag, states[i], *directions, epsilon, scaling, rngs.exploration);
                actions[i] = std::move(br.a_scaled);
                k_indices[i] = br.k;
            } else {
                k_indices[i] = behavior_util(ag, states[i], *directions, scaling);
            }
        }
    }

    // Step 3: feedback accounting; metrics use the true channel of the
    // winner while selection and learning used measurements.
    const int bits = feedback_bits(strat.feedback_kind(), m_total, ctx.k_directions,
                                   strat.direction_slots());
    check_feedback_feasible(bits, ctx.budget.r_feedback_bps, ctx.budget.t_c_s);
    const double t_p = time_overhead(m_total, ctx.budget.t_reconf_s, bits,
                                     ctx.budget.r_feedback_bps, m_star == m_total,
                                     ctx.budget.t_c_s);

    BlockReport report;
    report.t = ps.t;
    report.m_star = m_star;
    report.rate_true = data_rate(h_true[m_star - 1], ctx.budget.p_tx_w, ctx.budget.sigma2_w);
    report.rate_measured = rate_meas[m_star - 1];
    report.t_p_s = t_p;
    report.rate_effective = effective_rate(report.rate_true, t_p, ctx.budget.t_c_s);
    report.feedback_bits = bits;
    if (!std::isfinite(report.rate_true) || !std::isfinite(report.rate_effective))
        throw std::runtime_error("run_block: non-finite rate metric");

    // Step 4: codebook update. DPIC slots move along their fed-back
    // directions, RA slots re-perturb around the winner, RVQ redraws.
    std::vector<int> n_clips(n_dpic, 0);
    if (strat.kind == StrategyKind::kRvq) {
        ps.codebook = rvq_generate(m_total, ctx.group.n_groups, ctx.range.c_min, ctx.range.c_max,
                                   rngs.codebook);
    } else {
        for (int i = 0; i < n_dpic; ++i) {
            DpicUpdateResult upd = dpic_update(ps.codebook.codewords[i],
                                               directions->directions[k_indices[i] - 1], ctx.range);
            n_clips[i] = upd.n_clip;
            ps.codebook.codewords[i] = std::move(upd.q);
        }
        for (int m = n_dpic; m < m_total; ++m)
            ps.codebook.codewords[m] =
                ra_perturb(ps.q_star, ctx.delta_ra(), ctx.range, rngs.codebook);
    }

    // Training bookkeeping: finish last block's transitions with this
    // block's measured rates, then train each agent once.
    if (strat.phase == Phase::kTraining && n_dpic > 0) {
        if (!agent_rngs || agent_rngs->size() != agents->size())
            throw std::invalid_argument("run_block: training needs per-agent rng streams");
        for (int i = 0; i < n_dpic; ++i) {
            Agent& ag = (*agents)[slot_agent[i] - 1];
            Rng& ag_rng = (*agent_rngs)[slot_agent[i] - 1];
            PendingTransition& pend = ps.pending[i];
            if (pend.valid) {
                Transition tr;
                tr.s = std::move(pend.s);
                tr.a = std::move(pend.a);
                tr.r = reward(rate_meas[i], pend.n_clip);
                tr.s_next = states[i];
                ag.buffer().push(std::move(tr));
            }
            if (ag.buffer().size() >= static_cast<std::size_t>(ag.config().batch)) {
                const auto batch = ag.buffer().sample(ag.config().batch, ag_rng);
                ag.critic_train_step(batch);
                ag.actor_train_step(batch);
                ag.soft_update_targets();
            }
            pend.s = std::move(states[i]);
            pend.a = std::move(actions[i]);
            pend.n_clip = n_clips[i];
            pend.valid = true;
        }
    }

    ++ps.t;
    return report;
}

std::vector<BlockReport> run_episode(const ProtocolContext& ctx, const StrategyConfig& strat,
                                     std::vector<Agent>* agents,
                                     const DirectionCodebook* directions, int n_blocks,
                                     double epsilon, EpisodeRngs& rngs,
                                     std::vector<Rng>* agent_rngs) {
    if (n_blocks < 1) throw std::invalid_argument("run_episode: need at least one block");
    Geometry geom = make_geometry(ctx.f_hz, ctx.v_ue_mps, ctx.budget.t_c_s, rngs.channel);
    ChannelState chan = init_channel_state(geom, ctx.channel, ctx.scenario, rngs.channel);

    ProtocolState ps;
    ps.codebook = rvq_generate(strat.m, ctx.group.n_groups, ctx.range.c_min, ctx.range.c_max,
                               rngs.codebook);
    ps.pending.resize(strat.m_dpic);

    std::vector<BlockReport> reports;
    reports.reserve(n_blocks);
    for (int t = 0; t < n_blocks; ++t) {
        reports.push_back(run_block(ps, geom, chan, ctx, strat, agents, directions, epsilon, rngs,
                                    agent_rngs));
        if (t + 1 < n_blocks) step_environment(geom, chan, ctx.channel, ctx.scenario, rngs.channel);
    }
    return reports;
}

TrainingResult run_training(const ProtocolContext& ctx, const StrategyConfig& strat,
                            int n_episodes, int n_blocks, std::uint64_t master_seed,
                            std::uint64_t cell_id) {
    if (strat.phase != Phase::kTraining)
        throw std::invalid_argument("run_training: strategy is not a training configuration");
    TrainingResult result;
    result.directions = make_direction_codebook(ctx, master_seed);

    const AgentConfig agent_cfg = ctx.agent_config();
    std::vector<Rng> agent_rngs;
    for (int a = 0; a < strat.m_a; ++a) {
        Rng init = make_stream(master_seed, "agent", cell_id, static_cast<std::uint64_t>(a));
        result.agents.emplace_back(agent_cfg, init);
        agent_rngs.push_back(
            make_stream(master_seed, "agent", cell_id, 0x1000 + static_cast<std::uint64_t>(a)));
    }

    const EpsilonSchedule schedule{ctx.range.delta_ra() * ctx.scaling().action,
                                   ctx.range.delta_ra() * ctx.scaling().action / 300.0};
    double epsilon = schedule.eps0;
    std::vector<Agent::LearnerState> last_good;
    for (const Agent& ag : result.agents) last_good.push_back(ag.snapshot());
    for (int e = 0; e < n_episodes; ++e) {
        if (e >= 1) epsilon = std::max(schedule.eps_min, schedule.decay * epsilon);
        EpisodeRngs rngs = make_episode_rngs(master_seed, cell_id, static_cast<std::uint64_t>(e));
        std::vector<BlockReport> reports;
        try {
            reports = run_episode(ctx, strat, &result.agents, &result.directions, n_blocks,
                                  epsilon, rngs, &agent_rngs);
        } catch (const std::exception& ex) {
            result.aborted = true;
            result.abort_reason = "episode " + std::to_string(e) + ": " + ex.what();
            for (std::size_t a = 0; a < result.agents.size(); ++a)
                result.agents[a].restore(last_good[a]);
            break;
        }
        for (std::size_t a = 0; a < result.agents.size(); ++a)
            last_good[a] = result.agents[a].snapshot();
        EpisodeMetrics em;
        em.episode = e;
        em.epsilon = epsilon;
        for (const auto& r : reports) {
            em.mean_rate += r.rate_true;
            em.mean_rate_effective += r.rate_effective;
        }
        em.mean_rate /= reports.size();
        em.mean_rate_effective /= reports.size();
        result.episodes.push_back(em);
    }
    return result;
}

}  // namespace irssim
