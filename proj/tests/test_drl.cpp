// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "irssim/drl.hpp"

using namespace irssim;

namespace {

// All six parameter blocks of a net as raw coordinate pointers.
std::vector<double*> param_coords(Mlp& net) {
    std::vector<double*> out;
    for (Eigen::MatrixXd* m : {&net.w1, &net.w2, &net.w3})
        for (Eigen::Index i = 0; i < m->size(); ++i) out.push_back(m->data() + i);
    for (Eigen::VectorXd* v : {&net.b1, &net.b2, &net.b3})
        for (Eigen::Index i = 0; i < v->size(); ++i) out.push_back(v->data() + i);
    return out;
}

std::vector<double> grad_coords(const MlpGrads& g) {
    std::vector<double> out;
    for (const Eigen::MatrixXd* m : {&g.w1, &g.w2, &g.w3})
        for (Eigen::Index i = 0; i < m->size(); ++i) out.push_back(*(m->data() + i));
    for (const Eigen::VectorXd* v : {&g.b1, &g.b2, &g.b3})
        for (Eigen::Index i = 0; i < v->size(); ++i) out.push_back(*(v->data() + i));
    return out;
}

bool grad_close(double analytic, double fd) {
    return std::abs(analytic - fd) <= 1e-4 * (std::abs(analytic) + std::abs(fd)) + 1e-9;
}

AgentConfig tiny_config() {
    AgentConfig c;
    c.state_dim = 3;
    c.l1 = 4;
    c.l2 = 3;
    c.action_dim = 2;
    c.action_scale = 1.0;
    c.batch = 4;
    c.buffer_capacity = 64;
    return c;
}

}  // namespace

TEST_CASE("scale_state") {
    const MdpScaling s = make_scaling(0.1, 1e-11, 5, 10);
    CHECK(s.channel == doctest::Approx(std::sqrt(1e10 / 50.0)).epsilon(1e-12));
    SUBCASE("zero channel with codeword at C_min") {
        const Eigen::VectorXcd h = Eigen::VectorXcd::Zero(5);
        const Eigen::VectorXd q = Eigen::VectorXd::Constant(10, 0.4e-12);
        const Eigen::VectorXd st = scale_state(h, q, s);
        REQUIRE(st.size() == 20);
        for (int i = 0; i < 10; ++i) CHECK(st[i] == 0.0);
        for (int i = 10; i < 20; ++i) CHECK(st[i] == doctest::Approx(0.4).epsilon(1e-12));
    }
    SUBCASE("unit-norm channel block scales to sqrt(P / (sigma2 N_BS N_G))") {
        Eigen::VectorXcd h(5);
        h.setZero();
        h[2] = std::complex<double>(0.6, 0.8);  // ||h|| = 1
        const Eigen::VectorXd q = Eigen::VectorXd::Zero(10);
        const Eigen::VectorXd st = scale_state(h, q, s);
        const double block_norm = st.head(10).norm();
        CHECK(block_norm == doctest::Approx(std::sqrt(1e10 / 50.0)).epsilon(1e-12));
    }
    SUBCASE("deterministic") {
        Eigen::VectorXcd h = Eigen::VectorXcd::Random(5);
        Eigen::VectorXd q = Eigen::VectorXd::Random(10).cwiseAbs() * 1e-12;
        const Eigen::VectorXd a = scale_state(h, q, s);
        const Eigen::VectorXd b = scale_state(h, q, s);
        CHECK((a - b).norm() == 0.0);
    }
}

TEST_CASE("actor forward pass") {
    SUBCASE("zeroed output layer gives the zero action") {
        Rng rng(1);
        Mlp actor = Mlp::actor(4, 8, 8, 3, 0.5, rng);
        actor.w3.setZero();
        actor.b3.setZero();
        const Eigen::MatrixXd out = mlp_forward(actor, Eigen::VectorXd::Random(4));
        CHECK(out.norm() == 0.0);
    }
    SUBCASE("outputs always bounded by the tanh scale") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            Rng rng(seed);
            Mlp actor = Mlp::actor(4, 8, 8, 3, 0.7, rng);
            for (int i = 0; i < 50; ++i) {
                const Eigen::VectorXd s = 1e3 * Eigen::VectorXd::Random(4);
                const Eigen::MatrixXd out = mlp_forward(actor, s);
                CHECK(out.cwiseAbs().maxCoeff() <= 0.7);
            }
        }
    }
    SUBCASE("hand-computed 2-2-2-1 network") {
        Rng rng(2);
        Mlp actor = Mlp::actor(2, 2, 2, 1, 2.0, rng);
        actor.w1 << 1.0, 0.0, 0.0, 1.0;
        actor.b1 << 0.1, -0.2;
        actor.w2 << 0.5, -0.5, 0.25, 0.75;
        actor.b2 << 0.0, 0.1;
        actor.w3 << 2.0, -1.0;
        actor.b3 << 0.05;
        Eigen::VectorXd x(2);
        x << 0.3, -0.4;
        // z1 = (0.4, -0.6), h1 = (0.4, 0); z2 = (0.2, 0.2), h2 = (0.2, 0.2);
        // z3 = 2*0.2 - 0.2 + 0.05 = 0.25
        const Eigen::MatrixXd out = mlp_forward(actor, x);
        CHECK(out(0, 0) == doctest::Approx(2.0 * std::tanh(0.25)).epsilon(1e-14));
    }
}

TEST_CASE("critic gradients match central finite differences") {
    Rng rng(3);
    const AgentConfig cfg = tiny_config();
    Mlp critic = Mlp::critic(cfg.state_dim, cfg.l1, cfg.l2, cfg.action_dim, rng);
    Mlp actor_t = Mlp::actor(cfg.state_dim, cfg.l1, cfg.l2, cfg.action_dim, 1.0, rng);
    Mlp critic_t = Mlp::critic(cfg.state_dim, cfg.l1, cfg.l2, cfg.action_dim, rng);
    CHECK(critic.parameter_count() <= 50);

    const int n = 4;
    for (int draw = 0; draw < 20; ++draw) {
        Eigen::MatrixXd s(cfg.state_dim, n), a(cfg.action_dim, n), s2(cfg.state_dim, n);
        Eigen::RowVectorXd r(n);
        for (int i = 0; i < n; ++i) {
            for (int d = 0; d < cfg.state_dim; ++d) {
                s(d, i) = rng.normal(0.0, 1.0);
                s2(d, i) = rng.normal(0.0, 1.0);
            }
            for (int d = 0; d < cfg.action_dim; ++d) a(d, i) = rng.uniform(-1.0, 1.0);
            r[i] = rng.normal(0.0, 1.0);
        }
        const Eigen::MatrixXd a2 = mlp_forward(actor_t, s2);
        const Eigen::MatrixXd q2 = mlp_forward(critic_t, s2, &a2);
        const Eigen::RowVectorXd y = r + 0.9 * q2.row(0);

        auto loss_of = [&](Mlp& net) {
            const Eigen::MatrixXd q = mlp_forward(net, s, &a);
            return (q.row(0) - y).squaredNorm() / n;
        };

        MlpCache cache;
        const Eigen::MatrixXd q = mlp_forward(critic, s, &a, &cache);
        const Eigen::MatrixXd d_q = (2.0 / n) * (q.row(0) - y);
        const MlpGrads grads = mlp_backward(critic, cache, d_q);
        const std::vector<double> analytic = grad_coords(grads);

        const std::vector<double*> coords = param_coords(critic);
        REQUIRE(coords.size() == analytic.size());
        const double h = 1e-5;
        for (std::size_t p = 0; p < coords.size(); ++p) {
            const double keep = *coords[p];
            *coords[p] = keep + h;
            const double up = loss_of(critic);
            *coords[p] = keep - h;
            const double dn = loss_of(critic);
            *coords[p] = keep;
            CHECK(grad_close(analytic[p], (up - dn) / (2.0 * h)));
        }
    }
}

TEST_CASE("policy-gradient chain matches finite differences") {
    Rng rng(4);
    const AgentConfig cfg = tiny_config();
    Mlp actor = Mlp::actor(cfg.state_dim, cfg.l1, cfg.l2, cfg.action_dim, 1.0, rng);
    Mlp critic = Mlp::critic(cfg.state_dim, cfg.l1, cfg.l2, cfg.action_dim, rng);
    // Give the critic nontrivial output structure.
    for (double* p : param_coords(critic)) *p = rng.normal(0.0, 0.5);
    CHECK(actor.parameter_count() <= 50);

    const int n = 4;
    for (int draw = 0; draw < 20; ++draw) {
        Eigen::MatrixXd s(cfg.state_dim, n);
        for (int i = 0; i < n; ++i)
            for (int d = 0; d < cfg.state_dim; ++d) s(d, i) = rng.normal(0.0, 1.0);

        auto objective_of = [&](Mlp& net) {
            const Eigen::MatrixXd a = mlp_forward(net, s);
            const Eigen::MatrixXd q = mlp_forward(critic, s, &a);
            return q.row(0).mean();
        };

        MlpCache actor_cache, critic_cache;
        const Eigen::MatrixXd a = mlp_forward(actor, s, nullptr, &actor_cache);
        mlp_forward(critic, s, &a, &critic_cache);
        const Eigen::MatrixXd d_q = Eigen::MatrixXd::Constant(1, n, 1.0 / n);
        const MlpGrads critic_grads = mlp_backward(critic, critic_cache, d_q);
        const MlpGrads actor_grads = mlp_backward(actor, actor_cache, critic_grads.d_action);
        const std::vector<double> analytic = grad_coords(actor_grads);

        const std::vector<double*> coords = param_coords(actor);
        const double h = 1e-5;
        for (std::size_t p = 0; p < coords.size(); ++p) {
            const double keep = *coords[p];
            *coords[p] = keep + h;
            const double up = objective_of(actor);
            *coords[p] = keep - h;
            const double dn = objective_of(actor);
            *coords[p] = keep;
            CHECK(grad_close(analytic[p], (up - dn) / (2.0 * h)));
        }
    }
}

TEST_CASE("critic fixed point: gamma = 0 and exact targets give a null step") {
    Rng rng(5);
    AgentConfig cfg = tiny_config();
    cfg.gamma = 0.0;
    Agent agent(cfg, rng);
    // Critic that outputs the constant 2.5 regardless of input.
    agent.critic_net().w1.setZero();
    agent.critic_net().b1.setZero();
    agent.critic_net().w2.setZero();
    agent.critic_net().b2.setZero();
    agent.critic_net().w3.setZero();
    agent.critic_net().b3.setConstant(2.5);

    std::vector<Transition> ts(cfg.batch);
    std::vector<const Transition*> batch;
    for (auto& t : ts) {
        t.s = Eigen::VectorXd::Random(cfg.state_dim);
        t.a = Eigen::VectorXd::Random(cfg.action_dim);
        t.r = 2.5;
        t.s_next = Eigen::VectorXd::Random(cfg.state_dim);
        batch.push_back(&t);
    }
    const Eigen::MatrixXd w3_before = agent.critic_net().w3;
    const double loss = agent.critic_train_step(batch);
    CHECK(loss == 0.0);
    CHECK((agent.critic_net().w3 - w3_before).norm() == 0.0);
    CHECK(agent.critic_net().b3[0] == 2.5);
}

TEST_CASE("repeated critic steps shrink the loss on a fixed batch") {
    Rng rng(6);
    AgentConfig cfg = tiny_config();
    cfg.gamma = 0.0;
    cfg.lr_critic = 3e-3;
    Agent agent(cfg, rng);
    std::vector<Transition> ts(8);
    std::vector<const Transition*> batch;
    Rng data_rng(7);
    for (auto& t : ts) {
        t.s = Eigen::VectorXd::NullaryExpr(cfg.state_dim, [&] { return data_rng.normal(0, 1); });
        t.a = Eigen::VectorXd::NullaryExpr(cfg.action_dim, [&] { return data_rng.uniform(-1, 1); });
        t.r = data_rng.normal(1.0, 0.5);
        t.s_next = t.s;
        batch.push_back(&t);
    }
    double first = 0.0, prev = 0.0;
    bool monotone = true;
    for (int step = 0; step < 50; ++step) {
        const double loss = agent.critic_train_step(batch);
        if (step == 0) first = loss;
        if (step > 0 && loss > prev + 1e-12) monotone = false;
        prev = loss;
    }
    CHECK(monotone);
    CHECK(prev < first);
}

TEST_CASE("actor climbs a handcrafted L1 objective toward its optimum") {
    Rng rng(8);
    AgentConfig cfg = tiny_config();
    cfg.l2 = 4;  // one relu pair per action coordinate
    cfg.lr_actor = 5e-3;
    Agent agent(cfg, rng);

    // Critic computing exactly Q(s, a) = -|a1 - 0.3| - |a2 + 0.5| via
    // relu(x) + relu(-x) pairs; state path zeroed.
    Eigen::VectorXd a_star(2);
    a_star << 0.3, -0.5;
    Mlp& critic = agent.critic_net();
    critic.w1.setZero();
    critic.b1.setZero();
    critic.w2.setZero();
    critic.b2.setZero();
    critic.w3.setZero();
    critic.b3.setZero();
    // Rows 0..3 of layer 2: +(a1 - .3), -(a1 - .3), +(a2 + .5), -(a2 + .5).
    critic.w2(0, cfg.l1 + 0) = 1.0;
    critic.b2[0] = -a_star[0];
    critic.w2(1, cfg.l1 + 0) = -1.0;
    critic.b2[1] = a_star[0];
    critic.w2(2, cfg.l1 + 1) = 1.0;
    critic.b2[2] = -a_star[1];
    critic.w2(3, cfg.l1 + 1) = -1.0;
    critic.b2[3] = a_star[1];
    critic.w3(0, 0) = -1.0;
    critic.w3(0, 1) = -1.0;
    critic.w3(0, 2) = -1.0;
    critic.w3(0, 3) = -1.0;

    std::vector<Transition> ts(cfg.batch);
    std::vector<const Transition*> batch;
    Rng data_rng(9);
    for (auto& t : ts) {
        t.s = Eigen::VectorXd::NullaryExpr(cfg.state_dim, [&] { return data_rng.normal(0, 1); });
        t.a = Eigen::VectorXd::Zero(cfg.action_dim);
        t.r = 0.0;
        t.s_next = t.s;
        batch.push_back(&t);
    }
    const Eigen::VectorXd before = agent.act(ts[0].s);
    const double dist_before = (before - a_star).cwiseAbs().maxCoeff();
    for (int step = 0; step < 3000; ++step) agent.actor_train_step(batch);
    const Eigen::VectorXd after = agent.act(ts[0].s);
    const double dist_after = (after - a_star).cwiseAbs().maxCoeff();
    CHECK(dist_after < 0.05);
    CHECK(dist_after < dist_before);
}

TEST_CASE("flat critic leaves the actor untouched") {
    Rng rng(10);
    AgentConfig cfg = tiny_config();
    Agent agent(cfg, rng);
    Mlp& critic = agent.critic_net();
    critic.w1.setZero();
    critic.w2.setZero();
    critic.w3.setZero();
    critic.b1.setZero();
    critic.b2.setZero();
    critic.b3.setConstant(1.0);  // constant in a

    std::vector<Transition> ts(cfg.batch);
    std::vector<const Transition*> batch;
    for (auto& t : ts) {
        t.s = Eigen::VectorXd::Random(cfg.state_dim);
        t.a = Eigen::VectorXd::Zero(cfg.action_dim);
        t.s_next = t.s;
        batch.push_back(&t);
    }
    const Eigen::MatrixXd w_before = agent.actor_net().w1;
    const double q_mean = agent.actor_train_step(batch);
    CHECK(q_mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((agent.actor_net().w1 - w_before).norm() == 0.0);
}

TEST_CASE("soft updates") {
    Rng rng(11);
    Mlp live = Mlp::actor(2, 2, 2, 1, 1.0, rng);
    Mlp target = Mlp::actor(2, 2, 2, 1, 1.0, rng);
    SUBCASE("tau = 1 copies, tau = 0 freezes") {
        Mlp t1 = target;
        soft_update(live, t1, 1.0);
        CHECK((t1.w1 - live.w1).norm() == 0.0);
        Mlp t0 = target;
        soft_update(live, t0, 0.0);
        CHECK((t0.w1 - target.w1).norm() == 0.0);
    }
    SUBCASE("scalar arithmetic") {
        live.b3[0] = 1.0;
        target.b3[0] = 0.0;
        soft_update(live, target, 0.005);
        CHECK(target.b3[0] == doctest::Approx(0.005).epsilon(1e-15));
    }
    SUBCASE("geometric contraction toward a frozen live net") {
        const double gap0 = (target.w2 - live.w2).cwiseAbs().maxCoeff();
        Mlp t = target;
        const double tau = 0.1;
        for (int n = 1; n <= 30; ++n) {
            soft_update(live, t, tau);
            const double gap = (t.w2 - live.w2).cwiseAbs().maxCoeff();
            CHECK(gap <= std::pow(1.0 - tau, n) * gap0 + 1e-12);
        }
    }
}

TEST_CASE("replay buffer") {
    SUBCASE("FIFO eviction past capacity") {
        ReplayBuffer buf(10);
        for (int i = 0; i < 13; ++i) {
            Transition t;
            t.s = Eigen::VectorXd::Constant(1, static_cast<double>(i));
            t.a = Eigen::VectorXd::Zero(1);
            t.s_next = t.s;
            buf.push(std::move(t));
        }
        CHECK(buf.size() == 10);
        std::vector<double> present;
        for (std::size_t i = 0; i < buf.size(); ++i) present.push_back(buf.at(i).s[0]);
        std::sort(present.begin(), present.end());
        // 0, 1, 2 evicted; 3..12 present.
        for (int i = 0; i < 10; ++i) CHECK(present[i] == doctest::Approx(3.0 + i));
    }
    SUBCASE("batch indices are distinct") {
        ReplayBuffer buf(32);
        for (int i = 0; i < 16; ++i) {
            Transition t;
            t.s = Eigen::VectorXd::Constant(1, static_cast<double>(i));
            t.a = Eigen::VectorXd::Zero(1);
            t.s_next = t.s;
            buf.push(std::move(t));
        }
        Rng rng(12);
        for (int trial = 0; trial < 100; ++trial) {
            const auto batch = buf.sample(8, rng);
            std::set<const Transition*> unique(batch.begin(), batch.end());
            CHECK(unique.size() == 8);
        }
        CHECK_THROWS_AS(buf.sample(17, rng), std::invalid_argument);
    }
    SUBCASE("uniform sampling covers all indices (chi-square at 1%)") {
        const int k = 20;
        ReplayBuffer buf(k);
        for (int i = 0; i < k; ++i) {
            Transition t;
            t.s = Eigen::VectorXd::Constant(1, static_cast<double>(i));
            t.a = Eigen::VectorXd::Zero(1);
            t.s_next = t.s;
            buf.push(std::move(t));
        }
        Rng rng(13);
        std::map<double, int> counts;
        const int draws = 20000;
        for (int i = 0; i < draws; ++i) {
            const auto batch = buf.sample(1, rng);
            counts[batch[0]->s[0]] += 1;
        }
        CHECK(counts.size() == k);  // every index seen
        const double expected = static_cast<double>(draws) / k;
        double chi2 = 0.0;
        for (const auto& [value, n] : counts) chi2 += (n - expected) * (n - expected) / expected;
        CHECK(chi2 < 36.19);  // chi-square 99th percentile, 19 dof
    }
}

TEST_CASE("behavior policies") {
    Rng rng(14);
    AgentConfig cfg = tiny_config();
    cfg.action_scale = 5.75;  // delta_DPIC in scaled units
    Agent agent(cfg, rng);
    const MdpScaling scaling = make_scaling(0.1, 1e-11, 5, 10);
    Rng dir_rng(15);
    const DirectionCodebook d = rvq_directions(64, cfg.action_dim, 5.75e-13, dir_rng);
    const Eigen::VectorXd s = Eigen::VectorXd::Random(cfg.state_dim);

    SUBCASE("zero exploration reduces to the quantized deterministic policy") {
        Rng noise(16);
        const BehaviorResult br = behavior_train(agent, s, d, 0.0, scaling, noise);
        const int k_direct = quantize_direction(agent.act(s) / scaling.action, d);
        CHECK(br.k == k_direct);
        CHECK(br.k == behavior_util(agent, s, d, scaling));
        CHECK((br.a_scaled - agent.act(s)).norm() == 0.0);
    }
    SUBCASE("vanishing exploration agrees with the noiseless index") {
        Rng noise(17);
        for (int i = 0; i < 100; ++i) {
            const Eigen::VectorXd state = Eigen::VectorXd::Random(cfg.state_dim);
            const BehaviorResult br = behavior_train(agent, state, d, 1e-30, scaling, noise);
            CHECK(br.k == behavior_util(agent, state, d, scaling));
        }
    }
    SUBCASE("noisy actions stay clipped and quantize consistently") {
        Rng noise(18);
        const double eps = 4.6;  // initial exploration variance, scaled units
        for (int i = 0; i < 2000; ++i) {
            const BehaviorResult br = behavior_train(agent, s, d, eps, scaling, noise);
            CHECK(br.a_scaled.cwiseAbs().maxCoeff() <= cfg.action_scale);
            CHECK(br.k >= 1);
            CHECK(br.k <= d.size());
            // k must be the nearest neighbor of the returned clipped action.
            CHECK(br.k == quantize_direction(br.a_scaled / scaling.action, d));
        }
    }
    SUBCASE("negative variance rejected") {
        Rng noise(19);
        CHECK_THROWS_AS(behavior_train(agent, s, d, -1.0, scaling, noise), std::invalid_argument);
    }
}

TEST_CASE("reward") {
    CHECK(reward(4.2, 0) == 4.2);
    CHECK(reward(5.0, 3) == 2.0);
    CHECK(reward(0.0, 10) == -10.0);
}

TEST_CASE("epsilon schedule") {
    const double eps0 = 4.6;
    const EpsilonSchedule sch{eps0, eps0 / 300.0};
    CHECK(sch.at(0) == eps0);
    CHECK(sch.at(1) == 0.99 * eps0);
    CHECK(sch.at(2) == 0.99 * (0.99 * eps0));
    CHECK(sch.at(567) > sch.eps_min);
    CHECK(sch.at(568) == sch.eps_min);
    CHECK(sch.at(570) == sch.eps_min);
    CHECK(sch.at(10000) == sch.eps_min);
}

TEST_CASE("allocate_agents round robin") {
    CHECK(allocate_agents(8, 8) == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(allocate_agents(8, 4) == std::vector<int>{1, 2, 3, 4, 1, 2, 3, 4});
    CHECK(allocate_agents(1, 4) == std::vector<int>{1});
    CHECK(allocate_agents(0, 2).empty());
    CHECK_THROWS_AS(allocate_agents(4, 0), std::invalid_argument);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    Rng rng(20);
    AgentConfig cfg = tiny_config();
    std::vector<Agent> agents;
    agents.emplace_back(cfg, rng);
    agents.emplace_back(cfg, rng);

    // Touch the optimizer state so moments are nontrivial.
    std::vector<Transition> ts(cfg.batch);
    std::vector<const Transition*> batch;
    Rng data_rng(21);
    for (auto& t : ts) {
        t.s = Eigen::VectorXd::NullaryExpr(cfg.state_dim, [&] { return data_rng.normal(0, 1); });
        t.a = Eigen::VectorXd::NullaryExpr(cfg.action_dim, [&] { return data_rng.uniform(-1, 1); });
        t.r = data_rng.normal(0, 1);
        t.s_next = t.s;
        batch.push_back(&t);
    }
    for (int i = 0; i < 5; ++i) {
        agents[0].critic_train_step(batch);
        agents[0].actor_train_step(batch);
        agents[0].soft_update_targets();
    }

    const std::string path = (std::filesystem::temp_directory_path() / "irssim_ckpt_test.bin").string();
    save_agents(agents, path);
    const std::vector<Agent> loaded = load_agents(path);
    REQUIRE(loaded.size() == 2);
    for (int i = 0; i < 2; ++i) {
        CHECK(loaded[i].config().state_dim == cfg.state_dim);
        CHECK((loaded[i].actor_net().w1 - agents[i].actor_net().w1).norm() == 0.0);
        CHECK((loaded[i].actor_net().b3 - agents[i].actor_net().b3).norm() == 0.0);
        CHECK((loaded[i].critic_net().w2 - agents[i].critic_net().w2).norm() == 0.0);
        CHECK((loaded[i].actor_target().w3 - agents[i].actor_target().w3).norm() == 0.0);
        CHECK((loaded[i].critic_target().w1 - agents[i].critic_target().w1).norm() == 0.0);
        const Eigen::VectorXd s = Eigen::VectorXd::Random(cfg.state_dim);
        CHECK((loaded[i].act(s) - agents[i].act(s)).norm() == 0.0);
    }

    // Training after reload matches training the original, moments included.
    std::vector<Agent> reloaded = load_agents(path);
    const double a = agents[0].critic_train_step(batch);
    const double b = reloaded[0].critic_train_step(batch);
    CHECK(a == b);
    CHECK((agents[0].critic_net().w3 - reloaded[0].critic_net().w3).norm() == 0.0);

    // Saving the same state twice produces identical bytes.
    const std::string path2 = path + ".2";
    save_agents(loaded, path2);
    save_agents(loaded, path + ".3");
    std::ifstream f2(path2, std::ios::binary), f3(path + ".3", std::ios::binary);
    std::stringstream s2, s3;
    s2 << f2.rdbuf();
    s3 << f3.rdbuf();
    CHECK(s2.str() == s3.str());
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
    std::filesystem::remove(path + ".3");
}

TEST_CASE("bad checkpoint magic is rejected") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "irssim_ckpt_bad.bin").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOTACKPT and some trailing garbage";
    }
    CHECK_THROWS_AS(load_agents(path), std::runtime_error);
    std::filesystem::remove(path);
}
