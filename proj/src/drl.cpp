// SPDX-License-Identifier: Apache-2.0
#include "irssim/drl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace irssim {

// ---------------------------------------------------------------------------
// Mlp
// ---------------------------------------------------------------------------

Mlp Mlp::actor(int state_dim, int l1, int l2, int action_dim, double scale, Rng& rng) {
    Mlp net;
    net.in_dim = state_dim;
    net.l1 = l1;
    net.l2 = l2;
    net.out_dim = action_dim;
    net.action_dim = 0;
    net.out_kind = OutputKind::kTanhScaled;
    net.out_scale = scale;
    net.init_weights(rng);
    return net;
}

Mlp Mlp::critic(int state_dim, int l1, int l2, int action_dim, Rng& rng) {
    Mlp net;
    net.in_dim = state_dim;
    net.l1 = l1;
    net.l2 = l2;
    net.out_dim = 1;
    net.action_dim = action_dim;
    net.out_kind = OutputKind::kLinear;
    net.out_scale = 1.0;
    net.init_weights(rng);
    return net;
}

void Mlp::init_weights(Rng& rng) {
    auto fill_uniform = [&rng](Eigen::MatrixXd& m, double bound) {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-bound, bound);
    };
    auto fill_vec = [&rng](Eigen::VectorXd& v, double bound) {
        for (Eigen::Index r = 0; r < v.size(); ++r) v[r] = rng.uniform(-bound, bound);
    };
    const int in2 = l1 + action_dim;
    w1.resize(l1, in_dim);
    b1.resize(l1);
    w2.resize(l2, in2);
    b2.resize(l2);
    w3.resize(out_dim, l2);
    b3.resize(out_dim);
    fill_uniform(w1, 1.0 / std::sqrt(static_cast<double>(in_dim)));
    fill_vec(b1, 1.0 / std::sqrt(static_cast<double>(in_dim)));
    fill_uniform(w2, 1.0 / std::sqrt(static_cast<double>(in2)));
    fill_vec(b2, 1.0 / std::sqrt(static_cast<double>(in2)));
    fill_uniform(w3, 3e-3);  // keep initial actions/values near zero
    fill_vec(b3, 3e-3);
}

int Mlp::parameter_count() const {
    return static_cast<int>(w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size());
}

Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& x,
                            const Eigen::MatrixXd* action, MlpCache* cache) {
    if (x.rows() != net.in_dim) throw std::invalid_argument("mlp_forward: bad input dimension");
    if (net.action_dim > 0 && (!action || action->rows() != net.action_dim))
        throw std::invalid_argument("mlp_forward: missing or misshaped action input");

    Eigen::MatrixXd z1 = (net.w1 * x).colwise() + net.b1;
    Eigen::MatrixXd h1 = z1.cwiseMax(0.0);
    Eigen::MatrixXd u2;
    if (net.action_dim > 0) {
        u2.resize(net.l1 + net.action_dim, x.cols());
        u2.topRows(net.l1) = h1;
        u2.bottomRows(net.action_dim) = *action;
    } else {
        u2 = h1;
    }
    Eigen::MatrixXd z2 = (net.w2 * u2).colwise() + net.b2;
    Eigen::MatrixXd h2 = z2.cwiseMax(0.0);
    Eigen::MatrixXd z3 = (net.w3 * h2).colwise() + net.b3;
    Eigen::MatrixXd out;
    if (net.out_kind == OutputKind::kTanhScaled)
        out = net.out_scale * z3.array().tanh().matrix();
    else
        out = z3;

    if (cache) {
        cache->x = x;
        cache->u2 = std::move(u2);
        cache->z1 = std::move(z1);
        cache->h1 = std::move(h1);
        cache->z2 = std::move(z2);
        cache->h2 = std::move(h2);
        cache->z3 = std::move(z3);
        cache->out = out;
    }
    return out;
}

MlpGrads mlp_backward(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& d_out) {
    MlpGrads g;
    Eigen::MatrixXd dz3;
    if (net.out_kind == OutputKind::kTanhScaled) {
        // out = s tanh(z3)  =>  d z3 = d_out .* s (1 - tanh^2)
        const Eigen::ArrayXXd t = cache.out.array() / net.out_scale;
        dz3 = (d_out.array() * net.out_scale * (1.0 - t.square())).matrix();
    } else {
        dz3 = d_out;
    }
    g.w3 = dz3 * cache.h2.transpose();
    g.b3 = dz3.rowwise().sum();

    Eigen::MatrixXd dh2 = net.w3.transpose() * dz3;
    Eigen::MatrixXd dz2 =
        (dh2.array() * (cache.z2.array() > 0.0).cast<double>()).matrix();
    g.w2 = dz2 * cache.u2.transpose();
    g.b2 = dz2.rowwise().sum();

    Eigen::MatrixXd du2 = net.w2.transpose() * dz2;
    Eigen::MatrixXd dh1;
    if (net.action_dim > 0) {
        dh1 = du2.topRows(net.l1);
        g.d_action = du2.bottomRows(net.action_dim);
    } else {
        dh1 = std::move(du2);
    }
    Eigen::MatrixXd dz1 =
        (dh1.array() * (cache.z1.array() > 0.0).cast<double>()).matrix();
    g.w1 = dz1 * cache.x.transpose();
    g.b1 = dz1.rowwise().sum();
    return g;
}

void soft_update(const Mlp& live, Mlp& target, double tau) {
    if (live.w1.rows() != target.w1.rows() || live.w2.cols() != target.w2.cols() ||
        live.w3.rows() != target.w3.rows())
        throw std::invalid_argument("soft_update: shape mismatch");
    target.w1 = tau * live.w1 + (1.0 - tau) * target.w1;
    target.b1 = tau * live.b1 + (1.0 - tau) * target.b1;
    target.w2 = tau * live.w2 + (1.0 - tau) * target.w2;
    target.b2 = tau * live.b2 + (1.0 - tau) * target.b2;
    target.w3 = tau * live.w3 + (1.0 - tau) * target.w3;
    target.b3 = tau * live.b3 + (1.0 - tau) * target.b3;
}

void Adam::step(Mlp& net, const MlpGrads& g) {
    std::array<Eigen::MatrixXd*, 3> w = {&net.w1, &net.w2, &net.w3};
    std::array<const Eigen::MatrixXd*, 3> gw = {&g.w1, &g.w2, &g.w3};
    std::array<Eigen::VectorXd*, 3> b = {&net.b1, &net.b2, &net.b3};
    std::array<const Eigen::VectorXd*, 3> gb = {&g.b1, &g.b2, &g.b3};

    if (mw[0].size() == 0) {
        for (int i = 0; i < 3; ++i) {
            mw[i] = Eigen::MatrixXd::Zero(w[i]->rows(), w[i]->cols());
            vw[i] = mw[i];
            mb[i] = Eigen::VectorXd::Zero(b[i]->size());
            vb[i] = mb[i];
        }
    }
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (int i = 0; i < 3; ++i) {
        mw[i] = beta1 * mw[i] + (1.0 - beta1) * (*gw[i]);
        vw[i] = (beta2 * vw[i].array() + (1.0 - beta2) * gw[i]->array().square()).matrix();
        w[i]->array() -= lr * (mw[i].array() / c1) / ((vw[i].array() / c2).sqrt() + eps);

        mb[i] = beta1 * mb[i] + (1.0 - beta1) * (*gb[i]);
        vb[i] = (beta2 * vb[i].array() + (1.0 - beta2) * gb[i]->array().square()).matrix();
        b[i]->array() -= lr * (mb[i].array() / c1) / ((vb[i].array() / c2).sqrt() + eps);
    }
}

// ---------------------------------------------------------------------------
// ReplayBuffer
// ---------------------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        data_[head_] = std::move(t);
        head_ = (head_ + 1) % capacity_;
    }
}

std::vector<const Transition*> ReplayBuffer::sample(int n, Rng& rng) const {
    if (n < 1 || static_cast<std::size_t>(n) > data_.size())
        throw std::invalid_argument("ReplayBuffer::sample: batch larger than buffer");
    std::vector<std::size_t> idx;
    idx.reserve(n);
    while (idx.size() < static_cast<std::size_t>(n)) {
        const std::size_t i = rng.index(data_.size());
        if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
    }
    std::vector<const Transition*> out;
    out.reserve(n);
    for (std::size_t i : idx) out.push_back(&data_[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

MdpScaling make_scaling(double p_tx_w, double sigma2_w, int n_bs, int n_g) {
    MdpScaling s;
    s.channel = std::sqrt(p_tx_w / (sigma2_w * n_bs * n_g));
    return s;
}

Eigen::VectorXd scale_state(const Eigen::VectorXcd& h_measured, const Eigen::VectorXd& q,
                            const MdpScaling& scaling) {
    const Eigen::Index nb = h_measured.size();
    Eigen::VectorXd s(2 * nb + q.size());
    s.head(nb) = scaling.channel * h_measured.real();
    s.segment(nb, nb) = scaling.channel * h_measured.imag();
    s.tail(q.size()) = scaling.codeword * q;
    return s;
}

// ---------------------------------------------------------------------------
// Agent
// ---------------------------------------------------------------------------

Agent::Agent(const AgentConfig& cfg, Rng& init_rng)
    : cfg_(cfg),
      actor_(Mlp::actor(cfg.state_dim, cfg.l1, cfg.l2, cfg.action_dim, cfg.action_scale, init_rng)),
      critic_(Mlp::critic(cfg.state_dim, cfg.l1, cfg.l2, cfg.action_dim, init_rng)),
      actor_target_(actor_),
      critic_target_(critic_),
      adam_actor_(cfg.lr_actor),
      adam_critic_(cfg.lr_critic),
      buffer_(cfg.buffer_capacity) {}

Eigen::VectorXd Agent::act(const Eigen::VectorXd& s) const {
    return mlp_forward(actor_, s);
}

double Agent::critic_value(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const {
    const Eigen::MatrixXd am = a;
    return mlp_forward(critic_, s, &am)(0, 0);
}

namespace {

void pack_batch(const std::vector<const Transition*>& batch, Eigen::MatrixXd& s,
                Eigen::MatrixXd& a, Eigen::RowVectorXd& r, Eigen::MatrixXd& s_next) {
    const int n = static_cast<int>(batch.size());
    s.resize(batch[0]->s.size(), n);
    a.resize(batch[0]->a.size(), n);
    r.resize(n);
    s_next.resize(batch[0]->s_next.size(), n);
    for (int i = 0; i < n; ++i) {
        s.col(i) = batch[i]->s;
        a.col(i) = batch[i]->a;
        r[i] = batch[i]->r;
        s_next.col(i) = batch[i]->s_next;
    }
}

}  // namespace

double Agent::critic_train_step(const std::vector<const Transition*>& batch) {
    Eigen::MatrixXd s, a, s_next;
    Eigen::RowVectorXd r;
    pack_batch(batch, s, a, r, s_next);
    const int n = static_cast<int>(batch.size());

    const Eigen::MatrixXd a_next = mlp_forward(actor_target_, s_next);
    const Eigen::MatrixXd q_next = mlp_forward(critic_target_, s_next, &a_next);
    const Eigen::RowVectorXd y = r + cfg_.gamma * q_next.row(0);

    MlpCache cache;
    const Eigen::MatrixXd q = mlp_forward(critic_, s, &a, &cache);
    const Eigen::RowVectorXd diff = q.row(0) - y;
    const double loss = diff.squaredNorm() / n;
    if (!std::isfinite(loss))
        throw std::runtime_error("critic_train_step: non-finite loss (training diverged)");

    const Eigen::MatrixXd d_q = (2.0 / n) * diff;
    const MlpGrads g = mlp_backward(critic_, cache, d_q);
    adam_critic_.step(critic_, g);
    return loss;
}

double Agent::actor_train_step(const std::vector<const Transition*>& batch) {
    Eigen::MatrixXd s, a_unused, s_next_unused;
    Eigen::RowVectorXd r_unused;
    pack_batch(batch, s, a_unused, r_unused, s_next_unused);
    const int n = static_cast<int>(batch.size());

    MlpCache actor_cache;
    const Eigen::MatrixXd a = mlp_forward(actor_, s, nullptr, &actor_cache);
    MlpCache critic_cache;
    const Eigen::MatrixXd q = mlp_forward(critic_, s, &a, &critic_cache);
    const double objective = q.row(0).mean();
    if (!std::isfinite(objective))
        throw std::runtime_error("actor_train_step: non-finite objective (training diverged)");

    // dJ/dq = 1/N; ascend J by descending -J.
    const Eigen::MatrixXd d_q = Eigen::MatrixXd::Constant(1, n, 1.0 / n);
    const MlpGrads critic_g = mlp_backward(critic_, critic_cache, d_q);
    const MlpGrads actor_g = mlp_backward(actor_, actor_cache, -critic_g.d_action);
    adam_actor_.step(actor_, actor_g);
    return objective;
}

void Agent::soft_update_targets() {
    soft_update(actor_, actor_target_, cfg_.tau);
    soft_update(critic_, critic_target_, cfg_.tau);
}

Agent::LearnerState Agent::snapshot() const {
    return LearnerState{actor_, critic_, actor_target_, critic_target_, adam_actor_, adam_critic_};
}

void Agent::restore(const LearnerState& s) {
    actor_ = s.actor;
    critic_ = s.critic;
    actor_target_ = s.actor_target;
    critic_target_ = s.critic_target;
    adam_actor_ = s.adam_actor;
    adam_critic_ = s.adam_critic;
}

// ---------------------------------------------------------------------------
// Behavior policies
// ---------------------------------------------------------------------------

BehaviorResult behavior_train(const Agent& agent, const Eigen::VectorXd& s,
                              const DirectionCodebook& d, double epsilon,
                              const MdpScaling& scaling, Rng& rng) {
    if (epsilon < 0.0) throw std::invalid_argument("behavior_train: negative exploration variance");
    const double bound = agent.config().action_scale;
    Eigen::VectorXd a = agent.act(s);
    const double stddev = std::sqrt(epsilon);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a[i] = std::clamp(a[i] + rng.normal(0.0, stddev), -bound, bound);
    BehaviorResult out;
    out.a_scaled = a;
    out.k = quantize_direction(a / scaling.action, d);
    return out;
}

int behavior_util(const Agent& agent, const Eigen::VectorXd& s, const DirectionCodebook& d,
                  const MdpScaling& scaling) {
    const Eigen::VectorXd a = agent.act(s);
    return quantize_direction(a / scaling.action, d);
}

double reward(double rate_next, int n_clip) { return rate_next - n_clip; }

double EpsilonSchedule::at(int episode) const {
    if (episode < 0) throw std::invalid_argument("EpsilonSchedule: negative episode");
    double eps = eps0;
    for (int e = 1; e <= episode; ++e) eps = std::max(eps_min, decay * eps);
    return eps;
}

std::vector<int> allocate_agents(int m_dpic, int m_a) {
    if (m_a < 1) throw std::invalid_argument("allocate_agents: need at least one agent");
    std::vector<int> map(m_dpic);
    for (int m = 1; m <= m_dpic; ++m) map[m - 1] = ((m - 1) % m_a) + 1;
    return map;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'I', 'R', 'S', 'C', 'K', 'P', 'T', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_block(std::ostream& out, const Eigen::MatrixXd& m) {
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * m.size()));
}
void write_block(std::ostream& out, const Eigen::VectorXd& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(sizeof(double) * v.size()));
}
void write_net(std::ostream& out, const Mlp& net) {
    write_block(out, net.w1);
    write_block(out, net.b1);
    write_block(out, net.w2);
    write_block(out, net.b2);
    write_block(out, net.w3);
    write_block(out, net.b3);
}
void write_adam(std::ostream& out, const Adam& adam) {
    for (int i = 0; i < 3; ++i) {
        write_block(out, adam.mw[i]);
        write_block(out, adam.mb[i]);
    }
    for (int i = 0; i < 3; ++i) {
        write_block(out, adam.vw[i]);
        write_block(out, adam.vb[i]);
    }
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
double read_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
void read_block(std::istream& in, Eigen::MatrixXd& m) {
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
}
void read_block(std::istream& in, Eigen::VectorXd& v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(sizeof(double) * v.size()));
}
void read_net(std::istream& in, Mlp& net) {
    read_block(in, net.w1);
    read_block(in, net.b1);
    read_block(in, net.w2);
    read_block(in, net.b2);
    read_block(in, net.w3);
    read_block(in, net.b3);
}
void ensure_adam_shapes(Adam& adam, const Mlp& net) {
    adam.mw[0] = Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols());
    adam.mw[1] = Eigen::MatrixXd::Zero(net.w2.rows(), net.w2.cols());
    adam.mw[2] = Eigen::MatrixXd::Zero(net.w3.rows(), net.w3.cols());
    for (int i = 0; i < 3; ++i) adam.vw[i] = adam.mw[i];
    adam.mb[0] = Eigen::VectorXd::Zero(net.b1.size());
    adam.mb[1] = Eigen::VectorXd::Zero(net.b2.size());
    adam.mb[2] = Eigen::VectorXd::Zero(net.b3.size());
    for (int i = 0; i < 3; ++i) adam.vb[i] = adam.mb[i];
}
void read_adam(std::istream& in, Adam& adam, const Mlp& net) {
    ensure_adam_shapes(adam, net);
    for (int i = 0; i < 3; ++i) {
        read_block(in, adam.mw[i]);
        read_block(in, adam.mb[i]);
    }
    for (int i = 0; i < 3; ++i) {
        read_block(in, adam.vw[i]);
        read_block(in, adam.vb[i]);
    }
}

}  // namespace

void save_agents(const std::vector<Agent>& agents, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    out.write(kMagic, sizeof kMagic);
    write_u32(out, static_cast<std::uint32_t>(agents.size()));
    for (const Agent& ag : agents) {
        const AgentConfig& c = ag.cfg_;
        write_u32(out, static_cast<std::uint32_t>(c.state_dim));
        write_u32(out, static_cast<std::uint32_t>(c.l1));
        write_u32(out, static_cast<std::uint32_t>(c.l2));
        write_u32(out, static_cast<std::uint32_t>(c.action_dim));
        write_f64(out, c.action_scale);
        write_f64(out, c.gamma);
        write_f64(out, c.tau);
        write_f64(out, c.lr_actor);
        write_f64(out, c.lr_critic);
        write_f64(out, static_cast<double>(c.batch));
        write_u64(out, static_cast<std::uint64_t>(ag.adam_actor_.t));
        write_u64(out, static_cast<std::uint64_t>(ag.adam_critic_.t));
        write_net(out, ag.actor_);
        write_net(out, ag.critic_);
        write_net(out, ag.actor_target_);
        write_net(out, ag.critic_target_);
        // Moments may be unallocated if the agent never trained.
        Adam actor_adam = ag.adam_actor_;
        if (actor_adam.mw[0].size() == 0) ensure_adam_shapes(actor_adam, ag.actor_);
        Adam critic_adam = ag.adam_critic_;
        if (critic_adam.mw[0].size() == 0) ensure_adam_shapes(critic_adam, ag.critic_);
        write_adam(out, actor_adam);
        write_adam(out, critic_adam);
    }
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

std::vector<Agent> load_agents(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    const std::uint32_t n = read_u32(in);
    std::vector<Agent> agents;
    agents.reserve(n);
    Rng scratch(0);
    for (std::uint32_t i = 0; i < n; ++i) {
        AgentConfig c;
        c.state_dim = static_cast<int>(read_u32(in));
        c.l1 = static_cast<int>(read_u32(in));
        c.l2 = static_cast<int>(read_u32(in));
        c.action_dim = static_cast<int>(read_u32(in));
        c.action_scale = read_f64(in);
        c.gamma = read_f64(in);
        c.tau = read_f64(in);
        c.lr_actor = read_f64(in);
        c.lr_critic = read_f64(in);
        c.batch = static_cast<int>(read_f64(in));
        Agent ag(c, scratch);
        ag.adam_actor_.t = static_cast<long long>(read_u64(in));
        ag.adam_critic_.t = static_cast<long long>(read_u64(in));
        read_net(in, ag.actor_);
        read_net(in, ag.critic_);
        read_net(in, ag.actor_target_);
        read_net(in, ag.critic_target_);
        read_adam(in, ag.adam_actor_, ag.actor_);
        read_adam(in, ag.adam_critic_, ag.critic_);
        if (!in) throw std::runtime_error("checkpoint: truncated file " + path);
        agents.push_back(std::move(ag));
    }
    return agents;
}

}  // namespace irssim
