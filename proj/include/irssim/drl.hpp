// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "irssim/codebook.hpp"
#include "irssim/rng.hpp"

namespace irssim {

// ---------------------------------------------------------------------------
// Dense networks
// ---------------------------------------------------------------------------

enum class OutputKind {
    kTanhScaled,  // actor head: out_scale * tanh(z)
    kLinear,      // critic head
};

// Two-hidden-layer MLP with ReLU activations. When action_dim > 0 the action
// vector is concatenated into the second layer's input (critic wiring).
struct Mlp {
    int in_dim = 0;
    int l1 = 0;
    int l2 = 0;
    int out_dim = 0;
    int action_dim = 0;
    OutputKind out_kind = OutputKind::kLinear;
    double out_scale = 1.0;

    Eigen::MatrixXd w1, w2, w3;
    Eigen::VectorXd b1, b2, b3;

    static Mlp actor(int state_dim, int l1, int l2, int action_dim, double scale, Rng& rng);
    static Mlp critic(int state_dim, int l1, int l2, int action_dim, Rng& rng);

    // Hidden layers uniform(+-1/sqrt(fan_in)), output layer uniform(+-3e-3).
    void init_weights(Rng& rng);

    int parameter_count() const;
};

// Intermediate activations kept for backprop; columns are batch samples.
struct MlpCache {
    Eigen::MatrixXd x;   // input (with action rows appended at layer 2 input)
    Eigen::MatrixXd u2;  // second layer input [h1; a]
    Eigen::MatrixXd z1, h1, z2, h2, z3, out;
};

struct MlpGrads {
    Eigen::MatrixXd w1, w2, w3;
    Eigen::VectorXd b1, b2, b3;
    Eigen::MatrixXd d_action;  // gradient w.r.t. the injected action (critic)
};

// Batched forward pass; `action` must have action_dim rows for critic-style
// nets and is ignored otherwise. Cache may be null for inference.
Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& x,
                            const Eigen::MatrixXd* action = nullptr, MlpCache* cache = nullptr);

// Backprop of an upstream gradient d_out (same shape as the forward output).
MlpGrads mlp_backward(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& d_out);

// target <- tau * live + (1 - tau) * target.
void soft_update(const Mlp& live, Mlp& target, double tau);

struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long t = 0;
    std::array<Eigen::MatrixXd, 3> mw, vw;
    std::array<Eigen::VectorXd, 3> mb, vb;

    explicit Adam(double lr_ = 1e-3) : lr(lr_) {}
    void step(Mlp& net, const MlpGrads& g);
};

// ---------------------------------------------------------------------------
// Replay buffer
// ---------------------------------------------------------------------------

struct Transition {
    Eigen::VectorXd s;
    Eigen::VectorXd a;  // continuous pre-quantization action, scaled units
    double r = 0.0;
    Eigen::VectorXd s_next;
};

// FIFO ring with uniform batch sampling (distinct indices within a batch).
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return data_[i]; }

    std::vector<const Transition*> sample(int n, Rng& rng) const;

  private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Transition> data_;
};

// ---------------------------------------------------------------------------
// MDP scaling
// ---------------------------------------------------------------------------

// State/action normalization: the measured channel is scaled by
// sqrt(P / (sigma^2 N_BS N_G)), codewords to picofarads and actions by 1e13.
struct MdpScaling {
    double channel = 1.0;
    double codeword = 1e12;
    double action = 1e13;
};

MdpScaling make_scaling(double p_tx_w, double sigma2_w, int n_bs, int n_g);

// State layout: [Re(h) * channel_scale; Im(h) * channel_scale; q * 1e12].
Eigen::VectorXd scale_state(const Eigen::VectorXcd& h_measured, const Eigen::VectorXd& q,
                            const MdpScaling& scaling);

// ---------------------------------------------------------------------------
// Agent
// ---------------------------------------------------------------------------

struct AgentConfig {
    int state_dim = 20;
    int l1 = 400;
    int l2 = 300;
    int action_dim = 10;
    double action_scale = 0.0;  // delta_DPIC in scaled action units
    double gamma = 0.9;
    double tau = 0.005;
    double lr_actor = 3e-4;
    double lr_critic = 3e-3;
    int batch = 32;
    std::size_t buffer_capacity = 500000;
};

// One DPIC learner: actor, critic, their soft-target copies, Adam state and
// a replay buffer.
class Agent {
  public:
    Agent(const AgentConfig& cfg, Rng& init_rng);

    const AgentConfig& config() const { return cfg_; }

    // Deterministic policy, scaled action units; every entry is bounded by
    // action_scale through the tanh head.
    Eigen::VectorXd act(const Eigen::VectorXd& s) const;

    double critic_value(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const;

    // One Adam step on the mean-squared TD error; returns the pre-step loss.
    double critic_train_step(const std::vector<const Transition*>& batch);
    // One Adam ascent step on mean Q(s, actor(s)); returns the pre-step mean.
    double actor_train_step(const std::vector<const Transition*>& batch);
    void soft_update_targets();

    ReplayBuffer& buffer() { return buffer_; }
    const ReplayBuffer& buffer() const { return buffer_; }

    Mlp& actor_net() { return actor_; }
    Mlp& critic_net() { return critic_; }
    const Mlp& actor_net() const { return actor_; }
    const Mlp& critic_net() const { return critic_; }
    const Mlp& actor_target() const { return actor_target_; }
    const Mlp& critic_target() const { return critic_target_; }

    // Networks and optimizer state without the replay buffer; lets a
    // training loop keep a cheap last-good copy to fall back to.
    struct LearnerState {
        Mlp actor, critic, actor_target, critic_target;
        Adam adam_actor{0.0}, adam_critic{0.0};
    };
    LearnerState snapshot() const;
    void restore(const LearnerState& s);

    friend void save_agents(const std::vector<Agent>& agents, const std::string& path);
    friend std::vector<Agent> load_agents(const std::string& path);

  private:
    AgentConfig cfg_;
    Mlp actor_, critic_, actor_target_, critic_target_;
    Adam adam_actor_, adam_critic_;
    ReplayBuffer buffer_;
};

// ---------------------------------------------------------------------------
// Behavior policies and schedule
// ---------------------------------------------------------------------------

struct BehaviorResult {
    Eigen::VectorXd a_scaled;  // clipped continuous action, scaled units
    int k = 0;                 // 1-based direction codeword index
};

// Training behavior: clip(actor(s) + v) with v ~ N(0, epsilon I), then
// nearest-neighbor quantization onto the direction codebook (held in
// physical farads).
BehaviorResult behavior_train(const Agent& agent, const Eigen::VectorXd& s,
                              const DirectionCodebook& d, double epsilon,
                              const MdpScaling& scaling, Rng& rng);

// Utilization behavior: noiseless quantized policy.
int behavior_util(const Agent& agent, const Eigen::VectorXd& s, const DirectionCodebook& d,
                  const MdpScaling& scaling);

// r = next-block rate minus the clip penalty.
double reward(double rate_next, int n_clip);

// epsilon_e = max(eps_min, 0.99 eps_{e-1}), evaluated by the literal
// recursion. Values are exploration variances in scaled action units.
struct EpsilonSchedule {
    double eps0;
    double eps_min;
    double decay = 0.99;

    double at(int episode) const;
};

// 1-based round-robin slot-to-agent map of length m_dpic.
std::vector<int> allocate_agents(int m_dpic, int m_a);

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------
//
// Binary layout (little-endian):
//   bytes 0..7   magic "IRSCKPT1"
//   u32          number of agents
//   per agent:
//     u32 x 4    state_dim, l1, l2, action_dim
//     f64 x 6    action_scale, gamma, tau, lr_actor, lr_critic, batch
//     u64 x 2    Adam step counters (actor, critic)
//     networks actor, critic, actor_target, critic_target, each as blocks
//       w1, b1, w2, b2, w3, b3 of f64 in Eigen column-major order
//     Adam moments: actor (m then v, 6 blocks each), critic likewise
// Replay buffers are not checkpointed; a resumed training run starts with an
// empty buffer.
void save_agents(const std::vector<Agent>& agents, const std::string& path);
std::vector<Agent> load_agents(const std::string& path);

}  // namespace irssim
