// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "irssim/rng.hpp"

namespace irssim {

inline constexpr double kSpeedOfLight = 2.998e8;  // m/s

enum class Scenario {
    kNlosUeIrs,  // scenario1_nlos: indoor UE, no LoS to the IRS
    kLosUeIrs,   // scenario2_los: outdoor UE with a LoS path to the IRS
};

const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

// One geometric path: complex gain, arrival angle at the receiving array and
// (for matrix channels) departure angle at the transmitting array. beta is
// the large-scale factor currently driving the gain's AR(1) innovation.
struct PathState {
    std::complex<double> gain{0.0, 0.0};
    double aoa_deg = 0.0;
    double aod_deg = 0.0;
    double beta = 0.0;
};

struct Geometry {
    Eigen::Vector2d x_bs{0.0, 0.0};
    Eigen::Vector2d x_irs{90.0, 30.0};
    Eigen::Vector2d x_ue{100.0, 0.0};
    double heading_rad = 0.0;  // UE motion azimuth
    double v_ue = 3.0 / 3.6;   // m/s
    double t_c_s = 5e-3;       // coherence interval, sets the step length
    double d_bs = 0.0;         // BS antenna spacing [m]
    double d_irs = 0.0;        // meta-atom spacing [m]
    double lambda = 0.0;       // wavelength [m]
    // Azimuth of the meta-surface normal; incident angles are measured
    // from it. The orientation is a free deployment parameter.
    double irs_boresight_rad = 0.0;
};

// Static channel-model constants (counts, Rician factors, path-loss
// exponents) shared by both scenarios.
struct ChannelParams {
    int n_bs = 5;
    int n_irs = 200;
    int l_ub = 10;
    int l_ui = 10;
    int l_ib = 10;
    double k_ib = 5.0;
    double k_ui = 1.0;
    double alpha_ub = 3.75;
    double alpha_ui = 2.2;
    double alpha_ib = 2.0;
    double beta0_db = -30.0;
    double d0 = 1.0;
    double rho = 0.95;              // gain time-correlation (Jakes)
    double angle_jitter_deg = 0.1;  // per-block angle perturbation bound
    double los_aoa_ib_deg = 0.0;    // IRS-BS LoS arrival angle at the BS
    double los_aod_ib_deg = -60.0;  // IRS-BS LoS departure angle at the IRS
};

struct ChannelState {
    std::vector<PathState> ue_bs;        // NLoS only, length l_ub
    std::vector<PathState> ue_irs_nlos;  // length l_ui
    std::optional<PathState> ue_irs_los; // scenario 2 only
    PathState irs_bs_los;                // fixed over an episode
    std::vector<PathState> irs_bs_nlos;  // length l_ib
    double rician_k_ib = 0.0;
    double rician_k_ui = 0.0;
    double rho = 0.0;
    // Times the recomputed LoS incidence left the open (0, 90) deg interval
    // and had to rely on table clamping downstream.
    int los_clamp_events = 0;
};

// Jakes-model time correlation J0(2 pi (v f / c) T_c).
double jakes_rho(double v_mps, double f_hz, double t_c_s);

// Linear power from the log-distance model beta0_dB - 10 alpha log10(d/d0).
double large_scale_fading(double d_m, double alpha, double beta0_db, double d0_m);

// First-order Gauss-Markov gain evolution plus uniform angle jitter. The
// innovation uses the current-step large-scale factor beta_new. AoD is
// perturbed independently when evolve_aod is set (matrix channels).
PathState evolve_path(const PathState& p, double rho, double beta_new, double jitter_deg,
                      Rng& rng, bool evolve_aod = false);

// Uniform-linear-array response, entry k = exp(j 2 pi (d/lambda) k sin
// theta), phase reference at element 0.
Eigen::VectorXcd arv(double theta_deg, int n_elems, double spacing_m, double lambda_m);

// h_UB = sum_l g_l ARV(theta_l).
Eigen::VectorXcd assemble_ue_bs(const ChannelState& s, const Geometry& g, const ChannelParams& p);

// Rician IRS-BS matrix: sqrt(K/(1+K)) H_0 + sqrt(1/(1+K)) sum_l H_l with
// rank-1 per-path terms g ARV_BS(AoA) ARV_IRS(AoD)^H.
Eigen::MatrixXcd assemble_irs_bs(const ChannelState& s, const Geometry& g, const ChannelParams& p);

// Per-path UE-IRS pairs (incident angle, channel vector), Rician weights
// already applied, LoS first when present. Paths stay separate because each
// one sees its own reflection matrix.
struct UeIrsPath {
    double theta_deg;
    Eigen::VectorXcd h;
};
std::vector<UeIrsPath> assemble_ue_irs_paths(const ChannelState& s, const Geometry& g,
                                             const ChannelParams& p);

// Draws the episode geometry: UE position uniform over the radius-5 m disk
// centred at (100, 0) and a uniform heading.
Geometry make_geometry(double f_hz, double v_ue_mps, double t_c_s, Rng& rng);

ChannelState init_channel_state(const Geometry& g, const ChannelParams& p, Scenario scenario,
                                Rng& rng);

// Advances one coherence block: UE kinematics, AR(1) gain evolution with
// distance-refreshed large-scale factors, angle jitter, and a deterministic
// rebuild of the scenario-2 LoS path from the new geometry.
void step_environment(Geometry& g, ChannelState& s, const ChannelParams& p, Scenario scenario,
                      Rng& rng);

// Incident angle (deg) of the UE as seen from the IRS boresight.
double ue_irs_incident_angle_deg(const Geometry& g);

}  // namespace irssim
