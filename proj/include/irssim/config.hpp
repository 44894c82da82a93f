// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "irssim/protocol.hpp"

namespace irssim {

// Campaign configuration. Keys in the config file mirror the usual symbol
// names (P_dBm, sigma2_dBm, T_c, N_BS, ...); every key has the defaults
// below, and unknown keys are hard errors.
struct RunConfig {
    // [system]
    double f_hz = 5.195e9;
    int n_bs = 5;
    int n_irs = 200;
    int n_irs_w = 50;
    int n_irs_h = 4;
    int n_g = 10;
    double p_dbm = 20.0;
    double sigma2_dbm = -80.0;
    double t_c_s = 5e-3;
    double r_feedback_bps = 1e6;
    double c_min = 0.4e-12;
    double c_max = 2.7e-12;
    std::string circuit_table_path;  // empty -> built-in default table

    // [channel]
    std::string scenario = "scenario1_nlos";
    double k_ib = 5.0;
    double k_ui = 1.0;
    int l_ub = 10;
    int l_ui = 10;
    int l_ib = 10;
    double alpha_ub = 3.75;
    double alpha_ui = 2.2;
    double alpha_ib = 2.0;
    double beta0_db = -30.0;
    double d0_m = 1.0;
    double v_ue_kmh = 3.0;
    std::optional<double> rho_override;  // unset -> Jakes from v_UE
    double delta_theta_deg = 0.1;

    // [drl]
    double gamma = 0.9;
    double tau = 0.005;
    double lr_actor = 3e-4;
    double lr_critic = 3e-3;
    int l1 = 400;
    int l2 = 300;
    int n_batch = 32;
    std::uint64_t buffer_capacity = 500000;
    int k_directions = 2048;

    // [run] -- desk-scale defaults; larger campaigns reachable by config.
    std::string strategy = "RA";
    std::string phase = "utilize";  // train | utilize
    std::vector<int> m_list = {8};
    std::vector<double> t_reconf_list = {100e-6};
    int m_a = 4;
    int n_episodes = 200;
    int n_blocks = 30;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::string checkpoint;  // utilization input / training output override
    bool dump_blocks = false;
    int threads = 0;  // 0 -> hardware concurrency

    static RunConfig load_file(const std::string& path);
    static RunConfig parse(const std::string& text);

    // Normalized key=value echo, used for the manifest.
    std::string echo() const;

    double p_tx_w() const;
    double sigma2_w() const;
    double v_ue_mps() const { return v_ue_kmh / 3.6; }
    double rho() const;  // override or Jakes

    StrategyKind strategy_kind() const { return strategy_from_name(strategy); }
    Phase run_phase() const;

    // Assembles the per-run context; the circuit table must outlive it.
    ProtocolContext make_context(const CircuitParamTable& table, double t_reconf_s) const;

    void validate() const;
};

}  // namespace irssim
