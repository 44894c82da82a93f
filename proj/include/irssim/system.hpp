// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "irssim/channel.hpp"
#include "irssim/reflection.hpp"
#include "irssim/rng.hpp"

namespace irssim {

struct LinkBudget {
    double p_tx_w = 0.1;        // 20 dBm
    double sigma2_w = 1e-11;    // -80 dBm
    double t_c_s = 5e-3;
    double t_reconf_s = 100e-6;
    double r_feedback_bps = 1e6;
};

double dbm_to_watts(double dbm);

// Per-coherence-block record. Serialized as one CSV row, see
// block_report_csv_header().
struct BlockReport {
    int t = 0;
    int m_star = 0;              // 1-based selected codeword index
    double rate_true = 0.0;      // bits/s/Hz, true channel of the winner
    double rate_measured = 0.0;  // bits/s/Hz, what the BS saw for the winner
    double t_p_s = 0.0;          // time overhead
    double rate_effective = 0.0; // (T_c - T_p)/T_c * rate_true
    int feedback_bits = 0;
};

std::string block_report_csv_header();
std::string block_report_csv_row(const BlockReport& r);

// End-to-end compound channel h_eff = h_UB + H_IB sum_l Phi(c, theta_l) h_l.
Eigen::VectorXcd effective_channel(const Eigen::VectorXcd& h_ub, const Eigen::MatrixXcd& h_ib,
                                   const std::vector<UeIrsPath>& ue_irs_paths,
                                   const CapacitanceVector& c_full,
                                   const CircuitParamTable& table);

// Single-pilot least-squares estimate: h_eff + w, w ~ CN(0, (sigma2/P) I).
Eigen::VectorXcd measure_effective_channel(const Eigen::VectorXcd& h_eff, double p_tx_w,
                                           double sigma2_w, Rng& rng);

// log2(1 + P ||h||^2 / sigma^2).
double data_rate(const Eigen::VectorXcd& h, double p_tx_w, double sigma2_w);

enum class FeedbackKind {
    kIndexOnly,      // RVQ and RA: just the winning index
    kDpicTraining,   // index + M_A direction indices
    kDpicUtilization // index + M_DPIC direction indices
};

// Per-block feedback bit count B; n_direction_slots is M_A (training) or
// M_DPIC (utilization) and ignored for kIndexOnly.
int feedback_bits(FeedbackKind kind, int m_codewords, int k_directions, int n_direction_slots);

// Checks B < R_feedback * T_c; throws otherwise.
void check_feedback_feasible(int bits, double r_feedback_bps, double t_c_s);

// T_p = M T_reconf + B / R_feedback + T_final, where T_final vanishes when
// the winner is the last configuration swept.
double time_overhead(int m_codewords, double t_reconf_s, int feedback_bits_count,
                     double r_feedback_bps, bool final_is_last, double t_c_s);

// ((T_c - T_p) / T_c) * rate.
double effective_rate(double rate, double t_p_s, double t_c_s);

}  // namespace irssim
