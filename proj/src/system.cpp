// SPDX-License-Identifier: Apache-2.0
#include "irssim/system.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace irssim {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

std::string block_report_csv_header() {
    return "t,m_star,rate_true,rate_measured,T_p,rate_effective,feedback_bits";
}

std::string block_report_csv_row(const BlockReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%d,%.9g,%.9g,%.9g,%.9g,%d", r.t, r.m_star, r.rate_true,
                  r.rate_measured, r.t_p_s, r.rate_effective, r.feedback_bits);
    return buf;
}

Eigen::VectorXcd effective_channel(const Eigen::VectorXcd& h_ub, const Eigen::MatrixXcd& h_ib,
                                   const std::vector<UeIrsPath>& ue_irs_paths,
                                   const CapacitanceVector& c_full,
                                   const CircuitParamTable& table) {
    if (h_ib.rows() != h_ub.size())
        throw std::invalid_argument("effective_channel: h_ub / H_ib row mismatch");
    Eigen::VectorXcd reflected = Eigen::VectorXcd::Zero(h_ib.cols());
    for (const auto& path : ue_irs_paths) {
        if (path.h.size() != h_ib.cols())
            throw std::invalid_argument("effective_channel: UE-IRS path / H_ib column mismatch");
        if (c_full.size() != path.h.size())
            throw std::invalid_argument("effective_channel: capacitance vector length mismatch");
        const Eigen::VectorXcd diag =
            reflection_matrix_diag(table, c_full, table.clamp_angle(path.theta_deg));
        reflected += diag.cwiseProduct(path.h);
    }
    if (ue_irs_paths.empty()) return h_ub;
    return h_ub + h_ib * reflected;
}

Eigen::VectorXcd measure_effective_channel(const Eigen::VectorXcd& h_eff, double p_tx_w,
                                           double sigma2_w, Rng& rng) {
    if (!(p_tx_w > 0.0)) throw std::invalid_argument("measure: transmit power must be positive");
    const double var = sigma2_w / p_tx_w;
    Eigen::VectorXcd out(h_eff.size());
    for (Eigen::Index i = 0; i < h_eff.size(); ++i) out[i] = h_eff[i] + rng.complex_normal(var);
    return out;
}

double data_rate(const Eigen::VectorXcd& h, double p_tx_w, double sigma2_w) {
    return std::log2(1.0 + p_tx_w * h.squaredNorm() / sigma2_w);
}

namespace {
int ceil_log2(int n) {
    int bits = 0;
    int cap = 1;
    while (cap < n) {
        cap *= 2;
        ++bits;
    }
    return bits;
}
}  // namespace

int feedback_bits(FeedbackKind kind, int m_codewords, int k_directions, int n_direction_slots) {
    if (m_codewords < 1) throw std::invalid_argument("feedback_bits: M must be >= 1");
    int b = ceil_log2(m_codewords);
    if (kind != FeedbackKind::kIndexOnly) {
        if (k_directions < 1) throw std::invalid_argument("feedback_bits: K must be >= 1");
        b += n_direction_slots * ceil_log2(k_directions);
    }
    return b;
}

void check_feedback_feasible(int bits, double r_feedback_bps, double t_c_s) {
    if (static_cast<double>(bits) >= r_feedback_bps * t_c_s)
        throw std::runtime_error("feedback of " + std::to_string(bits) +
                                 " bits does not fit into one coherence block");
}

double time_overhead(int m_codewords, double t_reconf_s, int feedback_bits_count,
                     double r_feedback_bps, bool final_is_last, double t_c_s) {
    if (m_codewords < 1) throw std::invalid_argument("time_overhead: M must be >= 1");
    if (!(t_reconf_s >= 0.0 && r_feedback_bps > 0.0))
        throw std::invalid_argument("time_overhead: bad timing arguments");
    const double t_final = final_is_last ? 0.0 : t_reconf_s;
    const double t_p = m_codewords * t_reconf_s +
                       static_cast<double>(feedback_bits_count) / r_feedback_bps + t_final;
    if (t_p >= t_c_s)
        throw std::runtime_error("protocol overhead " + std::to_string(t_p) +
                                 " s exceeds the coherence time");
    return t_p;
}

double effective_rate(double rate, double t_p_s, double t_c_s) {
    if (!(t_p_s >= 0.0 && t_p_s < t_c_s))
        throw std::invalid_argument("effective_rate: T_p must lie in [0, T_c)");
    return (t_c_s - t_p_s) / t_c_s * rate;
}

}  // namespace irssim
