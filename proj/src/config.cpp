// SPDX-License-Identifier: Apache-2.0
#include "irssim/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace irssim {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// section.key -> raw value
std::map<std::string, std::string> tokenize(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string full = section.empty() ? key : section + "." + key;
        if (kv.count(full))
            throw std::runtime_error("config: duplicate key " + full);
        kv[full] = value;
    }
    return kv;
}

class Reader {
  public:
    explicit Reader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string raw(const std::string& key) {
        used_.insert(key);
        return kv_.at(key);
    }

    void str(const std::string& key, std::string& out) {
        if (has(key)) out = raw(key);
    }
    void dbl(const std::string& key, double& out) {
        if (!has(key)) return;
        const std::string v = raw(key);
        if (v.empty()) return;
        out = parse_double(key, v);
    }
    void integer(const std::string& key, int& out) {
        if (!has(key)) return;
        out = static_cast<int>(parse_double(key, raw(key)));
    }
    void u64(const std::string& key, std::uint64_t& out) {
        if (!has(key)) return;
        out = std::stoull(raw(key));
    }
    void boolean(const std::string& key, bool& out) {
        if (!has(key)) return;
        const std::string v = raw(key);
        if (v == "1" || v == "true") out = true;
        else if (v == "0" || v == "false") out = false;
        else throw std::runtime_error("config: bad boolean for " + key);
    }
    void opt_dbl(const std::string& key, std::optional<double>& out) {
        if (!has(key)) return;
        const std::string v = raw(key);
        if (!v.empty()) out = parse_double(key, v);
    }
    void int_list(const std::string& key, std::vector<int>& out) {
        if (!has(key)) return;
        out.clear();
        for (double v : parse_list(key, raw(key))) out.push_back(static_cast<int>(v));
    }
    void dbl_list(const std::string& key, std::vector<double>& out) {
        if (!has(key)) return;
        out = parse_list(key, raw(key));
    }

    void fail_on_unknown() const {
        for (const auto& [key, value] : kv_)
            if (!used_.count(key))
                throw std::runtime_error("config: unknown key '" + key + "'");
    }

  private:
    double parse_double(const std::string& key, const std::string& v) {
        std::size_t consumed = 0;
        const double x = std::stod(v, &consumed);
        if (consumed != v.size())
            throw std::runtime_error("config: bad numeric value for " + key + ": '" + v + "'");
        return x;
    }
    std::vector<double> parse_list(const std::string& key, const std::string& v) {
        std::vector<double> out;
        std::string item;
        std::istringstream in(v);
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(parse_double(key, item));
        }
        if (out.empty()) throw std::runtime_error("config: empty list for " + key);
        return out;
    }

    std::map<std::string, std::string> kv_;
    std::set<std::string> used_;
};

}  // namespace

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig c;
    Reader r(tokenize(text));

    r.dbl("system.f", c.f_hz);
    r.integer("system.N_BS", c.n_bs);
    r.integer("system.N_IRS", c.n_irs);
    r.integer("system.N_IRS_w", c.n_irs_w);
    r.integer("system.N_IRS_h", c.n_irs_h);
    r.integer("system.N_G", c.n_g);
    r.dbl("system.P_dBm", c.p_dbm);
    r.dbl("system.sigma2_dBm", c.sigma2_dbm);
    r.dbl("system.T_c", c.t_c_s);
    r.dbl("system.R_feedback", c.r_feedback_bps);
    r.dbl("system.C_min", c.c_min);
    r.dbl("system.C_max", c.c_max);
    r.str("system.circuit_table", c.circuit_table_path);

    r.str("channel.scenario", c.scenario);
    r.dbl("channel.K_IB", c.k_ib);
    r.dbl("channel.K_UI", c.k_ui);
    r.integer("channel.L_UB", c.l_ub);
    r.integer("channel.L_UI", c.l_ui);
    r.integer("channel.L_IB", c.l_ib);
    r.dbl("channel.alpha_UB", c.alpha_ub);
    r.dbl("channel.alpha_UI", c.alpha_ui);
    r.dbl("channel.alpha_IB", c.alpha_ib);
    r.dbl("channel.beta0_dB", c.beta0_db);
    r.dbl("channel.d0", c.d0_m);
    r.dbl("channel.v_UE_kmh", c.v_ue_kmh);
    r.opt_dbl("channel.rho", c.rho_override);
    r.dbl("channel.delta_theta_deg", c.delta_theta_deg);

    r.dbl("drl.gamma", c.gamma);
    r.dbl("drl.tau", c.tau);
    r.dbl("drl.alpha_pi", c.lr_actor);
    r.dbl("drl.alpha_Q", c.lr_critic);
    r.integer("drl.L1", c.l1);
    r.integer("drl.L2", c.l2);
    r.integer("drl.N_batch", c.n_batch);
    r.u64("drl.buffer_capacity", c.buffer_capacity);
    r.integer("drl.K", c.k_directions);

    r.str("run.strategy", c.strategy);
    r.str("run.phase", c.phase);
    r.int_list("run.M_list", c.m_list);
    r.dbl_list("run.T_reconf_list", c.t_reconf_list);
    r.integer("run.M_A", c.m_a);
    r.integer("run.n_episodes", c.n_episodes);
    r.integer("run.n_blocks", c.n_blocks);
    r.u64("run.seed", c.seed);
    r.str("run.out_dir", c.out_dir);
    r.str("run.checkpoint", c.checkpoint);
    r.boolean("run.dump_blocks", c.dump_blocks);
    r.integer("run.threads", c.threads);

    r.fail_on_unknown();
    c.validate();
    return c;
}

std::string RunConfig::echo() const {
    std::ostringstream out;
    char buf[128];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return std::string(buf);
    };
    out << "[system]\n";
    out << "f = " << num(f_hz) << "\n";
    out << "N_BS = " << n_bs << "\nN_IRS = " << n_irs << "\nN_IRS_w = " << n_irs_w
        << "\nN_IRS_h = " << n_irs_h << "\nN_G = " << n_g << "\n";
    out << "P_dBm = " << num(p_dbm) << "\nsigma2_dBm = " << num(sigma2_dbm)
        << "\nT_c = " << num(t_c_s) << "\nR_feedback = " << num(r_feedback_bps) << "\n";
    out << "C_min = " << num(c_min) << "\nC_max = " << num(c_max) << "\n";
    out << "circuit_table = " << circuit_table_path << "\n";
    out << "[channel]\n";
    out << "scenario = " << scenario << "\nK_IB = " << num(k_ib) << "\nK_UI = " << num(k_ui)
        << "\nL_UB = " << l_ub << "\nL_UI = " << l_ui << "\nL_IB = " << l_ib << "\n";
    out << "alpha_UB = " << num(alpha_ub) << "\nalpha_UI = " << num(alpha_ui)
        << "\nalpha_IB = " << num(alpha_ib) << "\nbeta0_dB = " << num(beta0_db)
        << "\nd0 = " << num(d0_m) << "\n";
    out << "v_UE_kmh = " << num(v_ue_kmh) << "\n";
    out << "rho = " << (rho_override ? num(*rho_override) : std::string()) << "\n";
    out << "delta_theta_deg = " << num(delta_theta_deg) << "\n";
    out << "[drl]\n";
    out << "gamma = " << num(gamma) << "\ntau = " << num(tau) << "\nalpha_pi = " << num(lr_actor)
        << "\nalpha_Q = " << num(lr_critic) << "\nL1 = " << l1 << "\nL2 = " << l2
        << "\nN_batch = " << n_batch << "\nbuffer_capacity = " << buffer_capacity
        << "\nK = " << k_directions << "\n";
    out << "[run]\n";
    out << "strategy = " << strategy << "\nphase = " << phase << "\n";
    out << "M_list = ";
    for (std::size_t i = 0; i < m_list.size(); ++i) out << (i ? "," : "") << m_list[i];
    out << "\nT_reconf_list = ";
    for (std::size_t i = 0; i < t_reconf_list.size(); ++i)
        out << (i ? "," : "") << num(t_reconf_list[i]);
    out << "\nM_A = " << m_a << "\nn_episodes = " << n_episodes << "\nn_blocks = " << n_blocks
        << "\nseed = " << seed << "\nout_dir = " << out_dir << "\ncheckpoint = " << checkpoint
        << "\ndump_blocks = " << (dump_blocks ? 1 : 0) << "\nthreads = " << threads << "\n";
    return out.str();
}

double RunConfig::p_tx_w() const { return dbm_to_watts(p_dbm); }
double RunConfig::sigma2_w() const { return dbm_to_watts(sigma2_dbm); }

double RunConfig::rho() const {
    if (rho_override) return *rho_override;
    return jakes_rho(v_ue_mps(), f_hz, t_c_s);
}

Phase RunConfig::run_phase() const {
    if (phase == "train") return Phase::kTraining;
    if (phase == "utilize") return Phase::kUtilization;
    throw std::runtime_error("config: phase must be 'train' or 'utilize'");
}

ProtocolContext RunConfig::make_context(const CircuitParamTable& table, double t_reconf_s) const {
    ProtocolContext ctx;
    ctx.table = &table;
    ctx.group.n_groups = n_g;
    ctx.group.width_per_group = n_irs_w / n_g;
    ctx.group.height = n_irs_h;
    ctx.range.c_min = c_min;
    ctx.range.c_max = c_max;
    ctx.budget.p_tx_w = p_tx_w();
    ctx.budget.sigma2_w = sigma2_w();
    ctx.budget.t_c_s = t_c_s;
    ctx.budget.t_reconf_s = t_reconf_s;
    ctx.budget.r_feedback_bps = r_feedback_bps;
    ctx.channel.n_bs = n_bs;
    ctx.channel.n_irs = n_irs;
    ctx.channel.l_ub = l_ub;
    ctx.channel.l_ui = l_ui;
    ctx.channel.l_ib = l_ib;
    ctx.channel.k_ib = k_ib;
    ctx.channel.k_ui = k_ui;
    ctx.channel.alpha_ub = alpha_ub;
    ctx.channel.alpha_ui = alpha_ui;
    ctx.channel.alpha_ib = alpha_ib;
    ctx.channel.beta0_db = beta0_db;
    ctx.channel.d0 = d0_m;
    ctx.channel.rho = rho();
    ctx.channel.angle_jitter_deg = delta_theta_deg;
    ctx.scenario = scenario_from_name(scenario);
    ctx.f_hz = f_hz;
    ctx.v_ue_mps = v_ue_mps();
    ctx.k_directions = k_directions;
    ctx.l1 = l1;
    ctx.l2 = l2;
    ctx.gamma = gamma;
    ctx.tau = tau;
    ctx.lr_actor = lr_actor;
    ctx.lr_critic = lr_critic;
    ctx.n_batch = n_batch;
    ctx.buffer_capacity = buffer_capacity;
    return ctx;
}

void RunConfig::validate() const {
    if (n_irs_w * n_irs_h != n_irs)
        throw std::runtime_error("config: N_IRS_w * N_IRS_h must equal N_IRS");
    if (n_g < 1 || n_irs_w % n_g != 0)
        throw std::runtime_error("config: N_G must divide N_IRS_w");
    if (!(c_min < c_max) || c_min <= 0.0)
        throw std::runtime_error("config: need 0 < C_min < C_max");
    if (m_list.empty() || t_reconf_list.empty())
        throw std::runtime_error("config: sweep lists must be non-empty");
    for (int m : m_list)
        if (m < 1) throw std::runtime_error("config: every M must be >= 1");
    if (n_episodes < 1 || n_blocks < 1)
        throw std::runtime_error("config: n_episodes and n_blocks must be >= 1");
    if (rho_override && !(*rho_override >= 0.0 && *rho_override <= 1.0))
        throw std::runtime_error("config: rho must lie in [0, 1]");
    strategy_from_name(strategy);  // throws on bad name
    scenario_from_name(scenario);
    run_phase();
}

}  // namespace irssim
