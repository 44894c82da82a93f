// SPDX-License-Identifier: Apache-2.0
#include "irssim/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace irssim {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double wrap_pi(double a) {
    while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
    while (a < -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

// Deterministic LoS gain: magnitude sqrt(beta), phase from the path length.
std::complex<double> los_gain(double beta, double d_m, double lambda_m) {
    const double phase = -2.0 * std::numbers::pi * d_m / lambda_m;
    return std::sqrt(beta) * std::complex<double>(std::cos(phase), std::sin(phase));
}

PathState make_los_ue_irs(const Geometry& g, const ChannelParams& p) {
    const double d = (g.x_ue - g.x_irs).norm();
    PathState los;
    los.aoa_deg = ue_irs_incident_angle_deg(g);
    los.beta = large_scale_fading(d, p.alpha_ui, p.beta0_db, p.d0);
    los.gain = los_gain(los.beta, d, g.lambda);
    return los;
}

}  // namespace

const char* scenario_name(Scenario s) {
    return s == Scenario::kNlosUeIrs ? "scenario1_nlos" : "scenario2_los";
}

Scenario scenario_from_name(const std::string& name) {
    if (name == "scenario1_nlos") return Scenario::kNlosUeIrs;
    if (name == "scenario2_los") return Scenario::kLosUeIrs;
    throw std::invalid_argument("unknown scenario: " + name);
}

double jakes_rho(double v_mps, double f_hz, double t_c_s) {
    const double f_d = v_mps * f_hz / kSpeedOfLight;
    return std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * f_d * t_c_s);
}

double large_scale_fading(double d_m, double alpha, double beta0_db, double d0_m) {
    if (!(d_m > 0.0))
        throw std::domain_error("large_scale_fading: distance must be positive");
    const double beta_db = beta0_db - 10.0 * alpha * std::log10(d_m / d0_m);
    return std::pow(10.0, beta_db / 10.0);
}

PathState evolve_path(const PathState& p, double rho, double beta_new, double jitter_deg,
                      Rng& rng, bool evolve_aod) {
    if (!(rho >= 0.0 && rho <= 1.0))
        throw std::invalid_argument("evolve_path: rho must lie in [0, 1]");
    PathState out = p;
    const std::complex<double> nu = rng.complex_normal(beta_new);
    out.gain = rho * p.gain + std::sqrt(1.0 - rho * rho) * nu;
    out.aoa_deg = p.aoa_deg + rng.uniform(-jitter_deg, jitter_deg);
    if (evolve_aod) out.aod_deg = p.aod_deg + rng.uniform(-jitter_deg, jitter_deg);
    out.beta = beta_new;
    return out;
}

Eigen::VectorXcd arv(double theta_deg, int n_elems, double spacing_m, double lambda_m) {
    if (n_elems < 1) throw std::invalid_argument("arv: need at least one element");
    const double step = 2.0 * std::numbers::pi * (spacing_m / lambda_m) *
                        std::sin(theta_deg * kDegToRad);
    Eigen::VectorXcd v(n_elems);
    for (int k = 0; k < n_elems; ++k)
        v[k] = std::complex<double>(std::cos(step * k), std::sin(step * k));
    return v;
}

Eigen::VectorXcd assemble_ue_bs(const ChannelState& s, const Geometry& g, const ChannelParams& p) {
    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(p.n_bs);
    for (const auto& path : s.ue_bs) h += path.gain * arv(path.aoa_deg, p.n_bs, g.d_bs, g.lambda);
    return h;
}

Eigen::MatrixXcd assemble_irs_bs(const ChannelState& s, const Geometry& g, const ChannelParams& p) {
    const double k = s.rician_k_ib;
    const double w_los = std::sqrt(k / (1.0 + k));
    const double w_nlos = std::sqrt(1.0 / (1.0 + k));
    auto rank1 = [&](const PathState& path) -> Eigen::MatrixXcd {
        return path.gain * (arv(path.aoa_deg, p.n_bs, g.d_bs, g.lambda) *
                            arv(path.aod_deg, p.n_irs, g.d_irs, g.lambda).adjoint());
    };
    Eigen::MatrixXcd h = w_los * rank1(s.irs_bs_los);
    for (const auto& path : s.irs_bs_nlos) h += w_nlos * rank1(path);
    return h;
}

std::vector<UeIrsPath> assemble_ue_irs_paths(const ChannelState& s, const Geometry& g,
                                             const ChannelParams& p) {
    std::vector<UeIrsPath> paths;
    paths.reserve(s.ue_irs_nlos.size() + 1);
    double w_nlos = 1.0;
    if (s.ue_irs_los) {
        const double k = s.rician_k_ui;
        const double w_los = std::sqrt(k / (1.0 + k));
        w_nlos = std::sqrt(1.0 / (1.0 + k));
        paths.push_back({s.ue_irs_los->aoa_deg,
                         w_los * s.ue_irs_los->gain *
                             arv(s.ue_irs_los->aoa_deg, p.n_irs, g.d_irs, g.lambda)});
    }
    for (const auto& path : s.ue_irs_nlos)
        paths.push_back({path.aoa_deg,
                         w_nlos * path.gain * arv(path.aoa_deg, p.n_irs, g.d_irs, g.lambda)});
    return paths;
}

double ue_irs_incident_angle_deg(const Geometry& g) {
    const Eigen::Vector2d to_ue = g.x_ue - g.x_irs;
    const double az = std::atan2(to_ue.y(), to_ue.x());
    return std::abs(wrap_pi(az - g.irs_boresight_rad)) / kDegToRad;
}

Geometry make_geometry(double f_hz, double v_ue_mps, double t_c_s, Rng& rng) {
    Geometry g;
    g.lambda = kSpeedOfLight / f_hz;
    g.d_bs = g.lambda / 2.0;
    g.d_irs = g.lambda / 10.0;
    g.v_ue = v_ue_mps;
    g.t_c_s = t_c_s;
    // UE start: uniform over the disk of radius 5 m at (100, 0).
    const double r = 5.0 * std::sqrt(rng.uniform(0.0, 1.0));
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    g.x_ue = Eigen::Vector2d(100.0 + r * std::cos(phi), r * std::sin(phi));
    g.heading_rad = rng.uniform(0.0, 2.0 * std::numbers::pi);
    // Boresight 45 deg off the line from the IRS to the UE area centre, so
    // LoS incidence starts mid-table.
    const Eigen::Vector2d centre(100.0, 0.0);
    const Eigen::Vector2d dir = centre - g.x_irs;
    g.irs_boresight_rad = std::atan2(dir.y(), dir.x()) + 45.0 * kDegToRad;
    return g;
}

ChannelState init_channel_state(const Geometry& g, const ChannelParams& p, Scenario scenario,
                                Rng& rng) {
    ChannelState s;
    s.rician_k_ib = p.k_ib;
    s.rician_k_ui = p.k_ui;
    s.rho = p.rho;

    const double d_ub = (g.x_ue - g.x_bs).norm();
    const double d_ui = (g.x_ue - g.x_irs).norm();
    const double d_ib = (g.x_irs - g.x_bs).norm();

    auto draw = [&](double beta, double aoa_lo, double aoa_hi, bool with_aod) {
        PathState path;
        path.beta = beta;
        path.gain = rng.complex_normal(beta);
        path.aoa_deg = rng.uniform(aoa_lo, aoa_hi);
        if (with_aod) path.aod_deg = rng.uniform(-90.0, 90.0);
        return path;
    };

    const double beta_ub = large_scale_fading(d_ub, p.alpha_ub, p.beta0_db, p.d0);
    s.ue_bs.reserve(p.l_ub);
    for (int l = 0; l < p.l_ub; ++l) s.ue_bs.push_back(draw(beta_ub, -90.0, 90.0, false));

    const double beta_ui = large_scale_fading(d_ui, p.alpha_ui, p.beta0_db, p.d0);
    s.ue_irs_nlos.reserve(p.l_ui);
    for (int l = 0; l < p.l_ui; ++l) s.ue_irs_nlos.push_back(draw(beta_ui, 0.0, 90.0, false));

    const double beta_ib = large_scale_fading(d_ib, p.alpha_ib, p.beta0_db, p.d0);
    s.irs_bs_nlos.reserve(p.l_ib);
    for (int l = 0; l < p.l_ib; ++l) s.irs_bs_nlos.push_back(draw(beta_ib, -90.0, 90.0, true));

    s.irs_bs_los.aoa_deg = p.los_aoa_ib_deg;
    s.irs_bs_los.aod_deg = p.los_aod_ib_deg;
    s.irs_bs_los.beta = beta_ib;
    s.irs_bs_los.gain = los_gain(beta_ib, d_ib, g.lambda);

    if (scenario == Scenario::kLosUeIrs) {
        s.ue_irs_los = make_los_ue_irs(g, p);
        if (!(s.ue_irs_los->aoa_deg > 0.0 && s.ue_irs_los->aoa_deg < 90.0)) ++s.los_clamp_events;
    }
    return s;
}

void step_environment(Geometry& g, ChannelState& s, const ChannelParams& p, Scenario scenario,
                      Rng& rng) {
    // Kinematics first; this block's large-scale factors use the new
    // distances.
    g.x_ue += g.v_ue * g.t_c_s *
              Eigen::Vector2d(std::cos(g.heading_rad), std::sin(g.heading_rad));

    const double d_ub = (g.x_ue - g.x_bs).norm();
    const double d_ui = (g.x_ue - g.x_irs).norm();

    const double beta_ub = large_scale_fading(d_ub, p.alpha_ub, p.beta0_db, p.d0);
    for (auto& path : s.ue_bs) path = evolve_path(path, s.rho, beta_ub, p.angle_jitter_deg, rng);

    const double beta_ui = large_scale_fading(d_ui, p.alpha_ui, p.beta0_db, p.d0);
    for (auto& path : s.ue_irs_nlos)
        path = evolve_path(path, s.rho, beta_ui, p.angle_jitter_deg, rng);

    for (auto& path : s.irs_bs_nlos)
        path = evolve_path(path, s.rho, path.beta, p.angle_jitter_deg, rng, /*evolve_aod=*/true);

    if (scenario == Scenario::kLosUeIrs) {
        s.ue_irs_los = make_los_ue_irs(g, p);
        if (!(s.ue_irs_los->aoa_deg > 0.0 && s.ue_irs_los->aoa_deg < 90.0)) ++s.los_clamp_events;
    }
}

}  // namespace irssim
