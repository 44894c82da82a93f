// SPDX-License-Identifier: Apache-2.0
#include "irssim/codebook.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace irssim {

Codebook rvq_generate(int m, int n_dims, double lo, double hi, Rng& rng) {
    if (m < 1 || n_dims < 1) throw std::invalid_argument("rvq_generate: M and N must be >= 1");
    if (!(lo < hi)) throw std::invalid_argument("rvq_generate: lo must be < hi");
    Codebook cb;
    cb.codewords.resize(m);
    for (auto& q : cb.codewords) {
        q.resize(n_dims);
        for (int n = 0; n < n_dims; ++n) q[n] = rng.uniform(lo, hi);
    }
    return cb;
}

DirectionCodebook rvq_directions(int k, int n_dims, double delta, Rng& rng) {
    DirectionCodebook d;
    d.directions.resize(k);
    for (auto& v : d.directions) {
        v.resize(n_dims);
        for (int n = 0; n < n_dims; ++n) v[n] = rng.uniform(-delta, delta);
    }
    return d;
}

Eigen::VectorXd ra_perturb(const Eigen::VectorXd& q_star, double delta,
                           const CapacitanceRange& range, Rng& rng) {
    Eigen::VectorXd q(q_star.size());
    for (Eigen::Index n = 0; n < q.size(); ++n) {
        const double z = rng.uniform(-delta, delta);
        q[n] = std::clamp(q_star[n] + z, range.c_min, range.c_max);
    }
    return q;
}

Codebook ra_update(const Eigen::VectorXd& q_star, int m, double delta,
                   const CapacitanceRange& range, Rng& rng) {
    Codebook cb;
    cb.codewords.reserve(m);
    for (int i = 0; i < m; ++i) cb.codewords.push_back(ra_perturb(q_star, delta, range, rng));
    return cb;
}

DpicUpdateResult dpic_update(const Eigen::VectorXd& q, const Eigen::VectorXd& d,
                             const CapacitanceRange& range) {
    if (q.size() != d.size()) throw std::invalid_argument("dpic_update: dimension mismatch");
    DpicUpdateResult out;
    out.q.resize(q.size());
    for (Eigen::Index n = 0; n < q.size(); ++n) {
        const double raw = q[n] + d[n];
        out.q[n] = std::clamp(raw, range.c_min, range.c_max);
        if (out.q[n] != raw) ++out.n_clip;
    }
    return out;
}

int quantize_direction(const Eigen::VectorXd& u, const DirectionCodebook& d) {
    if (d.size() < 1) throw std::invalid_argument("quantize_direction: empty codebook");
    int best = 1;
    double best_d2 = (u - d.directions[0]).squaredNorm();
    for (int k = 1; k < d.size(); ++k) {
        const double d2 = (u - d.directions[k]).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = k + 1;
        }
    }
    return best;
}

int select_codeword(const std::vector<double>& rates) {
    if (rates.empty()) throw std::invalid_argument("select_codeword: no rates");
    int best = 1;
    for (int m = 1; m < static_cast<int>(rates.size()); ++m)
        if (rates[m] > rates[best - 1]) best = m + 1;
    return best;
}

Eigen::VectorXd expand_group(const Eigen::VectorXd& q, const GroupMap& map) {
    if (q.size() != map.n_groups)
        throw std::invalid_argument("expand_group: codeword length != group count");
    const int per_group = map.width_per_group * map.height;
    Eigen::VectorXd c(map.n_irs());
    for (int g = 0; g < map.n_groups; ++g) c.segment(g * per_group, per_group).setConstant(q[g]);
    return c;
}

void save_codebook(const Codebook& cb, std::ostream& out) {
    char buf[32];
    for (const auto& q : cb.codewords) {
        for (Eigen::Index n = 0; n < q.size(); ++n) {
            std::snprintf(buf, sizeof buf, "%.12g", q[n] * 1e12);
            if (n) out << ' ';
            out << buf;
        }
        out << '\n';
    }
}

Codebook load_codebook(std::istream& in) {
    Codebook cb;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<double> vals;
        double v;
        while (ls >> v) vals.push_back(v * 1e-12);
        if (vals.empty()) continue;
        Eigen::VectorXd q(static_cast<Eigen::Index>(vals.size()));
        for (std::size_t i = 0; i < vals.size(); ++i) q[static_cast<Eigen::Index>(i)] = vals[i];
        if (!cb.codewords.empty() && q.size() != cb.codewords.front().size())
            throw std::runtime_error("codebook file: inconsistent codeword lengths");
        cb.codewords.push_back(std::move(q));
    }
    return cb;
}

}  // namespace irssim
