// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "irssim/rng.hpp"

namespace irssim {

// Capacitance bounds of the tunable element, farads.
struct CapacitanceRange {
    double c_min = 0.4e-12;
    double c_max = 2.7e-12;

    double span() const { return c_max - c_min; }
    double delta_ra() const { return span() / 5.0; }    // RA perturbation bound
    double delta_dpic() const { return span() / 4.0; }  // DPIC action bound
};

// M candidate capacitance vectors, group-level (length N_G each).
struct Codebook {
    std::vector<Eigen::VectorXd> codewords;

    int size() const { return static_cast<int>(codewords.size()); }
};

// K fixed perturbation vectors shared by BS and IRS, entries in
// [-delta_dpic, delta_dpic] farads.
struct DirectionCodebook {
    std::vector<Eigen::VectorXd> directions;

    int size() const { return static_cast<int>(directions.size()); }
};

// Tiling of the surface into N_G groups of width_per_group x height
// meta-atoms; groups cover contiguous width blocks in order.
struct GroupMap {
    int n_groups = 10;
    int width_per_group = 5;
    int height = 4;

    int n_irs() const { return n_groups * width_per_group * height; }
};

// Fully random codebook, every entry i.i.d. uniform(lo, hi).
Codebook rvq_generate(int m, int n_dims, double lo, double hi, Rng& rng);

// Direction codebook by the same RVQ draw over [-delta, delta]^n.
DirectionCodebook rvq_directions(int k, int n_dims, double delta, Rng& rng);

// One RA candidate: clip(q_star + z, [c_min, c_max]), z ~ U(-delta, delta)^n.
Eigen::VectorXd ra_perturb(const Eigen::VectorXd& q_star, double delta,
                           const CapacitanceRange& range, Rng& rng);

// Full RA codebook refresh around the previous winner.
Codebook ra_update(const Eigen::VectorXd& q_star, int m, double delta,
                   const CapacitanceRange& range, Rng& rng);

// clip(q + d, [c_min, c_max]); n_clip counts dimensions that hit a bound
// (feeds the DRL reward penalty).
struct DpicUpdateResult {
    Eigen::VectorXd q;
    int n_clip = 0;
};
DpicUpdateResult dpic_update(const Eigen::VectorXd& q, const Eigen::VectorXd& d,
                             const CapacitanceRange& range);

// Nearest direction codeword by Euclidean distance, 1-based; ties go to the
// smallest index.
int quantize_direction(const Eigen::VectorXd& u, const DirectionCodebook& d);

// argmax of the measured rates, 1-based; ties go to the smallest index.
int select_codeword(const std::vector<double>& rates);

// Replicates each group value over its tile; output length n_irs(), laid out
// as contiguous per-group blocks across the width dimension.
Eigen::VectorXd expand_group(const Eigen::VectorXd& q, const GroupMap& map);

// Text round-trip: one codeword per line, entries in picofarads, 12
// significant digits.
void save_codebook(const Codebook& cb, std::ostream& out);
Codebook load_codebook(std::istream& in);

}  // namespace irssim
