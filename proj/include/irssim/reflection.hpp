// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace irssim {

// Equivalent-circuit element values of one meta-atom at a given incident
// angle: series branch R_T + jwL_T + 1/(jwC_T) + 1/(jwC) in parallel with
// the bottom-layer inductance jwL_B.
struct CircuitParams {
    double L_T;  // top-layer inductance [H]
    double C_T;  // top-layer capacitance [F]
    double R_T;  // top-layer loss resistance [ohm]
    double L_B;  // bottom-layer inductance [H]
};

struct CircuitKnot {
    double theta_deg;
    CircuitParams p;
};

// Capacitance vector across meta-atoms (or groups), entries in farads.
using CapacitanceVector = Eigen::VectorXd;

// Angle-indexed equivalent-circuit table. Element values are interpolated
// piecewise-linearly between knots; the impedance is then evaluated from the
// interpolated elements, never interpolated directly. Element positivity at
// the knots therefore guarantees a passive (|Gamma| <= 1) response at every
// queried angle and capacitance.
class CircuitParamTable {
  public:
    CircuitParamTable(std::vector<CircuitKnot> knots, double f_hz,
                      double z0_ohm = kFreeSpaceImpedance);

    // Synthetic default at f = 5.195 GHz; smooth angle dependence over
    // knots 1..89 deg and a > 300 deg reflection-phase swing across
    // C in [0.4, 2.7] pF at 45 deg incidence.
    static CircuitParamTable default_table();

    // Plain-text format: comment lines start with '#', first non-comment
    // line is the header "theta_deg L_T C_T R_T L_B", then one
    // whitespace-separated row per knot, SI units. The carrier frequency is
    // given by a "# f_hz = <value>" comment before the header.
    static CircuitParamTable load(std::istream& in);
    static CircuitParamTable load_file(const std::string& path);
    void save(std::ostream& out) const;

    double f_hz() const { return f_hz_; }
    double z0() const { return z0_; }
    double theta_min_deg() const { return knots_.front().theta_deg; }
    double theta_max_deg() const { return knots_.back().theta_deg; }
    const std::vector<CircuitKnot>& knots() const { return knots_; }

    // Clamps into [theta_min + eps, theta_max - eps]; channel evolution can
    // push incident angles slightly past the tabulated domain.
    double clamp_angle(double theta_deg) const;

    static constexpr double kFreeSpaceImpedance = 376.73;
    static constexpr double kClampEpsDeg = 0.01;

  private:
    std::vector<CircuitKnot> knots_;
    double f_hz_;
    double z0_;
};

// Piecewise-linear element lookup; theta must lie within the table domain
// (callers clamp first via CircuitParamTable::clamp_angle).
CircuitParams lookup_params(const CircuitParamTable& table, double theta_deg);

// Meta-atom impedance Z(C, theta) of the parallel equivalent circuit.
std::complex<double> impedance(const CircuitParamTable& table, double c_farad,
                               double theta_deg);

// Reflection coefficient Gamma = (Z - Z0) / (Z + Z0).
std::complex<double> reflection_coeff(const CircuitParamTable& table,
                                      double c_farad, double theta_deg);

// Diagonal of the per-path reflection matrix for a full-length capacitance
// vector. Repeated capacitance values (group control) are evaluated once.
Eigen::VectorXcd reflection_matrix_diag(const CircuitParamTable& table,
                                        const CapacitanceVector& c,
                                        double theta_deg);

}  // namespace irssim
