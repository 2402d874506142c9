#pragma once

// Polar-form AC branch flows, bus power mismatches and a Newton power flow.
//
// Power mismatch at bus n, for the online generators and lines of a condition:
//   dP_n = sum p_g - P^L_n - sum (flows leaving n)
//   dQ_n = sum q_g - Q^L_n + b_n v_n^2 - sum (flows leaving n)
// These are exactly the balance slacks sigma^P_n, sigma^Q_n.

#include <array>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "scopf/network.hpp"

namespace scopf::acpf {

struct BranchFlow {
    double p_o = 0.0, q_o = 0.0;  // entering the line at its origin terminal
    double p_d = 0.0, q_d = 0.0;  // entering the line at its destination terminal
};

BranchFlow branch_flows(const Line& line, double v_o, double th_o, double v_d, double th_d);

/// Partials of (p_o, q_o, p_d, q_d) [row] with respect to (v_o, th_o, v_d, th_d) [column].
using BranchFlowJacobian = std::array<std::array<double, 4>, 4>;
BranchFlowJacobian branch_flow_jacobian(const Line& line, double v_o, double th_o, double v_d, double th_d);

/// |s| at each terminal; the thermal limits compare these with rating * v.
struct ApparentFlow {
    double s_o = 0.0, s_d = 0.0;
};
ApparentFlow apparent_flows(const BranchFlow& f);

struct Mismatch {
    std::vector<double> dp, dq;
};

Mismatch bus_mismatch(const Network& net, const OnlineSets& online, const OperatingPoint& point);

/// Active losses sum(p_o + p_d) over the online lines.
double total_losses(const Network& net, const std::vector<bool>& online_lines, const OperatingPoint& point);

/// Column of each bus angle / voltage in an unknown vector, -1 when held fixed.
struct VariableMap {
    std::vector<int> theta_col;
    std::vector<int> v_col;
};
/// Row of each bus P / Q balance equation in a residual vector, -1 when unused.
struct EquationMap {
    std::vector<int> p_row;
    std::vector<int> q_row;
};

/// Appends d(mismatch)/d(theta, v) for the mapped rows and columns, including the
/// shunt term 2 b v on Q rows. Generator injections are left to the caller.
void append_mismatch_jacobian(const Network& net, const std::vector<bool>& online_lines,
                              const OperatingPoint& point, const VariableMap& vars, const EquationMap& eqs,
                              std::vector<Eigen::Triplet<double>>& out);

/// Dense d(dP, dQ)/d(theta, v) over all buses; rows [dP; dQ], columns [theta; v].
Eigen::MatrixXd full_mismatch_jacobian(const Network& net, const OnlineSets& online, const OperatingPoint& point);

enum class BusType { Slack, PV, PQ };

struct BusTypeSpec {
    std::vector<BusType> type;     // per bus
    std::vector<double> v_target;  // per bus; read for Slack and PV
};

/// Slack at the reference bus, PV at buses hosting an online generator (target = point.v), PQ elsewhere.
BusTypeSpec default_bus_types(const Network& net, const OnlineSets& online, const OperatingPoint& point);

/// Empty when the spec is usable: exactly one slack, every PV bus hosts an online generator.
std::vector<std::string> check_bus_types(const Network& net, const OnlineSets& online, const BusTypeSpec& types);

struct PowerFlowOptions {
    double tol = 1e-8;  // p.u., max-norm over non-slack equations
    int max_iter = 30;
    int max_halvings = 10;
    double v_floor = 0.1;  // iterates are clamped to v >= v_floor
};

struct PowerFlowResult {
    OperatingPoint point;
    bool converged = false;
    int iterations = 0;
    double max_mismatch = 0.0;  // over non-slack equations
};

/// Newton-Raphson with step-halving on the mismatch 2-norm. Unknowns are angles at
/// non-slack buses and voltages at PQ buses; the slack angle stays at its initial
/// value. On return, PV reactive output and slack active/reactive output are
/// back-computed from the residual mismatch and split across the bus's online
/// generators in proportion to their ranges. A singular Jacobian or an exhausted
/// iteration budget returns converged == false with the best iterate seen.
PowerFlowResult newton_powerflow(const Network& net, const OnlineSets& online, const BusTypeSpec& types,
                                 const OperatingPoint& init, const PowerFlowOptions& options = {});

/// Split `total` across generators with bounds [lo_i, hi_i] in proportion to
/// hi_i - lo_i, offset from sum(lo); equal shares when every range is zero.
std::vector<double> split_in_proportion(double total, const std::vector<double>& lo, const std::vector<double>& hi);

/// Flat start: v = 1, theta = 0, b = 0, p = q = 0 dimensioned to the network.
OperatingPoint flat_point(const Network& net);

}  // namespace scopf::acpf
