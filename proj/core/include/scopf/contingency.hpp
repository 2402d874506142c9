#pragma once

// Post-contingency response for a fixed base state. Online generators follow
// two automatic controllers:
//   * voltage regulation: hold v at the base-case value until the bus's reactive
//     capability saturates, after which q sits at the limit and v may drift
//     (down when q is at its maximum, up when at its minimum);
//   * droop: p = clamp(p0 + A * delta, p_min, p_max) with one frequency
//     deviation delta shared by the whole system.
// Any imbalance that the controllers cannot cover ends up in the balance slacks.

#include <string>
#include <vector>

#include "scopf/network.hpp"

namespace scopf {

struct ContingencyConfig {
    double tol = 1e-10;  // Newton mismatch tolerance, p.u.
    int max_iter = 40;
    int max_halvings = 10;
    double comp_tol = 1e-6;
    int max_switch_rounds = 15;
    double delta_guard = 10.0;  // |delta| beyond this falls back
    double v_floor = 0.1;
    /// 0 solves the exact complementarity system by PV/PQ switching. A positive
    /// value replaces every clamp by a C1 soft clamp of this half-width and skips
    /// switching, giving a response that is smooth in the base state.
    double smoothing = 0.0;
    /// Half-width of the clamp derivative used inside the Newton linearization of the exact solve.
    double jacobian_smoothing = 1e-7;
};

struct ContingencyState {
    OperatingPoint point;
    double delta = 0.0;
    std::vector<bool> regulated;                 // per bus: hosts an online generator
    std::vector<double> nu_plus, nu_minus;       // per bus, zero where unregulated
    std::vector<double> rho_plus, rho_minus;     // per generator, zero where offline
    std::vector<double> slack_p, slack_q;        // per bus, equal to the bus mismatch
    std::vector<double> sigma_o, sigma_d;        // per line overload beyond the emergency rating
    bool converged = false;
    bool degraded = false;  // some imbalance could not be covered
    bool fallback = false;  // the Newton path failed and the fallback state was returned
    int switch_rounds = 0;
    std::string diagnostic;
};

struct ComplementarityReport {
    double max = 0.0;
    double voltage_upper = 0.0;  // nu- against Qmax - q
    double voltage_lower = 0.0;  // nu+ against q - Qmin
    double droop_upper = 0.0;    // rho- against Pmax - p
    double droop_lower = 0.0;    // rho+ against p - Pmin
    int worst_generator = -1;    // generator id, -1 when every pair is exact
};

/// clamp(p_g0 + droop * delta, p_min, p_max).
double droop_response(double p_g0, double droop, double delta, double p_min, double p_max);

ContingencyState solve_contingency(const Network& net, const BaseState& base, const Contingency& k,
                                   const ContingencyConfig& cfg = {});

/// Same response for an arbitrary set of online elements (all online gives the
/// base case re-solved around `base` as setpoints).
ContingencyState solve_response(const Network& net, const BaseState& base, const OnlineSets& online,
                                const ContingencyConfig& cfg = {});

/// Residual min(max(a,0), max(b,0)) of every complementarity pair, using the
/// deviation variables stored in `state`.
ComplementarityReport complementarity_residual(const Network& net, const BaseState& base, const Contingency& k,
                                               const ContingencyState& state);

/// Rebuilds regulated/nu/rho from the primal values (v, p, delta) using the
/// least-violating split nu+ = max(v - v0, 0), nu- = max(v0 - v, 0) and likewise
/// for rho. Slack fields are recomputed from the balance and thermal equations.
void derive_dependent_variables(const Network& net, const BaseState& base, const Contingency& k,
                                ContingencyState& state);

/// Exact imbalance plus overload penalty of the state's slacks, $/h.
double contingency_penalty(const Network& net, const ContingencyState& state);

}  // namespace scopf
