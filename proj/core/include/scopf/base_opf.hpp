#pragma once

// Code1: the base-case operating point. The balance and thermal slacks are
// not optimization variables; they are computed from (p, q, v, theta, b) and
// priced by the penalty tiers, which leaves only box constraints. The reduced
// problem is minimized by projected L-BFGS on a sequence of smoothed
// objectives, then polished by a power flow around the optimized setpoints.

#include <chrono>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "scopf/contingency.hpp"
#include "scopf/lbfgs.hpp"
#include "scopf/network.hpp"

namespace scopf {

struct SolveConfig {
    double time_budget = 600.0;  // seconds; 600 real-time, 2700 offline
    double smoothing_start = 1e-2;
    double smoothing_floor = 1e-6;
    int lbfgs_memory = 10;
    int lbfgs_max_iter = 3000;  // per smoothing stage
    double lbfgs_pg_tol = 1e-10;
    std::size_t screen_top = 5;  // contingencies added to the objective per outer round
    int max_outer_rounds = 6;
    double screen_threshold = 1e-6;     // $/h; screened penalties at or below are benign
    double contingency_smoothing = 1e-3;  // soft-clamp width of the nested response
    double hedge_smoothing_start = 1e-2;  // first penalty smoothing of the extended objective
    int hedge_max_iter = 60;              // per smoothing stage of the extended objective
    double fd_step = 1e-6;              // central differences over coupling variables
    unsigned workers = 1;
    ContingencyConfig contingency;
    std::optional<BaseState> warm_start;
    /// Absolute deadline; overrides time_budget when set.
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Packing of the free base-case variables x = (p, q, v, theta without the reference bus, b).
class BaseVariables {
public:
    explicit BaseVariables(const Network& net);

    std::size_t size() const noexcept { return size_; }
    Eigen::VectorXd pack(const BaseState& state) const;
    BaseState unpack(const Eigen::VectorXd& x) const;
    const Box& bounds() const noexcept { return box_; }

    Eigen::Index p(Index g) const { return static_cast<Eigen::Index>(g); }
    Eigen::Index q(Index g) const { return static_cast<Eigen::Index>(ng_ + g); }
    Eigen::Index v(Index n) const { return static_cast<Eigen::Index>(2 * ng_ + n); }
    /// -1 for the reference bus.
    Eigen::Index theta(Index n) const { return theta_col_[n]; }
    Eigen::Index b(Index n) const { return static_cast<Eigen::Index>(2 * ng_ + nb_ + (nb_ - has_ref_) + n); }

private:
    const Network* net_;
    std::size_t ng_, nb_, has_ref_, size_;
    std::vector<Eigen::Index> theta_col_;
    Box box_;
};

struct ObjectiveValue {
    double value = 0.0;
    Eigen::VectorXd gradient;  // in BaseVariables order
};

/// Generation cost plus base-case imbalance and overload penalties; mu == 0 is
/// the exact piecewise-linear objective, mu > 0 smooths every kink.
ObjectiveValue base_objective(const Network& net, const BaseState& state, double mu = 0.0);

struct BaseSolveResult {
    BaseState state;
    double objective = 0.0;  // exact base objective
    int stages = 0;
    int iterations = 0;
    bool polished = false;
    bool timed_out = false;
};

/// Box-feasible base state minimizing the penalized base objective; ignores contingencies.
BaseSolveResult solve_base(const Network& net, const SolveConfig& cfg = {});

struct ScreenEntry {
    std::size_t contingency = 0;  // position in net.contingencies()
    double penalty = 0.0;         // exact post-contingency penalty, $/h
    bool fallback = false;
};

/// Every contingency solved at `base`, ranked by penalty descending, ties in instance order.
std::vector<ScreenEntry> screen_contingencies(const Network& net, const BaseState& base, const SolveConfig& cfg = {});

struct ScSolveResult {
    BaseState state;
    double objective = 0.0;      // base objective + average exact contingency penalty
    double base_objective = 0.0;
    std::vector<double> trace;   // accepted full objective after each outer round
    std::vector<std::size_t> included;  // contingencies folded into the objective
    int rounds = 0;
    int hedge_evaluations = 0;  // extended-objective evaluations over all rounds
    bool fallback = false;       // a stage failed and the last valid state was kept
    bool timed_out = false;
};

/// Base state hedged against contingencies by iterative incorporation of the
/// worst screened offenders into the objective.
ScSolveResult solve_sc(const Network& net, const SolveConfig& cfg = {});

/// Average exact post-contingency penalty over all contingencies at `base` (0 when there are none).
double average_contingency_penalty(const Network& net, const BaseState& base, const SolveConfig& cfg = {});

/// Projected do-nothing point: the instance's prior point if present, otherwise
/// v = 1, theta = 0, p and q at mid-bounds, b = 0, each projected onto its box.
BaseState projected_reference_point(const Network& net);

}  // namespace scopf
