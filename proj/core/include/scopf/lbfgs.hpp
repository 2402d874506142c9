#pragma once

// Projected limited-memory quasi-Newton minimizer for box-constrained problems.
// Directions come from the two-loop recursion restricted to the free variables
// (those not held at a bound by the gradient); steps are projected back onto the
// box and accepted by an Armijo test along the projection arc.

#include <chrono>
#include <functional>
#include <optional>

#include <Eigen/Dense>

namespace scopf {

struct Box {
    Eigen::VectorXd lower, upper;
};

Eigen::VectorXd project(const Eigen::VectorXd& x, const Box& box);

/// Objective value; writes the gradient into the second argument.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LbfgsOptions {
    int memory = 10;
    int max_iter = 1000;
    double pg_tol = 1e-9;     // max-norm of the projected gradient step
    double f_rel_tol = 1e-13; // relative decrease counted as a stall
    int stall_iters = 5;      // consecutive stalled iterations before stopping
    int max_backtracks = 40;
    double armijo = 1e-4;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

enum class LbfgsStop { Converged, Stalled, MaxIter, Deadline, LineSearch };

struct LbfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    LbfgsStop stop = LbfgsStop::MaxIter;
};

LbfgsResult minimize_box(const Objective& fg, const Eigen::VectorXd& x0, const Box& box,
                         const LbfgsOptions& options = {});

}  // namespace scopf
