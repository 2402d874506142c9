#pragma once

// Convex piecewise-linear generator costs and soft-constraint penalty tiers,
// with C1 smoothed variants used by the gradient-based optimizer.
//
// Both are evaluated as a base line plus a sum of hinge terms
// jump_i * max(0, x - kink_i). The smoothed variant replaces each hinge by a
// quadratic blend on [kink - mu, kink + mu]; it is exact outside those bands and
// overestimates by at most jump_i * mu / 4 inside them.

#include <limits>
#include <vector>

namespace scopf {

struct ValueAndSlope {
    double value = 0.0;
    double slope = 0.0;
};

/// max(0, t) with its C1 quadratic blend of half-width mu (mu == 0 gives the exact hinge).
ValueAndSlope smooth_hinge(double t, double mu);

/// Clamp x into [lo, hi] with both corners blended over half-width mu.
ValueAndSlope soft_clamp(double x, double lo, double hi, double mu);

struct CostBreakpoint {
    double p;              // p.u.
    double marginal_cost;  // $/p.u.-h, applies from p up to the next breakpoint
};

/// Convex piecewise-linear generation cost. C(breakpoints.front().p) == 0; the
/// first segment's slope extends below the first breakpoint.
class CostFunction {
public:
    CostFunction() = default;
    explicit CostFunction(std::vector<CostBreakpoint> breakpoints);

    /// Linear cost with the given marginal price starting at p0.
    static CostFunction linear(double marginal_cost, double p0 = 0.0);

    const std::vector<CostBreakpoint>& breakpoints() const noexcept { return breakpoints_; }

    double operator()(double p) const { return evaluate(p, 0.0).value; }
    ValueAndSlope evaluate(double p, double mu) const;

    /// Nondecreasing marginal costs, strictly increasing breakpoints, nonempty.
    bool is_convex() const;

private:
    std::vector<CostBreakpoint> breakpoints_;
};

struct PenaltyTier {
    double width;  // p.u.; the last tier may be +infinity
    double price;  // $/p.u.-h
};

/// Ordered tiers; tier i covers |sigma| in [sum of widths before i, + width_i].
struct PenaltyTiers {
    std::vector<PenaltyTier> tiers;

    /// Positive widths, strictly increasing prices, nonnegative first price.
    bool is_valid() const;
    /// Start of every tier, i.e. the kinks of the penalty as a function of |sigma|.
    std::vector<double> kinks() const;
};

struct PenaltySpec {
    PenaltyTiers imbalance;  // applied to |sigma^P| and |sigma^Q| per bus
    PenaltyTiers overload;   // applied to sigma >= 0 per line terminal

    static PenaltySpec defaults();
};

/// Exact penalty of |sigma|.
double penalty_value(const PenaltyTiers& tiers, double sigma);

/// Penalty of |sigma| with every kink (including the one at zero) smoothed.
/// Symmetric in sigma, so the slope at zero is exactly zero.
ValueAndSlope smoothed_penalty(const PenaltyTiers& tiers, double sigma, double mu);

/// Penalty of max(0, excess); mu == 0 is exact. Used for thermal overloads where
/// excess = |s| - rating * v.
ValueAndSlope overload_penalty(const PenaltyTiers& tiers, double excess, double mu);

constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace scopf
