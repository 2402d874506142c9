#include "scopf/costs.hpp"

#include <algorithm>
#include <cmath>

#include "scopf/errors.hpp"

namespace scopf {

ValueAndSlope smooth_hinge(double t, double mu) {
    if (mu <= 0.0) return t > 0.0 ? ValueAndSlope{t, 1.0} : ValueAndSlope{0.0, 0.0};
    if (t <= -mu) return {0.0, 0.0};
    if (t >= mu) return {t, 1.0};
    const double u = t + mu;
    return {u * u / (4.0 * mu), u / (2.0 * mu)};
}

ValueAndSlope soft_clamp(double x, double lo, double hi, double mu) {
    // lo + hinge(x - lo) - hinge(x - hi); the blends must not overlap
    const double width = std::max(0.0, std::min(mu, 0.5 * (hi - lo)));
    const auto a = smooth_hinge(x - lo, width);
    const auto b = smooth_hinge(x - hi, width);
    return {lo + a.value - b.value, a.slope - b.slope};
}

CostFunction::CostFunction(std::vector<CostBreakpoint> breakpoints) : breakpoints_(std::move(breakpoints)) {}

CostFunction CostFunction::linear(double marginal_cost, double p0) {
    return CostFunction({{p0, marginal_cost}});
}

bool CostFunction::is_convex() const {
    if (breakpoints_.empty()) return false;
    for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
        if (!(breakpoints_[i].p > breakpoints_[i - 1].p)) return false;
        if (breakpoints_[i].marginal_cost < breakpoints_[i - 1].marginal_cost) return false;
    }
    return std::all_of(breakpoints_.begin(), breakpoints_.end(),
                       [](const CostBreakpoint& b) { return std::isfinite(b.p) && std::isfinite(b.marginal_cost); });
}

ValueAndSlope CostFunction::evaluate(double p, double mu) const {
    if (breakpoints_.empty()) return {};
    const double p0 = breakpoints_.front().p;
    ValueAndSlope out{breakpoints_.front().marginal_cost * (p - p0), breakpoints_.front().marginal_cost};
    for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
        const double jump = breakpoints_[i].marginal_cost - breakpoints_[i - 1].marginal_cost;
        if (jump == 0.0) continue;
        const auto h = smooth_hinge(p - breakpoints_[i].p, mu);
        out.value += jump * h.value;
        out.slope += jump * h.slope;
    }
    return out;
}

bool PenaltyTiers::is_valid() const {
    if (tiers.empty()) return false;
    if (tiers.front().price < 0.0) return false;
    for (std::size_t i = 0; i < tiers.size(); ++i) {
        if (!(tiers[i].width > 0.0) || std::isnan(tiers[i].width)) return false;
        if (!std::isfinite(tiers[i].price)) return false;
        if (i > 0 && !(tiers[i].price > tiers[i - 1].price)) return false;
        if (i + 1 < tiers.size() && std::isinf(tiers[i].width)) return false;
    }
    return true;
}

std::vector<double> PenaltyTiers::kinks() const {
    std::vector<double> out;
    double start = 0.0;
    for (const auto& t : tiers) {
        out.push_back(start);
        start += t.width;
        if (std::isinf(start)) break;
    }
    return out;
}

PenaltySpec PenaltySpec::defaults() {
    return PenaltySpec{
        PenaltyTiers{{{0.02, 1e3}, {0.05, 5e3}, {kInfinity, 1e6}}},
        PenaltyTiers{{{0.05, 1e3}, {kInfinity, 5e5}}},
    };
}

namespace {

// sum_i (price_i - price_{i-1}) * hinge(x - start_i)
ValueAndSlope one_sided(const PenaltyTiers& tiers, double x, double mu) {
    ValueAndSlope out;
    double start = 0.0;
    double prev_price = 0.0;
    for (const auto& t : tiers.tiers) {
        const double jump = t.price - prev_price;
        const auto h = smooth_hinge(x - start, mu);
        out.value += jump * h.value;
        out.slope += jump * h.slope;
        prev_price = t.price;
        start += t.width;
        if (std::isinf(start)) break;
    }
    return out;
}

}  // namespace

double penalty_value(const PenaltyTiers& tiers, double sigma) {
    return one_sided(tiers, std::abs(sigma), 0.0).value;
}

ValueAndSlope smoothed_penalty(const PenaltyTiers& tiers, double sigma, double mu) {
    if (mu <= 0.0) {
        const auto r = one_sided(tiers, std::abs(sigma), 0.0);
        return {r.value, sigma >= 0.0 ? r.slope : -r.slope};
    }
    const auto up = one_sided(tiers, sigma, mu);
    const auto down = one_sided(tiers, -sigma, mu);
    return {up.value + down.value, up.slope - down.slope};
}

ValueAndSlope overload_penalty(const PenaltyTiers& tiers, double excess, double mu) {
    return one_sided(tiers, excess, mu);
}

}  // namespace scopf
