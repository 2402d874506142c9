#include "scopf/contingency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "scopf/acpf.hpp"
#include "scopf/costs.hpp"

namespace scopf {

double droop_response(double p_g0, double droop, double delta, double p_min, double p_max) {
    return std::clamp(p_g0 + droop * delta, p_min, p_max);
}

namespace {

enum class RegMode { Regulating, AtUpper, AtLower };

// Unknowns beyond (theta, v): aggregate reactive output of each regulated bus,
// the shared frequency deviation, and an explicit P slack at the anchor of every
// live island other than the main one.
struct Iterate {
    OperatingPoint x;
    std::vector<double> q_bus;
    double delta = 0.0;
    std::vector<double> island_slack;
};

class ResponseSystem {
public:
    ResponseSystem(const Network& net, const BaseState& base, OnlineSets online, const ContingencyConfig& cfg)
        : net_(net), base_(base), cfg_(cfg), online_(std::move(online)) {
        const auto nb = net.bus_count();
        comp_ = connected_components(net, online_.lines);
        const std::size_t ncomp = nb == 0 ? 0 : *std::max_element(comp_.begin(), comp_.end()) + 1;

        regulated_.assign(nb, false);
        q_lo_.assign(nb, 0.0);
        q_hi_.assign(nb, 0.0);
        for (Index g = 0; g < net.generator_count(); ++g) {
            if (!online_.generators[g]) continue;
            const Index n = net.generator_bus(g);
            regulated_[n] = true;
            q_lo_[n] += net.generators()[g].q_min;
            q_hi_[n] += net.generators()[g].q_max;
        }
        mode_.assign(nb, RegMode::Regulating);

        std::vector<bool> comp_live(ncomp, false);
        for (Index n = 0; n < nb; ++n)
            if (regulated_[n]) comp_live[comp_[n]] = true;
        live_.assign(nb, false);
        for (Index n = 0; n < nb; ++n) live_[n] = comp_live[comp_[n]];

        // anchors: the reference bus in its island, the lowest bus index elsewhere
        anchor_.assign(ncomp, kNoIndex);
        const Index ref = net.ref_bus();
        if (ref != kNoIndex) anchor_[comp_[ref]] = ref;
        for (Index n = 0; n < nb; ++n)
            if (anchor_[comp_[n]] == kNoIndex) anchor_[comp_[n]] = n;
        if (ref != kNoIndex && comp_live[comp_[ref]]) {
            main_ = comp_[ref];
        } else {
            for (std::size_t c = 0; c < ncomp; ++c)
                if (comp_live[c]) {
                    main_ = c;
                    break;
                }
        }
        dead_islands_ = std::count(comp_live.begin(), comp_live.end(), false);

        double total_droop = 0.0;
        bool any_responsive = false;
        for (Index g = 0; g < net.generator_count(); ++g) {
            if (!online_.generators[g]) continue;
            const auto& gen = net.generators()[g];
            if (gen.droop <= 0.0) continue;
            const double lo = (gen.p_min - base.p[g]) / gen.droop;
            const double hi = (gen.p_max - base.p[g]) / gen.droop;
            delta_lo_ = any_responsive ? std::min(delta_lo_, lo) : lo;
            delta_hi_ = any_responsive ? std::max(delta_hi_, hi) : hi;
            any_responsive = true;
            total_droop += gen.droop;
        }
        delta_lo_ = std::min(delta_lo_, 0.0);
        delta_hi_ = std::max(delta_hi_, 0.0);
        kappa_ = std::max(1.0, total_droop);
        build_layout(ncomp);
    }

    const OnlineSets& online() const { return online_; }
    bool has_generation() const { return main_ != kNoIndex; }
    std::size_t dead_islands() const { return dead_islands_; }

    Iterate initial() const {
        Iterate it;
        it.x = base_;
        for (Index g = 0; g < net_.generator_count(); ++g)
            if (!online_.generators[g]) it.x.p[g] = it.x.q[g] = 0.0;
        it.q_bus.assign(net_.bus_count(), 0.0);
        for (Index g = 0; g < net_.generator_count(); ++g)
            if (online_.generators[g]) it.q_bus[net_.generator_bus(g)] += base_.q[g];
        for (Index n = 0; n < net_.bus_count(); ++n)
            if (regulated_[n]) it.q_bus[n] = std::clamp(it.q_bus[n], q_lo_[n], q_hi_[n]);
        it.delta = 0.0;
        it.island_slack.assign(anchor_.size(), 0.0);
        return it;
    }

    bool smooth() const { return cfg_.smoothing > 0.0; }

    double effective_delta(double delta) const { return eff_delta(delta).value; }

    // Droop output of online generator g.
    ValueAndSlope generator_output(Index g, double delta) const {
        const auto& gen = net_.generators()[g];
        const auto d = eff_delta(delta);
        const double target = base_.p[g] + gen.droop * d.value;
        if (smooth()) {
            const auto c = soft_clamp(target, gen.p_min, gen.p_max, cfg_.smoothing);
            return {c.value, c.slope * gen.droop * d.slope};
        }
        const auto c = soft_clamp(target, gen.p_min, gen.p_max, cfg_.jacobian_smoothing);
        return {std::clamp(target, gen.p_min, gen.p_max), c.slope * gen.droop * d.slope};
    }

    ValueAndSlope overflow(double delta) const {
        const auto d = eff_delta(delta);
        return {kappa_ * (delta - d.value), kappa_ * (1.0 - d.slope)};
    }

    // Apply droop outputs and bus reactive outputs to the point.
    OperatingPoint materialize(const Iterate& it) const {
        OperatingPoint x = it.x;
        for (Index g = 0; g < net_.generator_count(); ++g) {
            if (!online_.generators[g]) {
                x.p[g] = x.q[g] = 0.0;
                continue;
            }
            x.p[g] = generator_output(g, it.delta).value;
        }
        for (Index n = 0; n < net_.bus_count(); ++n) {
            if (!regulated_[n]) continue;
            std::vector<double> lo, hi;
            std::vector<Index> gens;
            for (Index g : net_.generators_at_bus()[n])
                if (online_.generators[g]) {
                    gens.push_back(g);
                    lo.push_back(net_.generators()[g].q_min);
                    hi.push_back(net_.generators()[g].q_max);
                }
            const auto q = acpf::split_in_proportion(std::clamp(it.q_bus[n], q_lo_[n], q_hi_[n]), lo, hi);
            for (std::size_t i = 0; i < gens.size(); ++i) x.q[gens[i]] = std::clamp(q[i], lo[i], hi[i]);
        }
        return x;
    }

    Eigen::VectorXd residual(const Iterate& it) const {
        OperatingPoint x = it.x;
        for (Index g = 0; g < net_.generator_count(); ++g) {
            x.p[g] = online_.generators[g] ? generator_output(g, it.delta).value : 0.0;
            x.q[g] = 0.0;
        }
        auto m = acpf::bus_mismatch(net_, online_, x);
        Eigen::VectorXd F(size_);
        for (Index n = 0; n < net_.bus_count(); ++n) {
            if (!live_[n]) continue;
            double dp = m.dp[n];
            if (n == anchor_[comp_[n]]) {
                if (comp_[n] == main_) dp += overflow(it.delta).value;
                else dp -= it.island_slack[comp_[n]];
            }
            F[p_row_[n]] = dp;
            F[q_row_[n]] = m.dq[n] + (regulated_[n] ? it.q_bus[n] : 0.0);
            if (regulated_[n]) F[reg_row_[n]] = regulator(it, n).value;
        }
        return F;
    }

    Eigen::SparseMatrix<double> jacobian(const Iterate& it) const {
        std::vector<Eigen::Triplet<double>> trips;
        acpf::append_mismatch_jacobian(net_, online_.lines, it.x, {theta_col_, v_col_}, {p_row_, q_row_}, trips);
        for (Index g = 0; g < net_.generator_count(); ++g) {
            if (!online_.generators[g]) continue;
            const Index n = net_.generator_bus(g);
            const double slope = generator_output(g, it.delta).slope;
            if (slope != 0.0) trips.emplace_back(p_row_[n], delta_col_, slope);
        }
        for (std::size_t c = 0; c < anchor_.size(); ++c) {
            if (!live_[anchor_[c]]) continue;
            if (c == main_) trips.emplace_back(p_row_[anchor_[c]], delta_col_, overflow(it.delta).slope);
            else trips.emplace_back(p_row_[anchor_[c]], sigma_col_[c], -1.0);
        }
        for (Index n = 0; n < net_.bus_count(); ++n) {
            if (!live_[n] || !regulated_[n]) continue;
            trips.emplace_back(q_row_[n], q_col_[n], 1.0);
            const auto r = regulator(it, n);
            if (r.d_q != 0.0) trips.emplace_back(reg_row_[n], q_col_[n], r.d_q);
            if (r.d_v != 0.0) trips.emplace_back(reg_row_[n], v_col_[n], r.d_v);
        }
        Eigen::SparseMatrix<double> J(size_, size_);
        J.setFromTriplets(trips.begin(), trips.end());
        J.makeCompressed();
        return J;
    }

    void apply_step(Iterate& it, const Eigen::VectorXd& step, double alpha) const {
        for (Index n = 0; n < net_.bus_count(); ++n) {
            if (theta_col_[n] >= 0) it.x.theta[n] += alpha * step[theta_col_[n]];
            if (v_col_[n] >= 0) it.x.v[n] = std::max(cfg_.v_floor, it.x.v[n] + alpha * step[v_col_[n]]);
            if (q_col_[n] >= 0) it.q_bus[n] += alpha * step[q_col_[n]];
        }
        if (delta_col_ >= 0) it.delta += alpha * step[delta_col_];
        for (std::size_t c = 0; c < sigma_col_.size(); ++c)
            if (sigma_col_[c] >= 0) it.island_slack[c] += alpha * step[sigma_col_[c]];
    }

    int size() const { return size_; }

    // Complementarity switching; returns the number of buses that changed mode.
    int switch_modes(const Iterate& it, double eps) {
        int changes = 0;
        for (Index n = 0; n < net_.bus_count(); ++n) {
            if (!live_[n] || !regulated_[n]) continue;
            const double dv = it.x.v[n] - base_.v[n];
            RegMode next = mode_[n];
            switch (mode_[n]) {
                case RegMode::Regulating:
                    if (it.q_bus[n] > q_hi_[n] + eps) next = RegMode::AtUpper;
                    else if (it.q_bus[n] < q_lo_[n] - eps) next = RegMode::AtLower;
                    break;
                case RegMode::AtUpper:
                    if (dv > eps) next = RegMode::Regulating;
                    break;
                case RegMode::AtLower:
                    if (dv < -eps) next = RegMode::Regulating;
                    break;
            }
            if (next != mode_[n]) {
                mode_[n] = next;
                ++changes;
            }
        }
        return changes;
    }

    // Fix q or v according to the current modes so the next Newton starts consistent.
    void seed_modes(Iterate& it) const {
        for (Index n = 0; n < net_.bus_count(); ++n) {
            if (!live_[n] || !regulated_[n] || smooth()) continue;
            if (mode_[n] == RegMode::Regulating) it.x.v[n] = base_.v[n];
            else it.q_bus[n] = mode_[n] == RegMode::AtUpper ? q_hi_[n] : q_lo_[n];
        }
    }

    const std::vector<bool>& live() const { return live_; }
    const std::vector<bool>& regulated() const { return regulated_; }
    double delta_lo() const { return delta_lo_; }
    double delta_hi() const { return delta_hi_; }
    const std::vector<double>& q_lo() const { return q_lo_; }
    const std::vector<double>& q_hi() const { return q_hi_; }

private:
    struct RegulatorRow {
        double value, d_q, d_v;
    };

    ValueAndSlope eff_delta(double delta) const {
        if (smooth()) return soft_clamp(delta, delta_lo_, delta_hi_, cfg_.smoothing);
        const auto c = soft_clamp(delta, delta_lo_, delta_hi_, cfg_.jacobian_smoothing);
        return {std::clamp(delta, delta_lo_, delta_hi_), c.slope};
    }

    RegulatorRow regulator(const Iterate& it, Index n) const {
        const double dv = it.x.v[n] - base_.v[n];
        if (smooth()) {
            // q = clamp(q - dv, qmin, qmax) holds exactly on the complementarity set
            const auto c = soft_clamp(it.q_bus[n] - dv, q_lo_[n], q_hi_[n], cfg_.smoothing);
            return {it.q_bus[n] - c.value, 1.0 - c.slope, c.slope};
        }
        switch (mode_[n]) {
            case RegMode::Regulating: return {dv, 0.0, 1.0};
            case RegMode::AtUpper: return {it.q_bus[n] - q_hi_[n], 1.0, 0.0};
            case RegMode::AtLower: return {it.q_bus[n] - q_lo_[n], 1.0, 0.0};
        }
        return {0.0, 0.0, 0.0};
    }

    void build_layout(std::size_t ncomp) {
        const auto nb = net_.bus_count();
        theta_col_.assign(nb, -1);
        v_col_.assign(nb, -1);
        q_col_.assign(nb, -1);
        p_row_.assign(nb, -1);
        q_row_.assign(nb, -1);
        reg_row_.assign(nb, -1);
        sigma_col_.assign(ncomp, -1);
        int col = 0, row = 0;
        for (Index n = 0; n < nb; ++n) {
            if (!live_[n]) continue;
            if (n != anchor_[comp_[n]]) theta_col_[n] = col++;
            v_col_[n] = col++;
            if (regulated_[n]) q_col_[n] = col++;
            p_row_[n] = row++;
            q_row_[n] = row++;
            if (regulated_[n]) reg_row_[n] = row++;
        }
        if (main_ != kNoIndex) delta_col_ = col++;
        for (std::size_t c = 0; c < ncomp; ++c)
            if (c != main_ && live_[anchor_[c]]) sigma_col_[c] = col++;
        size_ = col;
    }

    const Network& net_;
    const BaseState& base_;
    const ContingencyConfig& cfg_;
    OnlineSets online_;
    std::vector<std::size_t> comp_;
    std::vector<bool> live_, regulated_;
    std::vector<double> q_lo_, q_hi_;
    std::vector<RegMode> mode_;
    std::vector<Index> anchor_;
    std::size_t main_ = kNoIndex;
    std::size_t dead_islands_ = 0;
    double delta_lo_ = 0.0, delta_hi_ = 0.0, kappa_ = 1.0;
    std::vector<int> theta_col_, v_col_, q_col_, p_row_, q_row_, reg_row_, sigma_col_;
    int delta_col_ = -1;
    int size_ = 0;
};

double max_abs(const Eigen::VectorXd& F) { return F.size() == 0 ? 0.0 : F.cwiseAbs().maxCoeff(); }

bool newton(const ResponseSystem& sys, Iterate& it, const ContingencyConfig& cfg) {
    Eigen::VectorXd F = sys.residual(it);
    if (!F.allFinite()) return false;
    double norm = F.norm();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if (max_abs(F) <= cfg.tol) return true;
        const auto J = sys.jacobian(it);
        lu.compute(J);
        if (lu.info() != Eigen::Success) return false;
        const Eigen::VectorXd step = lu.solve(-F);
        if (!step.allFinite()) return false;
        double alpha = 1.0;
        Iterate trial;
        Eigen::VectorXd F_trial;
        bool accepted = false;
        for (int h = 0; h <= cfg.max_halvings; ++h, alpha *= 0.5) {
            trial = it;
            sys.apply_step(trial, step, alpha);
            F_trial = sys.residual(trial);
            if (F_trial.allFinite() && F_trial.norm() < norm) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // plain Newton steps can still stall at the tolerance floor
            if (F_trial.allFinite() && max_abs(F_trial) <= cfg.tol) {
                it = std::move(trial);
                return true;
            }
            return false;
        }
        it = std::move(trial);
        F = std::move(F_trial);
        norm = F.norm();
    }
    return max_abs(F) <= cfg.tol;
}

void fill_line_slacks(const Network& net, const OnlineSets& online, ContingencyState& s) {
    s.sigma_o.assign(net.line_count(), 0.0);
    s.sigma_d.assign(net.line_count(), 0.0);
    const auto& x = s.point;
    for (Index e = 0; e < net.line_count(); ++e) {
        if (!online.lines[e]) continue;
        const Index o = net.line_origin(e), d = net.line_destination(e);
        const auto& line = net.lines()[e];
        const auto a = acpf::apparent_flows(acpf::branch_flows(line, x.v[o], x.theta[o], x.v[d], x.theta[d]));
        s.sigma_o[e] = std::max(0.0, a.s_o - line.rating_e * x.v[o]);
        s.sigma_d[e] = std::max(0.0, a.s_d - line.rating_e * x.v[d]);
    }
}

void fill_slacks(const Network& net, const OnlineSets& online, ContingencyState& s) {
    const auto m = acpf::bus_mismatch(net, online, s.point);
    s.slack_p = m.dp;
    s.slack_q = m.dq;
    fill_line_slacks(net, online, s);
}

void fill_deviations(const Network& net, const BaseState& base, const OnlineSets& online, ContingencyState& s) {
    const auto nb = net.bus_count(), ng = net.generator_count();
    s.regulated.assign(nb, false);
    for (Index g = 0; g < ng; ++g)
        if (online.generators[g]) s.regulated[net.generator_bus(g)] = true;
    s.nu_plus.assign(nb, 0.0);
    s.nu_minus.assign(nb, 0.0);
    for (Index n = 0; n < nb; ++n) {
        if (!s.regulated[n]) continue;
        const double dv = s.point.v[n] - base.v[n];
        s.nu_plus[n] = std::max(dv, 0.0);
        s.nu_minus[n] = std::max(-dv, 0.0);
    }
    s.rho_plus.assign(ng, 0.0);
    s.rho_minus.assign(ng, 0.0);
    for (Index g = 0; g < ng; ++g) {
        if (!online.generators[g]) continue;
        const double dev = s.point.p[g] - (base.p[g] + net.generators()[g].droop * s.delta);
        s.rho_plus[g] = std::max(dev, 0.0);
        s.rho_minus[g] = std::max(-dev, 0.0);
    }
}

void project_voltages(const Network& net, OperatingPoint& x) {
    for (Index n = 0; n < net.bus_count(); ++n)
        x.v[n] = std::clamp(x.v[n], net.buses()[n].vmin_e, net.buses()[n].vmax_e);
}

// Base voltages and angles, droop outputs at the delta that zeroes the total
// active mismatch (bisection), reactive outputs chosen to close each regulated
// bus's Q balance as far as its limits allow. Residuals go to the slacks.
ContingencyState fallback_state(const Network& net, const BaseState& base, const ResponseSystem& sys,
                                const std::string& why) {
    const auto& online = sys.online();
    ContingencyState s;
    s.point = base;
    for (Index g = 0; g < net.generator_count(); ++g)
        if (!online.generators[g]) s.point.p[g] = s.point.q[g] = 0.0;

    const double losses = acpf::total_losses(net, online.lines, base);
    double load = 0.0;
    for (const auto& b : net.buses()) load += b.p_load;
    auto surplus = [&](double delta) {
        double gen = 0.0;
        for (Index g = 0; g < net.generator_count(); ++g) {
            if (!online.generators[g]) continue;
            const auto& G = net.generators()[g];
            gen += droop_response(base.p[g], G.droop, delta, G.p_min, G.p_max);
        }
        return gen - load - losses;
    };
    double lo = sys.delta_lo(), hi = sys.delta_hi(), delta = 0.0;
    if (surplus(lo) >= 0.0) delta = lo;
    else if (surplus(hi) <= 0.0) delta = hi;
    else {
        for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
            const double mid = 0.5 * (lo + hi);
            (surplus(mid) < 0.0 ? lo : hi) = mid;
        }
        delta = 0.5 * (lo + hi);
    }
    s.delta = delta;
    for (Index g = 0; g < net.generator_count(); ++g) {
        if (!online.generators[g]) continue;
        const auto& G = net.generators()[g];
        s.point.p[g] = droop_response(base.p[g], G.droop, delta, G.p_min, G.p_max);
        s.point.q[g] = 0.0;
    }
    const auto m = acpf::bus_mismatch(net, online, s.point);
    for (Index n = 0; n < net.bus_count(); ++n) {
        if (!sys.regulated()[n]) continue;
        std::vector<Index> gens;
        std::vector<double> qlo, qhi;
        for (Index g : net.generators_at_bus()[n])
            if (online.generators[g]) {
                gens.push_back(g);
                qlo.push_back(net.generators()[g].q_min);
                qhi.push_back(net.generators()[g].q_max);
            }
        const double need = std::clamp(-m.dq[n], sys.q_lo()[n], sys.q_hi()[n]);
        const auto q = acpf::split_in_proportion(need, qlo, qhi);
        for (std::size_t i = 0; i < gens.size(); ++i) s.point.q[gens[i]] = std::clamp(q[i], qlo[i], qhi[i]);
    }
    project_voltages(net, s.point);
    fill_slacks(net, online, s);
    fill_deviations(net, base, online, s);
    s.converged = false;
    s.fallback = true;
    s.degraded = true;
    s.diagnostic = why;
    return s;
}

bool has_uncovered_imbalance(const ContingencyState& s, double tol) {
    for (std::size_t n = 0; n < s.slack_p.size(); ++n)
        if (std::abs(s.slack_p[n]) > tol || std::abs(s.slack_q[n]) > tol) return true;
    return false;
}

}  // namespace

ContingencyState solve_contingency(const Network& net, const BaseState& base, const Contingency& k,
                                   const ContingencyConfig& cfg) {
    return solve_response(net, base, post_contingency_sets(net, k), cfg);
}

ContingencyState solve_response(const Network& net, const BaseState& base, const OnlineSets& online_sets,
                                const ContingencyConfig& cfg) {
    ResponseSystem sys(net, base, online_sets, cfg);
    const auto& online = sys.online();

    if (!sys.has_generation()) {
        ContingencyState s;
        s.point = base;
        for (Index g = 0; g < net.generator_count(); ++g) s.point.p[g] = s.point.q[g] = 0.0;
        project_voltages(net, s.point);
        fill_slacks(net, online, s);
        fill_deviations(net, base, online, s);
        s.converged = true;
        s.degraded = true;
        s.diagnostic = "no online generation";
        return s;
    }

    Iterate it = sys.initial();
    int rounds = 0;
    bool settled = false;
    const double switch_eps = std::min(1e-9, 0.1 * cfg.comp_tol);
    for (;;) {
        sys.seed_modes(it);
        if (!newton(sys, it, cfg)) return fallback_state(net, base, sys, "power flow did not converge");
        if (std::abs(sys.effective_delta(it.delta)) > cfg.delta_guard)
            return fallback_state(net, base, sys, "frequency deviation beyond guard");
        if (sys.smooth()) {
            settled = true;
            break;
        }
        if (sys.switch_modes(it, switch_eps) == 0) {
            settled = true;
            break;
        }
        if (++rounds >= cfg.max_switch_rounds) break;
    }
    if (!settled) return fallback_state(net, base, sys, "complementarity switching did not settle");

    ContingencyState s;
    s.point = sys.materialize(it);
    s.delta = sys.effective_delta(it.delta);
    s.switch_rounds = rounds;
    for (Index n = 0; n < net.bus_count(); ++n)
        if (!sys.live()[n]) {
            s.point.v[n] = base.v[n];
            s.point.theta[n] = base.theta[n];
        }
    if (net.ref_bus() != kNoIndex) s.point.theta[net.ref_bus()] = 0.0;
    project_voltages(net, s.point);
    fill_slacks(net, online, s);
    fill_deviations(net, base, online, s);
    s.converged = true;
    s.degraded = sys.dead_islands() > 0 || has_uncovered_imbalance(s, 1e3 * cfg.tol);
    if (s.degraded) s.diagnostic = sys.dead_islands() > 0 ? "islanded buses without generation" : "uncovered imbalance";
    return s;
}

ComplementarityReport complementarity_residual(const Network& net, const BaseState&, const Contingency& k,
                                               const ContingencyState& state) {
    const auto online = post_contingency_sets(net, k);
    ComplementarityReport r;
    auto pair = [](double a, double b) { return std::min(std::max(a, 0.0), std::max(b, 0.0)); };
    for (Index g = 0; g < net.generator_count(); ++g) {
        if (!online.generators[g]) continue;
        const auto& G = net.generators()[g];
        const Index n = net.generator_bus(g);
        const double vu = pair(state.nu_minus[n], G.q_max - state.point.q[g]);
        const double vl = pair(state.nu_plus[n], state.point.q[g] - G.q_min);
        const double du = pair(state.rho_minus[g], G.p_max - state.point.p[g]);
        const double dl = pair(state.rho_plus[g], state.point.p[g] - G.p_min);
        r.voltage_upper = std::max(r.voltage_upper, vu);
        r.voltage_lower = std::max(r.voltage_lower, vl);
        r.droop_upper = std::max(r.droop_upper, du);
        r.droop_lower = std::max(r.droop_lower, dl);
        const double worst = std::max({vu, vl, du, dl});
        if (worst > r.max) {
            r.max = worst;
            r.worst_generator = G.id;
        }
    }
    return r;
}

void derive_dependent_variables(const Network& net, const BaseState& base, const Contingency& k,
                                ContingencyState& state) {
    const auto online = post_contingency_sets(net, k);
    fill_deviations(net, base, online, state);
    fill_slacks(net, online, state);
}

double contingency_penalty(const Network& net, const ContingencyState& state) {
    const auto& pen = net.penalty();
    double total = 0.0;
    for (std::size_t n = 0; n < state.slack_p.size(); ++n)
        total += penalty_value(pen.imbalance, state.slack_p[n]) + penalty_value(pen.imbalance, state.slack_q[n]);
    for (std::size_t e = 0; e < state.sigma_o.size(); ++e)
        total += overload_penalty(pen.overload, state.sigma_o[e], 0.0).value +
                 overload_penalty(pen.overload, state.sigma_d[e], 0.0).value;
    return total;
}

}  // namespace scopf
