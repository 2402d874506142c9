#include "scopf/acpf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/SparseLU>

namespace scopf::acpf {

BranchFlow branch_flows(const Line& line, double v_o, double th_o, double v_d, double th_d) {
    const double delta = th_o - th_d;
    const double c = std::cos(delta), s = std::sin(delta);
    const double w = v_o * v_d;
    const double shunt = line.b + 0.5 * line.b_ch;
    BranchFlow f;
    f.p_o = line.g * v_o * v_o - line.g * c * w - line.b * s * w;
    f.q_o = -shunt * v_o * v_o + line.b * c * w - line.g * s * w;
    // destination side: same expressions with the angle difference reversed
    f.p_d = line.g * v_d * v_d - line.g * c * w + line.b * s * w;
    f.q_d = -shunt * v_d * v_d + line.b * c * w + line.g * s * w;
    return f;
}

BranchFlowJacobian branch_flow_jacobian(const Line& line, double v_o, double th_o, double v_d, double th_d) {
    const double delta = th_o - th_d;
    const double c = std::cos(delta), s = std::sin(delta);
    const double w = v_o * v_d;
    const double G = line.g, B = line.b;
    const double shunt = B + 0.5 * line.b_ch;
    BranchFlowJacobian J{};
    // columns: v_o, th_o, v_d, th_d
    J[0] = {2.0 * G * v_o - (G * c + B * s) * v_d, (G * s - B * c) * w, -(G * c + B * s) * v_o, -(G * s - B * c) * w};
    J[1] = {-2.0 * shunt * v_o + (B * c - G * s) * v_d, -(B * s + G * c) * w, (B * c - G * s) * v_o, (B * s + G * c) * w};
    J[2] = {(-G * c + B * s) * v_d, (G * s + B * c) * w, 2.0 * G * v_d + (-G * c + B * s) * v_o, -(G * s + B * c) * w};
    J[3] = {(B * c + G * s) * v_d, (-B * s + G * c) * w, -2.0 * shunt * v_d + (B * c + G * s) * v_o, (B * s - G * c) * w};
    return J;
}

ApparentFlow apparent_flows(const BranchFlow& f) { return {std::hypot(f.p_o, f.q_o), std::hypot(f.p_d, f.q_d)}; }

Mismatch bus_mismatch(const Network& net, const OnlineSets& online, const OperatingPoint& point) {
    const auto nb = net.bus_count();
    Mismatch m{std::vector<double>(nb), std::vector<double>(nb)};
    for (Index n = 0; n < nb; ++n) {
        const auto& bus = net.buses()[n];
        m.dp[n] = -bus.p_load;
        m.dq[n] = -bus.q_load + point.b[n] * point.v[n] * point.v[n];
    }
    for (Index g = 0; g < net.generator_count(); ++g) {
        if (!online.generators[g]) continue;
        const Index n = net.generator_bus(g);
        m.dp[n] += point.p[g];
        m.dq[n] += point.q[g];
    }
    for (Index e = 0; e < net.line_count(); ++e) {
        if (!online.lines[e]) continue;
        const Index o = net.line_origin(e), d = net.line_destination(e);
        const auto f = branch_flows(net.lines()[e], point.v[o], point.theta[o], point.v[d], point.theta[d]);
        m.dp[o] -= f.p_o;
        m.dq[o] -= f.q_o;
        m.dp[d] -= f.p_d;
        m.dq[d] -= f.q_d;
    }
    return m;
}

double total_losses(const Network& net, const std::vector<bool>& online_lines, const OperatingPoint& point) {
    double losses = 0.0;
    for (Index e = 0; e < net.line_count(); ++e) {
        if (!online_lines[e]) continue;
        const Index o = net.line_origin(e), d = net.line_destination(e);
        const auto f = branch_flows(net.lines()[e], point.v[o], point.theta[o], point.v[d], point.theta[d]);
        losses += f.p_o + f.p_d;
    }
    return losses;
}

void append_mismatch_jacobian(const Network& net, const std::vector<bool>& online_lines,
                              const OperatingPoint& point, const VariableMap& vars, const EquationMap& eqs,
                              std::vector<Eigen::Triplet<double>>& out) {
    for (Index e = 0; e < net.line_count(); ++e) {
        if (!online_lines[e]) continue;
        const Index o = net.line_origin(e), d = net.line_destination(e);
        const auto J = branch_flow_jacobian(net.lines()[e], point.v[o], point.theta[o], point.v[d], point.theta[d]);
        const std::array<int, 4> cols{vars.v_col[o], vars.theta_col[o], vars.v_col[d], vars.theta_col[d]};
        const std::array<int, 4> rows{eqs.p_row[o], eqs.q_row[o], eqs.p_row[d], eqs.q_row[d]};
        for (int r = 0; r < 4; ++r) {
            if (rows[r] < 0) continue;
            for (int c = 0; c < 4; ++c)
                if (cols[c] >= 0 && J[r][c] != 0.0) out.emplace_back(rows[r], cols[c], -J[r][c]);
        }
    }
    for (Index n = 0; n < net.bus_count(); ++n)
        if (eqs.q_row[n] >= 0 && vars.v_col[n] >= 0 && point.b[n] != 0.0)
            out.emplace_back(eqs.q_row[n], vars.v_col[n], 2.0 * point.b[n] * point.v[n]);
}

Eigen::MatrixXd full_mismatch_jacobian(const Network& net, const OnlineSets& online, const OperatingPoint& point) {
    const int nb = static_cast<int>(net.bus_count());
    VariableMap vars{std::vector<int>(nb), std::vector<int>(nb)};
    EquationMap eqs{std::vector<int>(nb), std::vector<int>(nb)};
    for (int n = 0; n < nb; ++n) {
        vars.theta_col[n] = n;
        vars.v_col[n] = nb + n;
        eqs.p_row[n] = n;
        eqs.q_row[n] = nb + n;
    }
    std::vector<Eigen::Triplet<double>> trips;
    append_mismatch_jacobian(net, online.lines, point, vars, eqs, trips);
    Eigen::SparseMatrix<double> J(2 * nb, 2 * nb);
    J.setFromTriplets(trips.begin(), trips.end());
    return Eigen::MatrixXd(J);
}

BusTypeSpec default_bus_types(const Network& net, const OnlineSets& online, const OperatingPoint& point) {
    BusTypeSpec spec{std::vector<BusType>(net.bus_count(), BusType::PQ), point.v};
    for (Index g = 0; g < net.generator_count(); ++g)
        if (online.generators[g]) spec.type[net.generator_bus(g)] = BusType::PV;
    if (net.ref_bus() != kNoIndex) spec.type[net.ref_bus()] = BusType::Slack;
    return spec;
}

std::vector<std::string> check_bus_types(const Network& net, const OnlineSets& online, const BusTypeSpec& types) {
    std::vector<std::string> out;
    if (types.type.size() != net.bus_count() || types.v_target.size() != net.bus_count()) {
        out.push_back("bus type spec is not dimensioned to the network");
        return out;
    }
    const auto slacks = std::count(types.type.begin(), types.type.end(), BusType::Slack);
    if (slacks != 1) out.push_back("exactly one slack bus is required, found " + std::to_string(slacks));
    for (Index n = 0; n < net.bus_count(); ++n) {
        if (types.type[n] != BusType::PV) continue;
        const auto& gens = net.generators_at_bus()[n];
        if (std::none_of(gens.begin(), gens.end(), [&](Index g) { return online.generators[g]; }))
            out.push_back("PV bus " + std::to_string(net.buses()[n].id) + " hosts no online generator");
    }
    return out;
}

std::vector<double> split_in_proportion(double total, const std::vector<double>& lo, const std::vector<double>& hi) {
    const auto n = lo.size();
    std::vector<double> out(n);
    if (n == 0) return out;
    const double sum_lo = std::accumulate(lo.begin(), lo.end(), 0.0);
    double range = 0.0;
    for (std::size_t i = 0; i < n; ++i) range += hi[i] - lo[i];
    if (range > 0.0) {
        const double frac = (total - sum_lo) / range;
        for (std::size_t i = 0; i < n; ++i) out[i] = lo[i] + frac * (hi[i] - lo[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] = total / static_cast<double>(n);
    }
    return out;
}

OperatingPoint flat_point(const Network& net) {
    const auto nb = net.bus_count(), ng = net.generator_count();
    return {std::vector<double>(nb, 1.0), std::vector<double>(nb, 0.0), std::vector<double>(nb, 0.0),
            std::vector<double>(ng, 0.0), std::vector<double>(ng, 0.0)};
}

namespace {

struct Layout {
    VariableMap vars;
    EquationMap eqs;
    int size = 0;
};

Layout make_layout(const Network& net, const BusTypeSpec& types) {
    const auto nb = net.bus_count();
    Layout L{{std::vector<int>(nb, -1), std::vector<int>(nb, -1)}, {std::vector<int>(nb, -1), std::vector<int>(nb, -1)}};
    for (Index n = 0; n < nb; ++n) {
        if (types.type[n] == BusType::Slack) continue;
        L.vars.theta_col[n] = L.eqs.p_row[n] = L.size++;
    }
    for (Index n = 0; n < nb; ++n) {
        if (types.type[n] != BusType::PQ) continue;
        L.vars.v_col[n] = L.eqs.q_row[n] = L.size++;
    }
    return L;
}

Eigen::VectorXd residual(const Mismatch& m, const Layout& L) {
    Eigen::VectorXd F(L.size);
    for (std::size_t n = 0; n < m.dp.size(); ++n) {
        if (L.eqs.p_row[n] >= 0) F[L.eqs.p_row[n]] = m.dp[n];
        if (L.eqs.q_row[n] >= 0) F[L.eqs.q_row[n]] = m.dq[n];
    }
    return F;
}

void apply_step(OperatingPoint& x, const Layout& L, const Eigen::VectorXd& step, double alpha, double v_floor) {
    for (std::size_t n = 0; n < x.v.size(); ++n) {
        if (L.vars.theta_col[n] >= 0) x.theta[n] += alpha * step[L.vars.theta_col[n]];
        if (L.vars.v_col[n] >= 0) x.v[n] = std::max(v_floor, x.v[n] + alpha * step[L.vars.v_col[n]]);
    }
}

double max_abs(const Eigen::VectorXd& F) { return F.size() == 0 ? 0.0 : F.cwiseAbs().maxCoeff(); }

// Moves the residual mismatch at PV/slack buses into the online generators there.
void back_compute_injections(const Network& net, const OnlineSets& online, const BusTypeSpec& types,
                             OperatingPoint& x) {
    const auto m = bus_mismatch(net, online, x);
    for (Index n = 0; n < net.bus_count(); ++n) {
        if (types.type[n] == BusType::PQ) continue;
        std::vector<Index> gens;
        for (Index g : net.generators_at_bus()[n])
            if (online.generators[g]) gens.push_back(g);
        if (gens.empty()) continue;
        std::vector<double> qlo, qhi, plo, phi;
        double q_now = 0.0, p_now = 0.0;
        for (Index g : gens) {
            const auto& gen = net.generators()[g];
            qlo.push_back(gen.q_min);
            qhi.push_back(gen.q_max);
            plo.push_back(gen.p_min);
            phi.push_back(gen.p_max);
            q_now += x.q[g];
            p_now += x.p[g];
        }
        const auto q_new = split_in_proportion(q_now - m.dq[n], qlo, qhi);
        for (std::size_t i = 0; i < gens.size(); ++i) x.q[gens[i]] = q_new[i];
        if (types.type[n] == BusType::Slack) {
            const auto p_new = split_in_proportion(p_now - m.dp[n], plo, phi);
            for (std::size_t i = 0; i < gens.size(); ++i) x.p[gens[i]] = p_new[i];
        }
    }
}

}  // namespace

PowerFlowResult newton_powerflow(const Network& net, const OnlineSets& online, const BusTypeSpec& types,
                                 const OperatingPoint& init, const PowerFlowOptions& options) {
    const Layout L = make_layout(net, types);
    OperatingPoint x = init;
    for (Index n = 0; n < net.bus_count(); ++n)
        if (types.type[n] != BusType::PQ) x.v[n] = types.v_target[n];

    PowerFlowResult result;
    Eigen::VectorXd F = residual(bus_mismatch(net, online, x), L);
    double norm = F.norm();
    OperatingPoint best = x;
    double best_max = max_abs(F);

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool pattern_ready = false;
    int it = 0;
    while (max_abs(F) > options.tol && it < options.max_iter) {
        ++it;
        std::vector<Eigen::Triplet<double>> trips;
        append_mismatch_jacobian(net, online.lines, x, L.vars, L.eqs, trips);
        Eigen::SparseMatrix<double> J(L.size, L.size);
        J.setFromTriplets(trips.begin(), trips.end());
        J.makeCompressed();
        if (!pattern_ready) {
            lu.analyzePattern(J);
            pattern_ready = true;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success) break;
        const Eigen::VectorXd step = lu.solve(-F);
        if (lu.info() != Eigen::Success || !step.allFinite()) break;

        double alpha = 1.0;
        OperatingPoint trial;
        Eigen::VectorXd F_trial;
        for (int h = 0; h <= options.max_halvings; ++h, alpha *= 0.5) {
            trial = x;
            apply_step(trial, L, step, alpha, options.v_floor);
            F_trial = residual(bus_mismatch(net, online, trial), L);
            if (F_trial.allFinite() && F_trial.norm() < norm) break;
        }
        if (!F_trial.allFinite()) break;
        x = std::move(trial);
        F = std::move(F_trial);
        norm = F.norm();
        if (max_abs(F) < best_max) {
            best_max = max_abs(F);
            best = x;
        }
    }

    result.iterations = it;
    result.converged = max_abs(F) <= options.tol;
    result.point = result.converged ? x : best;
    result.max_mismatch = result.converged ? max_abs(F) : best_max;
    back_compute_injections(net, online, types, result.point);
    return result;
}

}  // namespace scopf::acpf
