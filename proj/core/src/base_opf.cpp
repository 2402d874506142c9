#include "scopf/base_opf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "scopf/acpf.hpp"
#include "scopf/costs.hpp"
#include "scopf/parallel.hpp"

namespace scopf {

BaseVariables::BaseVariables(const Network& net)
    : net_(&net), ng_(net.generator_count()), nb_(net.bus_count()), has_ref_(net.ref_bus() != kNoIndex ? 1 : 0) {
    size_ = 2 * ng_ + nb_ + (nb_ - has_ref_) + nb_;
    theta_col_.assign(nb_, -1);
    Eigen::Index col = static_cast<Eigen::Index>(2 * ng_ + nb_);
    for (Index n = 0; n < nb_; ++n)
        if (n != net.ref_bus()) theta_col_[n] = col++;

    const double inf = kInfinity;
    box_.lower = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(size_), -inf);
    box_.upper = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(size_), inf);
    for (Index g = 0; g < ng_; ++g) {
        const auto& gen = net.generators()[g];
        box_.lower[p(g)] = gen.p_min;
        box_.upper[p(g)] = gen.p_max;
        box_.lower[q(g)] = gen.q_min;
        box_.upper[q(g)] = gen.q_max;
    }
    for (Index n = 0; n < nb_; ++n) {
        const auto& bus = net.buses()[n];
        box_.lower[v(n)] = bus.vmin;
        box_.upper[v(n)] = bus.vmax;
        box_.lower[b(n)] = bus.b_min;
        box_.upper[b(n)] = bus.b_max;
    }
}

Eigen::VectorXd BaseVariables::pack(const BaseState& s) const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(size_));
    for (Index g = 0; g < ng_; ++g) {
        x[p(g)] = s.p[g];
        x[q(g)] = s.q[g];
    }
    for (Index n = 0; n < nb_; ++n) {
        x[v(n)] = s.v[n];
        x[b(n)] = s.b[n];
        if (theta_col_[n] >= 0) x[theta_col_[n]] = s.theta[n];
    }
    return x;
}

BaseState BaseVariables::unpack(const Eigen::VectorXd& x) const {
    BaseState s{std::vector<double>(nb_), std::vector<double>(nb_, 0.0), std::vector<double>(nb_),
                std::vector<double>(ng_), std::vector<double>(ng_)};
    for (Index g = 0; g < ng_; ++g) {
        s.p[g] = x[p(g)];
        s.q[g] = x[q(g)];
    }
    for (Index n = 0; n < nb_; ++n) {
        s.v[n] = x[v(n)];
        s.b[n] = x[b(n)];
        if (theta_col_[n] >= 0) s.theta[n] = x[theta_col_[n]];
    }
    return s;
}

ObjectiveValue base_objective(const Network& net, const BaseState& state, double mu) {
    const BaseVariables vars(net);
    ObjectiveValue out{0.0, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vars.size()))};
    auto& grad = out.gradient;
    const auto& pen = net.penalty();
    const auto online = net.all_online();

    for (Index g = 0; g < net.generator_count(); ++g) {
        const auto c = net.generators()[g].cost.evaluate(state.p[g], mu);
        out.value += c.value;
        grad[vars.p(g)] += c.slope;
    }

    const auto m = acpf::bus_mismatch(net, online, state);
    std::vector<double> dfdp(net.bus_count()), dfdq(net.bus_count());
    for (Index n = 0; n < net.bus_count(); ++n) {
        const auto P = smoothed_penalty(pen.imbalance, m.dp[n], mu);
        const auto Q = smoothed_penalty(pen.imbalance, m.dq[n], mu);
        out.value += P.value + Q.value;
        dfdp[n] = P.slope;
        dfdq[n] = Q.slope;
        grad[vars.v(n)] += Q.slope * 2.0 * state.b[n] * state.v[n];
        grad[vars.b(n)] += Q.slope * state.v[n] * state.v[n];
    }
    for (Index g = 0; g < net.generator_count(); ++g) {
        const Index n = net.generator_bus(g);
        grad[vars.p(g)] += dfdp[n];
        grad[vars.q(g)] += dfdq[n];
    }

    for (Index e = 0; e < net.line_count(); ++e) {
        const auto& line = net.lines()[e];
        const Index o = net.line_origin(e), d = net.line_destination(e);
        const auto f = acpf::branch_flows(line, state.v[o], state.theta[o], state.v[d], state.theta[d]);
        const auto J = acpf::branch_flow_jacobian(line, state.v[o], state.theta[o], state.v[d], state.theta[d]);
        const auto s = acpf::apparent_flows(f);
        const auto Co = overload_penalty(pen.overload, s.s_o - line.rating * state.v[o], mu);
        const auto Cd = overload_penalty(pen.overload, s.s_d - line.rating * state.v[d], mu);
        out.value += Co.value + Cd.value;

        // df/d(p_o, q_o, p_d, q_d): balance terms enter with a minus sign
        std::array<double, 4> w{-dfdp[o], -dfdq[o], -dfdp[d], -dfdq[d]};
        if (s.s_o > 0.0) {
            w[0] += Co.slope * f.p_o / s.s_o;
            w[1] += Co.slope * f.q_o / s.s_o;
        }
        if (s.s_d > 0.0) {
            w[2] += Cd.slope * f.p_d / s.s_d;
            w[3] += Cd.slope * f.q_d / s.s_d;
        }
        std::array<double, 4> dx{};  // over v_o, th_o, v_d, th_d
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) dx[c] += w[r] * J[r][c];
        dx[0] -= Co.slope * line.rating;
        dx[2] -= Cd.slope * line.rating;
        grad[vars.v(o)] += dx[0];
        grad[vars.v(d)] += dx[2];
        if (vars.theta(o) >= 0) grad[vars.theta(o)] += dx[1];
        if (vars.theta(d) >= 0) grad[vars.theta(d)] += dx[3];
    }
    return out;
}

BaseState projected_reference_point(const Network& net) {
    BaseState s = acpf::flat_point(net);
    if (const auto& prior = net.prior_point(); prior && is_dimensioned(net, *prior)) s = *prior;
    else {
        for (Index g = 0; g < net.generator_count(); ++g) {
            const auto& gen = net.generators()[g];
            s.p[g] = 0.5 * (gen.p_min + gen.p_max);
            s.q[g] = 0.5 * (gen.q_min + gen.q_max);
        }
    }
    const BaseVariables vars(net);
    auto out = vars.unpack(project(vars.pack(s), vars.bounds()));
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

Clock::time_point deadline_of(const SolveConfig& cfg, Clock::time_point start) {
    if (cfg.deadline) return *cfg.deadline;
    return start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.time_budget));
}

double exact_objective(const Network& net, const BaseState& s) { return base_objective(net, s, 0.0).value; }

BaseState proportional_start(const Network& net) {
    BaseState point = acpf::flat_point(net);
    double load = 0.0;
    for (const auto& b : net.buses()) load += b.p_load;
    std::vector<double> lo, hi;
    for (const auto& g : net.generators()) {
        lo.push_back(g.p_min);
        hi.push_back(g.p_max);
    }
    const auto p = acpf::split_in_proportion(load, lo, hi);
    for (Index g = 0; g < net.generator_count(); ++g) point.p[g] = std::clamp(p[g], lo[g], hi[g]);
    for (Index n = 0; n < net.bus_count(); ++n) {
        const auto& bus = net.buses()[n];
        point.v[n] = std::clamp(1.0, bus.vmin, bus.vmax);
        point.b[n] = std::clamp(0.0, bus.b_min, bus.b_max);
    }
    const auto online = net.all_online();
    if (net.ref_bus() != kNoIndex) {
        const auto pf = acpf::newton_powerflow(net, online, acpf::default_bus_types(net, online, point), point);
        if (pf.converged) point = pf.point;
    }
    const BaseVariables vars(net);
    return vars.unpack(project(vars.pack(point), vars.bounds()));
}

struct StageOutcome {
    Eigen::VectorXd x;
    int stages = 0;
    int iterations = 0;
    int evaluations = 0;
    bool timed_out = false;
};

template <typename MakeObjective>
StageOutcome run_stages(MakeObjective&& make, Eigen::VectorXd x, const Box& box, double mu_start, double mu_floor,
                        const SolveConfig& cfg, int max_iter, Clock::time_point deadline) {
    StageOutcome out;
    LbfgsOptions opts;
    opts.memory = cfg.lbfgs_memory;
    opts.max_iter = max_iter;
    opts.pg_tol = cfg.lbfgs_pg_tol;
    opts.deadline = deadline;
    double mu = std::max(mu_start, mu_floor);
    for (;;) {
        const auto res = minimize_box(make(mu), x, box, opts);
        x = res.x;
        ++out.stages;
        out.iterations += res.iterations;
        out.evaluations += res.evaluations;
        if (res.stop == LbfgsStop::Deadline) {
            out.timed_out = true;
            break;
        }
        if (mu <= mu_floor) break;
        mu = std::max(mu_floor, 0.5 * mu);
    }
    out.x = std::move(x);
    return out;
}

// Re-solve the base case as a power flow around the optimized setpoints so the
// balance equations close to solver precision; v is projected onto base bounds.
std::optional<BaseState> polish(const Network& net, const BaseState& s, const SolveConfig& cfg) {
    ContingencyConfig c = cfg.contingency;
    c.smoothing = 0.0;
    const auto r = solve_response(net, s, net.all_online(), c);
    if (r.fallback || !r.converged) return std::nullopt;
    BaseState out = r.point;
    for (Index n = 0; n < net.bus_count(); ++n) {
        out.v[n] = std::clamp(out.v[n], net.buses()[n].vmin, net.buses()[n].vmax);
        out.b[n] = s.b[n];
    }
    if (net.ref_bus() != kNoIndex) {
        const double shift = out.theta[net.ref_bus()];
        for (auto& th : out.theta) th -= shift;
        out.theta[net.ref_bus()] = 0.0;
    }
    const BaseVariables vars(net);
    return vars.unpack(project(vars.pack(out), vars.bounds()));
}

// Smoothed penalty of a post-contingency state; overloads are recomputed from the point.
double smoothed_contingency_penalty(const Network& net, const OnlineSets& online, const ContingencyState& s,
                                    double mu) {
    const auto& pen = net.penalty();
    double total = 0.0;
    for (Index n = 0; n < net.bus_count(); ++n)
        total += smoothed_penalty(pen.imbalance, s.slack_p[n], mu).value +
                 smoothed_penalty(pen.imbalance, s.slack_q[n], mu).value;
    const auto& x = s.point;
    for (Index e = 0; e < net.line_count(); ++e) {
        if (!online.lines[e]) continue;
        const auto& line = net.lines()[e];
        const Index o = net.line_origin(e), d = net.line_destination(e);
        const auto a = acpf::apparent_flows(acpf::branch_flows(line, x.v[o], x.theta[o], x.v[d], x.theta[d]));
        total += overload_penalty(pen.overload, a.s_o - line.rating_e * x.v[o], mu).value +
                 overload_penalty(pen.overload, a.s_d - line.rating_e * x.v[d], mu).value;
    }
    return total;
}

}  // namespace

BaseSolveResult solve_base(const Network& net, const SolveConfig& cfg) {
    const auto start = Clock::now();
    const auto deadline = deadline_of(cfg, start);
    const BaseVariables vars(net);
    const Box& box = vars.bounds();

    const BaseState reference = projected_reference_point(net);
    BaseState x0 = proportional_start(net);
    double f0 = exact_objective(net, x0);
    std::optional<BaseState> warm = cfg.warm_start ? cfg.warm_start : net.prior_point();
    if (warm && is_dimensioned(net, *warm)) {
        const auto w = vars.unpack(project(vars.pack(*warm), box));
        if (const double fw = exact_objective(net, w); fw < f0) {
            x0 = w;
            f0 = fw;
        }
    }

    BaseSolveResult res;
    auto make = [&net, &vars](double mu) -> Objective {
        return [&net, &vars, mu](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
            auto ov = base_objective(net, vars.unpack(x), mu);
            g = std::move(ov.gradient);
            return ov.value;
        };
    };
    const auto stages = run_stages(make, vars.pack(x0), box, cfg.smoothing_start, cfg.smoothing_floor, cfg,
                                   cfg.lbfgs_max_iter, deadline);
    res.stages = stages.stages;
    res.iterations = stages.iterations;
    res.timed_out = stages.timed_out;
    res.state = vars.unpack(stages.x);
    res.objective = exact_objective(net, res.state);

    if (auto p = polish(net, res.state, cfg)) {
        const double fp = exact_objective(net, *p);
        if (fp < res.objective) {
            res.state = std::move(*p);
            res.objective = fp;
            res.polished = true;
        }
    }
    for (const BaseState* candidate : std::array<const BaseState*, 2>{&x0, &reference}) {
        const double fc = exact_objective(net, *candidate);
        if (fc < res.objective) {
            res.state = *candidate;
            res.objective = fc;
            res.polished = false;
        }
    }
    return res;
}

std::vector<ScreenEntry> screen_contingencies(const Network& net, const BaseState& base, const SolveConfig& cfg) {
    const auto& ks = net.contingencies();
    std::vector<ScreenEntry> out(ks.size());
    ContingencyConfig c = cfg.contingency;
    c.smoothing = 0.0;
    parallel_for(ks.size(), cfg.workers, [&](std::size_t i) {
        const auto s = solve_contingency(net, base, ks[i], c);
        out[i] = {i, contingency_penalty(net, s), s.fallback};
    });
    std::stable_sort(out.begin(), out.end(),
                     [](const ScreenEntry& a, const ScreenEntry& b) { return a.penalty > b.penalty; });
    return out;
}

double average_contingency_penalty(const Network& net, const BaseState& base, const SolveConfig& cfg) {
    if (net.contingencies().empty()) return 0.0;
    auto entries = screen_contingencies(net, base, cfg);
    std::sort(entries.begin(), entries.end(),
              [](const ScreenEntry& a, const ScreenEntry& b) { return a.contingency < b.contingency; });
    double sum = 0.0;
    for (const auto& e : entries) sum += e.penalty;
    return sum / static_cast<double>(entries.size());
}

ScSolveResult solve_sc(const Network& net, const SolveConfig& cfg) {
    const auto start = Clock::now();
    const auto deadline = deadline_of(cfg, start);
    // keep the last fifth of the budget for writing the answer
    const auto work_deadline = start + (deadline - start) * 4 / 5;

    SolveConfig base_cfg = cfg;
    base_cfg.deadline = work_deadline;
    ScSolveResult res;
    const auto& ks = net.contingencies();
    const double weight = ks.empty() ? 0.0 : 1.0 / static_cast<double>(ks.size());

    BaseSolveResult base;
    try {
        base = solve_base(net, base_cfg);
    } catch (const std::exception&) {
        base.state = projected_reference_point(net);
        base.objective = exact_objective(net, base.state);
        res.fallback = true;
    }
    res.state = base.state;
    res.base_objective = base.objective;
    res.timed_out = base.timed_out;

    auto full_objective = [&](const BaseState& s, std::vector<ScreenEntry>& screened) {
        screened = screen_contingencies(net, s, cfg);
        double sum = 0.0;
        auto by_index = screened;
        std::sort(by_index.begin(), by_index.end(),
                  [](const ScreenEntry& a, const ScreenEntry& b) { return a.contingency < b.contingency; });
        for (const auto& e : by_index) sum += e.penalty;
        return exact_objective(net, s) + weight * sum;
    };

    std::vector<ScreenEntry> screened;
    try {
        res.objective = full_objective(res.state, screened);
    } catch (const std::exception&) {
        res.fallback = true;
        res.objective = base.objective;
        return res;
    }
    res.trace.push_back(res.objective);
    if (ks.empty()) return res;

    const BaseVariables vars(net);
    ContingencyConfig nested = cfg.contingency;
    nested.smoothing = cfg.contingency_smoothing;
    // coupling variables: base dispatch and the regulated voltage targets
    std::vector<Eigen::Index> coupling;
    for (Index g = 0; g < net.generator_count(); ++g) coupling.push_back(vars.p(g));
    for (Index n = 0; n < net.bus_count(); ++n)
        if (!net.generators_at_bus()[n].empty()) coupling.push_back(vars.v(n));

    // smoothed penalty of contingency i and its central-difference gradient over the coupling columns
    auto nested_term = [&](const Eigen::VectorXd& x, std::size_t i, double mu, Eigen::VectorXd& grad) {
        const auto online = post_contingency_sets(net, ks[i]);
        auto value_at = [&](const Eigen::VectorXd& y) {
            const auto st = solve_contingency(net, vars.unpack(y), ks[i], nested);
            return smoothed_contingency_penalty(net, online, st, mu);
        };
        grad = Eigen::VectorXd::Zero(x.size());
        for (auto c : coupling) {
            Eigen::VectorXd xp = x, xm = x;
            xp[c] += cfg.fd_step;
            xm[c] -= cfg.fd_step;
            grad[c] = (value_at(xp) - value_at(xm)) / (2.0 * cfg.fd_step);
        }
        return value_at(x);
    };

    std::vector<std::size_t> insensitive;
    auto known = [](const std::vector<std::size_t>& v, std::size_t i) { return std::find(v.begin(), v.end(), i) != v.end(); };
    for (int round = 0; round < cfg.max_outer_rounds; ++round) {
        if (Clock::now() >= work_deadline) {
            res.timed_out = true;
            break;
        }
        // Offenders the base decisions cannot influence (e.g. islands without
        // generation) would only add cost to every evaluation; skip them.
        bool added = false;
        std::size_t taken = 0;
        const Eigen::VectorXd x_now = vars.pack(res.state);
        for (const auto& e : screened) {
            if (taken >= cfg.screen_top || e.penalty <= cfg.screen_threshold) break;
            if (known(res.included, e.contingency)) {
                ++taken;
                continue;
            }
            if (known(insensitive, e.contingency)) continue;
            Eigen::VectorXd grad;
            nested_term(x_now, e.contingency, cfg.hedge_smoothing_start, grad);
            if (grad.lpNorm<Eigen::Infinity>() <= 1e-9 * (1.0 + e.penalty)) {
                insensitive.push_back(e.contingency);
                continue;
            }
            ++taken;
            res.included.push_back(e.contingency);
            added = true;
        }
        if (!added) break;
        ++res.rounds;

        const auto included = res.included;
        auto make = [&](double mu) -> Objective {
            return [&, mu](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
                auto ov = base_objective(net, vars.unpack(x), mu);
                g = std::move(ov.gradient);
                double f = ov.value;
                std::vector<double> value(included.size());
                std::vector<Eigen::VectorXd> grad(included.size());
                parallel_for(included.size(), cfg.workers,
                             [&](std::size_t j) { value[j] = nested_term(x, included[j], mu, grad[j]); });
                for (std::size_t j = 0; j < included.size(); ++j) {
                    f += weight * value[j];
                    g += weight * grad[j];
                }
                return f;
            };
        };

        BaseState candidate;
        try {
            const auto st = run_stages(make, vars.pack(res.state), vars.bounds(), cfg.hedge_smoothing_start,
                                       cfg.smoothing_floor, cfg, cfg.hedge_max_iter, work_deadline);
            res.timed_out = res.timed_out || st.timed_out;
            res.hedge_evaluations += st.evaluations;
            candidate = vars.unpack(st.x);
            if (auto p = polish(net, candidate, cfg)) {
                std::vector<ScreenEntry> tmp;
                if (full_objective(*p, tmp) < full_objective(candidate, screened)) candidate = std::move(*p);
            }
        } catch (const std::exception&) {
            res.fallback = true;
            break;
        }
        std::vector<ScreenEntry> cand_screen;
        const double total = full_objective(candidate, cand_screen);
        if (!(total < res.objective)) break;
        res.state = std::move(candidate);
        res.objective = total;
        res.base_objective = exact_objective(net, res.state);
        res.trace.push_back(total);
        screened = std::move(cand_screen);
    }
    return res;
}

}  // namespace scopf
