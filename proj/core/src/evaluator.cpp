#include "scopf/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scopf/acpf.hpp"
#include "scopf/base_opf.hpp"
#include "scopf/costs.hpp"
#include "scopf/errors.hpp"

namespace scopf {

namespace {

std::string name(const char* kind, int id) { return std::string(kind) + " " + std::to_string(id); }

void check_dimensions(const Network& net, const OperatingPoint& s) {
    const auto nb = net.bus_count(), ng = net.generator_count();
    if (s.v.size() != nb || s.theta.size() != nb || s.b.size() != nb || s.p.size() != ng || s.q.size() != ng)
        throw FormatError("state is not dimensioned to the network");
}

class Checker {
public:
    Checker(EvaluationReport& r, double tol, std::string suffix) : r_(r), tol_(tol), suffix_(std::move(suffix)) {}

    // x must lie in [lo, hi]
    void bounds(const char* what, const std::string& element, double x, double lo, double hi) {
        if (!std::isfinite(x)) {
            add(std::string(what) + " not finite", element, kInfinity);
            return;
        }
        if (x < lo - tol_) add(std::string(what) + " lower", element, lo - x);
        if (x > hi + tol_) add(std::string(what) + " upper", element, x - hi);
    }
    void zero(const char* what, const std::string& element, double x) {
        if (!(std::abs(x) <= tol_)) add(what, element, std::abs(x));
    }
    void add(const std::string& what, const std::string& element, double magnitude) {
        r_.hard_violations.push_back({what, element + suffix_, magnitude});
    }

private:
    EvaluationReport& r_;
    double tol_;
    std::string suffix_;
};

// Slacks and penalty of one condition, recomputed from the primal values.
double condition_penalty(const Network& net, const OnlineSets& online, const OperatingPoint& x, bool emergency,
                         SlackTable& slacks) {
    const auto& pen = net.penalty();
    const auto m = acpf::bus_mismatch(net, online, x);
    slacks.p = m.dp;
    slacks.q = m.dq;
    double total = 0.0;
    for (Index n = 0; n < net.bus_count(); ++n)
        total += penalty_value(pen.imbalance, m.dp[n]) + penalty_value(pen.imbalance, m.dq[n]);
    slacks.overload_o.assign(net.line_count(), 0.0);
    slacks.overload_d.assign(net.line_count(), 0.0);
    for (Index e = 0; e < net.line_count(); ++e) {
        if (!online.lines[e]) continue;
        const auto& line = net.lines()[e];
        const Index o = net.line_origin(e), d = net.line_destination(e);
        const auto s = acpf::apparent_flows(acpf::branch_flows(line, x.v[o], x.theta[o], x.v[d], x.theta[d]));
        const double rating = emergency ? line.rating_e : line.rating;
        slacks.overload_o[e] = std::max(0.0, s.s_o - rating * x.v[o]);
        slacks.overload_d[e] = std::max(0.0, s.s_d - rating * x.v[d]);
        total += overload_penalty(pen.overload, slacks.overload_o[e], 0.0).value +
                 overload_penalty(pen.overload, slacks.overload_d[e], 0.0).value;
    }
    return total;
}

void base_checks(const Network& net, const BaseState& x, Checker& c) {
    for (Index n = 0; n < net.bus_count(); ++n) {
        const auto& bus = net.buses()[n];
        c.bounds("voltage", name("bus", bus.id), x.v[n], bus.vmin, bus.vmax);
        c.bounds("shunt", name("bus", bus.id), x.b[n], bus.b_min, bus.b_max);
        if (!std::isfinite(x.theta[n])) c.add("angle not finite", name("bus", bus.id), kInfinity);
    }
    for (Index g = 0; g < net.generator_count(); ++g) {
        const auto& gen = net.generators()[g];
        c.bounds("generator p", name("generator", gen.id), x.p[g], gen.p_min, gen.p_max);
        c.bounds("generator q", name("generator", gen.id), x.q[g], gen.q_min, gen.q_max);
    }
    if (net.ref_bus() != kNoIndex) c.zero("reference angle", name("bus", net.ref_bus_id()), x.theta[net.ref_bus()]);
}

// Least-violating split of each deviation into its nonnegative parts; the
// residual of a pair 0 <= a _|_ b >= 0 is min(a, b) once both are clipped at 0.
double complementarity(const Network& net, const BaseState& base, const OnlineSets& online,
                       const io::ContingencySolution& k) {
    const auto& x = k.point;
    double worst = 0.0;
    auto pair = [](double a, double b) { return std::min(std::max(a, 0.0), std::max(b, 0.0)); };
    for (Index n = 0; n < net.bus_count(); ++n) {
        const double dv = x.v[n] - base.v[n];
        const double nu_plus = std::max(dv, 0.0), nu_minus = std::max(-dv, 0.0);
        for (Index g : net.generators_at_bus()[n]) {
            if (!online.generators[g]) continue;
            const auto& gen = net.generators()[g];
            worst = std::max({worst, pair(nu_minus, gen.q_max - x.q[g]), pair(nu_plus, x.q[g] - gen.q_min)});
        }
    }
    for (Index g = 0; g < net.generator_count(); ++g) {
        if (!online.generators[g]) continue;
        const auto& gen = net.generators()[g];
        const double dp = x.p[g] - (base.p[g] + gen.droop * k.delta);
        const double rho_plus = std::max(dp, 0.0), rho_minus = std::max(-dp, 0.0);
        worst = std::max({worst, pair(rho_minus, gen.p_max - x.p[g]), pair(rho_plus, x.p[g] - gen.p_min)});
    }
    return worst;
}

void finish(EvaluationReport& r, std::size_t k_count) {
    double sum = 0.0;
    for (const auto& c : r.contingencies) sum += c.penalty;
    r.contingency_penalty_avg = k_count == 0 ? 0.0 : sum / static_cast<double>(k_count);
    r.total = r.base_cost + r.base_penalty + r.contingency_penalty_avg;
    r.feasible = r.hard_violations.empty();
}

}  // namespace

EvaluationReport evaluate_base(const Network& net, const BaseState& base, const EvaluationOptions& opt) {
    check_dimensions(net, base);
    EvaluationReport r;
    Checker c(r, opt.tol, "");
    base_checks(net, base, c);
    for (Index g = 0; g < net.generator_count(); ++g) r.base_cost += net.generators()[g].cost(base.p[g]);
    r.base_penalty = condition_penalty(net, net.all_online(), base, false, r.base_slacks);
    finish(r, 0);
    return r;
}

EvaluationReport evaluate_full(const Network& net, const BaseState& base,
                               const std::vector<std::optional<io::ContingencySolution>>& states,
                               const EvaluationOptions& opt) {
    const auto& ks = net.contingencies();
    if (states.size() != ks.size()) throw FormatError("one contingency slot per contingency expected");
    EvaluationReport r = evaluate_base(net, base, opt);

    for (std::size_t i = 0; i < ks.size(); ++i) {
        ContingencyEvaluation ce;
        ce.label = ks[i].label;
        if (!states[i]) {
            r.complete = false;
            r.unscored.push_back(ks[i].label);
            r.contingencies.push_back(std::move(ce));
            continue;
        }
        const auto& sol = *states[i];
        check_dimensions(net, sol.point);
        const auto online = post_contingency_sets(net, ks[i]);
        const auto& x = sol.point;
        Checker c(r, opt.tol, " in " + ks[i].label);
        for (Index n = 0; n < net.bus_count(); ++n) {
            const auto& bus = net.buses()[n];
            c.bounds("emergency voltage", name("bus", bus.id), x.v[n], bus.vmin_e, bus.vmax_e);
            c.bounds("shunt", name("bus", bus.id), x.b[n], bus.b_min, bus.b_max);
            if (!std::isfinite(x.theta[n])) c.add("angle not finite", name("bus", bus.id), kInfinity);
        }
        for (Index g = 0; g < net.generator_count(); ++g) {
            const auto& gen = net.generators()[g];
            if (!online.generators[g]) {
                c.zero("failed generator p", name("generator", gen.id), x.p[g]);
                c.zero("failed generator q", name("generator", gen.id), x.q[g]);
                continue;
            }
            c.bounds("generator p", name("generator", gen.id), x.p[g], gen.p_min, gen.p_max);
            c.bounds("generator q", name("generator", gen.id), x.q[g], gen.q_min, gen.q_max);
        }
        if (net.ref_bus() != kNoIndex) c.zero("reference angle", name("bus", net.ref_bus_id()), x.theta[net.ref_bus()]);
        if (!std::isfinite(sol.delta)) c.add("delta not finite", "system", kInfinity);

        ce.complementarity = complementarity(net, base, online, sol);
        if (ce.complementarity > opt.comp_tol) c.add("complementarity", "controls", ce.complementarity);
        ce.penalty = condition_penalty(net, online, x, true, ce.slacks);
        ce.scored = true;
        r.contingencies.push_back(std::move(ce));
    }
    finish(r, ks.size());
    return r;
}

double worst_case_score(const Network& net) {
    const BaseState x = projected_reference_point(net);
    std::vector<std::optional<io::ContingencySolution>> states;
    for (const auto& k : net.contingencies()) {
        const auto online = post_contingency_sets(net, k);
        io::ContingencySolution s{k.label, 0.0, x};
        for (Index n = 0; n < net.bus_count(); ++n)
            s.point.v[n] = std::clamp(s.point.v[n], net.buses()[n].vmin_e, net.buses()[n].vmax_e);
        for (Index g = 0; g < net.generator_count(); ++g)
            if (!online.generators[g]) s.point.p[g] = s.point.q[g] = 0.0;
        states.emplace_back(std::move(s));
    }
    return evaluate_full(net, x, states).total;
}

double score_or_worst_case(const Network& net, const std::optional<EvaluationReport>& report) {
    const double wc = worst_case_score(net);
    if (!report || !report->feasible || !report->complete || !std::isfinite(report->total)) return wc;
    return std::min(report->total, wc);
}

namespace {

nlohmann::json slack_json(const SlackTable& s) {
    return {{"p", s.p}, {"q", s.q}, {"overload_origin", s.overload_o}, {"overload_destination", s.overload_d}};
}

SlackTable slack_from(const nlohmann::json& j) {
    SlackTable s;
    if (j.is_null()) return s;
    s.p = j.at("p").get<std::vector<double>>();
    s.q = j.at("q").get<std::vector<double>>();
    s.overload_o = j.at("overload_origin").get<std::vector<double>>();
    s.overload_d = j.at("overload_destination").get<std::vector<double>>();
    return s;
}

}  // namespace

std::string report_json(const EvaluationReport& r) {
    nlohmann::json j;
    j["base_cost"] = r.base_cost;
    j["base_penalty"] = r.base_penalty;
    j["contingency_penalty_avg"] = r.contingency_penalty_avg;
    j["total"] = r.total;
    j["feasible"] = r.feasible;
    j["complete"] = r.complete;
    j["unscored"] = r.unscored;
    j["hard_violations"] = nlohmann::json::array();
    for (const auto& v : r.hard_violations)
        j["hard_violations"].push_back({{"constraint", v.constraint}, {"element", v.element}, {"magnitude", v.magnitude}});
    j["base_slacks"] = slack_json(r.base_slacks);
    j["contingencies"] = nlohmann::json::array();
    for (const auto& c : r.contingencies)
        j["contingencies"].push_back({{"label", c.label},
                                      {"scored", c.scored},
                                      {"penalty", c.penalty},
                                      {"complementarity", c.complementarity},
                                      {"slacks", slack_json(c.slacks)}});
    return j.dump(2) + "\n";
}

EvaluationReport report_from_json(const std::string& text) {
    EvaluationReport r;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        r.base_cost = j.at("base_cost").get<double>();
        r.base_penalty = j.at("base_penalty").get<double>();
        r.contingency_penalty_avg = j.at("contingency_penalty_avg").get<double>();
        r.total = j.at("total").get<double>();
        r.feasible = j.at("feasible").get<bool>();
        r.complete = j.at("complete").get<bool>();
        r.unscored = j.at("unscored").get<std::vector<std::string>>();
        for (const auto& v : j.at("hard_violations"))
            r.hard_violations.push_back({v.at("constraint").get<std::string>(), v.at("element").get<std::string>(),
                                         v.at("magnitude").is_number() ? v.at("magnitude").get<double>() : kInfinity});
        r.base_slacks = slack_from(j.value("base_slacks", nlohmann::json()));
        for (const auto& c : j.at("contingencies")) {
            ContingencyEvaluation ce;
            ce.label = c.at("label").get<std::string>();
            ce.scored = c.at("scored").get<bool>();
            ce.penalty = c.at("penalty").get<double>();
            ce.complementarity = c.at("complementarity").get<double>();
            ce.slacks = slack_from(c.value("slacks", nlohmann::json()));
            r.contingencies.push_back(std::move(ce));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad evaluation report: ") + e.what());
    }
    return r;
}

std::string report_summary(const EvaluationReport& r) {
    std::ostringstream out;
    out.precision(10);
    out << "base cost              " << r.base_cost << " $/h\n"
        << "base penalty           " << r.base_penalty << " $/h\n"
        << "contingency penalty    " << r.contingency_penalty_avg << " $/h (average over "
        << r.contingencies.size() << ")\n"
        << "total                  " << r.total << " $/h\n"
        << "feasible               " << (r.feasible ? "yes" : "no") << "\n";
    if (!r.complete) {
        out << "unscored contingencies";
        for (const auto& l : r.unscored) out << ' ' << l;
        out << '\n';
    }
    const std::size_t shown = std::min<std::size_t>(r.hard_violations.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) {
        const auto& v = r.hard_violations[i];
        out << "  violation: " << v.constraint << " at " << v.element << " by " << v.magnitude << '\n';
    }
    if (shown < r.hard_violations.size()) out << "  ... " << r.hard_violations.size() - shown << " more\n";
    return out.str();
}

}  // namespace scopf
