#include <cmath>

#include <gtest/gtest.h>

#include "corpus.hpp"
#include "scopf/acpf.hpp"
#include "scopf/base_opf.hpp"
#include "scopf/contingency.hpp"
#include "scopf/errors.hpp"
#include "scopf/evaluator.hpp"

using namespace scopf;
namespace corpus = scopf::testing;

namespace {

std::vector<std::optional<io::ContingencySolution>> respond(const Network& net, const BaseState& base) {
    std::vector<std::optional<io::ContingencySolution>> out;
    for (const auto& k : net.contingencies()) {
        const auto s = solve_contingency(net, base, k);
        out.push_back(io::ContingencySolution{k.label, s.delta, s.point});
    }
    return out;
}

bool has_violation(const EvaluationReport& r, const std::string& constraint) {
    for (const auto& v : r.hard_violations)
        if (v.constraint == constraint) return true;
    return false;
}

}  // namespace

TEST(EvaluateBase, SolverOutputIsFeasibleAndBalanced) {
    const auto net = corpus::random_network(6, {.buses = 8});
    const auto r = evaluate_base(net, solve_base(net).state);
    EXPECT_TRUE(r.feasible);
    EXPECT_LT(r.base_penalty, 1e-6);
    EXPECT_DOUBLE_EQ(r.total, r.base_cost + r.base_penalty);
}

TEST(EvaluateBase, VoltageAboveBound) {
    const auto net = corpus::random_network(6, {.buses = 8});
    auto x = solve_base(net).state;
    x.v[3] = net.buses()[3].vmax + 0.01;
    const auto r = evaluate_base(net, x);
    EXPECT_FALSE(r.feasible);
    ASSERT_EQ(r.hard_violations.size(), 1u);
    EXPECT_EQ(r.hard_violations[0].constraint, "voltage upper");
    EXPECT_EQ(r.hard_violations[0].element, "bus 4");
    EXPECT_NEAR(r.hard_violations[0].magnitude, 0.01, 1e-12);
}

TEST(EvaluateBase, PerturbedGeneratorPaysImbalance) {
    const auto net = corpus::random_network(6, {.buses = 8});
    auto x = solve_base(net).state;
    const auto before = evaluate_base(net, x);
    Index g = 0;
    while (x.p[g] + 0.1 > net.generators()[g].p_max) ++g;
    x.p[g] += 0.1;
    const auto r = evaluate_base(net, x);
    EXPECT_TRUE(r.feasible);
    EXPECT_NEAR(r.base_penalty, penalty_value(net.penalty().imbalance, 0.1), 1e-3);
    EXPECT_GT(r.base_cost, before.base_cost);
}

TEST(EvaluateBase, DimensionMismatch) {
    const auto net = corpus::two_bus_case();
    auto x = acpf::flat_point(net);
    x.v.pop_back();
    EXPECT_THROW(evaluate_base(net, x), FormatError);
}

TEST(EvaluateFull, BenignContingenciesAddNothing) {
    const auto net = corpus::random_network(2, {.buses = 8, .generator_contingencies = false});
    ASSERT_FALSE(net.contingencies().empty());
    const auto base = solve_base(net).state;
    const auto r = evaluate_full(net, base, respond(net, base));
    EXPECT_TRUE(r.feasible);
    EXPECT_TRUE(r.complete);
    EXPECT_LT(r.contingency_penalty_avg, 1e-6);
    EXPECT_NEAR(r.total, r.base_cost, 1e-6 * (1 + r.total));
    for (const auto& c : r.contingencies) EXPECT_LE(c.complementarity, 1e-6);
}

TEST(EvaluateFull, OutagedGeneratorProducing) {
    const auto net = corpus::hedging_case();
    const auto base = solve_base(net).state;
    auto states = respond(net, base);
    states[2]->point.p[1] = 0.2;  // G2 is out in the third contingency
    const auto r = evaluate_full(net, base, states);
    EXPECT_FALSE(r.feasible);
    EXPECT_TRUE(has_violation(r, "failed generator p"));
}

TEST(EvaluateFull, MissingBlockIsUnscored) {
    const auto net = corpus::hedging_case();
    const auto base = solve_base(net).state;
    auto states = respond(net, base);
    states[1].reset();
    const auto r = evaluate_full(net, base, states);
    EXPECT_FALSE(r.complete);
    ASSERT_EQ(r.unscored.size(), 1u);
    EXPECT_EQ(r.unscored[0], "L2");
    EXPECT_EQ(score_or_worst_case(net, r), worst_case_score(net));
}

TEST(EvaluateFull, ComplementarityBreachIsHard) {
    const auto net = corpus::hedging_case();
    const auto base = solve_base(net).state;
    auto states = respond(net, base);
    // push a regulated voltage away from its setpoint while q sits inside its range
    states[0]->point.v[0] = base.v[0] + 0.01;
    const auto r = evaluate_full(net, base, states);
    EXPECT_TRUE(has_violation(r, "complementarity"));
}

TEST(WorstCase, ZeroLoadZeroCost) {
    NetworkData d;
    d.ref_bus = 1;
    d.buses = {Bus{1}, Bus{2}};
    d.generators = {Generator{1, 1, 0.0, 0.0, -1.0, 1.0, 0.0, CostFunction::linear(0.0)}};
    d.lines = {Line{1, 1, 2, 0.0, -10.0, 0.0, 1.0, 1.0}};
    EXPECT_EQ(worst_case_score(Network(std::move(d))), 0.0);
}

TEST(WorstCase, TwoBusHandArithmetic) {
    // p at mid-bounds 1.0, no flow at the flat point: +1.0 at bus 1, -0.5 at bus 2
    const auto net = corpus::two_bus_case(0.5, 1000.0);
    const double bus1 = 0.02 * 1e3 + 0.05 * 5e3 + 0.93 * 1e6;
    const double bus2 = 0.02 * 1e3 + 0.05 * 5e3 + 0.43 * 1e6;
    EXPECT_NEAR(worst_case_score(net), 1000.0 + bus1 + bus2, 1e-6);
}

TEST(ScoreOrWorstCase, Substitution) {
    const auto net = corpus::two_bus_case(0.5, 1000.0);
    const double worst = worst_case_score(net);
    EvaluationReport r;
    r.total = 600.0;
    EXPECT_EQ(score_or_worst_case(net, r), 600.0);
    r.feasible = false;
    EXPECT_EQ(score_or_worst_case(net, r), worst);
    r.feasible = true;
    r.total = worst * 2;
    EXPECT_EQ(score_or_worst_case(net, r), worst);
    EXPECT_EQ(score_or_worst_case(net, std::nullopt), worst);
}

TEST(Report, JsonRoundTrip) {
    const auto net = corpus::hedging_case();
    const auto base = solve_base(net).state;
    const auto r = evaluate_full(net, base, respond(net, base));
    const auto back = report_from_json(report_json(r));
    EXPECT_EQ(back.total, r.total);
    EXPECT_EQ(back.feasible, r.feasible);
    EXPECT_EQ(back.contingencies.size(), r.contingencies.size());
    EXPECT_EQ(report_json(back), report_json(r));
    EXPECT_FALSE(report_summary(r).empty());
}
