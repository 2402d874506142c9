#pragma once

// Independent scoring of submitted solutions. Nothing but the primal values
// (v, theta, b, p, q and delta) is read from a submission; every slack and
// deviation variable is recomputed here.

#include <optional>
#include <string>
#include <vector>

#include "scopf/io.hpp"
#include "scopf/network.hpp"

namespace scopf {

struct HardViolation {
    std::string constraint;  // e.g. "voltage upper", "failed generator p"
    std::string element;     // e.g. "bus 4", "generator 2 in G1"
    double magnitude = 0.0;
};

struct SlackTable {
    std::vector<double> p, q;                 // per bus, imbalance
    std::vector<double> overload_o, overload_d;  // per line, max(0, |s| - R v)
};

struct ContingencyEvaluation {
    std::string label;
    bool scored = false;
    double penalty = 0.0;
    double complementarity = 0.0;  // largest residual
    SlackTable slacks;
};

struct EvaluationReport {
    double base_cost = 0.0;
    double base_penalty = 0.0;
    double contingency_penalty_avg = 0.0;
    double total = 0.0;
    std::vector<HardViolation> hard_violations;
    bool feasible = true;
    bool complete = true;  // every contingency had a block
    std::vector<std::string> unscored;
    SlackTable base_slacks;
    std::vector<ContingencyEvaluation> contingencies;
};

struct EvaluationOptions {
    double tol = 1e-6;
    double comp_tol = 1e-4;
};

/// Base part only; contingency fields stay zero. Throws FormatError on a dimension mismatch.
EvaluationReport evaluate_base(const Network& net, const BaseState& base, const EvaluationOptions& opt = {});

/// Base plus one (optional) state per contingency in instance order. A missing
/// state marks its contingency unscored and the report incomplete.
EvaluationReport evaluate_full(const Network& net, const BaseState& base,
                               const std::vector<std::optional<io::ContingencySolution>>& states,
                               const EvaluationOptions& opt = {});

/// The projected reference point with every contingency holding its base
/// setpoints (delta = 0), scored with exact penalties.
double worst_case_score(const Network& net);

/// The report's total when it is complete, feasible and not above the worst
/// case; the worst case otherwise.
double score_or_worst_case(const Network& net, const std::optional<EvaluationReport>& report);

std::string report_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);
std::string report_summary(const EvaluationReport& report);

}  // namespace scopf
