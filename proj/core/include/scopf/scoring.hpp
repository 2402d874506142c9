#pragma once

// Cross-scenario scoring and scenario difficulty metrics. Scores are costs, so
// lower is better everywhere except profile areas, where higher is better.

#include <map>
#include <string>
#include <vector>

namespace scopf::scoring {

/// Geometric mean of positive values, computed in log space. Throws DomainError
/// on an empty input or a nonpositive value.
double geometric_mean(const std::vector<double>& values);

struct GeometricMeanResult {
    std::vector<double> network;  // per network, over its scenarios
    double overall = 0.0;         // over the network scores
};

/// scores[network][scenario].
GeometricMeanResult geometric_mean_overall(const std::vector<std::vector<double>>& scores);

/// scores[team][problem]; returns the area under each team's performance
/// profile on [1, tau_max]. Requires at least two teams.
std::vector<double> performance_profile_area(const std::vector<std::vector<double>>& scores, double tau_max = 10.0);

/// Relative gap between the best and second-best objective.
double gap(double best, double second);

/// H = c_rel * p_rel * log10(p_ub_rel); requires p_ub_rel > 1.
double hardness_index(double c_rel, double p_rel, double p_ub_rel);

struct ScoreTable {
    std::vector<std::string> teams;
    std::vector<std::string> problems;                 // "network/scenario"
    std::vector<std::vector<double>> scores;           // [team][problem]
    std::map<std::string, std::vector<std::string>> scenarios_of;  // network -> problems
    std::vector<double> overall;                       // per team, geometric mean method
    std::vector<double> profile_area;                  // per team; empty with a single team
    std::vector<double> problem_gap;                   // per problem; empty with a single team
    double tau_max = 10.0;
};

/// Fills overall, profile_area and problem_gap from scores.
void compute(ScoreTable& table);

std::string leaderboard_csv(const ScoreTable& table);
std::string leaderboard_json(const ScoreTable& table);

}  // namespace scopf::scoring
