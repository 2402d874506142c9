#include "scopf/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scopf/errors.hpp"

namespace scopf::scoring {

double geometric_mean(const std::vector<double>& values) {
    if (values.empty()) throw DomainError("geometric mean of an empty set");
    double sum = 0.0;
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("scores must be positive and finite");
        sum += std::log(v);
    }
    return std::exp(sum / static_cast<double>(values.size()));
}

GeometricMeanResult geometric_mean_overall(const std::vector<std::vector<double>>& scores) {
    GeometricMeanResult r;
    for (const auto& s : scores) r.network.push_back(geometric_mean(s));
    r.overall = geometric_mean(r.network);
    return r;
}

std::vector<double> performance_profile_area(const std::vector<std::vector<double>>& scores, double tau_max) {
    if (scores.size() < 2) throw DomainError("performance profiles need at least two teams");
    if (!(tau_max >= 1.0)) throw DomainError("tau_max must be at least 1");
    const std::size_t problems = scores.front().size();
    if (problems == 0) throw DomainError("no problems to score");
    for (const auto& t : scores)
        if (t.size() != problems) throw DomainError("every team needs a score for every problem");

    std::vector<double> area(scores.size(), 0.0);
    for (std::size_t p = 0; p < problems; ++p) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& t : scores) {
            if (!(t[p] > 0.0) || !std::isfinite(t[p])) throw DomainError("scores must be positive and finite");
            best = std::min(best, t[p]);
        }
        // rho_t jumps by 1/P at tau = r, so each problem contributes (tau_max - r)/P
        for (std::size_t t = 0; t < scores.size(); ++t) {
            const double r = scores[t][p] / best;
            area[t] += std::max(0.0, tau_max - r);
        }
    }
    for (auto& a : area) a /= static_cast<double>(problems);
    return area;
}

double gap(double best, double second) {
    if (!(best > 0.0) || !(best <= second)) throw DomainError("gap requires 0 < best <= second");
    return second / best - 1.0;
}

double hardness_index(double c_rel, double p_rel, double p_ub_rel) {
    if (!(p_ub_rel > 1.0)) throw DomainError("hardness index requires p_ub_rel > 1");
    return c_rel * p_rel * std::log10(p_ub_rel);
}

void compute(ScoreTable& t) {
    t.overall.clear();
    for (std::size_t i = 0; i < t.teams.size(); ++i) {
        std::vector<std::vector<double>> by_network;
        for (const auto& [net, problems] : t.scenarios_of) {
            std::vector<double> s;
            for (const auto& p : problems) {
                const auto pos = std::find(t.problems.begin(), t.problems.end(), p) - t.problems.begin();
                s.push_back(t.scores[i][static_cast<std::size_t>(pos)]);
            }
            by_network.push_back(std::move(s));
        }
        t.overall.push_back(geometric_mean_overall(by_network).overall);
    }
    t.profile_area.clear();
    t.problem_gap.clear();
    if (t.teams.size() < 2) return;
    t.profile_area = performance_profile_area(t.scores, t.tau_max);
    for (std::size_t p = 0; p < t.problems.size(); ++p) {
        std::vector<double> col;
        for (const auto& s : t.scores) col.push_back(s[p]);
        std::sort(col.begin(), col.end());
        t.problem_gap.push_back(gap(col[0], col[1]));
    }
}

std::string leaderboard_csv(const ScoreTable& t) {
    std::ostringstream out;
    out.precision(12);
    out << "team,overall";
    if (!t.profile_area.empty()) out << ",profile_area";
    out << '\n';
    for (std::size_t i = 0; i < t.teams.size(); ++i) {
        out << t.teams[i] << ',' << t.overall[i];
        if (!t.profile_area.empty()) out << ',' << t.profile_area[i];
        out << '\n';
    }
    return out.str();
}

std::string leaderboard_json(const ScoreTable& t) {
    nlohmann::json j;
    j["tau_max"] = t.tau_max;
    j["problems"] = t.problems;
    j["teams"] = nlohmann::json::array();
    for (std::size_t i = 0; i < t.teams.size(); ++i) {
        nlohmann::json team{{"name", t.teams[i]}, {"overall", t.overall[i]}, {"scores", t.scores[i]}};
        if (!t.profile_area.empty()) team["profile_area"] = t.profile_area[i];
        j["teams"].push_back(team);
    }
    if (!t.problem_gap.empty()) j["gap"] = t.problem_gap;
    return j.dump(2) + "\n";
}

}  // namespace scopf::scoring
