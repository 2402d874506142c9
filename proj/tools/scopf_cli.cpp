// scopf: code1 / code2 / evaluate / score
//
//   scopf code1 --network case.json --out solution1.txt [--mode rt] [--time-limit 60]
//   scopf code2 --network case.json --solution1 solution1.txt --out solution2.txt --workers 4
//   scopf evaluate --network case.json --solution1 solution1.txt --solution2 solution2.txt --report eval.json
//   scopf score --results results/ --out leaderboard/
//
// SCOPF_WORKERS sets the default worker count, SCOPF_LOG_LEVEL=quiet|info|debug the verbosity.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "scopf/harness.hpp"

namespace {

enum class LogLevel { Quiet, Info, Debug };

LogLevel log_level() {
    const char* env = std::getenv("SCOPF_LOG_LEVEL");
    if (env == nullptr) return LogLevel::Info;
    const std::string v = env;
    if (v == "quiet") return LogLevel::Quiet;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Info;
}

unsigned default_workers() {
    if (const char* env = std::getenv("SCOPF_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring SCOPF_WORKERS=" << env << '\n';
    }
    return 1;
}

void report(const scopf::harness::RunManifest& m, const char* phase) {
    const auto level = log_level();
    if (level == LogLevel::Quiet) return;
    std::cerr << phase << ": exit " << m.exit_status;
    if (m.fallback) std::cerr << " (fallback)";
    if (auto it = m.timings.find("total"); it != m.timings.end()) std::cerr << ", " << it->second << " s";
    std::cerr << '\n';
    if (level == LogLevel::Debug) std::cerr << scopf::harness::manifest_json(m);
}

}  // namespace

int main(int argc, char** argv) {
    using scopf::harness::Mode;
    using scopf::harness::RunManifest;

    CLI::App app{"Security-constrained AC optimal power flow"};
    app.require_subcommand(1);

    RunManifest m;
    m.workers = default_workers();
    std::string mode = "offline";
    std::string results, score_out = ".";
    double tau_max = 10.0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--network", m.instance, "Instance document (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--contingencies", m.contingencies, "Contingency list replacing the instance's")
            ->check(CLI::ExistingFile);
    };

    auto* code1 = app.add_subcommand("code1", "Solve the base case");
    common(code1);
    code1->add_option("--mode", mode, "rt (600 s) or offline (2700 s)")->check(CLI::IsMember({"rt", "offline"}));
    code1->add_option("--time-limit", m.time_limit, "Seconds; overrides the mode's limit")->check(CLI::PositiveNumber);
    code1->add_option("--workers", m.workers, "Contingency worker threads")->check(CLI::PositiveNumber);
    code1->add_option("--seedpoint", m.seedpoint, "Prior base solution used as warm start")->check(CLI::ExistingFile);
    code1->add_option("--out", m.solution1, "Base solution file")->required();
    code1->add_option("--report", m.report, "Run manifest (JSON)");

    auto* code2 = app.add_subcommand("code2", "Solve every contingency at a given base solution");
    common(code2);
    code2->add_option("--solution1", m.solution1, "Base solution file")->required();
    code2->add_option("--per-contingency-limit", m.per_contingency_limit, "Seconds")->check(CLI::PositiveNumber);
    code2->add_option("--workers", m.workers, "Worker threads")->check(CLI::PositiveNumber);
    code2->add_option("--out", m.solution2, "Contingency solution file")->required();
    code2->add_option("--report", m.report, "Run manifest (JSON)");

    auto* evaluate = app.add_subcommand("evaluate", "Score a solution pair");
    common(evaluate);
    evaluate->add_option("--solution1", m.solution1, "Base solution file")->required();
    evaluate->add_option("--solution2", m.solution2, "Contingency solution file");
    evaluate->add_option("--report", m.report, "Evaluation report (JSON)");

    auto* score = app.add_subcommand("score", "Aggregate evaluation reports");
    score->add_option("--results", results, "Directory of evaluation reports")->required()->check(CLI::ExistingDirectory);
    score->add_option("--out", score_out, "Output directory for leaderboard.csv/json");
    score->add_option("--tau-max", tau_max, "Upper limit of the performance-profile integral");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : scopf::harness::kExitInput;
    }
    m.mode = mode == "rt" ? Mode::RealTime : Mode::Offline;

    if (*code1) {
        m.hard_deadline = true;
        const int rc = scopf::harness::run_code1(m);
        report(m, "code1");
        return rc;
    }
    if (*code2) {
        const int rc = scopf::harness::run_code2(m);
        report(m, "code2");
        return rc;
    }
    if (*evaluate) {
        const int rc = scopf::harness::run_evaluate(m);
        report(m, "evaluate");
        return rc;
    }
    std::string diagnostic;
    return scopf::harness::run_score(results, score_out, tau_max, diagnostic);
}
