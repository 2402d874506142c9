#include "scopf/harness.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "scopf/base_opf.hpp"
#include "scopf/contingency.hpp"
#include "scopf/errors.hpp"
#include "scopf/evaluator.hpp"
#include "scopf/io.hpp"
#include "scopf/parallel.hpp"
#include "scopf/scoring.hpp"

namespace scopf::harness {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void write_manifest(const RunManifest& m) {
    if (m.report.empty()) return;
    try {
        io::write_file(m.report, manifest_json(m));
    } catch (const std::exception& e) {
        std::cerr << "warning: " << e.what() << '\n';
    }
}

int input_error(RunManifest& m, const std::string& what) {
    m.diagnostic = what;
    m.exit_status = kExitInput;
    std::cerr << "error: " << what << '\n';
    return kExitInput;
}

// Base setpoints held through the contingency: delta = 0, outaged units at zero.
io::ContingencySolution hold_state(const Network& net, const BaseState& base, const Contingency& k) {
    const auto online = post_contingency_sets(net, k);
    io::ContingencySolution s{k.label, 0.0, base};
    for (Index n = 0; n < net.bus_count(); ++n)
        s.point.v[n] = std::clamp(s.point.v[n], net.buses()[n].vmin_e, net.buses()[n].vmax_e);
    for (Index g = 0; g < net.generator_count(); ++g)
        if (!online.generators[g]) s.point.p[g] = s.point.q[g] = 0.0;
    return s;
}

// Kills the process if the solve overruns; the fallback file is already on disk.
class Watchdog {
public:
    Watchdog(bool armed, Clock::time_point deadline) {
        if (!armed) return;
        thread_ = std::jthread([this, deadline](std::stop_token) {
            std::unique_lock lock(mu_);
            if (!cv_.wait_until(lock, deadline, [this] { return done_; })) {
                std::cerr << "error: time limit exceeded, fallback solution kept\n";
                std::_Exit(kExitFallback);
            }
        });
    }
    ~Watchdog() {
        {
            std::lock_guard lock(mu_);
            done_ = true;
        }
        cv_.notify_all();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    bool done_ = false;
    std::jthread thread_;
};

}  // namespace

double effective_time_limit(const RunManifest& m) {
    if (m.time_limit > 0.0) return m.time_limit;
    return m.mode == Mode::RealTime ? 600.0 : 2700.0;
}

std::uint64_t digest(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Network load_network(const RunManifest& m) {
    Network net = io::parse_instance(io::read_file(m.instance));
    if (m.contingencies.empty()) return net;
    NetworkData d = net.data();
    d.contingencies = io::parse_contingency_list(io::read_file(m.contingencies));
    Network out(std::move(d));
    const auto problems = validate(out);
    if (!problems.empty()) throw SemanticError(problems.front());
    return out;
}

int run_code1(RunManifest& m) {
    const auto t0 = Clock::now();
    const double limit = effective_time_limit(m);
    const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(limit));

    std::optional<Network> net;
    SolveConfig cfg;
    try {
        net.emplace(load_network(m));
        if (!m.seedpoint.empty()) cfg.warm_start = io::read_base_solution(*net, io::read_file(m.seedpoint));
    } catch (const std::exception& e) {
        return input_error(m, e.what());
    }
    m.timings["parse"] = seconds_since(t0);

    try {
        io::write_file(m.solution1, io::write_base_solution(*net, projected_reference_point(*net)));
    } catch (const std::exception& e) {
        return input_error(m, e.what());
    }

    cfg.time_budget = limit;
    cfg.deadline = deadline;
    cfg.workers = std::max(1u, m.workers);
    // the watchdog fires just inside the grace period
    Watchdog watchdog(m.hard_deadline, deadline + std::chrono::seconds(4));
    const auto ts = Clock::now();
    try {
        const auto res = solve_sc(*net, cfg);
        m.objective = res.objective;
        m.fallback = res.fallback;
        m.timings["solve"] = seconds_since(ts);
        io::write_file(m.solution1, io::write_base_solution(*net, res.state));
    } catch (const std::exception& e) {
        m.fallback = true;
        m.diagnostic = e.what();
        std::cerr << "warning: solver failed, fallback solution kept: " << e.what() << '\n';
    }
    m.timings["total"] = seconds_since(t0);
    m.exit_status = m.fallback ? kExitFallback : kExitOk;
    write_manifest(m);
    return m.exit_status;
}

int run_code2(RunManifest& m) {
    const auto t0 = Clock::now();
    std::optional<Network> net;
    BaseState base;
    try {
        net.emplace(load_network(m));
        if (!fs::exists(m.solution1)) return input_error(m, "missing base solution " + m.solution1.string());
        const auto text = io::read_file(m.solution1);
        m.input_digest_before = digest(text);
        base = io::read_base_solution(*net, text);
    } catch (const std::exception& e) {
        return input_error(m, e.what());
    }
    m.timings["parse"] = seconds_since(t0);

    const auto& ks = net->contingencies();
    std::vector<io::ContingencySolution> blocks(ks.size());
    std::vector<char> fell_back(ks.size(), 0);
    std::vector<double> elapsed(ks.size(), 0.0);
    const auto ts = Clock::now();
    parallel_for(ks.size(), std::max(1u, m.workers), [&](std::size_t i) {
        const auto t = Clock::now();
        try {
            const auto s = solve_contingency(*net, base, ks[i]);
            blocks[i] = {ks[i].label, s.delta, s.point};
            fell_back[i] = s.fallback ? 1 : 0;
        } catch (const std::exception&) {
            blocks[i] = hold_state(*net, base, ks[i]);
            fell_back[i] = 1;
        }
        elapsed[i] = seconds_since(t);
    });
    m.timings["solve"] = seconds_since(ts);
    double worst = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        worst = std::max(worst, elapsed[i]);
        if (fell_back[i]) m.fallback_contingencies.push_back(ks[i].label);
    }
    m.timings["slowest_contingency"] = worst;
    m.timings["average_contingency"] = ks.empty() ? 0.0 : m.timings["solve"] / static_cast<double>(ks.size());
    m.fallback = !m.fallback_contingencies.empty();

    try {
        io::write_file(m.solution2, io::write_contingency_solutions(*net, blocks));
        m.input_digest_after = digest(io::read_file(m.solution1));
    } catch (const std::exception& e) {
        return input_error(m, e.what());
    }
    if (m.input_digest_after != m.input_digest_before) return input_error(m, "base solution changed during code2");
    m.timings["total"] = seconds_since(t0);
    m.exit_status = m.fallback ? kExitFallback : kExitOk;
    write_manifest(m);
    return m.exit_status;
}

int run_evaluate(RunManifest& m) {
    const auto t0 = Clock::now();
    std::optional<Network> net;
    try {
        net.emplace(load_network(m));
    } catch (const std::exception& e) {
        return input_error(m, e.what());
    }

    std::optional<EvaluationReport> report;
    try {
        const BaseState base = io::read_base_solution(*net, io::read_file(m.solution1));
        std::vector<std::optional<io::ContingencySolution>> states(net->contingencies().size());
        if (!m.solution2.empty() && fs::exists(m.solution2))
            states = io::read_contingency_solutions(*net, io::read_file(m.solution2), false);
        report = evaluate_full(*net, base, states);
    } catch (const std::exception& e) {
        m.diagnostic = e.what();
    }
    const double wc = worst_case_score(*net);
    m.objective = score_or_worst_case(*net, report);

    nlohmann::json j = report ? nlohmann::json::parse(report_json(*report)) : nlohmann::json::object();
    j["readable"] = report.has_value();
    j["worst_case"] = wc;
    j["score"] = m.objective;
    if (!m.diagnostic.empty()) j["diagnostic"] = m.diagnostic;
    try {
        if (!m.report.empty()) io::write_file(m.report, j.dump(2) + "\n");
    } catch (const std::exception& e) {
        return input_error(m, e.what());
    }
    if (report) std::cout << report_summary(*report);
    std::cout << "score                  " << io::format_double(m.objective) << " $/h\n";
    m.timings["total"] = seconds_since(t0);
    m.exit_status = kExitOk;
    return m.exit_status;
}

int run_score(const fs::path& results_dir, const fs::path& out_dir, double tau_max, std::string& diagnostic) {
    struct Entry {
        std::string team, network, scenario;
        double score;
    };
    std::vector<Entry> entries;
    try {
        if (!fs::is_directory(results_dir)) throw FormatError("not a directory: " + results_dir.string());
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(results_dir))
            if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            const auto rel = fs::relative(f, results_dir);
            std::vector<std::string> parts;
            for (const auto& p : rel) parts.push_back(p.string());
            parts.back() = rel.stem().string();
            Entry e;
            if (parts.size() == 3) e = {parts[0], parts[1], parts[2], 0.0};
            else if (parts.size() == 2) e = {"solver", parts[0], parts[1], 0.0};
            else if (parts.size() == 1) e = {"solver", parts[0], "1", 0.0};
            else continue;
            const auto j = nlohmann::json::parse(io::read_file(f));
            if (!j.contains("score")) continue;
            e.score = j["score"].get<double>();
            entries.push_back(std::move(e));
        }
        if (entries.empty()) throw FormatError("no evaluation reports under " + results_dir.string());

        scoring::ScoreTable t;
        t.tau_max = tau_max;
        for (const auto& e : entries) {
            if (std::find(t.teams.begin(), t.teams.end(), e.team) == t.teams.end()) t.teams.push_back(e.team);
            const auto problem = e.network + "/" + e.scenario;
            if (std::find(t.problems.begin(), t.problems.end(), problem) == t.problems.end()) {
                t.problems.push_back(problem);
                t.scenarios_of[e.network].push_back(problem);
            }
        }
        t.scores.assign(t.teams.size(), std::vector<double>(t.problems.size(), -1.0));
        for (const auto& e : entries) {
            const auto ti = std::find(t.teams.begin(), t.teams.end(), e.team) - t.teams.begin();
            const auto pi = std::find(t.problems.begin(), t.problems.end(), e.network + "/" + e.scenario) -
                            t.problems.begin();
            t.scores[static_cast<std::size_t>(ti)][static_cast<std::size_t>(pi)] = e.score;
        }
        for (std::size_t ti = 0; ti < t.teams.size(); ++ti)
            for (std::size_t pi = 0; pi < t.problems.size(); ++pi)
                if (t.scores[ti][pi] < 0.0)
                    throw FormatError("team " + t.teams[ti] + " has no report for " + t.problems[pi]);
        scoring::compute(t);
        fs::create_directories(out_dir);
        io::write_file(out_dir / "leaderboard.csv", scoring::leaderboard_csv(t));
        io::write_file(out_dir / "leaderboard.json", scoring::leaderboard_json(t));
    } catch (const std::exception& e) {
        diagnostic = e.what();
        std::cerr << "error: " << diagnostic << '\n';
        return kExitInput;
    }
    return kExitOk;
}

std::string manifest_json(const RunManifest& m) {
    nlohmann::json j;
    j["instance"] = m.instance.string();
    j["contingencies"] = m.contingencies.string();
    j["seedpoint"] = m.seedpoint.string();
    j["solution1"] = m.solution1.string();
    j["solution2"] = m.solution2.string();
    j["mode"] = m.mode == Mode::RealTime ? "rt" : "offline";
    j["time_limit"] = effective_time_limit(m);
    j["per_contingency_limit"] = m.per_contingency_limit;
    j["workers"] = m.workers;
    j["exit_status"] = m.exit_status;
    j["fallback"] = m.fallback;
    j["fallback_contingencies"] = m.fallback_contingencies;
    j["timings"] = m.timings;
    j["objective"] = m.objective;
    j["input_digest_before"] = m.input_digest_before;
    j["input_digest_after"] = m.input_digest_after;
    j["diagnostic"] = m.diagnostic;
    return j.dump(2) + "\n";
}

}  // namespace scopf::harness
