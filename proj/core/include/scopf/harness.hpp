#pragma once

// Batch entry points: code1 writes the base solution, code2 the contingency
// responses to it, evaluate scores a solution pair, score aggregates reports.
// Every entry point returns its process exit code: 0 success, 1 success with a
// fallback somewhere, 2 input error.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "scopf/network.hpp"

namespace scopf::harness {

enum class Mode { RealTime, Offline };

inline constexpr int kExitOk = 0;
inline constexpr int kExitFallback = 1;
inline constexpr int kExitInput = 2;

struct RunManifest {
    std::filesystem::path instance;
    std::filesystem::path contingencies;  // optional override of the instance's list
    std::filesystem::path seedpoint;      // optional prior base solution
    std::filesystem::path solution1;
    std::filesystem::path solution2;
    std::filesystem::path report;         // evaluation report (evaluate) or run manifest (code1/code2)
    Mode mode = Mode::Offline;
    double time_limit = 0.0;              // seconds; 0 picks 600 (real-time) or 2700 (offline)
    double per_contingency_limit = 2.0;
    unsigned workers = 1;
    /// Terminate the process from a watchdog when code1 overruns its limit.
    /// The fallback solution is on disk before solving starts.
    bool hard_deadline = false;

    int exit_status = 0;
    bool fallback = false;
    std::vector<std::string> fallback_contingencies;
    std::map<std::string, double> timings;  // phase -> seconds
    double objective = 0.0;                 // solver-reported (code1) or score (evaluate)
    std::uint64_t input_digest_before = 0;
    std::uint64_t input_digest_after = 0;
    std::string diagnostic;
};

double effective_time_limit(const RunManifest& m);

/// FNV-1a, 64 bit.
std::uint64_t digest(std::string_view bytes);

/// Parses the instance and applies the contingency override.
Network load_network(const RunManifest& m);

int run_code1(RunManifest& m);
int run_code2(RunManifest& m);
int run_evaluate(RunManifest& m);

/// Reads every evaluation report below `results_dir` laid out as
/// team/network/scenario.json (network/scenario.json for a single team) and
/// writes leaderboard.csv and leaderboard.json into `out_dir`.
int run_score(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir, double tau_max,
              std::string& diagnostic);

std::string manifest_json(const RunManifest& m);

}  // namespace scopf::harness
