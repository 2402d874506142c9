#pragma once

// Synthetic instances for tests and benchmarks. Everything is generated from a
// seed, so a case can be rebuilt from its (seed, size) pair.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "scopf/network.hpp"

namespace scopf::testing {

struct CorpusOptions {
    std::size_t buses = 5;
    double extra_line_ratio = 0.4;  // extra lines beyond a spanning tree, as a fraction of buses
    double generator_share = 0.4;   // fraction of buses hosting a generator
    double load_pu = 0.3;           // mean active load per bus
    double reserve_factor = 2.0;    // total p_max / total load
    double rating_pu = 3.0;
    bool line_contingencies = true;
    bool generator_contingencies = true;
    bool bridge_contingencies = false;  // also outage lines whose loss islands the network
};

/// Connected random network with convex costs of 1-9 $/MWh and ample ratings.
Network random_network(std::uint64_t seed, const CorpusOptions& opt = {});

/// Ten cases of 5 to 30 buses with generator and line outages.
std::vector<Network> acceptance_corpus();

/// Small power-flow case: 2 to 4 buses, a generator at bus 1 (reference) and,
/// on some seeds, a voltage-controlled generator at another bus.
Network random_powerflow_case(std::uint64_t seed, std::size_t buses);

/// Two buses, one generator at bus 1 covering the load at bus 2 through a lossless line.
Network two_bus_case(double load_pu = 0.5, double marginal_cost = 1000.0);

/// Two-generator case where a line outage overloads the surviving parallel
/// line unless dispatch is shifted toward the small droop-heavy unit at the load.
Network hedging_case();

/// Writes the instance JSON and returns its path.
std::filesystem::path write_instance_file(const Network& net, const std::filesystem::path& dir, const std::string& name);

/// Fresh empty directory below the system temp directory.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace scopf::testing
