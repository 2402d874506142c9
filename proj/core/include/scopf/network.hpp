#pragma once

// Immutable per-unit network description. Element cross references are by id;
// the Network resolves them to dense indices once at construction. Every
// per-element vector in the library is laid out in the Network's index order.

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "scopf/costs.hpp"

namespace scopf {

using Index = std::size_t;
inline constexpr Index kNoIndex = static_cast<Index>(-1);

struct Bus {
    int id = 0;
    double vmin = 0.9, vmax = 1.1;      // base-case bounds, p.u.
    double vmin_e = 0.9, vmax_e = 1.1;  // emergency bounds, p.u.
    double p_load = 0.0, q_load = 0.0;  // p.u.
    double b_min = 0.0, b_max = 0.0;    // shunt susceptance, p.u.
};

struct Generator {
    int id = 0;
    int bus = 0;
    double p_min = 0.0, p_max = 0.0;
    double q_min = 0.0, q_max = 0.0;
    double droop = 0.0;  // p.u. power per unit frequency deviation
    CostFunction cost;
};

struct Line {
    int id = 0;
    int origin = 0;
    int destination = 0;
    double g = 0.0;         // series conductance, p.u.
    double b = 0.0;         // series susceptance, p.u.
    double b_ch = 0.0;      // total charging susceptance, p.u.
    double rating = 0.0;    // p.u. current (MVA at 1 p.u. voltage)
    double rating_e = 0.0;  // emergency rating
};

enum class OutageKind { Generator, Line };

struct Contingency {
    std::string label;
    OutageKind kind = OutageKind::Line;
    int element = 0;
};

/// Voltage, angle, shunt and generator setpoints for one system condition.
/// Bus vectors follow bus index order, p/q follow generator index order.
struct OperatingPoint {
    std::vector<double> v, theta, b;
    std::vector<double> p, q;

    bool operator==(const OperatingPoint&) const = default;
};
using BaseState = OperatingPoint;

/// Plain aggregate used to build a Network.
struct NetworkData {
    std::vector<Bus> buses;
    std::vector<Generator> generators;
    std::vector<Line> lines;
    std::vector<Contingency> contingencies;
    int ref_bus = 0;
    PenaltySpec penalty = PenaltySpec::defaults();
    std::optional<OperatingPoint> prior_point;  // index order; optional warm start
};

/// Elements in service for one condition; masks are in index order.
struct OnlineSets {
    std::vector<bool> generators;
    std::vector<bool> lines;

    std::size_t generator_count() const;
    std::size_t line_count() const;
};

class Network {
public:
    explicit Network(NetworkData data);

    const std::vector<Bus>& buses() const noexcept { return data_.buses; }
    const std::vector<Generator>& generators() const noexcept { return data_.generators; }
    const std::vector<Line>& lines() const noexcept { return data_.lines; }
    const std::vector<Contingency>& contingencies() const noexcept { return data_.contingencies; }
    const PenaltySpec& penalty() const noexcept { return data_.penalty; }
    const std::optional<OperatingPoint>& prior_point() const noexcept { return data_.prior_point; }
    const NetworkData& data() const noexcept { return data_; }

    std::size_t bus_count() const noexcept { return data_.buses.size(); }
    std::size_t generator_count() const noexcept { return data_.generators.size(); }
    std::size_t line_count() const noexcept { return data_.lines.size(); }

    int ref_bus_id() const noexcept { return data_.ref_bus; }
    /// kNoIndex when the reference bus id is unknown.
    Index ref_bus() const noexcept { return ref_index_; }

    /// kNoIndex for unknown ids.
    Index bus_index(int id) const;
    Index generator_index(int id) const;
    Index line_index(int id) const;

    /// Bus index of generator g / line terminals (kNoIndex if dangling).
    Index generator_bus(Index g) const { return gen_bus_[g]; }
    Index line_origin(Index e) const { return line_from_[e]; }
    Index line_destination(Index e) const { return line_to_[e]; }

    /// Generators attached to each bus, ascending index.
    const std::vector<std::vector<Index>>& generators_at_bus() const noexcept { return gens_at_bus_; }
    /// Lines incident to each bus, ascending index.
    const std::vector<std::vector<Index>>& lines_at_bus() const noexcept { return lines_at_bus_; }

    OnlineSets all_online() const;

private:
    NetworkData data_;
    Index ref_index_ = kNoIndex;
    std::unordered_map<int, Index> bus_ids_, gen_ids_, line_ids_;
    std::vector<Index> gen_bus_, line_from_, line_to_;
    std::vector<std::vector<Index>> gens_at_bus_, lines_at_bus_;
};

/// Every broken invariant as a human-readable line; empty when the network is valid.
std::vector<std::string> validate(const Network& net);

/// G(k) and E(k). Throws DomainError when the outaged element does not exist.
OnlineSets post_contingency_sets(const Network& net, const Contingency& k);

/// Connected components of the buses over the online lines. Returns a component
/// label per bus; labels are numbered by the smallest bus index they contain.
std::vector<std::size_t> connected_components(const Network& net, const std::vector<bool>& online_lines);

/// Dimensions match the network and theta at the reference bus is zero.
bool is_dimensioned(const Network& net, const OperatingPoint& point);

}  // namespace scopf
