#include "scopf/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "scopf/errors.hpp"

namespace scopf {

std::size_t OnlineSets::generator_count() const {
    return static_cast<std::size_t>(std::count(generators.begin(), generators.end(), true));
}

std::size_t OnlineSets::line_count() const {
    return static_cast<std::size_t>(std::count(lines.begin(), lines.end(), true));
}

namespace {

template <typename T>
std::unordered_map<int, Index> index_ids(const std::vector<T>& items) {
    std::unordered_map<int, Index> out;
    for (Index i = 0; i < items.size(); ++i) out.emplace(items[i].id, i);
    return out;
}

Index lookup(const std::unordered_map<int, Index>& ids, int id) {
    const auto it = ids.find(id);
    return it == ids.end() ? kNoIndex : it->second;
}

}  // namespace

Network::Network(NetworkData data) : data_(std::move(data)) {
    bus_ids_ = index_ids(data_.buses);
    gen_ids_ = index_ids(data_.generators);
    line_ids_ = index_ids(data_.lines);
    ref_index_ = lookup(bus_ids_, data_.ref_bus);

    gens_at_bus_.assign(bus_count(), {});
    lines_at_bus_.assign(bus_count(), {});
    gen_bus_.resize(generator_count());
    for (Index g = 0; g < generator_count(); ++g) {
        gen_bus_[g] = lookup(bus_ids_, data_.generators[g].bus);
        if (gen_bus_[g] != kNoIndex) gens_at_bus_[gen_bus_[g]].push_back(g);
    }
    line_from_.resize(line_count());
    line_to_.resize(line_count());
    for (Index e = 0; e < line_count(); ++e) {
        line_from_[e] = lookup(bus_ids_, data_.lines[e].origin);
        line_to_[e] = lookup(bus_ids_, data_.lines[e].destination);
        if (line_from_[e] != kNoIndex) lines_at_bus_[line_from_[e]].push_back(e);
        if (line_to_[e] != kNoIndex && line_to_[e] != line_from_[e]) lines_at_bus_[line_to_[e]].push_back(e);
    }
}

Index Network::bus_index(int id) const { return lookup(bus_ids_, id); }
Index Network::generator_index(int id) const { return lookup(gen_ids_, id); }
Index Network::line_index(int id) const { return lookup(line_ids_, id); }

OnlineSets Network::all_online() const {
    return {std::vector<bool>(generator_count(), true), std::vector<bool>(line_count(), true)};
}

namespace {

template <typename T>
void check_unique(const std::vector<T>& items, const char* what, std::vector<std::string>& out) {
    std::unordered_map<int, int> seen;
    for (const auto& item : items)
        if (++seen[item.id] == 2) out.push_back(std::string("duplicate id: ") + what + " " + std::to_string(item.id));
}

bool finite_all(std::initializer_list<double> values) {
    return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::vector<std::string> validate(const Network& net) {
    std::vector<std::string> out;
    auto report = [&out](const std::string& s) { out.push_back(s); };

    check_unique(net.buses(), "bus", out);
    check_unique(net.generators(), "generator", out);
    check_unique(net.lines(), "line", out);

    if (net.bus_count() == 0) report("network has no buses");
    if (net.ref_bus() == kNoIndex) report("reference bus " + std::to_string(net.ref_bus_id()) + " does not exist");

    for (const auto& b : net.buses()) {
        const std::string name = "bus " + std::to_string(b.id);
        if (!finite_all({b.vmin, b.vmax, b.vmin_e, b.vmax_e, b.p_load, b.q_load, b.b_min, b.b_max}))
            report(name + ": non-finite parameter");
        if (!(0.0 < b.vmin_e && b.vmin_e <= b.vmin && b.vmin <= b.vmax && b.vmax <= b.vmax_e))
            report(name + ": voltage bounds must satisfy 0 < vmin_e <= vmin <= vmax <= vmax_e");
        if (!(b.b_min <= b.b_max)) report(name + ": shunt bounds must satisfy b_min <= b_max");
    }
    for (Index g = 0; g < net.generator_count(); ++g) {
        const auto& gen = net.generators()[g];
        const std::string name = "generator " + std::to_string(gen.id);
        if (net.generator_bus(g) == kNoIndex) report(name + ": dangling reference to bus " + std::to_string(gen.bus));
        if (!finite_all({gen.p_min, gen.p_max, gen.q_min, gen.q_max, gen.droop}))
            report(name + ": non-finite parameter");
        if (!(gen.p_min <= gen.p_max)) report(name + ": p_min must not exceed p_max");
        if (!(gen.q_min <= gen.q_max)) report(name + ": q_min must not exceed q_max");
        if (!(gen.droop >= 0.0)) report(name + ": droop must be nonnegative");
        if (!gen.cost.is_convex()) report(name + ": cost must be convex piecewise-linear");
        else if (gen.cost.breakpoints().front().p > gen.p_min + 1e-12)
            report(name + ": cost breakpoints must cover [p_min, p_max]");
    }
    for (Index e = 0; e < net.line_count(); ++e) {
        const auto& line = net.lines()[e];
        const std::string name = "line " + std::to_string(line.id);
        if (net.line_origin(e) == kNoIndex)
            report(name + ": dangling reference to bus " + std::to_string(line.origin));
        if (net.line_destination(e) == kNoIndex)
            report(name + ": dangling reference to bus " + std::to_string(line.destination));
        if (net.line_origin(e) != kNoIndex && net.line_origin(e) == net.line_destination(e))
            report(name + ": origin and destination coincide");
        if (!finite_all({line.g, line.b, line.b_ch, line.rating, line.rating_e})) report(name + ": non-finite parameter");
        if (!(line.rating > 0.0)) report(name + ": rating must be positive");
        if (!(line.rating_e >= line.rating)) report(name + ": emergency rating must be at least the rating");
    }
    for (const auto& k : net.contingencies()) {
        const bool exists = k.kind == OutageKind::Generator ? net.generator_index(k.element) != kNoIndex
                                                            : net.line_index(k.element) != kNoIndex;
        if (!exists)
            report("contingency " + k.label + ": unknown " +
                   (k.kind == OutageKind::Generator ? "generator " : "line ") + std::to_string(k.element));
    }
    {
        std::unordered_map<std::string, int> seen;
        for (const auto& k : net.contingencies())
            if (++seen[k.label] == 2) report("duplicate id: contingency " + k.label);
    }
    if (!net.penalty().imbalance.is_valid()) report("penalty: imbalance tiers must have positive widths and increasing prices");
    if (!net.penalty().overload.is_valid()) report("penalty: overload tiers must have positive widths and increasing prices");

    if (net.bus_count() > 0) {
        bool all_resolved = true;
        for (Index e = 0; e < net.line_count(); ++e)
            all_resolved &= net.line_origin(e) != kNoIndex && net.line_destination(e) != kNoIndex;
        if (all_resolved) {
            const auto comp = connected_components(net, std::vector<bool>(net.line_count(), true));
            if (std::any_of(comp.begin(), comp.end(), [](std::size_t c) { return c != 0; }))
                report("base-case network is not connected");
        }
    }
    if (const auto& prior = net.prior_point(); prior && !is_dimensioned(net, *prior))
        report("operating_point: dimensions do not match the network or reference angle is nonzero");
    return out;
}

OnlineSets post_contingency_sets(const Network& net, const Contingency& k) {
    OnlineSets sets = net.all_online();
    if (k.kind == OutageKind::Generator) {
        const Index g = net.generator_index(k.element);
        if (g == kNoIndex) throw DomainError("contingency " + k.label + ": unknown generator " + std::to_string(k.element));
        sets.generators[g] = false;
    } else {
        const Index e = net.line_index(k.element);
        if (e == kNoIndex) throw DomainError("contingency " + k.label + ": unknown line " + std::to_string(k.element));
        sets.lines[e] = false;
    }
    return sets;
}

std::vector<std::size_t> connected_components(const Network& net, const std::vector<bool>& online_lines) {
    // union-find, then relabel by smallest member
    std::vector<std::size_t> parent(net.bus_count());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&parent](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (Index e = 0; e < net.line_count(); ++e) {
        if (!online_lines[e]) continue;
        const Index a = net.line_origin(e), b = net.line_destination(e);
        if (a == kNoIndex || b == kNoIndex) continue;
        const auto ra = find(a), rb = find(b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    std::vector<std::size_t> label(net.bus_count());
    std::vector<std::size_t> root_label(net.bus_count(), kNoIndex);
    std::size_t next = 0;
    for (std::size_t n = 0; n < net.bus_count(); ++n) {
        const auto r = find(n);
        if (root_label[r] == kNoIndex) root_label[r] = next++;
        label[n] = root_label[r];
    }
    return label;
}

bool is_dimensioned(const Network& net, const OperatingPoint& point) {
    const auto nb = net.bus_count(), ng = net.generator_count();
    if (point.v.size() != nb || point.theta.size() != nb || point.b.size() != nb) return false;
    if (point.p.size() != ng || point.q.size() != ng) return false;
    return net.ref_bus() == kNoIndex || point.theta[net.ref_bus()] == 0.0;
}

}  // namespace scopf
