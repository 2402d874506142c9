#include "corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "scopf/io.hpp"

namespace scopf::testing {

namespace {

Line make_line(int id, int from, int to, double r, double x, double b_ch, double rating, double rating_e) {
    const double z2 = r * r + x * x;
    return Line{id, from, to, r / z2, -x / z2, b_ch, rating, rating_e};
}

// Lines whose removal disconnects the network (Tarjan, iterative enough for test sizes).
std::set<std::size_t> bridges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::set<std::size_t> out;
    for (std::size_t skip = 0; skip < edges.size(); ++skip) {
        std::vector<std::size_t> parent(n);
        for (std::size_t i = 0; i < n; ++i) parent[i] = i;
        auto find = [&](std::size_t a) {
            while (parent[a] != a) a = parent[a] = parent[parent[a]];
            return a;
        };
        for (std::size_t e = 0; e < edges.size(); ++e)
            if (e != skip) parent[find(edges[e].first)] = find(edges[e].second);
        std::size_t roots = 0;
        for (std::size_t i = 0; i < n; ++i) roots += find(i) == i;
        if (roots > 1) out.insert(skip);
    }
    return out;
}

}  // namespace

Network random_network(std::uint64_t seed, const CorpusOptions& opt) {
    std::mt19937_64 rng(seed);
    auto uni = [&rng](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    auto pick = [&rng](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

    const std::size_t n = std::max<std::size_t>(opt.buses, 2);
    NetworkData d;
    d.ref_bus = 1;

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t p = pick(i);
        edges.emplace_back(p, i);
        seen.insert({p, i});
    }
    const auto extra = static_cast<std::size_t>(std::lround(opt.extra_line_ratio * static_cast<double>(n)));
    for (std::size_t tries = 0, added = 0; added < extra && tries < 50 * n; ++tries) {
        std::size_t a = pick(n), b = pick(n);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (!seen.insert({a, b}).second) continue;
        edges.emplace_back(a, b);
        ++added;
    }

    const std::size_t n_gen = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(opt.generator_share * static_cast<double>(n))), 2, n);
    std::vector<std::size_t> gen_buses{0};
    while (gen_buses.size() < n_gen) {
        const std::size_t b = pick(n);
        if (std::find(gen_buses.begin(), gen_buses.end(), b) == gen_buses.end()) gen_buses.push_back(b);
    }

    const double mean_load = opt.load_pu * std::min(1.0, 10.0 / static_cast<double>(n));
    double total_load = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Bus bus;
        bus.id = static_cast<int>(i + 1);
        bus.vmin = 0.94;
        bus.vmax = 1.06;
        bus.vmin_e = 0.9;
        bus.vmax_e = 1.1;
        const bool has_gen = std::find(gen_buses.begin(), gen_buses.end(), i) != gen_buses.end();
        bus.p_load = has_gen ? mean_load * uni(0.0, 0.3) : mean_load * uni(0.5, 1.5);
        bus.q_load = bus.p_load * uni(0.1, 0.4);
        total_load += bus.p_load;
        if (uni(0.0, 1.0) < 0.3) {
            bus.b_min = 0.0;
            bus.b_max = uni(0.05, 0.2);
        }
        d.buses.push_back(bus);
    }

    for (std::size_t k = 0; k < gen_buses.size(); ++k) {
        Generator g;
        g.id = static_cast<int>(k + 1);
        g.bus = static_cast<int>(gen_buses[k] + 1);
        g.p_max = opt.reserve_factor * total_load / static_cast<double>(n_gen) * uni(0.7, 1.3);
        g.p_min = uni(0.0, 1.0) < 0.3 ? 0.1 * g.p_max : 0.0;
        g.q_max = std::max(0.2, g.p_max * uni(0.5, 1.0));
        g.q_min = -0.5 * g.q_max;
        g.droop = g.p_max * uni(0.5, 2.0);
        // $/MWh on a 100 MVA base
        const double c1 = uni(1.0, 5.0), c2 = c1 + uni(0.5, 4.0);
        g.cost = CostFunction({{g.p_min, 100.0 * c1}, {g.p_min + 0.5 * (g.p_max - g.p_min), 100.0 * c2}});
        d.generators.push_back(std::move(g));
    }

    for (std::size_t e = 0; e < edges.size(); ++e) {
        const double x = uni(0.05, 0.2);
        d.lines.push_back(make_line(static_cast<int>(e + 1), static_cast<int>(edges[e].first + 1),
                                    static_cast<int>(edges[e].second + 1), x * uni(0.05, 0.15), x, uni(0.0, 0.04),
                                    opt.rating_pu, 1.1 * opt.rating_pu));
    }

    if (opt.generator_contingencies)
        for (const auto& g : d.generators)
            d.contingencies.push_back({"G" + std::to_string(g.id), OutageKind::Generator, g.id});
    if (opt.line_contingencies) {
        const auto br = bridges(n, edges);
        for (std::size_t e = 0; e < edges.size(); ++e)
            if (opt.bridge_contingencies || !br.count(e))
                d.contingencies.push_back({"L" + std::to_string(e + 1), OutageKind::Line, static_cast<int>(e + 1)});
    }
    return Network(std::move(d));
}

std::vector<Network> acceptance_corpus() {
    std::vector<Network> out;
    const std::size_t sizes[] = {5, 6, 8, 10, 12, 15, 18, 22, 26, 30};
    for (std::size_t i = 0; i < 10; ++i) {
        CorpusOptions opt;
        opt.buses = sizes[i];
        opt.bridge_contingencies = i % 3 == 2;
        out.push_back(random_network(1000 + i, opt));
    }
    return out;
}

Network random_powerflow_case(std::uint64_t seed, std::size_t buses) {
    std::mt19937_64 rng(seed);
    auto uni = [&rng](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    NetworkData d;
    d.ref_bus = 1;
    for (std::size_t i = 0; i < buses; ++i) {
        Bus b{static_cast<int>(i + 1), 0.8, 1.2, 0.8, 1.2};
        if (i > 0) {
            b.p_load = uni(0.05, 0.4);
            b.q_load = uni(-0.05, 0.15);
        }
        d.buses.push_back(b);
    }
    d.generators.push_back(Generator{1, 1, 0.0, 5.0, -5.0, 5.0, 1.0, CostFunction::linear(100.0)});
    if (buses > 2 && uni(0.0, 1.0) < 0.5) {
        Generator g{2, static_cast<int>(buses), 0.0, 1.0, -1.0, 1.0, 1.0, CostFunction::linear(200.0)};
        d.generators.push_back(g);
    }
    int id = 1;
    for (std::size_t i = 1; i < buses; ++i) {
        const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
        const double x = uni(0.05, 0.3);
        d.lines.push_back(make_line(id++, static_cast<int>(parent + 1), static_cast<int>(i + 1), x * uni(0.0, 0.2), x,
                                    uni(0.0, 0.05), 5.0, 5.0));
    }
    if (buses > 2) {
        const double x = uni(0.05, 0.3);
        d.lines.push_back(make_line(id++, 2, static_cast<int>(buses), x * uni(0.0, 0.2), x, uni(0.0, 0.05), 5.0, 5.0));
    }
    return Network(std::move(d));
}

Network two_bus_case(double load_pu, double marginal_cost) {
    NetworkData d;
    d.ref_bus = 1;
    d.buses = {Bus{1, 0.9, 1.1, 0.9, 1.1, 0.0, 0.0, 0.0, 0.0}, Bus{2, 0.9, 1.1, 0.9, 1.1, load_pu, 0.0, 0.0, 0.0}};
    d.generators = {Generator{1, 1, 0.0, 2.0, -2.0, 2.0, 1.0, CostFunction::linear(marginal_cost)}};
    d.lines = {Line{1, 1, 2, 0.0, -10.0, 0.0, 5.0, 5.0}};
    return Network(std::move(d));
}

Network hedging_case() {
    NetworkData d;
    d.ref_bus = 1;
    d.buses = {Bus{1, 0.95, 1.05, 0.9, 1.1, 0.0, 0.0, 0.0, 0.0}, Bus{2, 0.95, 1.05, 0.9, 1.1, 1.0, 0.2, 0.0, 0.0}};
    d.generators = {
        Generator{1, 1, 0.0, 2.0, -1.0, 1.0, 1.0, CostFunction::linear(100.0)},
        Generator{2, 2, 0.0, 0.5, -0.5, 0.5, 5.0, CostFunction::linear(500.0)},
    };
    d.lines = {make_line(1, 1, 2, 0.01, 0.1, 0.0, 0.6, 0.65), make_line(2, 1, 2, 0.01, 0.1, 0.0, 0.6, 0.65)};
    d.contingencies = {
        {"L1", OutageKind::Line, 1},
        {"L2", OutageKind::Line, 2},
        {"G2", OutageKind::Generator, 2},
    };
    return Network(std::move(d));
}

std::filesystem::path write_instance_file(const Network& net, const std::filesystem::path& dir, const std::string& name) {
    const auto path = dir / (name + ".json");
    io::write_file(path, io::write_instance(net));
    return path;
}

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("scopf_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace scopf::testing
