#include <benchmark/benchmark.h>

#include <random>

#include "corpus.hpp"
#include "scopf/acpf.hpp"
#include "scopf/base_opf.hpp"
#include "scopf/contingency.hpp"
#include "scopf/io.hpp"

using namespace scopf;
namespace corpus = scopf::testing;

namespace {

BaseState dispatched(const Network& net) {
    auto x = acpf::flat_point(net);
    double load = 0.0, cap = 0.0;
    for (const auto& b : net.buses()) load += b.p_load;
    for (const auto& g : net.generators()) cap += g.p_max;
    for (Index g = 0; g < net.generator_count(); ++g) x.p[g] = net.generators()[g].p_max * load / cap;
    return acpf::newton_powerflow(net, net.all_online(), acpf::default_bus_types(net, net.all_online(), x), x).point;
}

void BranchFlows(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    const Line line{1, 1, 2, 1.0, -10.0, 0.05, 1.0, 1.0};
    const double vo = 1 + u(rng), vd = 1 + u(rng), to = u(rng), td = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(acpf::branch_flows(line, vo, to, vd, td));
}
BENCHMARK(BranchFlows);

void NewtonPowerFlow(benchmark::State& state) {
    const auto net = corpus::random_network(3, {.buses = static_cast<std::size_t>(state.range(0))});
    auto x = acpf::flat_point(net);
    for (Index g = 1; g < net.generator_count(); ++g) x.p[g] = 0.2;
    const auto types = acpf::default_bus_types(net, net.all_online(), x);
    for (auto _ : state) benchmark::DoNotOptimize(acpf::newton_powerflow(net, net.all_online(), types, x));
}
BENCHMARK(NewtonPowerFlow)->Arg(10)->Arg(30)->Arg(100);

void BaseObjective(benchmark::State& state) {
    const auto net = corpus::random_network(4, {.buses = static_cast<std::size_t>(state.range(0))});
    const auto x = dispatched(net);
    for (auto _ : state) benchmark::DoNotOptimize(base_objective(net, x, 1e-3));
}
BENCHMARK(BaseObjective)->Arg(10)->Arg(30)->Arg(100);

void ContingencySolve(benchmark::State& state) {
    const auto net = corpus::random_network(5, {.buses = static_cast<std::size_t>(state.range(0))});
    const auto base = dispatched(net);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_contingency(net, base, net.contingencies()[i]));
        i = (i + 1) % net.contingencies().size();
    }
}
BENCHMARK(ContingencySolve)->Arg(10)->Arg(30);

void SolveBase(benchmark::State& state) {
    const auto net = corpus::random_network(6, {.buses = static_cast<std::size_t>(state.range(0))});
    for (auto _ : state) benchmark::DoNotOptimize(solve_base(net));
}
BENCHMARK(SolveBase)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void WriteBaseSolution(benchmark::State& state) {
    const auto net = corpus::random_network(7, {.buses = 100});
    const auto x = dispatched(net);
    for (auto _ : state) benchmark::DoNotOptimize(io::write_base_solution(net, x));
}
BENCHMARK(WriteBaseSolution);

}  // namespace

BENCHMARK_MAIN();
