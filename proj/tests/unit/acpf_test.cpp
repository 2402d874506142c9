#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "corpus.hpp"
#include "oracles.hpp"
#include "scopf/acpf.hpp"

using namespace scopf;
namespace corpus = scopf::testing;
using namespace scopf::acpf;

namespace {

Line line(double g, double b, double b_ch = 0.0) { return Line{1, 1, 2, g, b, b_ch, 1.0, 1.0}; }

OperatingPoint pf_init(const Network& net) {
    auto x = flat_point(net);
    for (Index g = 1; g < net.generator_count(); ++g) x.p[g] = 0.2;
    return x;
}

}  // namespace

TEST(BranchFlows, EqualVoltagesCarryNothing) {
    const auto f = branch_flows(line(0.5, -5.0), 1.0, 0.0, 1.0, 0.0);
    EXPECT_NEAR(f.p_o, 0.0, 1e-15);
    EXPECT_NEAR(f.q_o, 0.0, 1e-15);
    EXPECT_NEAR(f.p_d, 0.0, 1e-15);
    EXPECT_NEAR(f.q_d, 0.0, 1e-15);
}

TEST(BranchFlows, LosslessLine) {
    const auto f = branch_flows(line(0.0, -10.0), 1.0, 0.1, 1.0, 0.0);
    EXPECT_NEAR(f.p_o, 10.0 * std::sin(0.1), 1e-15);
    EXPECT_NEAR(f.p_o, 0.99833, 1e-5);
    EXPECT_NEAR(f.p_d, -f.p_o, 1e-15);
}

TEST(BranchFlows, LossIdentityAndAntisymmetry) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> g(0.0, 5.0), b(-30.0, -0.5), v(0.8, 1.2), th(-0.8, 0.8), ch(0.0, 0.2);
    for (int t = 0; t < 2000; ++t) {
        const Line l = line(g(rng), b(rng), ch(rng));
        const double vo = v(rng), vd = v(rng), to = th(rng), td = th(rng);
        const auto f = branch_flows(l, vo, to, vd, td);
        const double loss = l.g * (vo * vo + vd * vd - 2 * vo * vd * std::cos(to - td));
        EXPECT_NEAR(f.p_o + f.p_d, loss, 1e-12);
        EXPECT_GE(loss, 0.0);
        const auto lossless = branch_flows(line(0.0, l.b, l.b_ch), vo, to, vd, td);
        EXPECT_NEAR(lossless.p_o + lossless.p_d, 0.0, 1e-12);
    }
}

TEST(BranchFlows, AgreeWithComplexCurrents) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const Line l = line(2.0 + u(rng), -10.0 + 3 * u(rng), 0.1 + 0.05 * u(rng));
        const double vo = 1 + 0.1 * u(rng), vd = 1 + 0.1 * u(rng), to = 0.5 * u(rng), td = 0.5 * u(rng);
        const std::complex<double> Vo = std::polar(vo, to), Vd = std::polar(vd, td), y(l.g, l.b), ych(0, l.b_ch / 2);
        const auto so = Vo * std::conj(y * (Vo - Vd) + ych * Vo);
        const auto sd = Vd * std::conj(y * (Vd - Vo) + ych * Vd);
        const auto f = branch_flows(l, vo, to, vd, td);
        EXPECT_NEAR(f.p_o, so.real(), 1e-12);
        EXPECT_NEAR(f.q_o, so.imag(), 1e-12);
        EXPECT_NEAR(f.p_d, sd.real(), 1e-12);
        EXPECT_NEAR(f.q_d, sd.imag(), 1e-12);
        const auto a = apparent_flows(f);
        EXPECT_NEAR(a.s_o, std::abs(so), 1e-12);
    }
}

TEST(BranchFlows, JacobianMatchesFiniteDifferences) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const Line l = line(1.0 + u(rng), -8.0 + u(rng), 0.1);
        double x[4] = {1 + 0.1 * u(rng), 0.3 * u(rng), 1 + 0.1 * u(rng), 0.3 * u(rng)};
        const auto J = branch_flow_jacobian(l, x[0], x[1], x[2], x[3]);
        for (int c = 0; c < 4; ++c) {
            const double h = 1e-6;
            double xp[4], xm[4];
            std::copy(x, x + 4, xp);
            std::copy(x, x + 4, xm);
            xp[c] += h;
            xm[c] -= h;
            const auto fp = branch_flows(l, xp[0], xp[1], xp[2], xp[3]);
            const auto fm = branch_flows(l, xm[0], xm[1], xm[2], xm[3]);
            const double d[4] = {(fp.p_o - fm.p_o) / (2 * h), (fp.q_o - fm.q_o) / (2 * h), (fp.p_d - fm.p_d) / (2 * h),
                                 (fp.q_d - fm.q_d) / (2 * h)};
            for (int r = 0; r < 4; ++r) EXPECT_NEAR(J[r][c], d[r], 1e-6 * (1 + std::abs(d[r])));
        }
    }
}

TEST(Mismatch, SimpleCases) {
    NetworkData d;
    d.ref_bus = 1;
    d.buses = {Bus{1}};
    d.buses[0].p_load = 0.3;
    d.generators = {Generator{1, 1, 0.0, 1.0, -1.0, 1.0, 0.0, CostFunction::linear(1.0)}};
    const Network single(d);
    auto x = flat_point(single);
    auto m = bus_mismatch(single, single.all_online(), x);
    EXPECT_NEAR(m.dp[0], -0.3, 1e-15);
    x.p[0] = 0.5;
    m = bus_mismatch(single, single.all_online(), x);
    EXPECT_NEAR(m.dp[0], 0.2, 1e-15);
    EXPECT_EQ(m.dq[0], 0.0);

    d.buses[0].p_load = 0.0;
    d.generators.clear();
    const Network empty(d);
    m = bus_mismatch(empty, empty.all_online(), flat_point(empty));
    EXPECT_EQ(m.dp[0], 0.0);
    EXPECT_EQ(m.dq[0], 0.0);
}

TEST(Mismatch, LosslessTwoBusBalances) {
    const auto net = corpus::two_bus_case(10.0 * std::sin(0.1));
    auto x = flat_point(net);
    x.theta[1] = -0.1;
    x.p[0] = 10.0 * std::sin(0.1);
    const auto m = bus_mismatch(net, net.all_online(), x);
    EXPECT_NEAR(m.dp[1], 0.0, 1e-9);
    EXPECT_NEAR(m.dp[0], 0.0, 1e-9);
}

TEST(Mismatch, AgreesWithComplexInjection) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto net = corpus::random_network(seed, {.buses = 8});
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-0.1, 0.1);
        auto x = flat_point(net);
        for (auto& v : x.v) v += u(rng);
        for (std::size_t n = 1; n < x.theta.size(); ++n) x.theta[n] = 3 * u(rng);
        for (auto& b : x.b) b = u(rng);
        for (auto& p : x.p) p = 1 + u(rng);
        for (auto& q : x.q) q = u(rng);
        const auto m = bus_mismatch(net, net.all_online(), x);
        std::vector<double> dp, dq;
        corpus::complex_mismatch(net, net.all_online(), x, dp, dq);
        for (Index n = 0; n < net.bus_count(); ++n) {
            EXPECT_NEAR(m.dp[n], dp[n], 1e-12);
            EXPECT_NEAR(m.dq[n], dq[n], 1e-12);
        }
    }
}

TEST(Mismatch, JacobianMatchesFiniteDifferences) {
    const auto net = corpus::random_network(4, {.buses = 6});
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    auto x = flat_point(net);
    for (auto& v : x.v) v += u(rng);
    for (auto& t : x.theta) t = u(rng);
    for (auto& b : x.b) b = u(rng);
    const auto online = net.all_online();
    const auto J = full_mismatch_jacobian(net, online, x);
    const auto nb = static_cast<Eigen::Index>(net.bus_count());
    const double h = 1e-6;
    for (Eigen::Index c = 0; c < 2 * nb; ++c) {
        auto xp = x, xm = x;
        auto& vp = c < nb ? xp.theta : xp.v;
        auto& vm = c < nb ? xm.theta : xm.v;
        vp[static_cast<std::size_t>(c % nb)] += h;
        vm[static_cast<std::size_t>(c % nb)] -= h;
        const auto mp = bus_mismatch(net, online, xp), mm = bus_mismatch(net, online, xm);
        for (Eigen::Index r = 0; r < nb; ++r) {
            const auto i = static_cast<std::size_t>(r);
            const double dp = (mp.dp[i] - mm.dp[i]) / (2 * h), dq = (mp.dq[i] - mm.dq[i]) / (2 * h);
            EXPECT_NEAR(J(r, c), dp, 1e-6 * (1 + std::abs(dp)));
            EXPECT_NEAR(J(nb + r, c), dq, 1e-6 * (1 + std::abs(dq)));
        }
    }
}

TEST(PowerFlow, TwoBusMatchesOracle) {
    NetworkData d = corpus::two_bus_case(0.5).data();
    d.buses[1].q_load = 0.1;
    const Network net(d);
    const auto types = default_bus_types(net, net.all_online(), flat_point(net));
    const auto pf = newton_powerflow(net, net.all_online(), types, flat_point(net));
    ASSERT_TRUE(pf.converged);
    const auto oracle = corpus::powerflow_oracle(net, types, flat_point(net), 41);
    ASSERT_TRUE(oracle.found);
    EXPECT_NEAR(pf.point.v[1], oracle.point.v[1], 1e-8);
    EXPECT_NEAR(pf.point.theta[1], oracle.point.theta[1], 1e-8);
    // slack picks up the load through a lossless line
    EXPECT_NEAR(pf.point.p[0], 0.5, 1e-8);
}

TEST(PowerFlow, ZeroLoadFlatStart) {
    NetworkData d = corpus::two_bus_case(0.0).data();
    const Network net(d);
    const auto x = flat_point(net);
    const auto pf = newton_powerflow(net, net.all_online(), default_bus_types(net, net.all_online(), x), x);
    ASSERT_TRUE(pf.converged);
    EXPECT_LE(pf.iterations, 2);
    EXPECT_NEAR(pf.point.v[1], 1.0, 1e-12);
    EXPECT_NEAR(pf.point.theta[1], 0.0, 1e-12);
}

TEST(PowerFlow, InfeasibleLoadDoesNotConverge) {
    const auto net = corpus::two_bus_case(100.0);
    const auto x = flat_point(net);
    const auto types = default_bus_types(net, net.all_online(), x);
    const auto pf = newton_powerflow(net, net.all_online(), types, x);
    EXPECT_FALSE(pf.converged);
    EXPECT_EQ(pf.point.v.size(), 2u);
    EXPECT_FALSE(corpus::powerflow_oracle(net, types, x, 41).found);
}

TEST(PowerFlow, RandomSmallNetworksMatchOracle) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const std::size_t n = 2 + seed % 3;
        const auto net = corpus::random_powerflow_case(seed, n);
        const auto x = pf_init(net);
        const auto types = default_bus_types(net, net.all_online(), x);
        ASSERT_TRUE(check_bus_types(net, net.all_online(), types).empty());
        const auto pf = newton_powerflow(net, net.all_online(), types, x);
        ASSERT_TRUE(pf.converged) << seed;
        EXPECT_LE(pf.max_mismatch, 1e-8);
        const auto oracle = corpus::powerflow_oracle(net, types, x);
        ASSERT_TRUE(oracle.found) << seed;
        for (Index b = 0; b < n; ++b) {
            EXPECT_NEAR(pf.point.v[b], oracle.point.v[b], 1e-8) << seed;
            EXPECT_NEAR(pf.point.theta[b], oracle.point.theta[b], 1e-8) << seed;
        }
    }
}

TEST(PowerFlow, ConvergedPointsBalanceEveryNonSlackBus) {
    const auto net = corpus::random_network(21, {.buses = 12});
    auto x = flat_point(net);
    double load = 0.0;
    for (const auto& b : net.buses()) load += b.p_load;
    for (Index g = 1; g < net.generator_count(); ++g) x.p[g] = load / static_cast<double>(net.generator_count());
    const auto types = default_bus_types(net, net.all_online(), x);
    const auto pf = newton_powerflow(net, net.all_online(), types, x);
    ASSERT_TRUE(pf.converged);
    const auto m = bus_mismatch(net, net.all_online(), pf.point);
    for (Index n = 0; n < net.bus_count(); ++n) {
        // generator outputs are back-computed, so every bus closes
        EXPECT_NEAR(m.dp[n], 0.0, 1e-8);
        EXPECT_NEAR(m.dq[n], 0.0, 1e-8);
    }
}

TEST(BusTypes, Checks) {
    const auto net = corpus::two_bus_case();
    auto types = default_bus_types(net, net.all_online(), flat_point(net));
    EXPECT_TRUE(check_bus_types(net, net.all_online(), types).empty());
    types.type[1] = BusType::PV;  // no generator at bus 2
    EXPECT_FALSE(check_bus_types(net, net.all_online(), types).empty());
    types.type[1] = BusType::Slack;
    EXPECT_FALSE(check_bus_types(net, net.all_online(), types).empty());
}

TEST(SplitInProportion, Ranges) {
    const auto s = split_in_proportion(1.5, {0.0, 1.0}, {1.0, 3.0});
    EXPECT_NEAR(s[0], 0.5 / 3.0, 1e-15);
    EXPECT_NEAR(s[1], 1.0 + 1.0 / 3.0, 1e-15);
    const auto e = split_in_proportion(2.0, {1.0, 1.0}, {1.0, 1.0});
    EXPECT_DOUBLE_EQ(e[0], 1.0);
    EXPECT_DOUBLE_EQ(e[1], 1.0);
}
