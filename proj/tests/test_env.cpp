#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hmec/env.hpp"

using namespace hmec;

TEST(InitWorld, DeskRosterHasAllUesAndNodes) {
    Scenario sc;
    const auto w = init_world(sc, 50, test::desk_nodes(sc), 7);
    EXPECT_EQ(w.n_ues(), 50u);
    EXPECT_EQ(w.n_nodes(), 4u);
    EXPECT_EQ(w.nodes[0].position, (Point2{25, 25}));
    for (const auto& ue : w.ues) {
        EXPECT_TRUE(sc.zone().contains(ue.position));
        EXPECT_GE(ue.task.cycles, 0.5e9);
        EXPECT_LE(ue.task.cycles, 1.5e9);
        EXPECT_GE(ue.task.bits, 1e5);
        EXPECT_LE(ue.task.bits, 1e6);
        EXPECT_EQ(ue.task.weight, 1.0);
    }
}

TEST(InitWorld, SameSeedSameWorld) {
    Scenario sc;
    std::vector<NodeSpec> gs{test::desk_nodes(sc)[0]};
    EXPECT_TRUE(init_world(sc, 1, gs, 0) == init_world(sc, 1, gs, 0));
}

TEST(InitWorld, SeedsDiffer) {
    Scenario sc;
    const auto a = init_world(sc, 10, test::desk_nodes(sc), 1);
    const auto b = init_world(sc, 10, test::desk_nodes(sc), 2);
    bool differ = false;
    for (std::size_t i = 0; i < 10; ++i) differ = differ || !(a.ues[i].position == b.ues[i].position);
    EXPECT_TRUE(differ);
}

TEST(InitWorld, RejectsBadInputs) {
    Scenario sc;
    auto nodes = test::desk_nodes(sc);
    EXPECT_THROW(init_world(sc, 0, nodes, 1), std::invalid_argument);
    EXPECT_THROW(init_world(sc, 3, {}, 1), std::invalid_argument);
    nodes[1].position = {10, 10}; // GV off the road
    EXPECT_THROW(init_world(sc, 3, nodes, 1), std::invalid_argument);
    nodes = test::desk_nodes(sc);
    nodes[0].capacity_cps = 0;
    EXPECT_THROW(init_world(sc, 3, nodes, 1), std::invalid_argument);
}

TEST(Scenario, ValidateRejectsDegenerateValues) {
    Scenario sc;
    EXPECT_NO_THROW(sc.validate());
    Scenario a = sc;
    a.zone_width = 0;
    EXPECT_THROW(a.validate(), std::invalid_argument);
    Scenario b = sc;
    b.road = {0, 0, 1};
    EXPECT_THROW(b.validate(), std::invalid_argument);
    Scenario c = sc;
    c.bandwidth_hz = -1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Mobility, DisplacementBoundedBySpeedTimesEpoch) {
    Scenario sc; // 1 m/s, 3 s epochs
    auto w = init_world(sc, 40, test::desk_nodes(sc), 3);
    Rng rng = make_rng(3, 1);
    for (int t = 0; t < 200; ++t) {
        const auto next = step_mobility(w, rng);
        for (std::size_t i = 0; i < w.n_ues(); ++i) {
            EXPECT_LE(distance(w.ues[i].position, next.ues[i].position), 3.0 + 1e-9);
            EXPECT_LE(norm(next.ues[i].velocity), sc.ue_max_speed + 1e-12);
        }
        EXPECT_EQ(next.epoch, w.epoch + 1);
        w = next;
    }
}

TEST(Mobility, ZeroSpeedIsFixedPoint) {
    Scenario sc;
    sc.ue_max_speed = 0;
    const auto w = init_world(sc, 10, test::desk_nodes(sc), 4);
    Rng rng = make_rng(4, 1);
    const auto next = step_mobility(w, rng);
    for (std::size_t i = 0; i < w.n_ues(); ++i) EXPECT_EQ(next.ues[i].position, w.ues[i].position);
}

TEST(Mobility, StaysInsideZoneOverLongRuns) {
    Scenario sc;
    sc.ue_max_speed = 5;
    auto w = init_world(sc, 20, test::desk_nodes(sc), 5);
    Rng rng = make_rng(5, 1);
    for (int t = 0; t < 1000; ++t) {
        w = step_mobility(w, rng);
        for (const auto& ue : w.ues) ASSERT_TRUE(sc.zone().contains(ue.position));
    }
}

TEST(Mobility, TrajectoryIsDeterministic) {
    Scenario sc;
    auto a = init_world(sc, 10, test::desk_nodes(sc), 6);
    auto b = a;
    Rng ra = make_rng(6, 1), rb = make_rng(6, 1);
    for (int t = 0; t < 50; ++t) {
        a = step_mobility(a, ra);
        b = step_mobility(b, rb);
    }
    EXPECT_TRUE(a == b);
}

TEST(Mobility, FixedChurnKeepsTasks) {
    Scenario sc;
    sc.churn = TaskChurn::Fixed;
    const auto w = init_world(sc, 5, test::desk_nodes(sc), 8);
    Rng rng = make_rng(8, 1);
    const auto next = step_mobility(w, rng);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(next.ues[i].task.cycles, w.ues[i].task.cycles);
}

TEST(ResizeUes, GrowsAndShrinks) {
    Scenario sc;
    const auto w = init_world(sc, 5, test::desk_nodes(sc), 9);
    Rng rng = make_rng(9, 1);
    const auto big = resize_ues(w, 12, rng);
    EXPECT_EQ(big.n_ues(), 12u);
    EXPECT_EQ(big.fading.size(), 12u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(big.ues[i].position, w.ues[i].position);
    const auto small = resize_ues(big, 3, rng);
    EXPECT_EQ(small.n_ues(), 3u);
    EXPECT_EQ(small.fading.size(), 3u);
}

TEST(Channel, DecreasesWithDistance) {
    NodeSpec gs;
    gs.position = {0, 0};
    ChannelModel ch;
    double prev = 2.0;
    for (double d = 1.0; d < 80.0; d *= 1.3) {
        const double g = channel_gain({d, 0}, gs, ch);
        EXPECT_LT(g, prev);
        EXPECT_GT(g, 0.0);
        prev = g;
    }
    EXPECT_LT(channel_gain({20, 0}, gs, ch), channel_gain({10, 0}, gs, ch));
}

TEST(Channel, ClampsToOneAtZeroDistance) {
    NodeSpec gs;
    gs.position = {5, 5};
    EXPECT_EQ(channel_gain({5, 5}, gs, ChannelModel{}), 1.0);
}

TEST(Channel, LogDistanceAtTenMetres) {
    // Exponent 2, reference gain g0 at 1 m: g(10 m) = g0 * 10^-2.
    NodeSpec uav;
    uav.kind = NodeKind::UAV;
    uav.position = {0, 0};
    uav.altitude_m = 0;
    ChannelModel ch;
    EXPECT_NEAR(channel_gain({10, 0}, uav, ch), ch.ref_gain / 100.0, 1e-18);
    // Altitude enters the 3-D distance: ground offset 10, height 10.
    uav.altitude_m = 10;
    EXPECT_NEAR(channel_gain({10, 0}, uav, ch), ch.ref_gain / 200.0, 1e-18);
}

TEST(Channel, RayleighFadingIsSeededAndOptional) {
    Scenario sc;
    EXPECT_EQ(init_world(sc, 4, test::desk_nodes(sc), 1).fading[0][0], 1.0);
    sc.channel.rayleigh = true;
    const auto a = init_world(sc, 4, test::desk_nodes(sc), 1);
    const auto b = init_world(sc, 4, test::desk_nodes(sc), 1);
    EXPECT_EQ(a.fading, b.fading);
    EXPECT_NE(a.fading[0][0], 1.0);
}

TEST(LinkRate, ShannonFixtures) {
    Scenario sc;
    sc.bandwidth_hz = 1e6;
    sc.tx_power_watts = 1.0;
    sc.noise_watts = 1.0;
    EXPECT_DOUBLE_EQ(link_rate(3.0, sc), 2e6);
    EXPECT_DOUBLE_EQ(link_rate(15.0, sc), 4e6);
    EXPECT_EQ(link_rate(0.0, sc), 0.0);
}

TEST(LinkRate, IncreasesWithGain) {
    Scenario sc;
    double prev = 0.0;
    for (double g = 1e-9; g <= 1.0; g *= 3) {
        const double r = link_rate(g, sc);
        EXPECT_GT(r, prev);
        prev = r;
    }
}
