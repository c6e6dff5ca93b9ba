#include "doctest.h"
#include "helpers.hpp"

#include "opdyn/dynamics.hpp"

#include <cmath>

using namespace opdyn;
using namespace testing;

namespace {

InfluenceKernel kernel_of(KernelShape shape) { return InfluenceKernel{shape, {}, std::nullopt}; }

Schedule sync_schedule(std::uint64_t seed = 1, unsigned workers = 1) {
    Schedule s;
    s.seed = seed;
    s.workers = workers;
    return s;
}

} // namespace

TEST_CASE("full averaging moves every agent to its neighbors' mean") {
    const auto g = random_connected_graph(40, 0.1, 3);
    const OpinionSnapshot s{0, uniform_opinions(40, 4)};
    const auto next = step(g, s, kernel_of(LinearPositive{1.0}), AlwaysActive{}, sync_schedule(), 0);
    for (AgentId i = 0; i < 40; ++i) CHECK(next[i] == doctest::Approx(neighbor_mean(g, s.opinions, i)).epsilon(1e-12));
}

TEST_CASE("zero kernel leaves the snapshot unchanged") {
    const auto g = random_connected_graph(30, 0.2, 5);
    const OpinionSnapshot s{0, uniform_opinions(30, 6)};
    const auto next = step(g, s, kernel_of(BoundedConfidence{0.0, 0.5}), AlwaysActive{}, sync_schedule(), 0);
    CHECK(next.opinions == s.opinions);
}

TEST_CASE("three-node path, half gain") {
    const auto g = path_graph(3);
    const OpinionSnapshot s{0, vec({0.0, 0.5, 1.0})};
    const auto next = step(g, s, kernel_of(LinearPositive{0.5}), AlwaysActive{}, sync_schedule(), 0);
    // Ends see 0.5 and move halfway; the middle sees (0 + 1) / 2 and stays.
    CHECK(next[0] == doctest::Approx(0.25));
    CHECK(next[1] == doctest::Approx(0.5));
    CHECK(next[2] == doctest::Approx(0.75));
}

TEST_CASE("run with one observation applies exactly one step") {
    const auto g = random_connected_graph(25, 0.2, 7);
    const OpinionSnapshot s{3, uniform_opinions(25, 8)};
    const auto k = kernel_of(ModeratedPositive{0.3, 0.5});
    const ActivationModel act = AbsKernelProportional{3.0};
    const auto sched = sync_schedule(9);
    const auto traj = run(g, s, k, act, sched, 1);
    REQUIRE(traj.snapshots.size() == 2);
    CHECK(traj.snapshots[0].opinions == s.opinions);
    CHECK(traj.snapshots[1].opinions == step(g, s, k, act, sched, 0).opinions);
    CHECK(traj.snapshots[1].time_index == 4);
    CHECK(traj.provenance.graph_hash == g.hash());
    CHECK_THROWS_AS(run(g, s, k, act, sched, 0), ConfigError);
}

TEST_CASE("positive linear kernel contracts to consensus") {
    const auto g = random_connected_graph(100, 0.05, 10);
    const OpinionSnapshot s{0, uniform_opinions(100, 11)};
    const auto traj = run(g, s, kernel_of(LinearPositive{0.5}), AlwaysActive{}, sync_schedule(), 200);
    for (std::size_t t = 1; t < traj.snapshots.size(); ++t) {
        CHECK(spread(traj.snapshots[t]) <= spread(traj.snapshots[t - 1]));
    }
    CHECK(spread(traj.snapshots.back()) < 1e-6);
}

TEST_CASE("positive kernels never expand the spread") {
    const std::vector<KernelShape> shapes{ModeratedPositive{0.3, 0.5}, BoundedConfidence{0.2, 0.5},
                                          RelaxedBoundedConfidence{0.2, 0.5, 0.05}};
    for (const auto& shape : shapes) {
        const auto g = random_connected_graph(60, 0.08, 12);
        const OpinionSnapshot s{0, uniform_opinions(60, 13)};
        const auto traj = run(g, s, kernel_of(shape), AbsKernelProportional{2.0}, sync_schedule(14), 30);
        for (std::size_t t = 1; t < traj.snapshots.size(); ++t) {
            CHECK(spread(traj.snapshots[t]) <= spread(traj.snapshots[t - 1]));
        }
    }
}

TEST_CASE("all-stubborn population is frozen") {
    const auto g = random_connected_graph(30, 0.2, 15);
    const OpinionSnapshot s{0, uniform_opinions(30, 16)};
    const std::vector<KernelShape> shapes{LinearPositive{1.0}, LinearNegative{-1.0},
                                          CombinedPositiveNegative{}};
    for (const auto& shape : shapes) {
        InfluenceKernel k{shape, std::vector<bool>(30, true), std::nullopt};
        for (auto mode : {UpdateMode::Synchronous, UpdateMode::AsynchronousUniform}) {
            for (auto src : {InfluenceSource::NeighborMean, InfluenceSource::RandomNeighbor}) {
                Schedule sched = sync_schedule(17);
                sched.mode = mode;
                sched.source = src;
                const auto traj = run(g, s, k, AlwaysActive{}, sched, 5);
                CHECK(traj.snapshots.back().opinions == s.opinions);
            }
        }
    }
}

TEST_CASE("combined positive-negative kernel can polarize") {
    const auto g = random_connected_graph(100, 0.06, 18);
    const OpinionSnapshot s{0, uniform_opinions(100, 19, 0.1, 0.9)};
    const auto traj = run(g, s, kernel_of(CombinedPositiveNegative{}), AlwaysActive{}, sync_schedule(20), 50);
    CHECK(spread(traj.snapshots.back()) > spread(s));
}

TEST_CASE("prejudiced agents with zero susceptibility sit at their anchor") {
    const auto g = random_connected_graph(20, 0.3, 21);
    const OpinionSnapshot s{0, uniform_opinions(20, 22)};
    InfluenceKernel k{LinearPositive{0.8}, {}, Prejudice{Eigen::VectorXd::Constant(20, 0.3), Eigen::VectorXd::Zero(20)}};
    const auto next = step(g, s, k, AlwaysActive{}, sync_schedule(), 0);
    for (AgentId i = 0; i < 20; ++i) CHECK(next[i] == doctest::Approx(0.3));
}

TEST_CASE("clamping keeps opinions in range; disabling it lets negative influence escape") {
    const auto g = path_graph(2);
    const OpinionSnapshot s{0, vec({0.1, 0.9})};
    auto sched = sync_schedule();
    const auto clamped = step(g, s, kernel_of(LinearNegative{-1.0}), AlwaysActive{}, sched, 0);
    CHECK(clamped[0] == 0.0);
    CHECK(clamped[1] == 1.0);
    sched.clamp = false;
    const auto free = step(g, s, kernel_of(LinearNegative{-1.0}), AlwaysActive{}, sched, 0);
    CHECK(free[0] == doctest::Approx(-0.7));
    CHECK(free[1] == doctest::Approx(1.7));
}

TEST_CASE("trajectories are identical for any worker count") {
    const auto g = random_connected_graph(500, 0.02, 23);
    const OpinionSnapshot s{0, uniform_opinions(500, 24)};
    const auto k = kernel_of(CombinedPositiveNegative{});
    for (auto src : {InfluenceSource::NeighborMean, InfluenceSource::RandomNeighbor}) {
        auto one = sync_schedule(25, 1);
        one.source = src;
        auto many = sync_schedule(25, 7);
        many.source = src;
        const auto a = run(g, s, k, AbsKernelProportional{2.0}, one, 10);
        const auto b = run(g, s, k, AbsKernelProportional{2.0}, many, 10);
        for (std::size_t t = 0; t < a.snapshots.size(); ++t) CHECK(a.snapshots[t].opinions == b.snapshots[t].opinions);
    }
}

TEST_CASE("same seed, same trajectory; different seed, different trajectory") {
    const auto g = random_connected_graph(200, 0.03, 26);
    const OpinionSnapshot s{0, uniform_opinions(200, 27)};
    Schedule a = sync_schedule(28);
    a.mode = UpdateMode::AsynchronousUniform;
    a.source = InfluenceSource::RandomNeighbor;
    Schedule b = a;
    b.seed = 29;
    const auto k = kernel_of(BoundedConfidence{0.3, 0.5});
    const auto t1 = run(g, s, k, AlwaysActive{}, a, 5);
    const auto t2 = run(g, s, k, AlwaysActive{}, a, 5);
    const auto t3 = run(g, s, k, AlwaysActive{}, b, 5);
    CHECK(t1.snapshots.back().opinions == t2.snapshots.back().opinions);
    CHECK(t1.snapshots.back().opinions != t3.snapshots.back().opinions);
}

TEST_CASE("spread and clusters") {
    CHECK(spread(vec({0.4, 0.4, 0.4})) == 0.0);
    CHECK(spread(vec({0.0, 0.3, 1.0})) == 1.0);
    CHECK(spread(vec({0.25, 0.5, 0.75})) == 0.5);
    CHECK_THROWS_AS(spread(Eigen::VectorXd()), ModelError);
    const auto c = opinion_clusters(vec({0.1, 0.11, 0.5, 0.52, 0.9}), 0.05);
    REQUIRE(c.size() == 3);
    CHECK(c[0].size == 2);
    CHECK(c[1].lo == 0.5);
    CHECK(c[1].hi == 0.52);
    CHECK(c[2].size == 1);
}

TEST_CASE("schedule validation") {
    Schedule s;
    s.steps_per_observation = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.steps_per_observation = 1;
    s.workers = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}
