#include "doctest.h"
#include "helpers.hpp"

#include "opdyn/core.hpp"

#include <cmath>

using namespace opdyn;
using namespace testing;

TEST_CASE("neighborhood stats: two-point neighborhood") {
    const auto g = star_graph(2);
    const OpinionSnapshot s{1, vec({0.9, 0.2, 0.4})};
    const auto st = neighborhood_stats(g, s, 0);
    CHECK(st.mean == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(st.std == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(st.degree == 2);
}

TEST_CASE("neighborhood stats: constant neighborhood has exact mean and zero spread") {
    const auto g = star_graph(3);
    const OpinionSnapshot s{1, vec({0.1, 0.7, 0.7, 0.7})};
    const auto st = neighborhood_stats(g, s, 0);
    CHECK(st.mean == 0.7);
    CHECK(st.std == 0.0);
}

TEST_CASE("neighborhood stats: {0, 0.5, 1}") {
    const auto g = star_graph(3);
    const OpinionSnapshot s{1, vec({0.3, 0.0, 0.5, 1.0})};
    const auto st = neighborhood_stats(g, s, 0);
    // Squared deviations 0.25, 0, 0.25 over three neighbors: variance 1/6.
    const double oracle = std::sqrt((0.25 + 0.0 + 0.25) / 3.0);
    CHECK(oracle == doctest::Approx(0.408248290463863));
    CHECK(st.mean == doctest::Approx(0.5));
    CHECK(st.std == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("neighborhood stats: isolated agent is an error") {
    const auto g = graph_of(3, {{0, 1}});
    const OpinionSnapshot s{1, vec({0.1, 0.2, 0.3})};
    CHECK_THROWS_AS(neighborhood_stats(g, s, 2), ModelError);
}

TEST_CASE("neighborhood stats: mean invariant under neighbor permutation") {
    auto rng = Rng::stream(11);
    for (int trial = 0; trial < 50; ++trial) {
        const AgentId k = 2 + static_cast<AgentId>(rng.below(30));
        const auto g = star_graph(k);
        Eigen::VectorXd x = uniform_opinions(k + 1, 100 + trial);
        const double before = neighborhood_stats(g, x, 0).mean;
        // Reverse the leaf opinions: same multiset, different neighbor order.
        x.tail(k).reverseInPlace();
        CHECK(neighborhood_stats(g, x, 0).mean == doctest::Approx(before).epsilon(1e-14));
    }
}

TEST_CASE("neighborhood stats: std zero iff all neighbors equal, and bounded by 0.5") {
    auto rng = Rng::stream(12);
    for (int trial = 0; trial < 200; ++trial) {
        const AgentId k = 1 + static_cast<AgentId>(rng.below(8));
        const auto g = star_graph(k);
        Eigen::VectorXd x(k + 1);
        const bool equal = trial % 3 == 0;
        const double common = rng.uniform();
        for (AgentId i = 0; i <= k; ++i) x[i] = equal ? common : (rng.bernoulli(0.5) ? 0.0 : 1.0);
        if (!equal && k > 1) x[1] = 0.0, x[2] = 1.0;
        const auto st = neighborhood_stats(g, x, 0);
        const bool all_equal = (x.tail(k).array() == x[1]).all();
        CHECK((st.std == 0.0) == all_equal);
        CHECK(st.std <= 0.5);
    }
}

TEST_CASE("assign_group boundaries") {
    CHECK(assign_group(0.19) == Group::SL);
    CHECK(assign_group(0.2) == Group::L);
    CHECK(assign_group(1.0) == Group::SC);
    CHECK(assign_group(0.0) == Group::SL);
    CHECK(assign_group(0.4) == Group::M);
    CHECK(assign_group(0.6) == Group::C);
    CHECK(assign_group(0.8) == Group::SC);
    CHECK(assign_group(std::nextafter(0.8, 0.0)) == Group::C);
    CHECK_THROWS_AS(assign_group(-0.01), ModelError);
    CHECK_THROWS_AS(assign_group(1.01), ModelError);
    CHECK_THROWS_AS(assign_group(std::nan("")), ModelError);
}

TEST_CASE("groups are totally ordered and mirror") {
    CHECK(Group::SL < Group::L);
    CHECK(Group::L < Group::M);
    CHECK(Group::M < Group::C);
    CHECK(Group::C < Group::SC);
    CHECK(mirror(Group::SL) == Group::SC);
    CHECK(mirror(Group::L) == Group::C);
    CHECK(mirror(Group::M) == Group::M);
    for (Group g : kAllGroups) CHECK(parse_group(group_name(g)) == g);
    CHECK_THROWS(parse_group("XX"));
}

TEST_CASE("group populations partition the snapshot") {
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = uniform_opinions(500, 300 + trial);
        const auto pops = group_populations(x);
        std::int64_t total = 0;
        for (auto p : pops) total += p;
        CHECK(total == 500);
    }
}

TEST_CASE("pearson correlation") {
    CHECK(pearson_correlation(vec({1, 2, 3}), vec({1, 2, 3})) == doctest::Approx(1.0));
    CHECK(pearson_correlation(vec({1, 2, 3}), vec({3, 2, 1})) == doctest::Approx(-1.0));
    // Deviations (-1.5,-0.5,0.5,1.5) and (-0.5,-1.5,1.5,0.5): cross sum 3, each square sum 5.
    CHECK(pearson_correlation(vec({0, 1, 2, 3}), vec({1, 0, 3, 2})) == doctest::Approx(0.6));
    CHECK_THROWS_AS((pearson_correlation(vec({1, 1, 1}), vec({1, 2, 3}))), ModelError);
    CHECK_THROWS_AS((pearson_correlation(vec({1}), vec({1}))), ModelError);
    CHECK_THROWS_AS((pearson_correlation(vec({1, 2}), vec({1, 2, 3}))), ModelError);
    Eigen::VectorXi ints(3);
    ints << 4, 5, 6;
    CHECK(pearson_correlation(ints, vec({1, 2, 3})) == doctest::Approx(1.0));
}

TEST_CASE("graph construction drops duplicates, self-loops and orientation") {
    const auto g = graph_of(4, {{0, 1}, {1, 0}, {1, 1}, {2, 1}, {0, 1}, {3, 2}});
    CHECK(g.num_agents() == 4);
    CHECK(g.num_edges() == 3);
    CHECK(g.has_edge(1, 0));
    CHECK(g.has_edge(2, 3));
    CHECK_FALSE(g.has_edge(1, 1));
    CHECK_FALSE(g.has_edge(0, 3));
    CHECK(g.degree(1) == 2);
    CHECK(g.min_degree() == 1);
    g.validate();
    const auto el = g.edge_list();
    REQUIRE(el.size() == 3);
    CHECK(el[0] == std::pair<AgentId, AgentId>{0, 1});
    CHECK(el[2] == std::pair<AgentId, AgentId>{2, 3});
    CHECK_THROWS((graph_of(2, {{0, 2}})));
}

TEST_CASE("graph hash distinguishes graphs") {
    CHECK(path_graph(5).hash() == path_graph(5).hash());
    CHECK(path_graph(5).hash() != star_graph(4).hash());
}

TEST_CASE("components and induced subgraphs") {
    const auto g = graph_of(6, {{0, 1}, {1, 2}, {3, 4}});
    const auto labels = connected_components(g);
    CHECK(labels == std::vector<AgentId>{0, 0, 0, 1, 1, 2});
    CHECK_FALSE(is_connected(g));
    CHECK(is_connected(path_graph(10)));
    const auto [sub, ids] = induced_subgraph(g, {false, true, true, true, true, false});
    CHECK(ids == std::vector<AgentId>{1, 2, 3, 4});
    CHECK(sub.num_edges() == 2);
    CHECK(sub.has_edge(0, 1));
    CHECK(sub.has_edge(2, 3));
    sub.validate();
}

TEST_CASE("snapshot validation") {
    CHECK_NOTHROW((OpinionSnapshot{0, vec({0.0, 1.0})}.validate()));
    CHECK_THROWS_AS((OpinionSnapshot{0, vec({0.0, 1.5})}.validate()), ModelError);
    CHECK_THROWS_AS((OpinionSnapshot{0, vec({std::nan("")})}.validate()), ModelError);
}

TEST_CASE("neighbor means mark isolated agents") {
    const auto g = graph_of(3, {{0, 1}});
    const auto m = neighbor_means(g, vec({0.2, 0.6, 0.9}));
    CHECK(m[0] == 0.6);
    CHECK(m[1] == 0.2);
    CHECK(std::isnan(m[2]));
}
