#include "opdyn/generator.hpp"

#include "opdyn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

namespace opdyn {

namespace {

constexpr int kMaxAttempts = 100;

std::uint64_t edge_key(AgentId a, AgentId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

// Largest-remainder apportionment of n agents to the group fractions.
std::array<AgentId, kNumGroups> group_counts(const PopulationSpec& pop) {
    std::array<AgentId, kNumGroups> counts{};
    std::array<double, kNumGroups> remainder{};
    AgentId assigned = 0;
    for (int g = 0; g < kNumGroups; ++g) {
        const double exact = pop.group_fractions[g] * pop.n;
        counts[g] = static_cast<AgentId>(std::floor(exact));
        remainder[g] = exact - counts[g];
        assigned += counts[g];
    }
    std::array<int, kNumGroups> order{0, 1, 2, 3, 4};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b]; });
    for (int k = 0; assigned < pop.n; k = (k + 1) % kNumGroups) {
        ++counts[order[k]];
        ++assigned;
    }
    return counts;
}

// Unmatched stubs bucketed by group, with O(1) removal by swap.
class StubPool {
public:
    void add(int group, AgentId agent) { buckets_[group].push_back(agent); ++total_; }
    std::size_t size() const { return total_; }
    std::size_t size(int group) const { return buckets_[group].size(); }

    // Position of a stub drawn uniformly from everything, or from one group.
    std::pair<int, std::size_t> draw_any(Rng& rng) const {
        std::uint64_t r = rng.below(total_);
        for (int g = 0; g < kNumGroups; ++g) {
            if (r < buckets_[g].size()) return {g, static_cast<std::size_t>(r)};
            r -= buckets_[g].size();
        }
        return {kNumGroups - 1, buckets_[kNumGroups - 1].size() - 1};
    }
    std::pair<int, std::size_t> draw_in(int group, Rng& rng) const {
        return {group, static_cast<std::size_t>(rng.below(buckets_[group].size()))};
    }

    AgentId at(std::pair<int, std::size_t> pos) const { return buckets_[pos.first][pos.second]; }

    AgentId take(std::pair<int, std::size_t> pos) {
        auto& b = buckets_[pos.first];
        const AgentId a = b[pos.second];
        b[pos.second] = b.back();
        b.pop_back();
        --total_;
        return a;
    }

private:
    std::array<std::vector<AgentId>, kNumGroups> buckets_;
    std::size_t total_ = 0;
};

} // namespace

void PopulationSpec::validate() const {
    if (n < 2) throw ConfigError("population: n must be >= 2");
    double sum = 0.0;
    for (double f : group_fractions) {
        if (!(f >= 0.0)) throw ConfigError("population: group fractions must be non-negative");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("population: group fractions must sum to 1");
    for (Group g : kAllGroups) {
        const double d = expected_degree(g);
        if (!(d >= 0.0)) throw ConfigError("population: mean degree must be non-negative");
        if (d >= n - 1) throw ConfigError("population: infeasible degree sequence (mean degree >= n - 1)");
    }
    double mean = 0.0;
    for (Group g : kAllGroups) mean += group_fractions[index(g)] * expected_degree(g);
    if (mean < 1.0) throw ConfigError("population: expected mean degree must be >= 1");
}

void HomophilySpec::validate() const {
    if (!(bias >= 0.0 && bias < 1.0)) throw ConfigError("homophily: bias must lie in [0,1)");
    if (target_assortativity && !(*target_assortativity > -1.0 && *target_assortativity < 1.0)) {
        throw ConfigError("homophily: target assortativity must lie in (-1,1)");
    }
}

GeneratedPopulation generate(const PopulationSpec& pop, const HomophilySpec& hom, std::uint64_t seed) {
    pop.validate();
    hom.validate();
    Rng rng(seed);

    // Exact group counts, shuffled over agent ids.
    const auto counts = group_counts(pop);
    std::vector<int> group_of;
    group_of.reserve(static_cast<std::size_t>(pop.n));
    for (int g = 0; g < kNumGroups; ++g) group_of.insert(group_of.end(), static_cast<std::size_t>(counts[g]), g);
    std::shuffle(group_of.begin(), group_of.end(), rng);

    Eigen::VectorXd opinions(pop.n);
    for (AgentId i = 0; i < pop.n; ++i) {
        const Group g = static_cast<Group>(group_of[i]);
        double x = rng.uniform(group_lower(g), group_upper(g));
        if (g != Group::SC && x >= group_upper(g)) x = std::nextafter(group_upper(g), 0.0);
        opinions[i] = x;
    }

    StubPool pool;
    for (AgentId i = 0; i < pop.n; ++i) {
        const auto d = rng.poisson(pop.expected_degree(static_cast<Group>(group_of[i])));
        for (std::int64_t k = 0; k < d; ++k) pool.add(group_of[i], i);
    }

    std::unordered_set<std::uint64_t> seen;
    std::vector<std::pair<AgentId, AgentId>> edges;
    edges.reserve(pool.size() / 2);
    std::int64_t rematches = 0;
    std::int64_t dropped = 0;
    while (pool.size() >= 2) {
        const AgentId a = pool.take(pool.draw_any(rng));
        const int ga = group_of[a];
        bool matched = false;
        for (int attempt = 0; attempt < kMaxAttempts && pool.size() > 0; ++attempt) {
            const bool within = hom.bias > 0.0 && pool.size(ga) > 0 && rng.bernoulli(hom.bias);
            const auto pos = within ? pool.draw_in(ga, rng) : pool.draw_any(rng);
            const AgentId b = pool.at(pos);
            if (b == a || seen.contains(edge_key(a, b))) {
                ++rematches;
                continue;
            }
            pool.take(pos);
            seen.insert(edge_key(a, b));
            edges.emplace_back(a, b);
            matched = true;
            break;
        }
        if (!matched) ++dropped;
    }
    const auto total_stubs = static_cast<std::int64_t>(2 * edges.size()) + dropped;
    if (dropped > std::max<std::int64_t>(10, total_stubs / 100)) {
        throw ModelError("generate: infeasible degree sequence (" + std::to_string(dropped) +
                         " stubs could not be matched)");
    }

    // Attach isolated agents, partner drawn by the same group-biased rule.
    std::vector<std::int64_t> degree(static_cast<std::size_t>(pop.n), 0);
    for (const auto& [a, b] : edges) {
        ++degree[a];
        ++degree[b];
    }
    std::array<std::vector<AgentId>, kNumGroups> members;
    for (AgentId i = 0; i < pop.n; ++i) members[group_of[i]].push_back(i);
    for (AgentId i = 0; i < pop.n; ++i) {
        if (degree[i] > 0) continue;
        for (int attempt = 0;; ++attempt) {
            if (attempt >= kMaxAttempts) throw ModelError("generate: could not attach isolated agent");
            const int gi = group_of[i];
            const bool within = hom.bias > 0.0 && members[gi].size() > 1 && rng.bernoulli(hom.bias);
            const AgentId j = within ? members[gi][rng.below(members[gi].size())]
                                     : static_cast<AgentId>(rng.below(static_cast<std::uint64_t>(pop.n)));
            if (j == i || seen.contains(edge_key(i, j))) continue;
            seen.insert(edge_key(i, j));
            edges.emplace_back(i, j);
            ++degree[i];
            ++degree[j];
            break;
        }
    }

    GeneratedPopulation out;
    out.graph = SocialGraph::from_edges(pop.n, edges);
    out.snapshot = OpinionSnapshot{0, std::move(opinions)};
    out.rematches = rematches;
    return out;
}

Eigen::Matrix<double, kNumGroups, kNumGroups> group_mixing_matrix(const SocialGraph& graph,
                                                                  const Eigen::VectorXd& opinions) {
    Eigen::Matrix<double, kNumGroups, kNumGroups> e = Eigen::Matrix<double, kNumGroups, kNumGroups>::Zero();
    std::vector<int> group(static_cast<std::size_t>(graph.num_agents()));
    for (AgentId i = 0; i < graph.num_agents(); ++i) group[i] = index(assign_group(opinions[i]));
    for (AgentId i = 0; i < graph.num_agents(); ++i) {
        for (AgentId j : graph.neighbors(i)) e(group[i], group[j]) += 1.0;
    }
    const double total = e.sum();
    if (total > 0.0) e /= total;
    return e;
}

double assortativity(const SocialGraph& graph, const OpinionSnapshot& snapshot) {
    if (graph.num_edges() == 0) throw ModelError("assortativity: graph has no edges");
    const auto e = group_mixing_matrix(graph, snapshot.opinions);
    const Eigen::Matrix<double, kNumGroups, 1> a = e.rowwise().sum();
    const Eigen::Matrix<double, kNumGroups, 1> b = e.colwise().sum().transpose();
    const double expected = a.dot(b);
    if (1.0 - expected <= 0.0) throw ModelError("assortativity: all edges within a single group");
    return (e.trace() - expected) / (1.0 - expected);
}

HomophilyCalibration calibrate_homophily(const PopulationSpec& pop, double target, std::uint64_t seed,
                                         double tolerance, int max_iterations) {
    auto measure = [&](double bias) {
        const auto gen = generate(pop, HomophilySpec{bias, target}, seed);
        return assortativity(gen.graph, gen.snapshot);
    };
    double lo = 0.0;
    double hi = 0.99;
    HomophilyCalibration best{lo, measure(lo), 0};
    if (best.assortativity >= target) return best;
    for (int it = 1; it <= max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double r = measure(mid);
        if (std::abs(r - target) < std::abs(best.assortativity - target)) best = {mid, r, it};
        best.iterations = it;
        if (std::abs(r - target) <= tolerance) break;
        (r < target ? lo : hi) = mid;
    }
    return best;
}

GeneratedPopulation generate_with_target(const PopulationSpec& population, const HomophilySpec& homophily,
                                         std::uint64_t seed, HomophilyCalibration* calibration) {
    HomophilySpec spec = homophily;
    if (homophily.target_assortativity) {
        const auto cal = calibrate_homophily(population, *homophily.target_assortativity, seed);
        spec.bias = cal.bias;
        if (calibration) *calibration = cal;
    }
    return generate(population, spec, seed);
}

} // namespace opdyn
