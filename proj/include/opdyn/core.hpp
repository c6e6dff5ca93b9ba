#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "opdyn/error.hpp"

namespace opdyn {

using AgentId = std::int32_t;
using Opinion = double;

/// Opinions of every agent at one observation, indexed by dense agent id.
struct OpinionSnapshot {
    int time_index = 0;
    Eigen::VectorXd opinions;

    Eigen::Index size() const { return opinions.size(); }
    double operator[](Eigen::Index i) const { return opinions[i]; }

    // Throws ModelError if any entry lies outside [0, 1] or is NaN.
    void validate() const;
};

/// Undirected simple graph in compressed neighbor-list form. Neighbor lists
/// are sorted and symmetric; there are no self-loops or duplicate edges.
class SocialGraph {
public:
    SocialGraph() = default;

    /// Builds from an arbitrary edge list: orientation is ignored, duplicates
    /// and self-loops are dropped.
    static SocialGraph from_edges(AgentId n, std::span<const std::pair<AgentId, AgentId>> edges);

    AgentId num_agents() const { return static_cast<AgentId>(offsets_.empty() ? 0 : offsets_.size() - 1); }
    std::int64_t num_edges() const { return static_cast<std::int64_t>(adjacency_.size() / 2); }

    std::span<const AgentId> neighbors(AgentId i) const {
        return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
    }
    AgentId degree(AgentId i) const { return static_cast<AgentId>(offsets_[i + 1] - offsets_[i]); }
    bool has_edge(AgentId a, AgentId b) const;
    AgentId min_degree() const;

    // Each undirected edge once, as (lo, hi) in lexicographic order.
    std::vector<std::pair<AgentId, AgentId>> edge_list() const;

    // FNV-1a over the compressed arrays; identifies a graph in provenance records.
    std::uint64_t hash() const;

    // Throws ModelError on asymmetry, self-loops, duplicates or unsorted lists.
    void validate() const;

    bool operator==(const SocialGraph&) const = default;

private:
    std::vector<std::int64_t> offsets_;
    std::vector<AgentId> adjacency_;
};

/// Component label per agent, labels ordered by smallest member id.
std::vector<AgentId> connected_components(const SocialGraph& graph);

bool is_connected(const SocialGraph& graph);

/// Subgraph induced by agents with keep[i] set. Returns the graph and the
/// original id of every retained agent (ascending).
std::pair<SocialGraph, std::vector<AgentId>> induced_subgraph(const SocialGraph& graph,
                                                              const std::vector<bool>& keep);

enum class Group : std::uint8_t { SL = 0, L = 1, M = 2, C = 3, SC = 4 };

inline constexpr int kNumGroups = 5;
inline constexpr std::array<Group, kNumGroups> kAllGroups{Group::SL, Group::L, Group::M, Group::C,
                                                          Group::SC};

constexpr int index(Group g) { return static_cast<int>(g); }
constexpr bool operator<(Group a, Group b) { return index(a) < index(b); }
constexpr bool operator>(Group a, Group b) { return b < a; }
constexpr bool operator<=(Group a, Group b) { return !(b < a); }
constexpr bool operator>=(Group a, Group b) { return !(a < b); }

std::string_view group_name(Group g);
Group parse_group(std::string_view name);

// [lo, hi) interval of a group; SC is closed at 1.
constexpr double group_lower(Group g) { return 0.2 * index(g); }
constexpr double group_upper(Group g) { return g == Group::SC ? 1.0 : 0.2 * (index(g) + 1); }

/// SL [0,0.2), L [0.2,0.4), M [0.4,0.6), C [0.6,0.8), SC [0.8,1].
Group assign_group(Opinion x);

/// Mirror image under x -> 1 - x.
constexpr Group mirror(Group g) { return static_cast<Group>(kNumGroups - 1 - index(g)); }

struct NeighborhoodStats {
    double mean = 0.0;
    double std = 0.0;
    AgentId degree = 0;
};

/// Mean and population standard deviation of the neighbors' opinions.
NeighborhoodStats neighborhood_stats(const SocialGraph& graph, const OpinionSnapshot& snapshot,
                                     AgentId agent);

NeighborhoodStats neighborhood_stats(const SocialGraph& graph, const Eigen::VectorXd& opinions,
                                     AgentId agent);

/// Neighbor mean of one agent (exactly the common value when all neighbors
/// agree). Precondition: degree >= 1.
double neighbor_mean(const SocialGraph& graph, const Eigen::VectorXd& opinions, AgentId agent);

/// Neighbor mean of every agent; agents without neighbors get NaN.
Eigen::VectorXd neighbor_means(const SocialGraph& graph, const Eigen::VectorXd& opinions,
                               unsigned workers = 1);

/// Sample Pearson coefficient.
template <typename DerivedX, typename DerivedY>
double pearson_correlation(const Eigen::MatrixBase<DerivedX>& xs, const Eigen::MatrixBase<DerivedY>& ys) {
    if (xs.size() != ys.size()) throw ModelError("pearson_correlation: length mismatch");
    if (xs.size() < 2) throw ModelError("pearson_correlation: need at least two samples");
    const auto dx = (xs.array().template cast<double>() - xs.template cast<double>().mean()).eval();
    const auto dy = (ys.array().template cast<double>() - ys.template cast<double>().mean()).eval();
    const double sxx = dx.square().sum();
    const double syy = dy.square().sum();
    if (sxx == 0.0 || syy == 0.0) throw ModelError("pearson_correlation: zero variance");
    const double r = (dx * dy).sum() / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

/// Number of agents in each group.
std::array<std::int64_t, kNumGroups> group_populations(const Eigen::VectorXd& opinions);

} // namespace opdyn
