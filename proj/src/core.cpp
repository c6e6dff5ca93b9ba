#include "opdyn/core.hpp"

#include "opdyn/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace opdyn {

void OpinionSnapshot::validate() const {
    for (Eigen::Index i = 0; i < opinions.size(); ++i) {
        const double x = opinions[i];
        if (!(x >= 0.0 && x <= 1.0)) {
            throw ModelError("opinion of agent " + std::to_string(i) + " outside [0,1]: " +
                             std::to_string(x));
        }
    }
}

SocialGraph SocialGraph::from_edges(AgentId n, std::span<const std::pair<AgentId, AgentId>> edges) {
    if (n < 0) throw ModelError("negative agent count");
    std::vector<std::int64_t> degree(static_cast<std::size_t>(n) + 1, 0);
    for (const auto& [a, b] : edges) {
        if (a < 0 || b < 0 || a >= n || b >= n) {
            throw ModelError("edge endpoint out of range: " + std::to_string(a) + "," + std::to_string(b));
        }
        if (a == b) continue;
        ++degree[a];
        ++degree[b];
    }
    SocialGraph g;
    g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (AgentId i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + degree[i];
    std::vector<AgentId> raw(static_cast<std::size_t>(g.offsets_[n]));
    std::vector<std::int64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const auto& [a, b] : edges) {
        if (a == b) continue;
        raw[cursor[a]++] = b;
        raw[cursor[b]++] = a;
    }
    // Sort and deduplicate each list, then compact.
    std::vector<std::int64_t> compact(static_cast<std::size_t>(n) + 1, 0);
    std::int64_t out = 0;
    for (AgentId i = 0; i < n; ++i) {
        auto first = raw.begin() + g.offsets_[i];
        auto last = raw.begin() + g.offsets_[i + 1];
        std::sort(first, last);
        last = std::unique(first, last);
        compact[i] = out;
        for (auto it = first; it != last; ++it) raw[out++] = *it;
    }
    compact[n] = out;
    raw.resize(static_cast<std::size_t>(out));
    g.offsets_ = std::move(compact);
    g.adjacency_ = std::move(raw);
    return g;
}

bool SocialGraph::has_edge(AgentId a, AgentId b) const {
    const auto nb = neighbors(a);
    return std::binary_search(nb.begin(), nb.end(), b);
}

AgentId SocialGraph::min_degree() const {
    AgentId best = num_agents() == 0 ? 0 : degree(0);
    for (AgentId i = 1; i < num_agents(); ++i) best = std::min(best, degree(i));
    return best;
}

std::vector<std::pair<AgentId, AgentId>> SocialGraph::edge_list() const {
    std::vector<std::pair<AgentId, AgentId>> out;
    out.reserve(static_cast<std::size_t>(num_edges()));
    for (AgentId i = 0; i < num_agents(); ++i) {
        for (AgentId j : neighbors(i)) {
            if (i < j) out.emplace_back(i, j);
        }
    }
    return out;
}

std::uint64_t SocialGraph::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::uint64_t v) {
        for (int k = 0; k < 8; ++k) {
            h ^= (v >> (8 * k)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    feed(static_cast<std::uint64_t>(num_agents()));
    for (auto o : offsets_) feed(static_cast<std::uint64_t>(o));
    for (auto a : adjacency_) feed(static_cast<std::uint64_t>(a));
    return h;
}

void SocialGraph::validate() const {
    for (AgentId i = 0; i < num_agents(); ++i) {
        const auto nb = neighbors(i);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const AgentId j = nb[k];
            if (j < 0 || j >= num_agents()) throw ModelError("neighbor id out of range");
            if (j == i) throw ModelError("self-loop at agent " + std::to_string(i));
            if (k > 0 && nb[k - 1] >= j) throw ModelError("unsorted or duplicate neighbor list");
            if (!has_edge(j, i)) throw ModelError("asymmetric edge " + std::to_string(i) + "-" + std::to_string(j));
        }
    }
}

std::vector<AgentId> connected_components(const SocialGraph& graph) {
    const AgentId n = graph.num_agents();
    std::vector<AgentId> label(static_cast<std::size_t>(n), -1);
    std::vector<AgentId> stack;
    AgentId next = 0;
    for (AgentId s = 0; s < n; ++s) {
        if (label[s] >= 0) continue;
        label[s] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            const AgentId v = stack.back();
            stack.pop_back();
            for (AgentId w : graph.neighbors(v)) {
                if (label[w] < 0) {
                    label[w] = next;
                    stack.push_back(w);
                }
            }
        }
        ++next;
    }
    return label;
}

bool is_connected(const SocialGraph& graph) {
    const auto label = connected_components(graph);
    return std::all_of(label.begin(), label.end(), [](AgentId c) { return c == 0; });
}

std::pair<SocialGraph, std::vector<AgentId>> induced_subgraph(const SocialGraph& graph,
                                                              const std::vector<bool>& keep) {
    const AgentId n = graph.num_agents();
    if (static_cast<AgentId>(keep.size()) != n) throw ModelError("induced_subgraph: mask size mismatch");
    std::vector<AgentId> remap(static_cast<std::size_t>(n), -1);
    std::vector<AgentId> original;
    for (AgentId i = 0; i < n; ++i) {
        if (keep[i]) {
            remap[i] = static_cast<AgentId>(original.size());
            original.push_back(i);
        }
    }
    std::vector<std::pair<AgentId, AgentId>> edges;
    for (AgentId i : original) {
        for (AgentId j : graph.neighbors(i)) {
            if (i < j && keep[j]) edges.emplace_back(remap[i], remap[j]);
        }
    }
    return {SocialGraph::from_edges(static_cast<AgentId>(original.size()), edges), std::move(original)};
}

std::string_view group_name(Group g) {
    static constexpr std::array<std::string_view, kNumGroups> names{"SL", "L", "M", "C", "SC"};
    return names[index(g)];
}

Group parse_group(std::string_view name) {
    for (Group g : kAllGroups) {
        if (group_name(g) == name) return g;
    }
    throw ModelError("unknown ideological group: " + std::string(name));
}

Group assign_group(Opinion x) {
    if (!(x >= 0.0 && x <= 1.0)) throw ModelError("opinion outside [0,1]: " + std::to_string(x));
    if (x < 0.2) return Group::SL;
    if (x < 0.4) return Group::L;
    if (x < 0.6) return Group::M;
    if (x < 0.8) return Group::C;
    return Group::SC;
}

NeighborhoodStats neighborhood_stats(const SocialGraph& graph, const OpinionSnapshot& snapshot,
                                     AgentId agent) {
    return neighborhood_stats(graph, snapshot.opinions, agent);
}

double neighbor_mean(const SocialGraph& graph, const Eigen::VectorXd& opinions, AgentId agent) {
    const auto nb = graph.neighbors(agent);
    const double first = opinions[nb[0]];
    double sum = 0.0;
    bool constant = true;
    for (AgentId j : nb) {
        sum += opinions[j];
        constant = constant && opinions[j] == first;
    }
    return constant ? first : std::clamp(sum / static_cast<double>(nb.size()), 0.0, 1.0);
}

NeighborhoodStats neighborhood_stats(const SocialGraph& graph, const Eigen::VectorXd& opinions,
                                     AgentId agent) {
    const auto nb = graph.neighbors(agent);
    if (nb.empty()) throw ModelError("agent " + std::to_string(agent) + " has no neighbors");
    NeighborhoodStats s;
    s.degree = static_cast<AgentId>(nb.size());
    s.mean = neighbor_mean(graph, opinions, agent);
    double ss = 0.0;
    for (AgentId j : nb) {
        const double d = opinions[j] - s.mean;
        ss += d * d;
    }
    s.std = std::min(0.5, std::sqrt(ss / static_cast<double>(nb.size())));
    return s;
}

Eigen::VectorXd neighbor_means(const SocialGraph& graph, const Eigen::VectorXd& opinions, unsigned workers) {
    const AgentId n = graph.num_agents();
    Eigen::VectorXd means(n);
    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t begin, std::size_t end) {
        for (auto i = static_cast<AgentId>(begin); i < static_cast<AgentId>(end); ++i) {
            means[i] = graph.degree(i) == 0 ? std::nan("") : neighbor_mean(graph, opinions, i);
        }
    });
    return means;
}

std::array<std::int64_t, kNumGroups> group_populations(const Eigen::VectorXd& opinions) {
    std::array<std::int64_t, kNumGroups> counts{};
    for (Eigen::Index i = 0; i < opinions.size(); ++i) ++counts[index(assign_group(opinions[i]))];
    return counts;
}

} // namespace opdyn
