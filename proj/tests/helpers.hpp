#pragma once

#include "opdyn/core.hpp"
#include "opdyn/rng.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace testing {

using opdyn::AgentId;
using opdyn::SocialGraph;

inline SocialGraph graph_of(AgentId n, std::vector<std::pair<AgentId, AgentId>> edges) {
    return SocialGraph::from_edges(n, edges);
}

inline SocialGraph path_graph(AgentId n) {
    std::vector<std::pair<AgentId, AgentId>> e;
    for (AgentId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return SocialGraph::from_edges(n, e);
}

inline SocialGraph star_graph(AgentId leaves) {
    std::vector<std::pair<AgentId, AgentId>> e;
    for (AgentId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
    return SocialGraph::from_edges(leaves + 1, e);
}

// Erdos-Renyi graph plus a ring so it is connected.
inline SocialGraph random_connected_graph(AgentId n, double p, std::uint64_t seed) {
    auto rng = opdyn::Rng::stream(seed, 0x9e);
    std::vector<std::pair<AgentId, AgentId>> e;
    for (AgentId i = 0; i < n; ++i) {
        e.emplace_back(i, (i + 1) % n);
        for (AgentId j = i + 1; j < n; ++j) {
            if (rng.bernoulli(p)) e.emplace_back(i, j);
        }
    }
    return SocialGraph::from_edges(n, e);
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (double x : v) out[k++] = x;
    return out;
}

inline Eigen::VectorXd uniform_opinions(AgentId n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    auto rng = opdyn::Rng::stream(seed, 0x7a);
    Eigen::VectorXd x(n);
    for (AgentId i = 0; i < n; ++i) x[i] = rng.uniform(lo, hi);
    return x;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("opdyn_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testing
