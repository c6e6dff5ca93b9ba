#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opdyn/core.hpp"
#include "opdyn/kernels.hpp"

namespace opdyn {

enum class UpdateMode { Synchronous, AsynchronousUniform };

/// Where an updating agent reads its influence from.
enum class InfluenceSource {
    NeighborMean,    // many-to-one: the neighbors' average opinion
    RandomNeighbor,  // one-to-one: a uniformly drawn neighbor
};

struct Schedule {
    UpdateMode mode = UpdateMode::Synchronous;
    InfluenceSource source = InfluenceSource::NeighborMean;
    int steps_per_observation = 1;
    std::uint64_t seed = 0;
    bool clamp = true;
    // Asynchronous pairwise steps move both endpoints (Deffuant-style).
    bool symmetric_pairs = true;
    unsigned workers = 1;

    void validate() const;
};

struct Provenance {
    std::string kernel;
    std::string activation;
    std::string schedule;
    std::uint64_t graph_hash = 0;
};

struct Trajectory {
    std::vector<OpinionSnapshot> snapshots;
    Provenance provenance;
};

/// Advances the snapshot by one micro-step. For the synchronous mode every
/// agent reads the pre-step opinions; the asynchronous mode performs n
/// single-agent updates in sequence. step_index keys the random streams.
OpinionSnapshot step(const SocialGraph& graph, const OpinionSnapshot& snapshot, const InfluenceKernel& kernel,
                     const ActivationModel& activation, const Schedule& schedule, std::uint64_t step_index);

/// observations snapshots after the initial one, each steps_per_observation
/// micro-steps apart. The initial snapshot is the first element.
Trajectory run(const SocialGraph& graph, const OpinionSnapshot& initial, const InfluenceKernel& kernel,
               const ActivationModel& activation, const Schedule& schedule, int observations);

/// max - min.
template <typename Derived>
double spread(const Eigen::MatrixBase<Derived>& opinions) {
    if (opinions.size() == 0) throw ModelError("spread of an empty snapshot");
    return opinions.maxCoeff() - opinions.minCoeff();
}

inline double spread(const OpinionSnapshot& snapshot) { return spread(snapshot.opinions); }

/// Groups sorted opinions into clusters, splitting wherever the gap between
/// consecutive values exceeds max_gap. Each cluster is (min, max, size).
struct OpinionCluster {
    double lo = 0.0;
    double hi = 0.0;
    std::int64_t size = 0;
};

std::vector<OpinionCluster> opinion_clusters(const Eigen::VectorXd& opinions, double max_gap);

std::string describe(const Schedule& schedule);

} // namespace opdyn
