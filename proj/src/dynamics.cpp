#include "opdyn/dynamics.hpp"

#include "opdyn/parallel.hpp"
#include "opdyn/rng.hpp"

#include <algorithm>
#include <sstream>

namespace opdyn {

namespace {

// Stream tags keep the activation and neighbor draws independent.
constexpr std::uint64_t kActivationTag = 0xa1;
constexpr std::uint64_t kNeighborTag = 0xb2;
constexpr std::uint64_t kAsyncTag = 0xc3;

double apply_update(const InfluenceKernel& kernel, AgentId i, double xi, double source, bool clamp) {
    if (kernel.is_stubborn(i)) return xi;
    const double l = kernel_value(kernel.shape, xi, source);
    double next = xi + l * (source - xi);
    if (kernel.prejudice) {
        const double lambda = kernel.prejudice->susceptibility[i];
        next = lambda * next + (1.0 - lambda) * kernel.prejudice->anchor[i];
    }
    return clamp ? std::clamp(next, 0.0, 1.0) : next;
}

OpinionSnapshot synchronous_step(const SocialGraph& graph, const OpinionSnapshot& snapshot,
                                 const InfluenceKernel& kernel, const ActivationModel& activation,
                                 const Schedule& schedule, std::uint64_t step_index) {
    const auto& x = snapshot.opinions;
    OpinionSnapshot next{snapshot.time_index, x};
    const bool gated = !std::holds_alternative<AlwaysActive>(activation);
    const bool pairwise = schedule.source == InfluenceSource::RandomNeighbor;
    parallel_for(static_cast<std::size_t>(graph.num_agents()), schedule.workers, [&](std::size_t begin, std::size_t end) {
        for (auto i = static_cast<AgentId>(begin); i < static_cast<AgentId>(end); ++i) {
            const auto nb = graph.neighbors(i);
            if (nb.empty() || kernel.is_stubborn(i)) continue;
            double source;
            if (pairwise) {
                auto rng = Rng::stream(schedule.seed, kNeighborTag, step_index, static_cast<std::uint64_t>(i));
                source = x[nb[rng.below(nb.size())]];
            } else {
                source = neighbor_mean(graph, x, i);
            }
            if (gated) {
                auto rng = Rng::stream(schedule.seed, kActivationTag, step_index, static_cast<std::uint64_t>(i));
                if (!rng.bernoulli(activation_probability(activation, kernel, i, x[i], source))) continue;
            }
            next.opinions[i] = apply_update(kernel, i, x[i], source, schedule.clamp);
        }
    });
    return next;
}

OpinionSnapshot asynchronous_step(const SocialGraph& graph, const OpinionSnapshot& snapshot,
                                  const InfluenceKernel& kernel, const ActivationModel& activation,
                                  const Schedule& schedule, std::uint64_t step_index) {
    OpinionSnapshot next = snapshot;
    auto& x = next.opinions;
    const AgentId n = graph.num_agents();
    auto rng = Rng::stream(schedule.seed, kAsyncTag, step_index);
    const bool gated = !std::holds_alternative<AlwaysActive>(activation);
    for (AgentId draw = 0; draw < n; ++draw) {
        const auto i = static_cast<AgentId>(rng.below(static_cast<std::uint64_t>(n)));
        const auto nb = graph.neighbors(i);
        if (nb.empty()) continue;
        if (schedule.source == InfluenceSource::RandomNeighbor) {
            const AgentId j = nb[rng.below(nb.size())];
            const double xi = x[i];
            const double xj = x[j];
            if (gated && !rng.bernoulli(activation_probability(activation, kernel, i, xi, xj))) continue;
            x[i] = apply_update(kernel, i, xi, xj, schedule.clamp);
            if (schedule.symmetric_pairs) x[j] = apply_update(kernel, j, xj, xi, schedule.clamp);
        } else {
            if (kernel.is_stubborn(i)) continue;
            const double source = neighbor_mean(graph, x, i);
            if (gated && !rng.bernoulli(activation_probability(activation, kernel, i, x[i], source))) continue;
            x[i] = apply_update(kernel, i, x[i], source, schedule.clamp);
        }
    }
    return next;
}

} // namespace

void Schedule::validate() const {
    if (steps_per_observation < 1) throw ConfigError("schedule: steps_per_observation must be >= 1");
    if (workers < 1) throw ConfigError("schedule: workers must be >= 1");
}

OpinionSnapshot step(const SocialGraph& graph, const OpinionSnapshot& snapshot, const InfluenceKernel& kernel,
                     const ActivationModel& activation, const Schedule& schedule, std::uint64_t step_index) {
    if (snapshot.size() != graph.num_agents()) throw ModelError("snapshot size does not match graph");
    return schedule.mode == UpdateMode::Synchronous
               ? synchronous_step(graph, snapshot, kernel, activation, schedule, step_index)
               : asynchronous_step(graph, snapshot, kernel, activation, schedule, step_index);
}

Trajectory run(const SocialGraph& graph, const OpinionSnapshot& initial, const InfluenceKernel& kernel,
               const ActivationModel& activation, const Schedule& schedule, int observations) {
    if (observations < 1) throw ConfigError("run: observations must be >= 1");
    schedule.validate();
    kernel.validate(graph.num_agents());
    validate(activation, graph.num_agents());
    if (initial.size() != graph.num_agents()) throw ModelError("snapshot size does not match graph");

    Trajectory traj;
    traj.provenance = {describe(kernel.shape), describe(activation), describe(schedule), graph.hash()};
    traj.snapshots.reserve(static_cast<std::size_t>(observations) + 1);
    traj.snapshots.push_back(initial);
    OpinionSnapshot current = initial;
    std::uint64_t step_index = 0;
    for (int obs = 1; obs <= observations; ++obs) {
        for (int s = 0; s < schedule.steps_per_observation; ++s) {
            current = step(graph, current, kernel, activation, schedule, step_index++);
        }
        current.time_index = initial.time_index + obs;
        traj.snapshots.push_back(current);
    }
    return traj;
}

std::vector<OpinionCluster> opinion_clusters(const Eigen::VectorXd& opinions, double max_gap) {
    std::vector<double> sorted(opinions.data(), opinions.data() + opinions.size());
    std::sort(sorted.begin(), sorted.end());
    std::vector<OpinionCluster> clusters;
    for (double v : sorted) {
        if (clusters.empty() || v - clusters.back().hi > max_gap) {
            clusters.push_back({v, v, 1});
        } else {
            clusters.back().hi = v;
            ++clusters.back().size;
        }
    }
    return clusters;
}

std::string describe(const Schedule& s) {
    std::ostringstream os;
    os << (s.mode == UpdateMode::Synchronous ? "synchronous" : "asynchronous") << "("
       << (s.source == InfluenceSource::NeighborMean ? "neighbor_mean" : "random_neighbor")
       << ",steps=" << s.steps_per_observation << ",seed=" << s.seed << ",clamp=" << (s.clamp ? 1 : 0)
       << ",symmetric=" << (s.symmetric_pairs ? 1 : 0) << ")";
    return os.str();
}

} // namespace opdyn
