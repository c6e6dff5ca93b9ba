#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "opdyn/analysis.hpp"
#include "opdyn/core.hpp"
#include "opdyn/dynamics.hpp"
#include "opdyn/generator.hpp"
#include "opdyn/kernels.hpp"

namespace opdyn {

struct InformationSource {
    int id = 0;
    double bias = 0.5;
};

/// Evenly spaced sources on [0, 1]: count sources at 0, 1/(count-1), ..., 1.
std::vector<InformationSource> source_grid(int count);

/// Followed source ids per agent, each list sorted and duplicate-free.
struct SubscriptionState {
    std::vector<std::vector<int>> follows;

    AgentId num_agents() const { return static_cast<AgentId>(follows.size()); }
};

/// Follow probability sigmoid(alignment * (threshold - |bias - x|)
///                            + contagion * (friend_fraction - contagion_threshold)).
/// A reviewed (agent, source) pair is redrawn with this probability, so
/// following and unfollowing share one rule. Each pair is reviewed with
/// probability review_rate per step and otherwise keeps its current state.
struct SubscriptionParams {
    double alignment = 20.0;
    double contagion = 0.0;
    double threshold = 0.1;
    double contagion_threshold = 0.0;
    double review_rate = 1.0;

    void validate() const;
};

double follow_probability(const SubscriptionParams& params, double bias, double opinion, double friend_fraction);

/// One redraw of every agent's subscriptions from latent opinions and the
/// friends' current follows.
SubscriptionState subscription_step(const Eigen::VectorXd& latent, const std::vector<InformationSource>& sources,
                                    const SocialGraph& graph, const SubscriptionState& current,
                                    const SubscriptionParams& params, std::uint64_t seed, std::uint64_t step_index,
                                    unsigned workers = 1);

struct ObserverSpec {
    double noise = 0.0;  // standard deviation of the zero-mean Gaussian estimation error
    int min_subscriptions = 10;
    int max_subscriptions = 200;

    void validate() const;
};

struct ObservedSnapshot {
    OpinionSnapshot snapshot;
    std::vector<bool> observable;
};

/// Estimated opinion = mean bias of followed sources + noise, clamped to [0, 1].
/// Agents outside the subscription bounds are unobservable (opinion set to NaN).
ObservedSnapshot observe(const SubscriptionState& subs, const std::vector<InformationSource>& sources,
                         const ObserverSpec& observer, std::uint64_t seed, std::uint64_t step_index = 0);

/// Radical agents (|x - 0.5| > radius) drift toward 0.5 at rate per step.
struct LatentDrive {
    double rate = 0.0;
    double radius = 0.3;

    void validate() const;
};

Eigen::VectorXd apply_drive(const LatentDrive& drive, const Eigen::VectorXd& latent);

enum class SubscriptionMode {
    Behavioral,      // follow/unfollow rule over the shared source set
    PersonalSource,  // each agent follows one private source whose bias is its latent opinion
};

struct ExperimentConfig {
    PopulationSpec population;
    HomophilySpec homophily;
    InfluenceKernel kernel;
    ActivationModel activation = AlwaysActive{};
    Schedule schedule;
    int observations = 2;
    std::vector<InformationSource> sources = source_grid(21);
    double source_drift = 0.0;  // added to every source bias per observation, clamped
    SubscriptionMode subscription_mode = SubscriptionMode::Behavioral;
    SubscriptionParams subscriptions;
    int warmup_steps = 1;  // extra subscription redraws before the first observation
    ObserverSpec observer;
    LatentDrive drive;
    AnalysisOptions analysis;

    void validate() const;
};

/// Shift categories compared between latent and observed trajectories.
enum class ShiftCategory { Static, PositiveNonSkip, PositiveSkip, Negative, Unaligned };
inline constexpr int kNumShiftCategories = 5;
std::string_view shift_category_name(ShiftCategory c);
ShiftCategory shift_category(const ShiftRecord& r);

struct ExperimentReport {
    SocialGraph graph;                      // generated graph
    std::vector<AgentId> analyzed_agents;   // agents observable at every observation
    SocialGraph analyzed_graph;             // induced on analyzed_agents
    std::vector<EpocDecomposition> latent_epoc;
    std::vector<EpocDecomposition> observed_epoc;
    std::vector<std::vector<ShiftRecord>> observed_records;  // per transition
    Eigen::Matrix<std::int64_t, kNumShiftCategories, kNumShiftCategories> confusion =
        Eigen::Matrix<std::int64_t, kNumShiftCategories, kNumShiftCategories>::Zero();  // latent row, observed column

    // Skipping share of observed positive shifts, pooled over transitions.
    double observed_skip_fraction() const;
};

struct ExperimentResult {
    Trajectory latent;
    Trajectory observed;  // unobservable agents carry NaN
    ExperimentReport report;
};

ExperimentResult run_observed_experiment(const ExperimentConfig& config, std::uint64_t seed);

} // namespace opdyn
