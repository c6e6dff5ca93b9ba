#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>

#include "opdyn/core.hpp"

namespace opdyn {

/// Group shares used by the random-tie baseline: 8% SL, 19% L, 53% M, 16% C, 4% SC.
inline constexpr std::array<double, kNumGroups> kReferenceGroupFractions{0.08, 0.19, 0.53, 0.16, 0.04};

struct PopulationSpec {
    AgentId n = 1000;
    std::array<double, kNumGroups> group_fractions = kReferenceGroupFractions;
    double mean_degree = 10.0;
    // Per-group expected degree; overrides mean_degree when set.
    std::optional<std::array<double, kNumGroups>> group_mean_degree;

    double expected_degree(Group g) const {
        return group_mean_degree ? (*group_mean_degree)[index(g)] : mean_degree;
    }

    void validate() const;
};

struct HomophilySpec {
    double bias = 0.0;  // probability that a stub is matched within its own group, [0, 1)
    std::optional<double> target_assortativity;

    void validate() const;
};

struct GeneratedPopulation {
    SocialGraph graph;
    OpinionSnapshot snapshot;
    std::int64_t rematches = 0;  // stub matches repeated after a self-loop or duplicate
};

/// Stub-matching generator with group-biased partner choice. Group counts
/// follow the fractions (largest remainder), opinions are uniform within the
/// group interval, and agents left without a tie are attached afterwards.
GeneratedPopulation generate(const PopulationSpec& population, const HomophilySpec& homophily, std::uint64_t seed);

/// 5x5 symmetric edge mixing matrix over groups, normalised to sum 1.
Eigen::Matrix<double, kNumGroups, kNumGroups> group_mixing_matrix(const SocialGraph& graph,
                                                                  const Eigen::VectorXd& opinions);

/// Newman's discrete assortativity coefficient over the five group labels.
double assortativity(const SocialGraph& graph, const OpinionSnapshot& snapshot);

struct HomophilyCalibration {
    double bias = 0.0;
    double assortativity = 0.0;
    int iterations = 0;
};

/// Bisection on the mixing bias until the generated graph's assortativity
/// is within tolerance of the target (same seed at every probe).
HomophilyCalibration calibrate_homophily(const PopulationSpec& population, double target, std::uint64_t seed,
                                         double tolerance = 0.005, int max_iterations = 40);

/// generate() with the bias taken from calibrate_homophily when the spec
/// names a target assortativity. The calibration is reported when requested.
GeneratedPopulation generate_with_target(const PopulationSpec& population, const HomophilySpec& homophily,
                                         std::uint64_t seed, HomophilyCalibration* calibration = nullptr);

} // namespace opdyn
