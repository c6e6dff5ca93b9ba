#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opdyn/analysis.hpp"
#include "opdyn/dynamics.hpp"
#include "opdyn/generator.hpp"
#include "opdyn/kernels.hpp"
#include "opdyn/observer.hpp"

namespace opdyn {

enum class Mode { Simulate, Generate, Observe, Analyze, Report };

std::string_view mode_name(Mode m);
Mode parse_mode(std::string_view name);

/// Kernel section. Per-agent extras are drawn at run time from the seed:
/// a stubborn_fraction of agents never move, and a susceptibility turns on
/// anchoring to the initial opinions.
struct KernelConfig {
    KernelShape shape = LinearPositive{};
    double stubborn_fraction = 0.0;
    std::optional<double> susceptibility;
};

struct ActivationConfig {
    enum class Model { Always, AbsKernel, Confidence } model = Model::Always;
    double scale = 1.0;
    double confidence = 0.0;          // every agent's confidence for the confidence model
    std::optional<double> kernel_scale;
};

struct ObserveConfig {
    int sources = 21;
    double source_drift = 0.0;
    SubscriptionMode subscription_mode = SubscriptionMode::Behavioral;
    SubscriptionParams subscriptions;
    int warmup_steps = 1;
    ObserverSpec observer;
    LatentDrive drive;
};

/// Parsed run configuration. Sections and keys:
///
///   seed = <u64>                       (required)
///   mode = simulate|generate|observe|analyze|report
///   [population]  n, fractions, mean_degree, group_mean_degree
///   [homophily]   bias, target_assortativity
///   [kernel]      family plus the family's parameters, stubborn_fraction, susceptibility
///   [activation]  model = always|abs_kernel|confidence, scale, confidence, kernel_scale
///   [schedule]    mode, source, steps_per_observation, observations, clamp, symmetric_pairs, workers
///   [observer]    sources, source_drift, subscription_mode, alignment, contagion, threshold,
///                 contagion_threshold, review_rate, warmup_steps, noise, min_subscriptions,
///                 max_subscriptions, drive_rate, drive_radius
///   [analysis]    bin_width, require_stable, support_floor, sigma_edges, degree_edges
///   [output]      dir
struct RunConfig {
    std::optional<Mode> mode;
    std::uint64_t seed = 0;
    PopulationSpec population;
    HomophilySpec homophily;
    KernelConfig kernel;
    ActivationConfig activation;
    Schedule schedule;
    int observations = 2;
    ObserveConfig observe;
    AnalysisOptions analysis;
    std::optional<std::string> output_dir;

    void validate() const;

    /// Every effective parameter except the seed and output directory, one
    /// key=value per line in a fixed order.
    std::string canonical() const;

    /// FNV-1a of canonical(), as 16 hex digits.
    std::string hash() const;
};

RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Kernel with per-agent extras realised for a population.
InfluenceKernel build_kernel(const KernelConfig& config, const Eigen::VectorXd& initial, std::uint64_t seed);

ActivationModel build_activation(const ActivationConfig& config, AgentId n);

ExperimentConfig build_experiment(const RunConfig& config);

} // namespace opdyn
