#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "opdyn/core.hpp"

namespace opdyn {

// Response-curve families. The coefficient l returned for a pair of opinions
// enters the update x' = x + l * (x_src - x).

struct LinearPositive {
    double gain = 0.5;  // constant l, in (0, 1]
};

// Quadratic in distance: zero at 0 and 2 * peak_distance, peak_gain at peak_distance.
struct ModeratedPositive {
    double peak_distance = 0.3;
    double peak_gain = 0.5;  // (0, 1]
};

struct BoundedConfidence {
    double epsilon = 0.2;  // influence when distance <= epsilon
    double gain = 0.5;
};

struct RelaxedBoundedConfidence {
    double epsilon = 0.2;
    double gain_inside = 0.5;
    double gain_outside = 0.05;  // nonzero residual exchange beyond epsilon
};

struct LinearNegative {
    double gain = -0.5;  // [-1, 0)
};

struct ModeratedNegative {
    double peak_distance = 0.3;
    double peak_gain = -0.5;  // [-1, 0)
};

/// Positive lobe on [0, crossover], negative lobe on [crossover, cutoff],
/// zero beyond cutoff. Each lobe is a pair of half-parabolas meeting at its
/// peak, so the curve is continuous and vanishes at 0, crossover and cutoff.
struct CombinedPositiveNegative {
    double crossover = 0.4;
    double positive_peak_distance = 0.2;
    double positive_peak_gain = 0.5;
    double negative_peak_distance = 0.6;
    double negative_peak_gain = -0.3;
    double cutoff = 0.9;
};

using KernelShape = std::variant<LinearPositive, ModeratedPositive, BoundedConfidence, RelaxedBoundedConfidence,
                                 LinearNegative, ModeratedNegative, CombinedPositiveNegative>;

/// Friedkin-Johnsen anchors: x' = lambda * (x + l (x_src - x)) + (1 - lambda) * anchor.
struct Prejudice {
    Eigen::VectorXd anchor;
    Eigen::VectorXd susceptibility;
};

struct InfluenceKernel {
    KernelShape shape = LinearPositive{};
    std::vector<bool> stubborn;  // empty, or one flag per agent
    std::optional<Prejudice> prejudice;

    bool is_stubborn(AgentId i) const { return !stubborn.empty() && stubborn[static_cast<std::size_t>(i)]; }

    // Throws ConfigError when a parameter violates its family's constraints.
    void validate(AgentId num_agents = -1) const;
};

/// Signed coefficient l for an agent at xi facing source x_src.
double kernel_value(const KernelShape& shape, Opinion xi, Opinion x_src);

/// Same, with the stubborn veto applied for the given agent.
double kernel_value(const InfluenceKernel& kernel, AgentId agent, Opinion xi, Opinion x_src);

/// Whether the family only ever pulls toward the source.
bool is_positive_family(const KernelShape& shape);

/// Reflects the curve on the horizontal axis (gains negated).
KernelShape mirror(const KernelShape& shape);

std::string describe(const KernelShape& shape);

void validate(const KernelShape& shape);

struct AlwaysActive {};

/// Activation probability min(1, scale * |l(d) * d|): proportional to the
/// absolute value of the response curve (the shift the kernel would produce).
struct AbsKernelProportional {
    double scale = 1.0;
};

/// Multiplies a base probability (1, or the kernel-proportional one when
/// kernel_scale is set) by (1 - confidence_i).
struct ConfidenceWeighted {
    Eigen::VectorXd confidence;
    std::optional<double> kernel_scale;
};

using ActivationModel = std::variant<AlwaysActive, AbsKernelProportional, ConfidenceWeighted>;

double activation_probability(const ActivationModel& model, const InfluenceKernel& kernel, AgentId agent,
                              Opinion xi, Opinion x_src);

void validate(const ActivationModel& model, AgentId num_agents = -1);

std::string describe(const ActivationModel& model);

/// Friedkin-Johnsen blend of the kernel update with a fixed anchor.
Opinion fj_update(const KernelShape& shape, Opinion xi, Opinion x_src, Opinion anchor, double susceptibility);

} // namespace opdyn
