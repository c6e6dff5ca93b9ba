#include "opdyn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace opdyn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

// Zero at lo and hi, gain at peak; two half-parabolas joined at the peak.
double lobe(double d, double lo, double peak, double hi, double gain) {
    if (d <= lo || d >= hi) return 0.0;
    const double u = d < peak ? (peak - d) / (peak - lo) : (d - peak) / (hi - peak);
    return gain * (1.0 - u * u);
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

} // namespace

double kernel_value(const KernelShape& shape, Opinion xi, Opinion x_src) {
    const double d = std::abs(x_src - xi);
    return std::visit(
        overloaded{
            [](const LinearPositive& k) { return k.gain; },
            [d](const ModeratedPositive& k) {
                return lobe(d, 0.0, k.peak_distance, 2.0 * k.peak_distance, k.peak_gain);
            },
            [d](const BoundedConfidence& k) { return d <= k.epsilon ? k.gain : 0.0; },
            [d](const RelaxedBoundedConfidence& k) { return d <= k.epsilon ? k.gain_inside : k.gain_outside; },
            [](const LinearNegative& k) { return k.gain; },
            [d](const ModeratedNegative& k) {
                return lobe(d, 0.0, k.peak_distance, 2.0 * k.peak_distance, k.peak_gain);
            },
            [d](const CombinedPositiveNegative& k) {
                if (d < k.crossover) return lobe(d, 0.0, k.positive_peak_distance, k.crossover, k.positive_peak_gain);
                return lobe(d, k.crossover, k.negative_peak_distance, k.cutoff, k.negative_peak_gain);
            },
        },
        shape);
}

double kernel_value(const InfluenceKernel& kernel, AgentId agent, Opinion xi, Opinion x_src) {
    if (kernel.is_stubborn(agent)) return 0.0;
    return kernel_value(kernel.shape, xi, x_src);
}

bool is_positive_family(const KernelShape& shape) {
    return std::holds_alternative<LinearPositive>(shape) || std::holds_alternative<ModeratedPositive>(shape) ||
           std::holds_alternative<BoundedConfidence>(shape) ||
           std::holds_alternative<RelaxedBoundedConfidence>(shape);
}

KernelShape mirror(const KernelShape& shape) {
    return std::visit(
        overloaded{
            [](const LinearPositive& k) -> KernelShape { return LinearNegative{-k.gain}; },
            [](const LinearNegative& k) -> KernelShape { return LinearPositive{-k.gain}; },
            [](const ModeratedPositive& k) -> KernelShape {
                return ModeratedNegative{k.peak_distance, -k.peak_gain};
            },
            [](const ModeratedNegative& k) -> KernelShape {
                return ModeratedPositive{k.peak_distance, -k.peak_gain};
            },
            [](BoundedConfidence k) -> KernelShape {
                k.gain = -k.gain;
                return k;
            },
            [](RelaxedBoundedConfidence k) -> KernelShape {
                k.gain_inside = -k.gain_inside;
                k.gain_outside = -k.gain_outside;
                return k;
            },
            [](CombinedPositiveNegative k) -> KernelShape {
                k.positive_peak_gain = -k.positive_peak_gain;
                k.negative_peak_gain = -k.negative_peak_gain;
                return k;
            },
        },
        shape);
}

std::string describe(const KernelShape& shape) {
    std::ostringstream os;
    os.precision(15);
    std::visit(overloaded{
                   [&](const LinearPositive& k) { os << "linear_positive(gain=" << k.gain << ")"; },
                   [&](const ModeratedPositive& k) {
                       os << "moderated_positive(peak_distance=" << k.peak_distance << ",peak_gain=" << k.peak_gain
                          << ")";
                   },
                   [&](const BoundedConfidence& k) {
                       os << "bounded_confidence(epsilon=" << k.epsilon << ",gain=" << k.gain << ")";
                   },
                   [&](const RelaxedBoundedConfidence& k) {
                       os << "relaxed_bounded_confidence(epsilon=" << k.epsilon << ",gain_inside=" << k.gain_inside
                          << ",gain_outside=" << k.gain_outside << ")";
                   },
                   [&](const LinearNegative& k) { os << "linear_negative(gain=" << k.gain << ")"; },
                   [&](const ModeratedNegative& k) {
                       os << "moderated_negative(peak_distance=" << k.peak_distance << ",peak_gain=" << k.peak_gain
                          << ")";
                   },
                   [&](const CombinedPositiveNegative& k) {
                       os << "combined(crossover=" << k.crossover << ",positive_peak=" << k.positive_peak_distance
                          << ":" << k.positive_peak_gain << ",negative_peak=" << k.negative_peak_distance << ":"
                          << k.negative_peak_gain << ",cutoff=" << k.cutoff << ")";
                   },
               },
               shape);
    return os.str();
}

void validate(const KernelShape& shape) {
    std::visit(overloaded{
                   [](const LinearPositive& k) { require(k.gain > 0.0 && k.gain <= 1.0, "linear_positive: gain must lie in (0,1]"); },
                   [](const ModeratedPositive& k) {
                       require(k.peak_distance > 0.0, "moderated_positive: peak_distance must be positive");
                       require(k.peak_gain > 0.0 && k.peak_gain <= 1.0, "moderated_positive: peak_gain must lie in (0,1]");
                   },
                   [](const BoundedConfidence& k) {
                       // epsilon = 0 is admitted as the degenerate no-influence case.
                       require(k.epsilon >= 0.0 && k.epsilon <= 1.0, "bounded_confidence: epsilon must lie in [0,1]");
                       require(k.gain > 0.0 && k.gain <= 1.0, "bounded_confidence: gain must lie in (0,1]");
                   },
                   [](const RelaxedBoundedConfidence& k) {
                       require(k.epsilon > 0.0 && k.epsilon <= 1.0, "relaxed_bounded_confidence: epsilon must lie in (0,1]");
                       require(k.gain_inside > 0.0 && k.gain_inside <= 1.0,
                               "relaxed_bounded_confidence: gain_inside must lie in (0,1]");
                       require(k.gain_outside > 0.0 && k.gain_outside <= k.gain_inside,
                               "relaxed_bounded_confidence: gain_outside must lie in (0,gain_inside]");
                   },
                   [](const LinearNegative& k) { require(k.gain < 0.0 && k.gain >= -1.0, "linear_negative: gain must lie in [-1,0)"); },
                   [](const ModeratedNegative& k) {
                       require(k.peak_distance > 0.0, "moderated_negative: peak_distance must be positive");
                       require(k.peak_gain < 0.0 && k.peak_gain >= -1.0, "moderated_negative: peak_gain must lie in [-1,0)");
                   },
                   [](const CombinedPositiveNegative& k) {
                       require(0.0 < k.positive_peak_distance && k.positive_peak_distance < k.crossover &&
                                   k.crossover < k.negative_peak_distance && k.negative_peak_distance < k.cutoff &&
                                   k.cutoff <= 1.0,
                               "combined: need 0 < positive_peak < crossover < negative_peak < cutoff <= 1");
                       require(k.positive_peak_gain > 0.0 && k.positive_peak_gain <= 1.0,
                               "combined: positive peak gain must lie in (0,1]");
                       require(k.negative_peak_gain < 0.0 && k.negative_peak_gain >= -1.0,
                               "combined: negative peak gain must lie in [-1,0)");
                   },
               },
               shape);
}

void InfluenceKernel::validate(AgentId num_agents) const {
    opdyn::validate(shape);
    if (num_agents >= 0 && !stubborn.empty() && static_cast<AgentId>(stubborn.size()) != num_agents) {
        throw ConfigError("stubborn set size does not match agent count");
    }
    if (prejudice) {
        const auto& p = *prejudice;
        if (p.anchor.size() != p.susceptibility.size()) throw ConfigError("prejudice: anchor/susceptibility size mismatch");
        if (num_agents >= 0 && p.anchor.size() != num_agents) throw ConfigError("prejudice size does not match agent count");
        if ((p.susceptibility.array() < 0.0).any() || (p.susceptibility.array() > 1.0).any()) {
            throw ConfigError("prejudice: susceptibility must lie in [0,1]");
        }
        if ((p.anchor.array() < 0.0).any() || (p.anchor.array() > 1.0).any()) {
            throw ConfigError("prejudice: anchor must lie in [0,1]");
        }
    }
}

double activation_probability(const ActivationModel& model, const InfluenceKernel& kernel, AgentId agent,
                              Opinion xi, Opinion x_src) {
    auto proportional = [&](double scale) {
        const double response = kernel_value(kernel, agent, xi, x_src) * (x_src - xi);
        return std::min(1.0, scale * std::abs(response));
    };
    return std::visit(overloaded{
                          [](const AlwaysActive&) { return 1.0; },
                          [&](const AbsKernelProportional& m) { return proportional(m.scale); },
                          [&](const ConfidenceWeighted& m) {
                              const double base = m.kernel_scale ? proportional(*m.kernel_scale) : 1.0;
                              return base * (1.0 - m.confidence[agent]);
                          },
                      },
                      model);
}

void validate(const ActivationModel& model, AgentId num_agents) {
    std::visit(overloaded{
                   [](const AlwaysActive&) {},
                   [](const AbsKernelProportional& m) { require(m.scale >= 0.0, "activation: scale must be non-negative"); },
                   [&](const ConfidenceWeighted& m) {
                       if (num_agents >= 0) require(m.confidence.size() == num_agents, "activation: confidence size mismatch");
                       require((m.confidence.array() >= 0.0).all() && (m.confidence.array() <= 1.0).all(),
                               "activation: confidence must lie in [0,1]");
                       if (m.kernel_scale) require(*m.kernel_scale >= 0.0, "activation: scale must be non-negative");
                   },
               },
               model);
}

std::string describe(const ActivationModel& model) {
    std::ostringstream os;
    os.precision(15);
    std::visit(overloaded{
                   [&](const AlwaysActive&) { os << "always"; },
                   [&](const AbsKernelProportional& m) { os << "abs_kernel(scale=" << m.scale << ")"; },
                   [&](const ConfidenceWeighted& m) {
                       os << "confidence_weighted(n=" << m.confidence.size();
                       if (m.kernel_scale) os << ",scale=" << *m.kernel_scale;
                       os << ")";
                   },
               },
               model);
    return os.str();
}

Opinion fj_update(const KernelShape& shape, Opinion xi, Opinion x_src, Opinion anchor, double susceptibility) {
    const double l = kernel_value(shape, xi, x_src);
    return susceptibility * (xi + l * (x_src - xi)) + (1.0 - susceptibility) * anchor;
}

} // namespace opdyn
