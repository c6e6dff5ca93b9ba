#include "opdyn/observer.hpp"

#include "opdyn/parallel.hpp"
#include "opdyn/rng.hpp"

#include <algorithm>
#include <cmath>

namespace opdyn {

namespace {

constexpr std::uint64_t kSubscriptionTag = 0x5b5b;
constexpr std::uint64_t kNoiseTag = 0x6c6c;
constexpr std::uint64_t kDynamicsTag = 0x7d7d;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

std::vector<InformationSource> source_grid(int count) {
    if (count < 1) throw ConfigError("source grid needs at least one source");
    std::vector<InformationSource> sources;
    sources.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double bias = count == 1 ? 0.5 : static_cast<double>(k) / (count - 1);
        sources.push_back({k, bias});
    }
    return sources;
}

void SubscriptionParams::validate() const {
    if (!(alignment >= 0.0) || !(contagion >= 0.0)) throw ConfigError("subscriptions: weights must be non-negative");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("subscriptions: threshold must lie in [0,1]");
    if (!(review_rate >= 0.0 && review_rate <= 1.0)) throw ConfigError("subscriptions: review_rate must lie in [0,1]");
    if (!(contagion_threshold >= 0.0 && contagion_threshold <= 1.0)) {
        throw ConfigError("subscriptions: contagion threshold must lie in [0,1]");
    }
}

double follow_probability(const SubscriptionParams& p, double bias, double opinion, double friend_fraction) {
    const double align = p.threshold - std::abs(bias - opinion);
    const double social = friend_fraction - p.contagion_threshold;
    // Zero-weight terms drop out even when the weight of the other is huge.
    double z = 0.0;
    if (p.alignment != 0.0) z += p.alignment * align;
    if (p.contagion != 0.0) z += p.contagion * social;
    return logistic(z);
}

SubscriptionState subscription_step(const Eigen::VectorXd& latent, const std::vector<InformationSource>& sources,
                                    const SocialGraph& graph, const SubscriptionState& current,
                                    const SubscriptionParams& params, std::uint64_t seed, std::uint64_t step_index,
                                    unsigned workers) {
    if (sources.empty()) throw ConfigError("subscription_step: no information sources");
    const AgentId n = graph.num_agents();
    if (latent.size() != n) throw ModelError("subscription_step: opinion vector does not match graph");
    const bool has_current = current.num_agents() == n;
    const auto S = sources.size();

    SubscriptionState next;
    next.follows.resize(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t begin, std::size_t end) {
        std::vector<int> friend_counts(S);
        for (auto i = static_cast<AgentId>(begin); i < static_cast<AgentId>(end); ++i) {
            std::fill(friend_counts.begin(), friend_counts.end(), 0);
            const auto nb = graph.neighbors(i);
            if (has_current) {
                for (AgentId j : nb) {
                    for (int s : current.follows[j]) ++friend_counts[static_cast<std::size_t>(s)];
                }
            }
            auto rng = Rng::stream(seed, kSubscriptionTag, step_index, static_cast<std::uint64_t>(i));
            auto& out = next.follows[i];
            const std::vector<int>* mine = has_current ? &current.follows[i] : nullptr;
            for (std::size_t s = 0; s < S; ++s) {
                // Draw the review decision first so the stream layout does not depend on it.
                const bool reviewed = !mine || params.review_rate >= 1.0 || rng.uniform() < params.review_rate;
                if (!reviewed) {
                    if (std::binary_search(mine->begin(), mine->end(), static_cast<int>(s))) {
                        out.push_back(static_cast<int>(s));
                    }
                    continue;
                }
                const double fraction =
                    nb.empty() ? 0.0 : static_cast<double>(friend_counts[s]) / static_cast<double>(nb.size());
                if (rng.bernoulli(follow_probability(params, sources[s].bias, latent[i], fraction))) {
                    out.push_back(static_cast<int>(s));
                }
            }
        }
    });
    return next;
}

void ObserverSpec::validate() const {
    if (!(noise >= 0.0)) throw ConfigError("observer: noise must be non-negative");
    if (min_subscriptions < 1 || max_subscriptions < min_subscriptions) {
        throw ConfigError("observer: need 1 <= min_subscriptions <= max_subscriptions");
    }
}

ObservedSnapshot observe(const SubscriptionState& subs, const std::vector<InformationSource>& sources,
                         const ObserverSpec& observer, std::uint64_t seed, std::uint64_t step_index) {
    const AgentId n = subs.num_agents();
    ObservedSnapshot out{OpinionSnapshot{static_cast<int>(step_index), Eigen::VectorXd(n)},
                         std::vector<bool>(static_cast<std::size_t>(n), false)};
    for (AgentId i = 0; i < n; ++i) {
        const auto& f = subs.follows[i];
        const auto k = static_cast<int>(f.size());
        if (k == 0 || k < observer.min_subscriptions || k > observer.max_subscriptions) {
            out.snapshot.opinions[i] = std::nan("");
            continue;
        }
        double sum = 0.0;
        for (int s : f) sum += sources.at(static_cast<std::size_t>(s)).bias;
        double estimate = sum / k;
        if (observer.noise > 0.0) {
            auto rng = Rng::stream(seed, kNoiseTag, step_index, static_cast<std::uint64_t>(i));
            estimate += observer.noise * rng.normal();
        }
        out.snapshot.opinions[i] = std::clamp(estimate, 0.0, 1.0);
        out.observable[i] = true;
    }
    return out;
}

void LatentDrive::validate() const {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("drive: rate must lie in [0,1]");
    if (!(radius >= 0.0 && radius <= 0.5)) throw ConfigError("drive: radius must lie in [0,0.5]");
}

Eigen::VectorXd apply_drive(const LatentDrive& drive, const Eigen::VectorXd& latent) {
    if (drive.rate == 0.0) return latent;
    Eigen::VectorXd out = latent;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (std::abs(out[i] - 0.5) > drive.radius) out[i] += drive.rate * (0.5 - out[i]);
    }
    return out;
}

void ExperimentConfig::validate() const {
    population.validate();
    homophily.validate();
    kernel.validate(population.n);
    opdyn::validate(activation, population.n);
    schedule.validate();
    if (observations < 2) throw ConfigError("experiment: observations must be >= 2");
    if (sources.empty() && subscription_mode == SubscriptionMode::Behavioral) {
        throw ConfigError("experiment: no information sources");
    }
    for (const auto& s : sources) {
        if (!(s.bias >= 0.0 && s.bias <= 1.0)) throw ConfigError("experiment: source bias must lie in [0,1]");
    }
    if (warmup_steps < 0) throw ConfigError("experiment: warmup_steps must be non-negative");
    subscriptions.validate();
    observer.validate();
    drive.validate();
    analysis.validate();
}

std::string_view shift_category_name(ShiftCategory c) {
    switch (c) {
    case ShiftCategory::Static: return "static";
    case ShiftCategory::PositiveNonSkip: return "positive_nonskip";
    case ShiftCategory::PositiveSkip: return "positive_skip";
    case ShiftCategory::Negative: return "negative";
    case ShiftCategory::Unaligned: return "unaligned";
    }
    return "?";
}

ShiftCategory shift_category(const ShiftRecord& r) {
    switch (r.direction) {
    case Direction::None: return ShiftCategory::Static;
    case Direction::Positive:
        return r.skip_class == SkipClass::Skipping ? ShiftCategory::PositiveSkip : ShiftCategory::PositiveNonSkip;
    case Direction::Negative: return ShiftCategory::Negative;
    case Direction::Unaligned: return ShiftCategory::Unaligned;
    }
    return ShiftCategory::Static;
}

double ExperimentReport::observed_skip_fraction() const {
    std::int64_t skip = 0, positive = 0;
    for (const auto& d : observed_epoc) {
        skip += d.positive_skip;
        positive += d.positive_skip + d.positive_nonskip;
    }
    return positive ? static_cast<double>(skip) / static_cast<double>(positive) : 0.0;
}

namespace {

Eigen::VectorXd restrict(const Eigen::VectorXd& x, const std::vector<AgentId>& ids) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(ids.size()));
    for (std::size_t k = 0; k < ids.size(); ++k) out[static_cast<Eigen::Index>(k)] = x[ids[k]];
    return out;
}

} // namespace

ExperimentResult run_observed_experiment(const ExperimentConfig& config, std::uint64_t seed) {
    config.validate();
    auto gen = generate_with_target(config.population, config.homophily, seed);
    const SocialGraph& graph = gen.graph;
    const AgentId n = graph.num_agents();

    Schedule schedule = config.schedule;
    schedule.seed = mix64(seed ^ kDynamicsTag);

    std::vector<InformationSource> sources = config.sources;
    const bool personal = config.subscription_mode == SubscriptionMode::PersonalSource;
    SubscriptionState subs;
    std::uint64_t sub_step = 0;

    auto refresh = [&](const Eigen::VectorXd& latent) {
        if (personal) {
            sources.resize(static_cast<std::size_t>(n));
            subs.follows.assign(static_cast<std::size_t>(n), {});
            for (AgentId i = 0; i < n; ++i) {
                sources[static_cast<std::size_t>(i)] = {i, latent[i]};
                subs.follows[static_cast<std::size_t>(i)] = {i};
            }
            return;
        }
        subs = subscription_step(latent, sources, graph, subs, config.subscriptions, seed, sub_step++,
                                 config.schedule.workers);
    };

    ExperimentResult result;
    result.latent.provenance = {describe(config.kernel.shape), describe(config.activation), describe(schedule),
                                graph.hash()};
    result.observed.provenance = result.latent.provenance;

    OpinionSnapshot latent = gen.snapshot;
    for (int w = 0; w < config.warmup_steps; ++w) refresh(latent.opinions);
    refresh(latent.opinions);
    std::vector<ObservedSnapshot> observed{observe(subs, sources, config.observer, seed, 0)};
    result.latent.snapshots.push_back(latent);

    std::uint64_t step_index = 0;
    for (int obs = 1; obs < config.observations; ++obs) {
        for (int s = 0; s < schedule.steps_per_observation; ++s) {
            latent = step(graph, latent, config.kernel, config.activation, schedule, step_index++);
            latent.opinions = apply_drive(config.drive, latent.opinions);
        }
        latent.time_index = obs;
        result.latent.snapshots.push_back(latent);
        if (config.source_drift != 0.0 && !personal) {
            for (auto& src : sources) src.bias = std::clamp(src.bias + config.source_drift, 0.0, 1.0);
        }
        refresh(latent.opinions);
        observed.push_back(observe(subs, sources, config.observer, seed, static_cast<std::uint64_t>(obs)));
        observed.back().snapshot.time_index = obs;
    }

    // Analyze only agents observable throughout, on the induced friendship graph.
    std::vector<bool> keep(static_cast<std::size_t>(n), true);
    for (const auto& o : observed) {
        for (AgentId i = 0; i < n; ++i) keep[i] = keep[i] && o.observable[i];
    }
    auto [sub_graph, ids] = induced_subgraph(graph, keep);
    std::vector<bool> connected(static_cast<std::size_t>(sub_graph.num_agents()));
    for (AgentId i = 0; i < sub_graph.num_agents(); ++i) connected[i] = sub_graph.degree(i) > 0;
    auto [analyzed_graph, local_ids] = induced_subgraph(sub_graph, connected);
    std::vector<AgentId> analyzed(local_ids.size());
    for (std::size_t k = 0; k < local_ids.size(); ++k) analyzed[k] = ids[static_cast<std::size_t>(local_ids[k])];

    ExperimentReport& report = result.report;
    report.graph = graph;
    report.analyzed_agents = analyzed;
    report.analyzed_graph = analyzed_graph;
    for (const auto& o : observed) result.observed.snapshots.push_back(o.snapshot);

    if (analyzed_graph.num_agents() > 0) {
        for (std::size_t t = 0; t + 1 < observed.size(); ++t) {
            const OpinionSnapshot ob{static_cast<int>(t), restrict(observed[t].snapshot.opinions, analyzed)};
            const OpinionSnapshot oa{static_cast<int>(t + 1), restrict(observed[t + 1].snapshot.opinions, analyzed)};
            const OpinionSnapshot lb{static_cast<int>(t), restrict(result.latent.snapshots[t].opinions, analyzed)};
            const OpinionSnapshot la{static_cast<int>(t + 1), restrict(result.latent.snapshots[t + 1].opinions, analyzed)};
            auto obs_records = classify_shifts(analyzed_graph, ob, oa, config.schedule.workers);
            const auto lat_records = classify_shifts(analyzed_graph, lb, la, config.schedule.workers);
            for (std::size_t k = 0; k < obs_records.size(); ++k) {
                ++report.confusion(static_cast<int>(shift_category(lat_records[k])),
                                   static_cast<int>(shift_category(obs_records[k])));
            }
            report.latent_epoc.push_back(epoc_decomposition(lat_records, config.analysis.require_stable));
            report.observed_epoc.push_back(epoc_decomposition(obs_records, config.analysis.require_stable));
            report.observed_records.push_back(std::move(obs_records));
        }
    }
    return result;
}

} // namespace opdyn
