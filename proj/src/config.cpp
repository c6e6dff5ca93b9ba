#include "opdyn/config.hpp"

#include "opdyn/io.hpp"
#include "opdyn/rng.hpp"

#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>

namespace opdyn {

namespace {

struct Entry {
    std::string value;
    std::size_t line = 0;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

class Section {
public:
    Section(std::string origin, std::string name) : origin_(std::move(origin)), name_(std::move(name)) {}

    void add(std::string key, std::string value, std::size_t line) {
        if (!entries_.emplace(key, Entry{std::move(value), line}).second) {
            throw ConfigError(origin_ + ":" + std::to_string(line) + ": duplicate key " + qualified(key));
        }
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::optional<std::string> text(const std::string& key) {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        used_.insert(key);
        return it->second.value;
    }

    template <typename T>
    void read(const std::string& key, T& out) {
        if (auto v = text(key)) out = convert<T>(key, *v);
    }

    template <typename T>
    void read(const std::string& key, std::optional<T>& out) {
        if (auto v = text(key)) out = convert<T>(key, *v);
    }

    std::vector<double> list(const std::string& key, std::vector<double> fallback = {}) {
        const auto v = text(key);
        if (!v) return fallback;
        std::vector<double> out;
        if (trim(*v).empty()) return out;
        std::string_view rest = *v;
        while (true) {
            const auto comma = rest.find(',');
            out.push_back(convert<double>(key, std::string(trim(rest.substr(0, comma)))));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        return out;
    }

    void reject_unused() const {
        for (const auto& [key, entry] : entries_) {
            if (!used_.count(key)) {
                throw ConfigError(origin_ + ":" + std::to_string(entry.line) + ": unknown key " + qualified(key));
            }
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        const auto it = entries_.find(key);
        const std::string where = it == entries_.end() ? origin_ : origin_ + ":" + std::to_string(it->second.line);
        throw ConfigError(where + ": " + qualified(key) + ": " + what);
    }

private:
    std::string qualified(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

    template <typename T>
    T convert(const std::string& key, const std::string& raw) const {
        const std::string_view s = trim(raw);
        if constexpr (std::is_same_v<T, bool>) {
            if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
            if (s == "false" || s == "0" || s == "no" || s == "off") return false;
            fail(key, "expected a boolean, got '" + raw + "'");
        } else if constexpr (std::is_same_v<T, std::string>) {
            return std::string(s);
        } else {
            T v{};
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
                fail(key, "expected a number, got '" + raw + "'");
            }
            if constexpr (std::is_floating_point_v<T>) {
                if (!std::isfinite(v)) fail(key, "must be finite");
            }
            return v;
        }
    }

    std::string origin_;
    std::string name_;
    std::map<std::string, Entry> entries_;
    std::set<std::string> used_;
};

const std::set<std::string> kSections{"",         "population", "homophily", "kernel", "activation",
                                      "schedule", "observer",   "analysis",  "output"};

KernelShape parse_kernel(Section& s) {
    std::string family = "linear_positive";
    s.read("family", family);
    if (family == "linear_positive") {
        LinearPositive k;
        s.read("gain", k.gain);
        return k;
    }
    if (family == "moderated_positive") {
        ModeratedPositive k;
        s.read("peak_distance", k.peak_distance);
        s.read("peak_gain", k.peak_gain);
        return k;
    }
    if (family == "bounded_confidence") {
        BoundedConfidence k;
        s.read("epsilon", k.epsilon);
        s.read("gain", k.gain);
        return k;
    }
    if (family == "relaxed_bounded_confidence") {
        RelaxedBoundedConfidence k;
        s.read("epsilon", k.epsilon);
        s.read("gain_inside", k.gain_inside);
        s.read("gain_outside", k.gain_outside);
        return k;
    }
    if (family == "linear_negative") {
        LinearNegative k;
        s.read("gain", k.gain);
        return k;
    }
    if (family == "moderated_negative") {
        ModeratedNegative k;
        s.read("peak_distance", k.peak_distance);
        s.read("peak_gain", k.peak_gain);
        return k;
    }
    if (family == "combined") {
        CombinedPositiveNegative k;
        s.read("crossover", k.crossover);
        s.read("positive_peak_distance", k.positive_peak_distance);
        s.read("positive_peak_gain", k.positive_peak_gain);
        s.read("negative_peak_distance", k.negative_peak_distance);
        s.read("negative_peak_gain", k.negative_peak_gain);
        s.read("cutoff", k.cutoff);
        return k;
    }
    s.fail("family", "unknown kernel family '" + family + "'");
}

std::string f(double v) { return format_double(v); }

std::string list_text(const std::vector<double>& v) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + f(v[k]);
    return out;
}

std::string kernel_text(const KernelShape& shape) {
    return std::visit(
        [](const auto& k) -> std::string {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, LinearPositive>) return "family=linear_positive\ngain=" + f(k.gain);
            else if constexpr (std::is_same_v<T, ModeratedPositive>)
                return "family=moderated_positive\npeak_distance=" + f(k.peak_distance) + "\npeak_gain=" + f(k.peak_gain);
            else if constexpr (std::is_same_v<T, BoundedConfidence>)
                return "family=bounded_confidence\nepsilon=" + f(k.epsilon) + "\ngain=" + f(k.gain);
            else if constexpr (std::is_same_v<T, RelaxedBoundedConfidence>)
                return "family=relaxed_bounded_confidence\nepsilon=" + f(k.epsilon) + "\ngain_inside=" +
                       f(k.gain_inside) + "\ngain_outside=" + f(k.gain_outside);
            else if constexpr (std::is_same_v<T, LinearNegative>) return "family=linear_negative\ngain=" + f(k.gain);
            else if constexpr (std::is_same_v<T, ModeratedNegative>)
                return "family=moderated_negative\npeak_distance=" + f(k.peak_distance) + "\npeak_gain=" + f(k.peak_gain);
            else
                return "family=combined\ncrossover=" + f(k.crossover) + "\npositive_peak_distance=" +
                       f(k.positive_peak_distance) + "\npositive_peak_gain=" + f(k.positive_peak_gain) +
                       "\nnegative_peak_distance=" + f(k.negative_peak_distance) + "\nnegative_peak_gain=" +
                       f(k.negative_peak_gain) + "\ncutoff=" + f(k.cutoff);
        },
        shape);
}

} // namespace

std::string_view mode_name(Mode m) {
    switch (m) {
    case Mode::Simulate: return "simulate";
    case Mode::Generate: return "generate";
    case Mode::Observe: return "observe";
    case Mode::Analyze: return "analyze";
    case Mode::Report: return "report";
    }
    return "?";
}

Mode parse_mode(std::string_view name) {
    for (Mode m : {Mode::Simulate, Mode::Generate, Mode::Observe, Mode::Analyze, Mode::Report}) {
        if (mode_name(m) == name) return m;
    }
    throw ConfigError("unknown mode '" + std::string(name) + "'");
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    std::map<std::string, Section> sections;
    for (const auto& name : kSections) sections.emplace(name, Section(origin, name));

    std::string current;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view s = trim(raw);
        if (s.empty() || s.front() == '#' || s.front() == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(origin + ":" + std::to_string(line) + ": malformed section header");
            current = std::string(trim(s.substr(1, s.size() - 2)));
            if (!kSections.count(current) || current.empty()) {
                throw ConfigError(origin + ":" + std::to_string(line) + ": unknown section [" + current + "]");
            }
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(origin + ":" + std::to_string(line) + ": expected key = value");
        }
        const std::string key(trim(s.substr(0, eq)));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(line) + ": empty key");
        sections.at(current).add(key, std::string(trim(s.substr(eq + 1))), line);
    }

    RunConfig c;
    auto& top = sections.at("");
    if (auto m = top.text("mode")) c.mode = parse_mode(*m);
    if (!top.has("seed")) throw ConfigError(origin + ": seed is required");
    top.read("seed", c.seed);

    auto& pop = sections.at("population");
    pop.read("n", c.population.n);
    pop.read("mean_degree", c.population.mean_degree);
    if (pop.has("fractions")) {
        const auto v = pop.list("fractions");
        if (v.size() != kNumGroups) pop.fail("fractions", "expected five values");
        std::copy(v.begin(), v.end(), c.population.group_fractions.begin());
    }
    if (pop.has("group_mean_degree")) {
        const auto v = pop.list("group_mean_degree");
        if (v.size() != kNumGroups) pop.fail("group_mean_degree", "expected five values");
        std::array<double, kNumGroups> d{};
        std::copy(v.begin(), v.end(), d.begin());
        c.population.group_mean_degree = d;
    }

    auto& hom = sections.at("homophily");
    hom.read("bias", c.homophily.bias);
    hom.read("target_assortativity", c.homophily.target_assortativity);

    auto& ker = sections.at("kernel");
    c.kernel.shape = parse_kernel(ker);
    ker.read("stubborn_fraction", c.kernel.stubborn_fraction);
    ker.read("susceptibility", c.kernel.susceptibility);

    auto& act = sections.at("activation");
    if (auto m = act.text("model")) {
        if (*m == "always") c.activation.model = ActivationConfig::Model::Always;
        else if (*m == "abs_kernel") c.activation.model = ActivationConfig::Model::AbsKernel;
        else if (*m == "confidence") c.activation.model = ActivationConfig::Model::Confidence;
        else act.fail("model", "unknown activation model '" + *m + "'");
    }
    act.read("scale", c.activation.scale);
    act.read("confidence", c.activation.confidence);
    act.read("kernel_scale", c.activation.kernel_scale);

    auto& sch = sections.at("schedule");
    if (auto m = sch.text("mode")) {
        if (*m == "synchronous") c.schedule.mode = UpdateMode::Synchronous;
        else if (*m == "asynchronous") c.schedule.mode = UpdateMode::AsynchronousUniform;
        else sch.fail("mode", "expected synchronous or asynchronous");
    }
    if (auto m = sch.text("source")) {
        if (*m == "neighbor_mean") c.schedule.source = InfluenceSource::NeighborMean;
        else if (*m == "random_neighbor") c.schedule.source = InfluenceSource::RandomNeighbor;
        else sch.fail("source", "expected neighbor_mean or random_neighbor");
    }
    sch.read("steps_per_observation", c.schedule.steps_per_observation);
    sch.read("observations", c.observations);
    sch.read("clamp", c.schedule.clamp);
    sch.read("symmetric_pairs", c.schedule.symmetric_pairs);
    sch.read("workers", c.schedule.workers);

    auto& obs = sections.at("observer");
    obs.read("sources", c.observe.sources);
    obs.read("source_drift", c.observe.source_drift);
    if (auto m = obs.text("subscription_mode")) {
        if (*m == "behavioral") c.observe.subscription_mode = SubscriptionMode::Behavioral;
        else if (*m == "personal") c.observe.subscription_mode = SubscriptionMode::PersonalSource;
        else obs.fail("subscription_mode", "expected behavioral or personal");
    }
    obs.read("alignment", c.observe.subscriptions.alignment);
    obs.read("contagion", c.observe.subscriptions.contagion);
    obs.read("threshold", c.observe.subscriptions.threshold);
    obs.read("contagion_threshold", c.observe.subscriptions.contagion_threshold);
    obs.read("review_rate", c.observe.subscriptions.review_rate);
    obs.read("warmup_steps", c.observe.warmup_steps);
    obs.read("noise", c.observe.observer.noise);
    obs.read("min_subscriptions", c.observe.observer.min_subscriptions);
    obs.read("max_subscriptions", c.observe.observer.max_subscriptions);
    obs.read("drive_rate", c.observe.drive.rate);
    obs.read("drive_radius", c.observe.drive.radius);

    auto& ana = sections.at("analysis");
    ana.read("bin_width", c.analysis.bin_width);
    ana.read("require_stable", c.analysis.require_stable);
    ana.read("support_floor", c.analysis.support_floor);
    c.analysis.sigma_edges = ana.list("sigma_edges");
    c.analysis.degree_edges = ana.list("degree_edges");

    auto& out = sections.at("output");
    out.read("dir", c.output_dir);

    for (const auto& [_, section] : sections) section.reject_unused();
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    // An unreadable file stays an I/O error; only its contents are config errors.
    return parse_config(read_text(path), path.string());
}

void RunConfig::validate() const {
    population.validate();
    homophily.validate();
    opdyn::validate(kernel.shape);
    if (!(kernel.stubborn_fraction >= 0.0 && kernel.stubborn_fraction <= 1.0)) {
        throw ConfigError("kernel: stubborn_fraction must lie in [0,1]");
    }
    if (kernel.susceptibility && !(*kernel.susceptibility >= 0.0 && *kernel.susceptibility <= 1.0)) {
        throw ConfigError("kernel: susceptibility must lie in [0,1]");
    }
    opdyn::validate(build_activation(activation, 1), 1);
    schedule.validate();
    if (observations < 1) throw ConfigError("schedule: observations must be >= 1");
    if (observe.sources < 1) throw ConfigError("observer: sources must be >= 1");
    if (!std::isfinite(observe.source_drift)) throw ConfigError("observer: source_drift must be finite");
    if (observe.warmup_steps < 0) throw ConfigError("observer: warmup_steps must be non-negative");
    observe.subscriptions.validate();
    observe.observer.validate();
    observe.drive.validate();
    analysis.validate();
}

std::string RunConfig::canonical() const {
    std::ostringstream os;
    os << "mode=" << (mode ? mode_name(*mode) : "") << '\n';
    os << "[population]\nn=" << population.n << "\nfractions="
       << list_text({population.group_fractions.begin(), population.group_fractions.end()})
       << "\nmean_degree=" << f(population.mean_degree) << "\ngroup_mean_degree="
       << (population.group_mean_degree
               ? list_text({population.group_mean_degree->begin(), population.group_mean_degree->end()})
               : "")
       << '\n';
    os << "[homophily]\nbias=" << f(homophily.bias) << "\ntarget_assortativity="
       << (homophily.target_assortativity ? f(*homophily.target_assortativity) : "") << '\n';
    os << "[kernel]\n" << kernel_text(kernel.shape) << "\nstubborn_fraction=" << f(kernel.stubborn_fraction)
       << "\nsusceptibility=" << (kernel.susceptibility ? f(*kernel.susceptibility) : "") << '\n';
    const char* models[] = {"always", "abs_kernel", "confidence"};
    os << "[activation]\nmodel=" << models[static_cast<int>(activation.model)] << "\nscale=" << f(activation.scale)
       << "\nconfidence=" << f(activation.confidence)
       << "\nkernel_scale=" << (activation.kernel_scale ? f(*activation.kernel_scale) : "") << '\n';
    os << "[schedule]\nmode=" << (schedule.mode == UpdateMode::Synchronous ? "synchronous" : "asynchronous")
       << "\nsource=" << (schedule.source == InfluenceSource::NeighborMean ? "neighbor_mean" : "random_neighbor")
       << "\nsteps_per_observation=" << schedule.steps_per_observation << "\nobservations=" << observations
       << "\nclamp=" << schedule.clamp << "\nsymmetric_pairs=" << schedule.symmetric_pairs << '\n';
    os << "[observer]\nsources=" << observe.sources << "\nsource_drift=" << f(observe.source_drift)
       << "\nsubscription_mode="
       << (observe.subscription_mode == SubscriptionMode::Behavioral ? "behavioral" : "personal")
       << "\nalignment=" << f(observe.subscriptions.alignment) << "\ncontagion=" << f(observe.subscriptions.contagion)
       << "\nthreshold=" << f(observe.subscriptions.threshold)
       << "\ncontagion_threshold=" << f(observe.subscriptions.contagion_threshold)
       << "\nreview_rate=" << f(observe.subscriptions.review_rate)
       << "\nwarmup_steps=" << observe.warmup_steps << "\nnoise=" << f(observe.observer.noise)
       << "\nmin_subscriptions=" << observe.observer.min_subscriptions
       << "\nmax_subscriptions=" << observe.observer.max_subscriptions << "\ndrive_rate=" << f(observe.drive.rate)
       << "\ndrive_radius=" << f(observe.drive.radius) << '\n';
    os << "[analysis]\nbin_width=" << f(analysis.bin_width) << "\nrequire_stable=" << analysis.require_stable
       << "\nsupport_floor=" << analysis.support_floor << "\nsigma_edges=" << list_text(analysis.sigma_edges)
       << "\ndegree_edges=" << list_text(analysis.degree_edges) << '\n';
    return os.str();
}

std::string RunConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

InfluenceKernel build_kernel(const KernelConfig& config, const Eigen::VectorXd& initial, std::uint64_t seed) {
    InfluenceKernel k;
    k.shape = config.shape;
    const auto n = static_cast<AgentId>(initial.size());
    if (config.stubborn_fraction > 0.0) {
        k.stubborn.resize(static_cast<std::size_t>(n));
        for (AgentId i = 0; i < n; ++i) {
            auto rng = Rng::stream(seed, 0x57ab, static_cast<std::uint64_t>(i));
            k.stubborn[static_cast<std::size_t>(i)] = rng.bernoulli(config.stubborn_fraction);
        }
    }
    if (config.susceptibility) {
        k.prejudice = Prejudice{initial, Eigen::VectorXd::Constant(n, *config.susceptibility)};
    }
    k.validate(n);
    return k;
}

ActivationModel build_activation(const ActivationConfig& config, AgentId n) {
    switch (config.model) {
    case ActivationConfig::Model::Always: return AlwaysActive{};
    case ActivationConfig::Model::AbsKernel: return AbsKernelProportional{config.scale};
    case ActivationConfig::Model::Confidence:
        return ConfidenceWeighted{Eigen::VectorXd::Constant(n, config.confidence), config.kernel_scale};
    }
    return AlwaysActive{};
}

ExperimentConfig build_experiment(const RunConfig& c) {
    ExperimentConfig e;
    e.population = c.population;
    e.homophily = c.homophily;
    e.kernel.shape = c.kernel.shape;
    e.activation = build_activation(c.activation, c.population.n);
    e.schedule = c.schedule;
    e.observations = c.observations;
    e.sources = source_grid(c.observe.sources);
    e.source_drift = c.observe.source_drift;
    e.subscription_mode = c.observe.subscription_mode;
    e.subscriptions = c.observe.subscriptions;
    e.warmup_steps = c.observe.warmup_steps;
    e.observer = c.observe.observer;
    e.drive = c.observe.drive;
    e.analysis = c.analysis;
    return e;
}

} // namespace opdyn
