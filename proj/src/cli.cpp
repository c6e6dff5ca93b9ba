#include "opdyn/cli.hpp"

#include "opdyn/config.hpp"
#include "opdyn/io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <iostream>
#include <optional>
#include <set>

namespace opdyn {

namespace {

using Json = nlohmann::ordered_json;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string dataset;
    bool homophily = false;
};

// Collects written files so the manifest can list them.
class OutputDir {
public:
    explicit OutputDir(fs::path root) : root_(std::move(root)) {}

    const fs::path& root() const { return root_; }

    void write(const fs::path& relative, const std::string& text) {
        write_text(root_ / relative, text);
        files_.insert(relative.generic_string());
    }

    void json(const fs::path& relative, const Json& j) { write(relative, j.dump(2) + "\n"); }

    void dataset(const fs::path& relative, const Dataset& d) {
        export_dataset(d, root_ / relative);
        files_.insert((relative / "edges.csv").generic_string());
        for (std::size_t k = 0; k < d.snapshots.size(); ++k) {
            files_.insert((relative / ("snapshot_" + std::to_string(k) + ".csv")).generic_string());
        }
    }

    void figures(const fs::path& relative, const FigureTables& t) {
        export_figure_data(t, root_ / relative);
        for (const char* f : {"figure4", "figure5", "figure6", "figure7", "figureB1", "figureB3", "figureB4"}) {
            files_.insert((relative / (std::string(f) + ".csv")).generic_string());
        }
        files_.insert((relative / "manifest.json").generic_string());
    }

    const std::set<std::string>& files() const { return files_; }

private:
    fs::path root_;
    std::set<std::string> files_;
};

Json to_json(const EpocDecomposition& d) {
    Json j;
    j["population"] = d.population;
    j["remarkable"] = d.remarkable;
    j["positive_skip"] = d.positive_skip;
    j["positive_nonskip"] = d.positive_nonskip;
    j["negative"] = d.negative;
    j["unaligned"] = d.unaligned;
    j["epoc"] = d.epoc;
    j["epoc_pos"] = d.epoc_pos;
    j["epoc_pos_skip"] = d.epoc_pos_skip;
    j["epoc_pos_nonskip"] = d.epoc_pos_nonskip;
    j["epoc_neg"] = d.epoc_neg;
    j["unaligned_rate"] = d.unaligned_rate;
    j["identity_holds"] = d.remarkable == d.positive_skip + d.positive_nonskip + d.negative + d.unaligned;
    return j;
}

// Null when the filtered population is empty.
Json decomposition_json(const std::vector<ShiftRecord>& records, bool require_stable) {
    for (const auto& r : records) {
        if (!require_stable || r.neighbor_stable) return to_json(epoc_decomposition(records, require_stable));
    }
    return nullptr;
}

Json inequalities_json(const std::vector<InequalityResult>& results) {
    Json arr = Json::array();
    for (const auto& r : results) {
        Json j;
        j["id"] = r.id;
        j["lhs"] = std::string(group_name(r.lhs_self)) + "|" + std::string(group_name(r.lhs_friends));
        j["relation"] = std::string(1, r.relation);
        j["rhs"] = std::string(group_name(r.rhs_self)) + "|" + std::string(group_name(r.rhs_friends));
        j["lhs_value"] = r.lhs;
        j["rhs_value"] = r.rhs;
        j["lhs_n"] = r.lhs_n;
        j["rhs_n"] = r.rhs_n;
        j["verdict"] = verdict_name(r.verdict);
        arr.push_back(j);
    }
    return arr;
}

Json populations_json(const Eigen::VectorXd& x) {
    Json j;
    const auto pops = group_populations(x);
    for (Group g : kAllGroups) j[std::string(group_name(g))] = pops[static_cast<std::size_t>(index(g))];
    return j;
}

Json ingest_json(const IngestReport& r) {
    Json j;
    j["agents_read"] = r.agents_read;
    j["edge_lines"] = r.edge_lines;
    j["agents_kept"] = r.agents_read - r.dropped_agents;
    j["edges_kept"] = r.edges_kept;
    j["dropped_agents"] = r.dropped_agents;
    j["isolated_agents"] = r.isolated_agents;
    j["components"] = r.components;
    j["summary"] = r.summary();
    return j;
}

std::string transition_dir(std::size_t t) { return "t" + std::to_string(t + 1) + "_t" + std::to_string(t + 2); }

MetricTable populations_table(const Dataset& d) {
    MetricTable table("group_populations", {"snapshot", "SL", "L", "M", "C", "SC", "total"});
    for (std::size_t k = 0; k < d.snapshots.size(); ++k) {
        const auto p = group_populations(d.snapshots[k].opinions);
        table.add_row({static_cast<std::int64_t>(k + 1), p[0], p[1], p[2], p[3], p[4],
                       static_cast<std::int64_t>(d.snapshots[k].size())});
    }
    return table;
}

IngestResult require_dataset(const Options& o, const RunConfig& c) {
    if (o.dataset.empty()) throw ConfigError("--dataset is required for this command");
    return load_dataset_dir(o.dataset, c.schedule.workers);
}

std::vector<std::vector<ShiftRecord>> all_records(const Dataset& d, unsigned workers) {
    std::vector<std::vector<ShiftRecord>> out;
    for (std::size_t t = 0; t + 1 < d.snapshots.size(); ++t) {
        out.push_back(classify_shifts(d.graph, d.snapshots[t], d.snapshots[t + 1], workers));
    }
    return out;
}

void cmd_generate(const RunConfig& c, OutputDir& out, Json& summary) {
    HomophilyCalibration cal{c.homophily.bias, 0.0, 0};
    const auto gen = generate_with_target(c.population, c.homophily, c.seed, &cal);
    const Dataset d = make_dataset(gen.graph, {gen.snapshot});
    out.dataset("", d);
    out.write("homophily.csv", homophily_table(gen.graph, gen.snapshot, c.analysis.degree_edges).to_csv());
    summary["agents"] = gen.graph.num_agents();
    summary["edges"] = gen.graph.num_edges();
    summary["bias"] = c.homophily.target_assortativity ? cal.bias : c.homophily.bias;
    if (c.homophily.target_assortativity) summary["calibration_iterations"] = cal.iterations;
    summary["assortativity"] = assortativity(gen.graph, gen.snapshot);
    summary["rematches"] = gen.rematches;
    summary["min_degree"] = gen.graph.min_degree();
    summary["populations"] = populations_json(gen.snapshot.opinions);
    out.json("generate_summary.json", summary);
}

void cmd_simulate(const RunConfig& c, const Options& o, OutputDir& out, Json& summary) {
    Dataset d;
    if (!o.dataset.empty()) {
        auto in = load_dataset_dir(o.dataset, c.schedule.workers);
        summary["ingest"] = ingest_json(in.report);
        d.graph = std::move(in.dataset.graph);
        d.external_ids = std::move(in.dataset.external_ids);
        d.snapshots = {in.dataset.snapshots.front()};
        d.snapshots.front().time_index = 0;
    } else {
        auto gen = generate_with_target(c.population, c.homophily, c.seed);
        d = make_dataset(gen.graph, {gen.snapshot});
    }
    const auto kernel = build_kernel(c.kernel, d.snapshots.front().opinions, c.seed);
    const auto activation = build_activation(c.activation, d.graph.num_agents());
    Schedule schedule = c.schedule;
    schedule.seed = c.seed;
    auto traj = run(d.graph, d.snapshots.front(), kernel, activation, schedule, c.observations - 1);
    d.snapshots = std::move(traj.snapshots);
    out.dataset("", d);

    summary["agents"] = d.graph.num_agents();
    summary["edges"] = d.graph.num_edges();
    summary["kernel"] = traj.provenance.kernel;
    summary["activation"] = traj.provenance.activation;
    summary["schedule"] = traj.provenance.schedule;
    summary["graph_hash"] = traj.provenance.graph_hash;
    Json spreads = Json::array();
    for (const auto& s : d.snapshots) spreads.push_back(spread(s));
    summary["spread"] = spreads;
    Json transitions = Json::array();
    const auto records = all_records(d, c.schedule.workers);
    for (std::size_t t = 0; t < records.size(); ++t) {
        Json j;
        j["transition"] = transition_dir(t);
        j["all"] = decomposition_json(records[t], false);
        j["neighbor_stable"] = decomposition_json(records[t], true);
        transitions.push_back(j);
    }
    summary["transitions"] = transitions;
    out.json("simulate_summary.json", summary);
}

void cmd_observe(const RunConfig& c, OutputDir& out, Json& summary) {
    const auto experiment = build_experiment(c);
    const auto result = run_observed_experiment(experiment, c.seed);
    const auto& rep = result.report;
    out.dataset("latent", make_dataset(rep.graph, result.latent.snapshots));

    // Observed opinions of the analyzed agents form a regular dataset.
    Dataset observed;
    observed.graph = rep.analyzed_graph;
    for (AgentId i : rep.analyzed_agents) observed.external_ids.push_back(std::to_string(i));
    for (const auto& s : result.observed.snapshots) {
        Eigen::VectorXd x(static_cast<Eigen::Index>(rep.analyzed_agents.size()));
        for (std::size_t k = 0; k < rep.analyzed_agents.size(); ++k) {
            x[static_cast<Eigen::Index>(k)] = s.opinions[rep.analyzed_agents[k]];
        }
        observed.snapshots.push_back({s.time_index, std::move(x)});
    }
    out.dataset("observed", observed);

    MetricTable confusion("shift_confusion", {"latent", "observed", "n"});
    for (int a = 0; a < kNumShiftCategories; ++a) {
        for (int b = 0; b < kNumShiftCategories; ++b) {
            confusion.add_row({std::string(shift_category_name(static_cast<ShiftCategory>(a))),
                               std::string(shift_category_name(static_cast<ShiftCategory>(b))),
                               rep.confusion(a, b)});
        }
    }
    out.write("confusion.csv", confusion.to_csv());

    summary["agents"] = rep.graph.num_agents();
    summary["analyzed_agents"] = rep.analyzed_agents.size();
    summary["observed_skip_fraction"] = rep.observed_skip_fraction();
    Json transitions = Json::array();
    for (std::size_t t = 0; t < rep.observed_epoc.size(); ++t) {
        Json j;
        j["transition"] = transition_dir(t);
        j["latent"] = to_json(rep.latent_epoc[t]);
        j["observed"] = to_json(rep.observed_epoc[t]);
        transitions.push_back(j);
    }
    summary["transitions"] = transitions;
    if (!rep.observed_records.empty()) {
        std::vector<ShiftRecord> pooled;
        for (const auto& r : rep.observed_records) pooled.insert(pooled.end(), r.begin(), r.end());
        out.write("observed_epoc_curves.csv", epoc_curves(pooled, c.analysis).to_csv());
        out.figures("figures", figure_tables(pooled, c.analysis));
    }
    out.json("observe_summary.json", summary);
}

void cmd_analyze(const RunConfig& c, const Options& o, OutputDir& out, Json& summary) {
    const auto in = require_dataset(o, c);
    const Dataset& d = in.dataset;
    if (d.snapshots.size() < 2) throw IoError("analyze needs at least two snapshots");
    summary["ingest"] = ingest_json(in.report);
    const auto records = all_records(d, c.schedule.workers);
    Json transitions = Json::array();
    for (std::size_t t = 0; t < records.size(); ++t) {
        const auto& r = records[t];
        const std::string dir = transition_dir(t);
        out.write(dir + "/epoc_curves.csv", epoc_curves(r, c.analysis).to_csv());
        out.write(dir + "/epoc_distance_curves.csv", epoc_distance_curves(r, c.analysis).to_csv());
        out.write(dir + "/radicalization_curves.csv", radicalization_curves(r, c.analysis).to_csv());
        out.write(dir + "/magnitude_curves.csv", magnitude_curves(r, c.analysis).to_csv());
        out.write(dir + "/pos_neg_ratio.csv", pos_neg_ratio(r, c.analysis).to_csv());
        out.write(dir + "/movement_map.csv", movement_map_table(movement_map(r)).to_csv());
        out.write(dir + "/movement_probability_curves.csv", movement_probability_curves(r, c.analysis).to_csv());
        out.figures(dir + "/figures", figure_tables(r, c.analysis));

        Json j;
        j["transition"] = dir;
        j["records"] = r.size();
        j["all"] = decomposition_json(r, false);
        j["neighbor_stable"] = decomposition_json(r, true);
        j["eq3"] = inequalities_json(eq3_inequalities(r, c.analysis.require_stable));
        transitions.push_back(j);
    }
    summary["transitions"] = transitions;
    if (o.homophily) {
        const auto table = homophily_table(d.graph, d.snapshots.front(), c.analysis.degree_edges);
        out.write("homophily.csv", table.to_csv());
        Json rows = Json::array();
        for (std::size_t r = 0; r < table.num_rows(); ++r) {
            Json row;
            row["group"] = table.text(r, "group");
            for (Group g : kAllGroups) {
                const std::string name(group_name(g));
                row[name] = table.number(r, name);
            }
            row["n"] = table.count(r, "n");
            rows.push_back(row);
        }
        summary["homophily"] = rows;
        summary["assortativity"] = assortativity(d.graph, d.snapshots.front());
    }
    out.json("epoc_summary.json", summary);
}

void cmd_report(const RunConfig& c, const Options& o, OutputDir& out, Json& summary) {
    const auto in = require_dataset(o, c);
    const Dataset& d = in.dataset;
    summary["ingest"] = ingest_json(in.report);
    out.write("group_populations.csv", populations_table(d).to_csv());
    out.write("homophily.csv", homophily_table(d.graph, d.snapshots.front(), c.analysis.degree_edges).to_csv());
    Json pops = Json::array();
    for (const auto& s : d.snapshots) pops.push_back(populations_json(s.opinions));
    summary["populations"] = pops;
    summary["assortativity"] = assortativity(d.graph, d.snapshots.front());
    const auto records = all_records(d, c.schedule.workers);
    Json transitions = Json::array();
    for (std::size_t t = 0; t < records.size(); ++t) {
        const auto map = movement_map(records[t]);
        out.write("movement_map_" + transition_dir(t) + ".csv", movement_map_table(map).to_csv());
        std::int64_t remarkable = 0;
        for (const auto& r : records[t]) remarkable += r.remarkable;
        Json j;
        j["transition"] = transition_dir(t);
        j["remarkable_shifts"] = remarkable;
        Json income, outcome;
        for (Group g : kAllGroups) {
            income[std::string(group_name(g))] = map.income(g);
            outcome[std::string(group_name(g))] = map.outcome(g);
        }
        j["income"] = income;
        j["outcome"] = outcome;
        transitions.push_back(j);
    }
    summary["transitions"] = transitions;
    out.json("report.json", summary);
}

int execute(Mode mode, const Options& o, std::ostream& log) {
    RunConfig c = load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (c.mode && *c.mode != mode) {
        throw ConfigError("config is for mode " + std::string(mode_name(*c.mode)) + ", not " +
                          std::string(mode_name(mode)));
    }
    const std::string dir = !o.out.empty() ? o.out : c.output_dir.value_or("");
    if (dir.empty()) throw ConfigError("no output directory (use --out or [output] dir)");
    OutputDir out(dir);

    Json summary;
    summary["command"] = mode_name(mode);
    summary["seed"] = c.seed;
    summary["config_hash"] = c.hash();
    switch (mode) {
    case Mode::Generate: cmd_generate(c, out, summary); break;
    case Mode::Simulate: cmd_simulate(c, o, out, summary); break;
    case Mode::Observe: cmd_observe(c, out, summary); break;
    case Mode::Analyze: cmd_analyze(c, o, out, summary); break;
    case Mode::Report: cmd_report(c, o, out, summary); break;
    }

    Json manifest;
    manifest["command"] = mode_name(mode);
    manifest["seed"] = c.seed;
    manifest["config_hash"] = c.hash();
    manifest["config"] = c.canonical();
    if (!o.dataset.empty()) manifest["dataset"] = o.dataset;
    manifest["files"] = out.files();
    write_text(out.root() / "manifest.json", manifest.dump(2) + "\n");
    log << mode_name(mode) << ": wrote " << out.files().size() + 1 << " files to " << out.root().string() << '\n';
    return 0;
}

int fail(std::ostream& err, ErrorCategory category, const std::string& message) {
    Json j;
    j["error"] = category_name(category);
    j["message"] = message;
    err << j.dump() << '\n';
    return static_cast<int>(category);
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"opdyn: opinion dynamics simulation and micro-level shift analysis"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;
    const std::vector<std::pair<Mode, std::string>> commands{
        {Mode::Simulate, "Run opinion dynamics and write the snapshot series"},
        {Mode::Generate, "Generate a population with a friendship graph"},
        {Mode::Observe, "Run latent dynamics seen through an observer model"},
        {Mode::Analyze, "Classify shifts and write metric tables for a dataset"},
        {Mode::Report, "Group populations, homophily and movement maps for a dataset"}};
    std::vector<std::pair<Mode, CLI::App*>> subs;
    for (const auto& [mode, help] : commands) {
        auto* sub = app.add_subcommand(std::string(mode_name(mode)), help);
        sub->add_option("--config", o.config, "Run configuration file")->required();
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--seed", seed, "Seed (overrides the config)");
        sub->add_option("--dataset", o.dataset, "Dataset directory");
        if (mode == Mode::Analyze) sub->add_flag("--homophily", o.homophily, "Also write the homophily table");
        subs.emplace_back(mode, sub);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail(err, ErrorCategory::Config, e.what());
    }

    try {
        for (const auto& [mode, sub] : subs) {
            if (!sub->parsed()) continue;
            if (sub->count("--seed")) o.seed = seed;
            return execute(mode, o, out);
        }
        return fail(err, ErrorCategory::Config, "no subcommand");
    } catch (const Error& e) {
        return fail(err, e.category(), e.what());
    } catch (const fs::filesystem_error& e) {
        return fail(err, ErrorCategory::Io, e.what());
    } catch (const std::exception& e) {
        return fail(err, ErrorCategory::Model, e.what());
    }
}

int run_command(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_command(args, std::cout, std::cerr);
}

} // namespace opdyn
