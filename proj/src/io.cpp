#include "opdyn/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace opdyn {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// Calls fn(line_number, fields) for every non-blank line after the header.
template <typename Fn>
void for_each_row(const fs::path& path, std::size_t min_fields, Fn&& fn) {
    const std::string text = read_text(path);
    const std::string file = path.string();
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header = true;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view line(text.data() + pos, (nl == std::string::npos ? text.size() : nl) - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split(line);
        if (fields.size() < min_fields) {
            throw ParseError(file, line_no, "expected at least " + std::to_string(min_fields) + " fields");
        }
        if (header) {
            header = false;
            continue;
        }
        fn(line_no, fields);
    }
    if (header) throw ParseError(file, 1, "missing header row");
}

double parse_opinion(std::string_view field, const std::string& file, std::size_t line) {
    if (field.empty()) throw ParseError(file, line, "empty opinion field");
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ParseError(file, line, "malformed number '" + std::string(field) + "'");
    }
    if (!(v >= 0.0 && v <= 1.0)) {
        throw OpinionRangeError(file + ":" + std::to_string(line) + ": opinion " + std::string(field) +
                                " outside [0,1]");
    }
    return v;
}

int snapshot_index(const fs::path& p) {
    const std::string stem = p.stem().string();
    const std::string prefix = "snapshot_";
    if (p.extension() != ".csv" || stem.rfind(prefix, 0) != 0) return -1;
    int k = -1;
    const auto digits = std::string_view(stem).substr(prefix.size());
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (res.ec != std::errc() || res.ptr != digits.data() + digits.size() || digits.empty()) return -1;
    return k;
}

} // namespace

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void Dataset::validate() const {
    graph.validate();
    if (!external_ids.empty() && external_ids.size() != static_cast<std::size_t>(graph.num_agents())) {
        throw ModelError("dataset: id table does not match graph");
    }
    for (const auto& s : snapshots) {
        if (s.size() != graph.num_agents()) throw ModelError("dataset: snapshot does not cover the graph's agents");
        s.validate();
    }
}

std::string IngestReport::summary() const {
    return std::to_string(dropped_agents) + " agents outside giant component";
}

SnapshotFile read_snapshot_csv(const fs::path& path) {
    SnapshotFile out;
    std::unordered_map<std::string, std::size_t> seen;
    const std::string file = path.string();
    for_each_row(path, 2, [&](std::size_t line, const std::vector<std::string_view>& f) {
        if (f.size() != 2) throw ParseError(file, line, "expected 2 fields, got " + std::to_string(f.size()));
        if (f[0].empty()) throw ParseError(file, line, "empty agent id");
        std::string id(f[0]);
        if (!seen.emplace(id, line).second) throw ParseError(file, line, "duplicate agent id " + id);
        out.opinions.push_back(parse_opinion(f[1], file, line));
        out.ids.push_back(std::move(id));
    });
    return out;
}

std::vector<std::pair<std::string, std::string>> read_edges_csv(const fs::path& path) {
    std::vector<std::pair<std::string, std::string>> out;
    const std::string file = path.string();
    for_each_row(path, 2, [&](std::size_t line, const std::vector<std::string_view>& f) {
        if (f.size() != 2) throw ParseError(file, line, "expected 2 fields, got " + std::to_string(f.size()));
        if (f[0].empty() || f[1].empty()) throw ParseError(file, line, "empty edge endpoint");
        out.emplace_back(std::string(f[0]), std::string(f[1]));
    });
    return out;
}

std::vector<SnapshotFile> read_wide_opinions_csv(const fs::path& path) {
    std::vector<SnapshotFile> out;
    std::unordered_map<std::string, std::size_t> seen;
    const std::string file = path.string();
    std::size_t columns = 0;
    for_each_row(path, 2, [&](std::size_t line, const std::vector<std::string_view>& f) {
        if (columns == 0) {
            columns = f.size();
            out.resize(columns - 1);
        }
        if (f.size() != columns) {
            throw ParseError(file, line, "expected " + std::to_string(columns) + " fields, got " +
                                             std::to_string(f.size()));
        }
        std::string id(f[0]);
        if (id.empty()) throw ParseError(file, line, "empty agent id");
        if (!seen.emplace(id, line).second) throw ParseError(file, line, "duplicate agent id " + id);
        for (std::size_t c = 1; c < columns; ++c) {
            out[c - 1].ids.push_back(id);
            out[c - 1].opinions.push_back(parse_opinion(f[c], file, line));
        }
    });
    return out;
}

IngestResult ingest(const std::vector<SnapshotFile>& snapshots,
                    const std::vector<std::pair<std::string, std::string>>& edges) {
    if (snapshots.empty()) throw IoError("ingest: no snapshot files");
    const auto& first = snapshots.front();
    const auto n = static_cast<AgentId>(first.ids.size());
    if (n == 0) throw IoError("ingest: first snapshot has no agents");

    std::unordered_map<std::string, AgentId> dense;
    dense.reserve(first.ids.size());
    for (AgentId i = 0; i < n; ++i) dense.emplace(first.ids[i], i);

    std::vector<Eigen::VectorXd> values(snapshots.size(), Eigen::VectorXd(n));
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        const auto& s = snapshots[k];
        if (s.ids.size() != first.ids.size()) {
            throw IoError("snapshot " + std::to_string(k) + " covers " + std::to_string(s.ids.size()) +
                          " agents, expected " + std::to_string(n));
        }
        for (std::size_t r = 0; r < s.ids.size(); ++r) {
            const auto it = dense.find(s.ids[r]);
            if (it == dense.end()) throw IoError("snapshot " + std::to_string(k) + ": unknown agent " + s.ids[r]);
            values[k][it->second] = s.opinions[r];
        }
    }

    std::vector<std::pair<AgentId, AgentId>> pairs;
    pairs.reserve(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto a = dense.find(edges[e].first);
        const auto b = dense.find(edges[e].second);
        if (a == dense.end() || b == dense.end()) {
            const auto& missing = a == dense.end() ? edges[e].first : edges[e].second;
            throw DanglingEdgeError("edge " + std::to_string(e + 1) + " references unknown agent " + missing);
        }
        pairs.emplace_back(a->second, b->second);
    }
    const SocialGraph full = SocialGraph::from_edges(n, pairs);

    IngestReport report;
    report.agents_read = n;
    report.edge_lines = static_cast<std::int64_t>(edges.size());
    for (AgentId i = 0; i < n; ++i) report.isolated_agents += full.degree(i) == 0;

    const auto labels = connected_components(full);
    const AgentId num_labels = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(num_labels), 0);
    for (AgentId l : labels) ++sizes[static_cast<std::size_t>(l)];
    report.components = num_labels;
    const auto giant = static_cast<AgentId>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    std::vector<bool> keep(static_cast<std::size_t>(n));
    for (AgentId i = 0; i < n; ++i) keep[static_cast<std::size_t>(i)] = labels[i] == giant;

    auto [graph, ids] = induced_subgraph(full, keep);
    report.dropped_agents = n - graph.num_agents();
    report.edges_kept = graph.num_edges();

    IngestResult result;
    result.report = report;
    Dataset& d = result.dataset;
    d.graph = std::move(graph);
    d.external_ids.reserve(ids.size());
    for (AgentId i : ids) d.external_ids.push_back(first.ids[static_cast<std::size_t>(i)]);
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        Eigen::VectorXd x(static_cast<Eigen::Index>(ids.size()));
        for (std::size_t j = 0; j < ids.size(); ++j) x[static_cast<Eigen::Index>(j)] = values[k][ids[j]];
        d.snapshots.push_back({static_cast<int>(k), std::move(x)});
    }
    return result;
}

IngestResult ingest_files(const std::vector<fs::path>& snapshot_paths, const fs::path& edges_path,
                          unsigned workers) {
    std::vector<SnapshotFile> snaps(snapshot_paths.size());
    std::vector<std::pair<std::string, std::string>> edges;
    if (workers <= 1) {
        for (std::size_t k = 0; k < snapshot_paths.size(); ++k) snaps[k] = read_snapshot_csv(snapshot_paths[k]);
        edges = read_edges_csv(edges_path);
    } else {
        // One reader per file; the first failure is rethrown after all join.
        std::vector<std::exception_ptr> errors(snapshot_paths.size() + 1);
        {
            std::vector<std::jthread> readers;
            for (std::size_t k = 0; k < snapshot_paths.size(); ++k) {
                readers.emplace_back([&, k] {
                    try {
                        snaps[k] = read_snapshot_csv(snapshot_paths[k]);
                    } catch (...) {
                        errors[k] = std::current_exception();
                    }
                });
            }
            try {
                edges = read_edges_csv(edges_path);
            } catch (...) {
                errors.back() = std::current_exception();
            }
        }
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    return ingest(snaps, edges);
}

IngestResult load_dataset_dir(const fs::path& dir, unsigned workers) {
    if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
    const fs::path edges = dir / "edges.csv";
    if (!fs::exists(edges)) throw IoError("dataset directory lacks edges.csv: " + dir.string());

    std::map<int, fs::path> ordered;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const int k = snapshot_index(entry.path());
        if (k >= 0 && !ordered.emplace(k, entry.path()).second) {
            throw IoError("duplicate snapshot index " + std::to_string(k) + " in " + dir.string());
        }
    }
    if (!ordered.empty()) {
        std::vector<fs::path> paths;
        for (const auto& [_, p] : ordered) paths.push_back(p);
        return ingest_files(paths, edges, workers);
    }
    const fs::path wide = dir / "opinions.csv";
    if (fs::exists(wide)) return ingest(read_wide_opinions_csv(wide), read_edges_csv(edges));
    throw IoError("dataset directory has neither snapshot_<k>.csv files nor opinions.csv: " + dir.string());
}

std::string snapshot_csv(const OpinionSnapshot& snapshot, const std::vector<std::string>& external_ids) {
    std::string out = "agent_id,opinion\n";
    for (Eigen::Index i = 0; i < snapshot.size(); ++i) {
        out += external_ids.empty() ? std::to_string(i) : external_ids[static_cast<std::size_t>(i)];
        out += ',';
        out += format_double(snapshot[i]);
        out += '\n';
    }
    return out;
}

std::string edges_csv(const SocialGraph& graph, const std::vector<std::string>& external_ids) {
    std::string out = "src,dst\n";
    auto name = [&](AgentId i) {
        return external_ids.empty() ? std::to_string(i) : external_ids[static_cast<std::size_t>(i)];
    };
    for (const auto& [a, b] : graph.edge_list()) {
        out += name(a);
        out += ',';
        out += name(b);
        out += '\n';
    }
    return out;
}

void export_dataset(const Dataset& dataset, const fs::path& dir) {
    write_text(dir / "edges.csv", edges_csv(dataset.graph, dataset.external_ids));
    for (std::size_t k = 0; k < dataset.snapshots.size(); ++k) {
        write_text(dir / ("snapshot_" + std::to_string(k) + ".csv"),
                   snapshot_csv(dataset.snapshots[k], dataset.external_ids));
    }
}

Dataset make_dataset(const SocialGraph& graph, std::vector<OpinionSnapshot> snapshots) {
    Dataset d;
    d.graph = graph;
    d.snapshots = std::move(snapshots);
    d.external_ids.reserve(static_cast<std::size_t>(graph.num_agents()));
    for (AgentId i = 0; i < graph.num_agents(); ++i) d.external_ids.push_back(std::to_string(i));
    return d;
}

FigureTables figure_tables(const std::vector<ShiftRecord>& records, const AnalysisOptions& options) {
    FigureTables t;
    AnalysisOptions plain = options;
    plain.sigma_edges.clear();
    AnalysisOptions strata = options;
    if (strata.sigma_edges.empty()) strata.sigma_edges = {0.0, 0.1, 0.2, 0.5};
    t.figure4 = epoc_curves(records, options);
    t.figure5 = radicalization_curves(records, plain);
    t.figure6 = magnitude_curves(records, options);
    t.figure7 = pos_neg_ratio(records, options);
    t.figureB1 = epoc_by_neighbor_change(records, options);
    t.figureB3 = movement_probability_curves(records, options);
    t.figureB4 = radicalization_curves(records, strata);
    return t;
}

void export_figure_data(const FigureTables& tables, const fs::path& dir) {
    const std::vector<std::pair<std::string, const MetricTable*>> files{
        {"figure4", &tables.figure4}, {"figure5", &tables.figure5},   {"figure6", &tables.figure6},
        {"figure7", &tables.figure7}, {"figureB1", &tables.figureB1}, {"figureB3", &tables.figureB3},
        {"figureB4", &tables.figureB4}};
    nlohmann::ordered_json manifest;
    manifest["format"] = "opdyn-figure-data";
    manifest["version"] = 1;
    manifest["missing_value"] = "nan";
    manifest["infinity"] = "inf";
    auto& families = manifest["families"];
    for (const auto& [family, table] : files) {
        const std::string file = family + ".csv";
        write_text(dir / file, table->to_csv(false));
        nlohmann::ordered_json entry;
        entry["file"] = file;
        entry["table"] = table->name();
        entry["columns"] = table->columns();
        entry["rows"] = table->num_rows();
        entry["support_column"] = table->support_column();
        entry["support_floor"] = table->support_floor();
        families[family] = entry;
    }
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

} // namespace opdyn
