#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "opdyn/analysis.hpp"
#include "opdyn/core.hpp"
#include "opdyn/metric_table.hpp"

namespace opdyn {

namespace fs = std::filesystem;

/// Opinion snapshots over a shared friendship graph. external_ids maps each
/// dense agent id back to the id used in the source files.
struct Dataset {
    std::vector<OpinionSnapshot> snapshots;
    SocialGraph graph;
    std::vector<std::string> external_ids;

    AgentId num_agents() const { return graph.num_agents(); }
    void validate() const;
};

struct IngestReport {
    std::int64_t agents_read = 0;
    std::int64_t edge_lines = 0;
    std::int64_t edges_kept = 0;          // unique undirected edges inside the giant component
    std::int64_t dropped_agents = 0;      // outside the giant component (isolated agents included)
    std::int64_t isolated_agents = 0;
    std::int64_t components = 0;

    std::string summary() const;
};

struct IngestResult {
    Dataset dataset;
    IngestReport report;
};

/// One parsed `agent_id,opinion` file: ids in file order.
struct SnapshotFile {
    std::vector<std::string> ids;
    std::vector<double> opinions;
};

SnapshotFile read_snapshot_csv(const fs::path& path);

/// `src,dst` pairs of external ids in file order.
std::vector<std::pair<std::string, std::string>> read_edges_csv(const fs::path& path);

/// Builds a dataset from parsed files. Agent order follows the first
/// snapshot; every later snapshot must cover the same agent set. Agents
/// outside the largest connected component are dropped.
IngestResult ingest(const std::vector<SnapshotFile>& snapshots,
                    const std::vector<std::pair<std::string, std::string>>& edges);

/// Reads the files (in parallel when workers > 1) and calls ingest.
IngestResult ingest_files(const std::vector<fs::path>& snapshot_paths, const fs::path& edges_path,
                          unsigned workers = 1);

/// Canonical directory layout: edges.csv plus snapshot_<k>.csv ordered by k.
/// Alternative layout: edges.csv plus opinions.csv in wide form
/// (`id,x1,x2,...`, one column per observation).
IngestResult load_dataset_dir(const fs::path& dir, unsigned workers = 1);

/// Splits a wide opinions file into one snapshot per value column.
std::vector<SnapshotFile> read_wide_opinions_csv(const fs::path& path);

/// Writes edges.csv and snapshot_<k>.csv using the external ids.
void export_dataset(const Dataset& dataset, const fs::path& dir);

/// Dense ids as external ids, for generated or simulated data.
Dataset make_dataset(const SocialGraph& graph, std::vector<OpinionSnapshot> snapshots);

std::string snapshot_csv(const OpinionSnapshot& snapshot, const std::vector<std::string>& external_ids = {});
std::string edges_csv(const SocialGraph& graph, const std::vector<std::string>& external_ids = {});

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

/// Tables behind each figure family. Empty tables are written header-only.
struct FigureTables {
    MetricTable figure4;   // EPOC+ / EPOC- by friends' mean
    MetricTable figure5;   // radicalization probability
    MetricTable figure6;   // shift magnitudes
    MetricTable figure7;   // positive/negative ratio
    MetricTable figureB1;  // EPOC by change in friends' mean
    MetricTable figureB3;  // movement probabilities with zones
    MetricTable figureB4;  // radicalization split by friends' spread
};

FigureTables figure_tables(const std::vector<ShiftRecord>& records, const AnalysisOptions& options);

/// One CSV per figure family plus manifest.json describing each schema.
void export_figure_data(const FigureTables& tables, const fs::path& dir);

} // namespace opdyn
