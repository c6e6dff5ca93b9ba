#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "opdyn/core.hpp"
#include "opdyn/metric_table.hpp"

namespace opdyn {

/// Shifts at or below this magnitude are noise; friends' means that move
/// less than this between snapshots count as stable.
inline constexpr double kRemarkableThreshold = 0.05;

enum class Direction : std::uint8_t { None, Positive, Negative, Unaligned };
enum class SkipClass : std::uint8_t { NotApplicable, Skipping, NonSkipping };

std::string_view direction_name(Direction d);
std::string_view skip_class_name(SkipClass s);

struct ShiftRecord {
    AgentId agent = 0;
    double x_before = 0.0;
    double x_after = 0.0;
    NeighborhoodStats stats_before;
    double neighbor_mean_after = 0.0;
    bool remarkable = false;
    Direction direction = Direction::None;
    SkipClass skip_class = SkipClass::NotApplicable;
    bool radicalized = false;
    Group group_before = Group::M;
    Group group_after = Group::M;
    bool neighbor_stable = false;

    double magnitude() const { return std::abs(x_after - x_before); }
    Group neighbor_group() const { return assign_group(stats_before.mean); }
};

/// Classifies one transition from its opinions and neighborhood data.
ShiftRecord classify_record(AgentId agent, double x_before, double x_after, const NeighborhoodStats& stats_before,
                            double neighbor_mean_after);

/// One record per agent; neighborhood statistics come from the earlier snapshot.
std::vector<ShiftRecord> classify_shifts(const SocialGraph& graph, const OpinionSnapshot& before,
                                         const OpinionSnapshot& after, unsigned workers = 1);

struct AnalysisOptions {
    double bin_width = 0.05;
    bool require_stable = true;
    std::int64_t support_floor = 20;
    std::vector<double> sigma_edges;          // radicalization strata; empty = none
    std::vector<double> degree_edges;         // homophily strata lower bounds; empty = none

    void validate() const;
};

/// Equal-width bins over [0, 1]; the last bin is closed on the right.
class Bins {
public:
    explicit Bins(double width);
    int count() const { return count_; }
    double low(int k) const { return static_cast<double>(k) / count_; }
    double high(int k) const { return static_cast<double>(k + 1) / count_; }
    int index(double x) const;

private:
    int count_;
};

struct EpocDecomposition {
    std::int64_t population = 0;
    std::int64_t remarkable = 0;
    std::int64_t positive_skip = 0;
    std::int64_t positive_nonskip = 0;
    std::int64_t negative = 0;
    std::int64_t unaligned = 0;

    double epoc_pos_skip = 0.0;
    double epoc_pos_nonskip = 0.0;
    double epoc_pos = 0.0;   // epoc_pos_skip + epoc_pos_nonskip
    double epoc_neg = 0.0;
    double unaligned_rate = 0.0;
    double epoc = 0.0;       // epoc_pos + epoc_neg + unaligned_rate
};

/// Rates over the (optionally neighbor-stable) population.
EpocDecomposition epoc_decomposition(const std::vector<ShiftRecord>& records, bool require_stable);

/// EPOC+ and EPOC- per (x_i group, x_-i bin).
/// Columns: xi_group, x_neg_bin_low, x_neg_bin_high, epoc_pos, epoc_neg, n_pos, n_neg, n_total.
MetricTable epoc_curves(const std::vector<ShiftRecord>& records, const AnalysisOptions& options = {});

/// EPOC+ and EPOC- per (x_i group, |x_i - x_-i| bin).
MetricTable epoc_distance_curves(const std::vector<ShiftRecord>& records, const AnalysisOptions& options = {});

/// EPOC per (x_i group, |x_-i(t+1) - x_-i(t)| bin), over all records.
MetricTable epoc_by_neighbor_change(const std::vector<ShiftRecord>& records, const AnalysisOptions& options = {});

enum class Verdict { Holds, Fails, Undetermined };
std::string_view verdict_name(Verdict v);

struct InequalityResult {
    int id = 0;
    Group lhs_self, lhs_friends, rhs_self, rhs_friends;
    char relation = '<';
    double lhs = 0.0;
    double rhs = 0.0;
    std::int64_t lhs_n = 0;
    std::int64_t rhs_n = 0;
    Verdict verdict = Verdict::Undetermined;
};

/// EPOC+(x_i = A, x_-i = B) evaluated for a group pair.
double epoc_pos_cell(const std::vector<ShiftRecord>& records, Group self, Group friends, bool require_stable,
                     std::int64_t* n = nullptr);

/// The six group-pair comparisons of positive-shift rates:
///   (SL,L) < (L,SL); (SL,M) < (M,SL); (L,M) < (M,L);
///   (C,M) > (M,C);   (M,SC) > (SC,M); (C,SC) > (SC,C).
/// A comparison is undetermined when a cell is empty or neither side has a
/// positive shift.
std::vector<InequalityResult> eq3_inequalities(const std::vector<ShiftRecord>& records, bool require_stable = true);

/// Probability of the named group transitions per x_-i bin (and sigma stratum).
/// Columns: transition, sigma_low, sigma_high, x_neg_bin_low, x_neg_bin_high, probability, n_transition, n_total.
MetricTable radicalization_curves(const std::vector<ShiftRecord>& records, const AnalysisOptions& options = {},
                                  const std::vector<std::pair<Group, Group>>& transitions = {{Group::L, Group::SL},
                                                                                             {Group::C, Group::SC}});

/// Mean |shift| of remarkable positive and negative shifts per (x_i group, x_-i bin).
/// Columns: xi_group, direction, x_neg_bin_low, x_neg_bin_high, mean_magnitude, n.
MetricTable magnitude_curves(const std::vector<ShiftRecord>& records, const AnalysisOptions& options = {});

/// Positive/negative count ratio per (x_i group, x_-i bin); inf when only positives.
/// Columns: xi_group, x_neg_bin_low, x_neg_bin_high, ratio, n_pos, n_neg, n_total.
MetricTable pos_neg_ratio(const std::vector<ShiftRecord>& records, const AnalysisOptions& options = {});

/// Mean neighborhood composition per group (and degree stratum), with a
/// final "null" row holding the global group fractions.
/// Columns: group, degree_low, degree_high, SL, L, M, C, SC, n.
MetricTable homophily_table(const SocialGraph& graph, const OpinionSnapshot& snapshot,
                            const std::vector<double>& degree_edges = {});

struct MovementMap {
    Eigen::Matrix<std::int64_t, kNumGroups, kNumGroups> counts =
        Eigen::Matrix<std::int64_t, kNumGroups, kNumGroups>::Zero();

    // Arrivals from other groups (column sum without the diagonal).
    std::int64_t income(Group g) const { return counts.col(index(g)).sum() - counts(index(g), index(g)); }
    // Departures to other groups (row sum without the diagonal).
    std::int64_t outcome(Group g) const { return counts.row(index(g)).sum() - counts(index(g), index(g)); }
};

MovementMap movement_map(const std::vector<ShiftRecord>& records);

/// Columns: from_group, to_SL, to_L, to_M, to_C, to_SC, income, outcome.
MetricTable movement_map_table(const MovementMap& map);

enum class Zone { Static, Negative, OwnGroup, Skipping, NonSkipping };
std::string_view zone_name(Zone z);

/// Area of the opinion space a friends' group falls in for the move from -> to.
Zone movement_zone(Group from, Group to, Group friends);

/// Probability of landing in each group per source group and x_-i bin, static
/// moves included in the denominators.
/// Columns: from_group, to_group, x_neg_bin_low, x_neg_bin_high, zone, probability, n_move, n_total.
MetricTable movement_probability_curves(const std::vector<ShiftRecord>& records, const AnalysisOptions& options = {});

/// Spearman rank correlation with average ranks for ties.
double spearman_correlation(const std::vector<double>& xs, const std::vector<double>& ys);

} // namespace opdyn
