#include "opdyn/analysis.hpp"

#include "opdyn/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace opdyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool included(const ShiftRecord& r, bool require_stable) { return !require_stable || r.neighbor_stable; }

Cell text(std::string_view s) { return Cell{std::string(s)}; }

// Stratum k such that edges[k] <= v < edges[k+1] (last stratum closed); -1 if outside.
int stratum(const std::vector<double>& edges, double v) {
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const bool last = k + 2 == edges.size();
        if (v >= edges[k] && (v < edges[k + 1] || (last && v <= edges[k + 1]))) return static_cast<int>(k);
    }
    return -1;
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

} // namespace

std::string_view direction_name(Direction d) {
    switch (d) {
    case Direction::None: return "none";
    case Direction::Positive: return "positive";
    case Direction::Negative: return "negative";
    case Direction::Unaligned: return "unaligned";
    }
    return "?";
}

std::string_view skip_class_name(SkipClass s) {
    switch (s) {
    case SkipClass::NotApplicable: return "n/a";
    case SkipClass::Skipping: return "skipping";
    case SkipClass::NonSkipping: return "non-skipping";
    }
    return "?";
}

std::string_view verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Undetermined: return "undetermined";
    }
    return "?";
}

std::string_view zone_name(Zone z) {
    switch (z) {
    case Zone::Static: return "static";
    case Zone::Negative: return "negative";
    case Zone::OwnGroup: return "own-group";
    case Zone::Skipping: return "skipping";
    case Zone::NonSkipping: return "non-skipping";
    }
    return "?";
}

ShiftRecord classify_record(AgentId agent, double x_before, double x_after, const NeighborhoodStats& stats_before,
                            double neighbor_mean_after) {
    ShiftRecord r;
    r.agent = agent;
    r.x_before = x_before;
    r.x_after = x_after;
    r.stats_before = stats_before;
    r.neighbor_mean_after = neighbor_mean_after;
    r.group_before = assign_group(x_before);
    r.group_after = assign_group(x_after);
    r.neighbor_stable = std::abs(neighbor_mean_after - stats_before.mean) < kRemarkableThreshold;

    const double shift = x_after - x_before;
    r.remarkable = std::abs(shift) > kRemarkableThreshold;
    if (!r.remarkable) return r;

    // Sign agreement between the shift and the pull toward the friends' mean.
    const double pull = stats_before.mean - x_before;
    if (pull == 0.0) {
        r.direction = Direction::Unaligned;
    } else if ((shift > 0.0) == (pull > 0.0)) {
        r.direction = Direction::Positive;
        const double lo = std::min(x_before, stats_before.mean);
        const double hi = std::max(x_before, stats_before.mean);
        r.skip_class = (x_after >= lo && x_after <= hi) ? SkipClass::NonSkipping : SkipClass::Skipping;
    } else {
        r.direction = Direction::Negative;
    }
    r.radicalized = (x_before > 0.5 && x_after > x_before) || (x_before < 0.5 && x_after < x_before);
    return r;
}

std::vector<ShiftRecord> classify_shifts(const SocialGraph& graph, const OpinionSnapshot& before,
                                         const OpinionSnapshot& after, unsigned workers) {
    const AgentId n = graph.num_agents();
    if (before.size() != n || after.size() != n) throw ModelError("classify_shifts: snapshot size does not match graph");
    std::vector<ShiftRecord> records(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t begin, std::size_t end) {
        for (auto i = static_cast<AgentId>(begin); i < static_cast<AgentId>(end); ++i) {
            const auto stats = neighborhood_stats(graph, before.opinions, i);
            records[i] = classify_record(i, before[i], after[i], stats, neighbor_mean(graph, after.opinions, i));
        }
    });
    return records;
}

void AnalysisOptions::validate() const {
    (void)Bins(bin_width);
    if (support_floor < 0) throw ConfigError("analysis: support floor must be non-negative");
    if (!std::is_sorted(sigma_edges.begin(), sigma_edges.end()) ||
        (sigma_edges.size() == 1)) {
        throw ConfigError("analysis: sigma edges must be ascending with at least two entries");
    }
    if (!std::is_sorted(degree_edges.begin(), degree_edges.end())) {
        throw ConfigError("analysis: degree edges must be ascending");
    }
}

Bins::Bins(double width) {
    if (!(width > 0.0 && width <= 1.0)) throw ConfigError("bin width must lie in (0,1]");
    const double c = std::round(1.0 / width);
    if (std::abs(c * width - 1.0) > 1e-9) throw ConfigError("bin width must divide 1 evenly");
    count_ = static_cast<int>(c);
}

int Bins::index(double x) const {
    int k = std::clamp(static_cast<int>(std::floor(x * count_)), 0, count_ - 1);
    while (k > 0 && x < low(k)) --k;
    while (k < count_ - 1 && x >= high(k)) ++k;
    return k;
}

EpocDecomposition epoc_decomposition(const std::vector<ShiftRecord>& records, bool require_stable) {
    EpocDecomposition d;
    for (const auto& r : records) {
        if (!included(r, require_stable)) continue;
        ++d.population;
        if (!r.remarkable) continue;
        ++d.remarkable;
        switch (r.direction) {
        case Direction::Positive:
            ++(r.skip_class == SkipClass::Skipping ? d.positive_skip : d.positive_nonskip);
            break;
        case Direction::Negative: ++d.negative; break;
        case Direction::Unaligned: ++d.unaligned; break;
        case Direction::None: break;
        }
    }
    if (d.population == 0) throw ModelError("epoc_decomposition: empty population after filtering");
    const auto n = static_cast<double>(d.population);
    d.epoc_pos_skip = static_cast<double>(d.positive_skip) / n;
    d.epoc_pos_nonskip = static_cast<double>(d.positive_nonskip) / n;
    d.epoc_neg = static_cast<double>(d.negative) / n;
    d.unaligned_rate = static_cast<double>(d.unaligned) / n;
    d.epoc_pos = d.epoc_pos_skip + d.epoc_pos_nonskip;
    d.epoc = d.epoc_pos + d.epoc_neg + d.unaligned_rate;
    return d;
}

namespace {

struct PosNegCell {
    std::int64_t pos = 0, neg = 0, total = 0;
};

template <typename BinOf>
MetricTable pos_neg_table(const std::string& name, const std::string& low_col, const std::string& high_col,
                          const std::vector<ShiftRecord>& records, const AnalysisOptions& options,
                          bool require_stable, BinOf bin_of) {
    const Bins bins(options.bin_width);
    std::vector<PosNegCell> cells(static_cast<std::size_t>(kNumGroups * bins.count()));
    for (const auto& r : records) {
        if (!included(r, require_stable)) continue;
        auto& c = cells[static_cast<std::size_t>(index(r.group_before) * bins.count() + bins.index(bin_of(r)))];
        ++c.total;
        c.pos += r.direction == Direction::Positive;
        c.neg += r.direction == Direction::Negative;
    }
    MetricTable t(name, {"xi_group", low_col, high_col, "epoc_pos", "epoc_neg", "n_pos", "n_neg", "n_total"},
                  "n_total", options.support_floor);
    for (Group g : kAllGroups) {
        for (int k = 0; k < bins.count(); ++k) {
            const auto& c = cells[static_cast<std::size_t>(index(g) * bins.count() + k)];
            const double n = static_cast<double>(c.total);
            t.add_row({text(group_name(g)), bins.low(k), bins.high(k), c.total ? c.pos / n : 0.0,
                       c.total ? c.neg / n : 0.0, c.pos, c.neg, c.total});
        }
    }
    return t;
}

} // namespace

MetricTable epoc_curves(const std::vector<ShiftRecord>& records, const AnalysisOptions& options) {
    return pos_neg_table("epoc_curves", "x_neg_bin_low", "x_neg_bin_high", records, options, options.require_stable,
                         [](const ShiftRecord& r) { return r.stats_before.mean; });
}

MetricTable epoc_distance_curves(const std::vector<ShiftRecord>& records, const AnalysisOptions& options) {
    return pos_neg_table("epoc_distance_curves", "distance_bin_low", "distance_bin_high", records, options,
                         options.require_stable,
                         [](const ShiftRecord& r) { return std::abs(r.x_before - r.stats_before.mean); });
}

MetricTable epoc_by_neighbor_change(const std::vector<ShiftRecord>& records, const AnalysisOptions& options) {
    const Bins bins(options.bin_width);
    std::vector<std::array<std::int64_t, 2>> cells(static_cast<std::size_t>(kNumGroups * bins.count()), {0, 0});
    for (const auto& r : records) {
        const double change = std::min(1.0, std::abs(r.neighbor_mean_after - r.stats_before.mean));
        auto& c = cells[static_cast<std::size_t>(index(r.group_before) * bins.count() + bins.index(change))];
        ++c[1];
        c[0] += r.remarkable;
    }
    MetricTable t("epoc_by_neighbor_change",
                  {"xi_group", "change_bin_low", "change_bin_high", "epoc", "n_remarkable", "n_total"}, "n_total",
                  options.support_floor);
    for (Group g : kAllGroups) {
        for (int k = 0; k < bins.count(); ++k) {
            const auto& c = cells[static_cast<std::size_t>(index(g) * bins.count() + k)];
            t.add_row({text(group_name(g)), bins.low(k), bins.high(k),
                       c[1] ? static_cast<double>(c[0]) / static_cast<double>(c[1]) : 0.0, c[0], c[1]});
        }
    }
    return t;
}

double epoc_pos_cell(const std::vector<ShiftRecord>& records, Group self, Group friends, bool require_stable,
                     std::int64_t* n) {
    std::int64_t total = 0, pos = 0;
    for (const auto& r : records) {
        if (!included(r, require_stable) || r.group_before != self || r.neighbor_group() != friends) continue;
        ++total;
        pos += r.direction == Direction::Positive;
    }
    if (n) *n = total;
    return total ? static_cast<double>(pos) / static_cast<double>(total) : 0.0;
}

std::vector<InequalityResult> eq3_inequalities(const std::vector<ShiftRecord>& records, bool require_stable) {
    using G = Group;
    struct Spec {
        G a_self, a_friends, b_self, b_friends;
        char rel;
    };
    static constexpr std::array<Spec, 6> specs{{
        {G::SL, G::L, G::L, G::SL, '<'},
        {G::SL, G::M, G::M, G::SL, '<'},
        {G::L, G::M, G::M, G::L, '<'},
        {G::C, G::M, G::M, G::C, '>'},
        {G::M, G::SC, G::SC, G::M, '>'},
        {G::C, G::SC, G::SC, G::C, '>'},
    }};
    // Tally all 25 cells in one pass.
    std::array<std::array<std::int64_t, 2>, kNumGroups * kNumGroups> cells{};
    for (const auto& r : records) {
        if (!included(r, require_stable)) continue;
        auto& c = cells[static_cast<std::size_t>(index(r.group_before) * kNumGroups + index(r.neighbor_group()))];
        ++c[1];
        c[0] += r.direction == Direction::Positive;
    }
    auto cell = [&](G self, G friends) { return cells[static_cast<std::size_t>(index(self) * kNumGroups + index(friends))]; };

    std::vector<InequalityResult> out;
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const auto& s = specs[k];
        const auto a = cell(s.a_self, s.a_friends);
        const auto b = cell(s.b_self, s.b_friends);
        InequalityResult res{static_cast<int>(k + 1), s.a_self, s.a_friends, s.b_self, s.b_friends, s.rel};
        res.lhs_n = a[1];
        res.rhs_n = b[1];
        res.lhs = a[1] ? static_cast<double>(a[0]) / static_cast<double>(a[1]) : 0.0;
        res.rhs = b[1] ? static_cast<double>(b[0]) / static_cast<double>(b[1]) : 0.0;
        if (a[1] == 0 || b[1] == 0 || (a[0] == 0 && b[0] == 0)) {
            res.verdict = Verdict::Undetermined;
        } else {
            const bool holds = s.rel == '<' ? res.lhs < res.rhs : res.lhs > res.rhs;
            res.verdict = holds ? Verdict::Holds : Verdict::Fails;
        }
        out.push_back(res);
    }
    return out;
}

MetricTable radicalization_curves(const std::vector<ShiftRecord>& records, const AnalysisOptions& options,
                                  const std::vector<std::pair<Group, Group>>& transitions) {
    const Bins bins(options.bin_width);
    const std::vector<double> edges = options.sigma_edges.empty() ? std::vector<double>{0.0, 0.5} : options.sigma_edges;
    const int strata = static_cast<int>(edges.size()) - 1;
    const auto cells_per = static_cast<std::size_t>(strata * bins.count());
    std::vector<std::array<std::int64_t, 2>> cells(transitions.size() * cells_per, {0, 0});
    for (const auto& r : records) {
        if (!included(r, options.require_stable)) continue;
        const int s = stratum(edges, r.stats_before.std);
        if (s < 0) continue;
        const int b = bins.index(r.stats_before.mean);
        for (std::size_t t = 0; t < transitions.size(); ++t) {
            if (r.group_before != transitions[t].first) continue;
            auto& c = cells[t * cells_per + static_cast<std::size_t>(s * bins.count() + b)];
            ++c[1];
            c[0] += r.group_after == transitions[t].second;
        }
    }
    MetricTable table("radicalization_curves",
                      {"transition", "sigma_low", "sigma_high", "x_neg_bin_low", "x_neg_bin_high", "probability",
                       "n_transition", "n_total"},
                      "n_total", options.support_floor);
    for (std::size_t t = 0; t < transitions.size(); ++t) {
        const std::string label =
            std::string(group_name(transitions[t].first)) + "->" + std::string(group_name(transitions[t].second));
        for (int s = 0; s < strata; ++s) {
            for (int k = 0; k < bins.count(); ++k) {
                const auto& c = cells[t * cells_per + static_cast<std::size_t>(s * bins.count() + k)];
                table.add_row({label, edges[s], edges[s + 1], bins.low(k), bins.high(k),
                               c[1] ? static_cast<double>(c[0]) / static_cast<double>(c[1]) : 0.0, c[0], c[1]});
            }
        }
    }
    return table;
}

MetricTable magnitude_curves(const std::vector<ShiftRecord>& records, const AnalysisOptions& options) {
    const Bins bins(options.bin_width);
    struct Acc {
        double sum = 0.0;
        std::int64_t n = 0;
    };
    // [group][direction: 0 positive, 1 negative][bin]
    std::vector<Acc> cells(static_cast<std::size_t>(kNumGroups * 2 * bins.count()));
    for (const auto& r : records) {
        if (!included(r, options.require_stable) || !r.remarkable) continue;
        int dir;
        if (r.direction == Direction::Positive) dir = 0;
        else if (r.direction == Direction::Negative) dir = 1;
        else continue;
        auto& c = cells[static_cast<std::size_t>((index(r.group_before) * 2 + dir) * bins.count() +
                                                 bins.index(r.stats_before.mean))];
        c.sum += r.magnitude();
        ++c.n;
    }
    MetricTable t("magnitude_curves",
                  {"xi_group", "direction", "x_neg_bin_low", "x_neg_bin_high", "mean_magnitude", "n"}, "n",
                  options.support_floor);
    for (Group g : kAllGroups) {
        for (int dir = 0; dir < 2; ++dir) {
            for (int k = 0; k < bins.count(); ++k) {
                const auto& c = cells[static_cast<std::size_t>((index(g) * 2 + dir) * bins.count() + k)];
                t.add_row({text(group_name(g)), text(dir == 0 ? "positive" : "negative"), bins.low(k), bins.high(k),
                           c.n ? c.sum / static_cast<double>(c.n) : 0.0, c.n});
            }
        }
    }
    return t;
}

MetricTable pos_neg_ratio(const std::vector<ShiftRecord>& records, const AnalysisOptions& options) {
    const Bins bins(options.bin_width);
    std::vector<std::array<std::int64_t, 2>> cells(static_cast<std::size_t>(kNumGroups * bins.count()), {0, 0});
    for (const auto& r : records) {
        if (!included(r, options.require_stable) || !r.remarkable) continue;
        auto& c = cells[static_cast<std::size_t>(index(r.group_before) * bins.count() + bins.index(r.stats_before.mean))];
        if (r.direction == Direction::Positive) ++c[0];
        else if (r.direction == Direction::Negative) ++c[1];
    }
    MetricTable t("pos_neg_ratio", {"xi_group", "x_neg_bin_low", "x_neg_bin_high", "ratio", "n_pos", "n_neg", "n_total"},
                  "n_total", options.support_floor);
    for (Group g : kAllGroups) {
        for (int k = 0; k < bins.count(); ++k) {
            const auto& c = cells[static_cast<std::size_t>(index(g) * bins.count() + k)];
            double ratio;
            if (c[1] > 0) ratio = static_cast<double>(c[0]) / static_cast<double>(c[1]);
            else ratio = c[0] > 0 ? kInf : std::numeric_limits<double>::quiet_NaN();
            t.add_row({text(group_name(g)), bins.low(k), bins.high(k), ratio, c[0], c[1], c[0] + c[1]});
        }
    }
    return t;
}

MetricTable homophily_table(const SocialGraph& graph, const OpinionSnapshot& snapshot,
                            const std::vector<double>& degree_edges) {
    const AgentId n = graph.num_agents();
    if (snapshot.size() != n) throw ModelError("homophily_table: snapshot size does not match graph");
    std::vector<double> edges = degree_edges.empty() ? std::vector<double>{0.0} : degree_edges;
    edges.push_back(kInf);
    const int strata = static_cast<int>(edges.size()) - 1;

    std::vector<int> group(static_cast<std::size_t>(n));
    for (AgentId i = 0; i < n; ++i) group[i] = index(assign_group(snapshot[i]));

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(kNumGroups * strata, kNumGroups);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(kNumGroups * strata), 0);
    for (AgentId i = 0; i < n; ++i) {
        const auto nb = graph.neighbors(i);
        if (nb.empty()) continue;
        const int s = stratum(edges, static_cast<double>(nb.size()));
        if (s < 0) continue;
        Eigen::Matrix<double, 1, kNumGroups> frac = Eigen::Matrix<double, 1, kNumGroups>::Zero();
        for (AgentId j : nb) frac[group[j]] += 1.0;
        frac /= static_cast<double>(nb.size());
        const int row = group[i] * strata + s;
        sums.row(row) += frac;
        ++counts[static_cast<std::size_t>(row)];
    }

    MetricTable t("homophily", {"group", "degree_low", "degree_high", "SL", "L", "M", "C", "SC", "n"});
    for (Group g : kAllGroups) {
        for (int s = 0; s < strata; ++s) {
            const int row = index(g) * strata + s;
            const auto c = counts[static_cast<std::size_t>(row)];
            std::vector<Cell> cells{text(group_name(g)), edges[s], edges[s + 1]};
            for (int h = 0; h < kNumGroups; ++h) cells.emplace_back(c ? sums(row, h) / static_cast<double>(c) : 0.0);
            cells.emplace_back(c);
            t.add_row(std::move(cells));
        }
    }
    const auto pops = group_populations(snapshot.opinions);
    std::vector<Cell> null_row{text("null"), edges.front(), kInf};
    for (int h = 0; h < kNumGroups; ++h) null_row.emplace_back(static_cast<double>(pops[h]) / static_cast<double>(n));
    null_row.emplace_back(static_cast<std::int64_t>(n));
    t.add_row(std::move(null_row));
    return t;
}

MovementMap movement_map(const std::vector<ShiftRecord>& records) {
    MovementMap m;
    for (const auto& r : records) ++m.counts(index(r.group_before), index(r.group_after));
    return m;
}

MetricTable movement_map_table(const MovementMap& map) {
    MetricTable t("movement_map", {"from_group", "to_SL", "to_L", "to_M", "to_C", "to_SC", "income", "outcome"});
    for (Group g : kAllGroups) {
        std::vector<Cell> row{text(group_name(g))};
        for (int h = 0; h < kNumGroups; ++h) row.emplace_back(map.counts(index(g), h));
        row.emplace_back(map.income(g));
        row.emplace_back(map.outcome(g));
        t.add_row(std::move(row));
    }
    return t;
}

Zone movement_zone(Group from, Group to, Group friends) {
    if (from == to) return Zone::Static;
    if (friends == from) return Zone::OwnGroup;
    // Moves toward lower groups are the mirror image of moves upward.
    if (from > to) {
        from = mirror(from);
        to = mirror(to);
        friends = mirror(friends);
    }
    if (friends < from) return Zone::Negative;
    if (friends < to) return Zone::Skipping;
    return Zone::NonSkipping;
}

MetricTable movement_probability_curves(const std::vector<ShiftRecord>& records, const AnalysisOptions& options) {
    const Bins bins(options.bin_width);
    // [from][bin][to]
    std::vector<std::int64_t> moves(static_cast<std::size_t>(kNumGroups * bins.count() * kNumGroups), 0);
    std::vector<std::int64_t> totals(static_cast<std::size_t>(kNumGroups * bins.count()), 0);
    for (const auto& r : records) {
        if (!included(r, options.require_stable)) continue;
        const int cell = index(r.group_before) * bins.count() + bins.index(r.stats_before.mean);
        ++totals[static_cast<std::size_t>(cell)];
        ++moves[static_cast<std::size_t>(cell * kNumGroups + index(r.group_after))];
    }
    MetricTable t("movement_probability_curves",
                  {"from_group", "to_group", "x_neg_bin_low", "x_neg_bin_high", "zone", "probability", "n_move",
                   "n_total"},
                  "n_total", options.support_floor);
    for (Group from : kAllGroups) {
        for (Group to : kAllGroups) {
            for (int k = 0; k < bins.count(); ++k) {
                const int cell = index(from) * bins.count() + k;
                const auto total = totals[static_cast<std::size_t>(cell)];
                const auto move = moves[static_cast<std::size_t>(cell * kNumGroups + index(to))];
                const Group friends = assign_group(0.5 * (bins.low(k) + bins.high(k)));
                t.add_row({text(group_name(from)), text(group_name(to)), bins.low(k), bins.high(k),
                           text(zone_name(movement_zone(from, to, friends))),
                           total ? static_cast<double>(move) / static_cast<double>(total) : 0.0, move, total});
            }
        }
    }
    return t;
}

double spearman_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw ModelError("spearman_correlation: length mismatch");
    const auto rx = ranks(xs);
    const auto ry = ranks(ys);
    return pearson_correlation(Eigen::Map<const Eigen::VectorXd>(rx.data(), static_cast<Eigen::Index>(rx.size())),
                               Eigen::Map<const Eigen::VectorXd>(ry.data(), static_cast<Eigen::Index>(ry.size())));
}

} // namespace opdyn
