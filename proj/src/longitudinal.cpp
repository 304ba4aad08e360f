#include "trajkit/longitudinal.hpp"

#include "trajkit/csv.hpp"

#include <cmath>

namespace trajkit {

int tier_correspondence(int k_from, int k_to, int rank_from) {
    if (k_from == k_to) return rank_from;
    const double scaled = static_cast<double>(rank_from) * static_cast<double>(k_to - 1) /
                          static_cast<double>(k_from - 1);
    return static_cast<int>(std::floor(scaled + 0.5));
}

Transition classify_transition(int rank_from, int k_from, int rank_to, int k_to) {
    const int expected = tier_correspondence(k_from, k_to, rank_from);
    if (rank_to == expected) return Transition::Stable;
    return rank_to > expected ? Transition::Improving : Transition::Declining;
}

TransitionMatrix make_transition_matrix(int course_from, int course_to, int k_from, int k_to,
                                        const std::vector<std::pair<int, int>>& rank_pairs) {
    TransitionMatrix matrix;
    matrix.course_from = course_from;
    matrix.course_to = course_to;
    matrix.k_from = k_from;
    matrix.k_to = k_to;
    matrix.counts.assign(static_cast<std::size_t>(k_from),
                         std::vector<long>(static_cast<std::size_t>(k_to), 0));
    for (const auto& [from, to] : rank_pairs) {
        ++matrix.counts[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
    }

    matrix.probabilities.assign(static_cast<std::size_t>(k_from),
                                std::vector<double>(static_cast<std::size_t>(k_to), 0.0));
    matrix.row_has_data.assign(static_cast<std::size_t>(k_from), false);
    for (std::size_t i = 0; i < matrix.counts.size(); ++i) {
        long row_total = 0;
        for (const long c : matrix.counts[i]) row_total += c;
        if (row_total == 0) continue;
        matrix.row_has_data[i] = true;
        for (std::size_t j = 0; j < matrix.counts[i].size(); ++j) {
            matrix.probabilities[i][j] =
                static_cast<double>(matrix.counts[i][j]) / static_cast<double>(row_total);
        }
    }
    return matrix;
}

TransitionMatrix build_transition_matrix(const AlignedPair& pair, const ClusterModel& model_from,
                                         const ClusterModel& model_to,
                                         const std::vector<ClusterProfile>& tiers_from,
                                         const std::vector<ClusterProfile>& tiers_to) {
    std::vector<int> rank_from_cluster(tiers_from.size(), 0);
    for (const auto& profile : tiers_from) {
        rank_from_cluster[static_cast<std::size_t>(profile.cluster_index)] = profile.tier.rank;
    }
    std::vector<int> rank_to_cluster(tiers_to.size(), 0);
    for (const auto& profile : tiers_to) {
        rank_to_cluster[static_cast<std::size_t>(profile.cluster_index)] = profile.tier.rank;
    }

    std::vector<std::pair<int, int>> rank_pairs;
    rank_pairs.reserve(pair.children.size());
    for (const auto& child : pair.children) {
        if (child.index_from >= model_from.assignments.size() ||
            child.index_to >= model_to.assignments.size()) {
            throw ChildMissingAssignment(child.child_id);
        }
        const int cluster_from = model_from.assignments[child.index_from];
        const int cluster_to = model_to.assignments[child.index_to];
        rank_pairs.emplace_back(rank_from_cluster[static_cast<std::size_t>(cluster_from)],
                                rank_to_cluster[static_cast<std::size_t>(cluster_to)]);
    }
    return make_transition_matrix(pair.course_from, pair.course_to, model_from.k, model_to.k,
                                  rank_pairs);
}

MobilitySummary mobility_summary(const TransitionMatrix& matrix) {
    long total = 0;
    long stable = 0;
    long improving = 0;
    long declining = 0;
    for (int i = 0; i < matrix.k_from; ++i) {
        for (int j = 0; j < matrix.k_to; ++j) {
            const long count = matrix.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (count == 0) continue;
            total += count;
            switch (classify_transition(i, matrix.k_from, j, matrix.k_to)) {
            case Transition::Stable: stable += count; break;
            case Transition::Improving: improving += count; break;
            case Transition::Declining: declining += count; break;
            }
        }
    }
    if (total == 0) {
        throw EmptyPair("mobility_summary: no aligned children for courses " +
                        std::to_string(matrix.course_from) + "->" + std::to_string(matrix.course_to));
    }

    MobilitySummary summary;
    summary.course_from = matrix.course_from;
    summary.course_to = matrix.course_to;
    const double denom = static_cast<double>(total);
    summary.stable_pct = round_decimals(100.0 * static_cast<double>(stable) / denom, 1);
    summary.improving_pct = round_decimals(100.0 * static_cast<double>(improving) / denom, 1);
    summary.declining_pct = round_decimals(100.0 * static_cast<double>(declining) / denom, 1);
    return summary;
}

StabilityTable tier_stability_rates(const TransitionMatrix& matrix) {
    StabilityTable table;
    table.course_from = matrix.course_from;
    table.course_to = matrix.course_to;
    table.k_from = matrix.k_from;
    for (int i = 0; i < matrix.k_from; ++i) {
        long row_total = 0;
        long stable = 0;
        for (int j = 0; j < matrix.k_to; ++j) {
            const long count = matrix.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            row_total += count;
            if (classify_transition(i, matrix.k_from, j, matrix.k_to) == Transition::Stable) {
                stable += count;
            }
        }
        if (row_total == 0) continue;
        table.per_tier[i] =
            round_decimals(100.0 * static_cast<double>(stable) / static_cast<double>(row_total), 1);
    }
    return table;
}

std::string mobility_to_csv(const std::vector<MobilitySummary>& rows) {
    std::string out = "course_from,course_to,stable,improving,declining\n";
    for (const auto& row : rows) {
        out += std::to_string(row.course_from);
        out += ',';
        out += std::to_string(row.course_to);
        out += ',';
        out += format_fixed(row.stable_pct, 1);
        out += ',';
        out += format_fixed(row.improving_pct, 1);
        out += ',';
        out += format_fixed(row.declining_pct, 1);
        out += '\n';
    }
    return out;
}

std::string stability_to_csv(const std::vector<StabilityTable>& rows) {
    std::string out = "course_from,course_to,tier,stability\n";
    for (const auto& row : rows) {
        for (int tier = 0; tier < row.k_from; ++tier) {
            out += std::to_string(row.course_from);
            out += ',';
            out += std::to_string(row.course_to);
            out += ',';
            out += std::to_string(tier);
            out += ',';
            const auto hit = row.per_tier.find(tier);
            if (hit != row.per_tier.end()) out += format_fixed(hit->second, 1);
            out += '\n';
        }
    }
    return out;
}

} // namespace trajkit
