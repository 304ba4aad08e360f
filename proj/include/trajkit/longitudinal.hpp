#pragma once

#include "trajkit/dataset.hpp"
#include "trajkit/kmeans.hpp"
#include "trajkit/profiles.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace trajkit {

/// Tier-to-tier movement census between two consecutive courses.
/// Rows/columns are tier ranks, not raw cluster indices.
struct TransitionMatrix {
    int course_from = 0;
    int course_to = 0;
    int k_from = 0;
    int k_to = 0;
    std::vector<std::vector<long>> counts;
    std::vector<std::vector<double>> probabilities; // row-normalized where the row has data
    std::vector<bool> row_has_data;                 // false rows are all-zero, not normalized
};

struct MobilitySummary {
    int course_from = 0;
    int course_to = 0;
    double stable_pct = 0.0;
    double improving_pct = 0.0;
    double declining_pct = 0.0;
};

struct StabilityTable {
    int course_from = 0;
    int course_to = 0;
    int k_from = 0;
    // Tier rank -> stability percentage; absent when the source tier is empty.
    std::map<int, double> per_tier;
};

enum class Transition { Stable, Improving, Declining };

class ChildMissingAssignment : public std::runtime_error {
public:
    explicit ChildMissingAssignment(const std::string& child_id)
        : std::runtime_error("ChildMissingAssignment: no cluster assignment for child '" + child_id + "'") {}
};

class EmptyPair : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Where a source tier is expected to land when the destination year has a
/// different cluster count: proportional mapping with endpoints preserved,
/// round half up.
int tier_correspondence(int k_from, int k_to, int rank_from);

Transition classify_transition(int rank_from, int k_from, int rank_to, int k_to);

/// Census from explicit (rank_from, rank_to) pairs; the workhorse behind
/// build_transition_matrix and the ground-truth checks.
TransitionMatrix make_transition_matrix(int course_from, int course_to, int k_from, int k_to,
                                        const std::vector<std::pair<int, int>>& rank_pairs);

TransitionMatrix build_transition_matrix(const AlignedPair& pair, const ClusterModel& model_from,
                                         const ClusterModel& model_to,
                                         const std::vector<ClusterProfile>& tiers_from,
                                         const std::vector<ClusterProfile>& tiers_to);

/// Stable/improving/declining percentages over the aligned children,
/// rounded to 1 decimal.
MobilitySummary mobility_summary(const TransitionMatrix& matrix);

/// Per source tier: percentage of its children classified Stable; tiers
/// with no children are absent.
StabilityTable tier_stability_rates(const TransitionMatrix& matrix);

/// Table exports. Stability serializes absent tiers as an empty field.
std::string mobility_to_csv(const std::vector<MobilitySummary>& rows);
std::string stability_to_csv(const std::vector<StabilityTable>& rows);

} // namespace trajkit
