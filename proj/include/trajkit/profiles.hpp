#pragma once

#include "trajkit/dataset.hpp"
#include "trajkit/kmeans.hpp"

#include <array>
#include <string>
#include <vector>

namespace trajkit {

/// Ordinal performance tier. Rank 0 is the lowest-performing cluster.
struct TierLabel {
    int rank = 0;
    std::string name;

    bool operator==(const TierLabel&) const = default;
};

/// One cluster translated back into score space: per-task means, head
/// count, population share, and its tier.
struct ClusterProfile {
    int cluster_index = 0;
    TierLabel tier;
    std::array<double, kNumScores> mean_q{};
    double share_pct = 0.0; // rounded to 2 decimals
    std::size_t count = 0;
};

/// Per-cluster mean scores and shares, ordered by cluster index.
/// Tiers are left unassigned; see label_clusters_by_performance.
std::vector<ClusterProfile> centroid_q_profiles(const Cohort& cohort, const ClusterModel& model);

/// Mean of the six task means; the ordering key for tiers.
double grand_mean(const ClusterProfile& profile);

/// Ranks clusters by ascending grand mean (ties by ascending Q1 mean,
/// then cluster index) and names them: low/medium/high for k = 3,
/// low/high for k = 2, "tier-<rank>" otherwise. Input order is kept.
std::vector<ClusterProfile> label_clusters_by_performance(std::vector<ClusterProfile> profiles);

/// Tier rank per point, derived from a model's assignments and its
/// labeled profiles.
std::vector<int> tier_ranks_for_assignments(const ClusterModel& model,
                                            const std::vector<ClusterProfile>& profiles);

/// Profile table export: `cluster,tier,q1,q2,q3,q4,q5,q6,pct,course`.
std::string profiles_to_csv(const std::vector<ClusterProfile>& profiles, int course);

} // namespace trajkit
