#include "trajkit/profiles.hpp"

#include "trajkit/csv.hpp"
#include "trajkit/tsne.hpp"

#include <algorithm>
#include <numeric>

namespace trajkit {

std::vector<ClusterProfile> centroid_q_profiles(const Cohort& cohort, const ClusterModel& model) {
    const std::size_t n = cohort.records.size();
    if (model.assignments.size() != n) {
        throw ShapeMismatch("centroid_q_profiles: " + std::to_string(model.assignments.size()) +
                            " assignments for " + std::to_string(n) + " records");
    }

    std::vector<ClusterProfile> profiles(static_cast<std::size_t>(model.k));
    for (std::size_t c = 0; c < profiles.size(); ++c) profiles[c].cluster_index = static_cast<int>(c);

    for (std::size_t i = 0; i < n; ++i) {
        auto& profile = profiles[static_cast<std::size_t>(model.assignments[i])];
        ++profile.count;
        for (std::size_t q = 0; q < kNumScores; ++q) profile.mean_q[q] += cohort.records[i].q_scores[q];
    }
    for (auto& profile : profiles) {
        if (profile.count > 0) {
            for (auto& mean : profile.mean_q) mean /= static_cast<double>(profile.count);
        }
        profile.share_pct = round_decimals(100.0 * static_cast<double>(profile.count) /
                                               static_cast<double>(n),
                                           2);
    }
    return profiles;
}

double grand_mean(const ClusterProfile& profile) {
    const double sum = std::accumulate(profile.mean_q.begin(), profile.mean_q.end(), 0.0);
    return sum / static_cast<double>(kNumScores);
}

namespace {

std::string tier_name(int rank, int k) {
    if (k == 3) {
        switch (rank) {
        case 0: return "low";
        case 1: return "medium";
        default: return "high";
        }
    }
    if (k == 2) {
        return rank == 0 ? "low" : "high";
    }
    return "tier-" + std::to_string(rank);
}

} // namespace

std::vector<ClusterProfile> label_clusters_by_performance(std::vector<ClusterProfile> profiles) {
    if (profiles.empty()) {
        throw std::invalid_argument("label_clusters_by_performance: no profiles");
    }
    std::vector<std::size_t> order(profiles.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ga = grand_mean(profiles[a]);
        const double gb = grand_mean(profiles[b]);
        if (ga != gb) return ga < gb;
        if (profiles[a].mean_q[0] != profiles[b].mean_q[0]) {
            return profiles[a].mean_q[0] < profiles[b].mean_q[0];
        }
        return profiles[a].cluster_index < profiles[b].cluster_index;
    });

    const int k = static_cast<int>(profiles.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const int rank = static_cast<int>(pos);
        profiles[order[pos]].tier = {rank, tier_name(rank, k)};
    }
    return profiles;
}

std::vector<int> tier_ranks_for_assignments(const ClusterModel& model,
                                            const std::vector<ClusterProfile>& profiles) {
    std::vector<int> cluster_to_rank(profiles.size(), 0);
    for (const auto& profile : profiles) {
        cluster_to_rank[static_cast<std::size_t>(profile.cluster_index)] = profile.tier.rank;
    }
    std::vector<int> ranks;
    ranks.reserve(model.assignments.size());
    for (const int cluster : model.assignments) {
        ranks.push_back(cluster_to_rank[static_cast<std::size_t>(cluster)]);
    }
    return ranks;
}

std::string profiles_to_csv(const std::vector<ClusterProfile>& profiles, int course) {
    std::string out = "cluster,tier,q1,q2,q3,q4,q5,q6,pct,course\n";
    for (const auto& profile : profiles) {
        out += std::to_string(profile.cluster_index);
        out += ',';
        out += profile.tier.name;
        for (const double mean : profile.mean_q) {
            out += ',';
            out += format_double(mean);
        }
        out += ',';
        out += format_fixed(profile.share_pct, 2);
        out += ',';
        out += std::to_string(course);
        out += '\n';
    }
    return out;
}

} // namespace trajkit
