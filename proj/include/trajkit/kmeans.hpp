#pragma once

#include "trajkit/matrix.hpp"
#include "trajkit/rng.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace trajkit {

struct KMeansParams {
    int k = 3;
    int max_iters = 300;
    double tol = 1e-6;
    int n_restarts = 10;
    std::uint64_t seed = 0;
};

struct ClusterModel {
    int k = 0;
    std::vector<int> assignments; // cluster index per point, 0..k-1
    Matrix centroids;             // k x d; each row is the mean of its members
    double inertia = 0.0;         // sum of squared distances to assigned centroid
    KMeansParams params;
};

class TooFewDistinctPoints : public std::runtime_error {
public:
    TooFewDistinctPoints(int k, std::size_t distinct)
        : std::runtime_error("TooFewDistinctPoints: k = " + std::to_string(k) + " but only " +
                             std::to_string(distinct) + " distinct points") {}
};

class CurveTooShort : public std::runtime_error {
public:
    explicit CurveTooShort(std::size_t n)
        : std::runtime_error("CurveTooShort: elbow selection needs at least 3 curve entries, got " +
                             std::to_string(n)) {}
};

/// D^2 seeding: first centre uniform over the points, each further centre
/// drawn with probability proportional to the squared distance to the
/// nearest centre chosen so far.
Matrix kmeanspp_seed(const Matrix& points, int k, Rng& rng);

struct LloydStep {
    std::vector<int> assignments;
    Matrix new_centroids;
    double inertia; // against the new centroids
};

/// One assignment + recentering pass. Distance ties go to the lowest
/// centroid index. A cluster left empty is re-seeded to the point
/// farthest from its former centroid.
LloydStep lloyd_iterate(const Matrix& points, const Matrix& centroids);

/// Best of n_restarts seeded runs by inertia (ties keep the earliest
/// restart). Each run iterates Lloyd until the largest centroid shift
/// drops below tol or max_iters is reached.
ClusterModel fit_kmeans(const Matrix& points, const KMeansParams& params);

struct InertiaPoint {
    int k;
    double inertia;
};

/// fit_kmeans inertia for each k in [k_min, k_max], every k using the
/// same base seed stream.
std::vector<InertiaPoint> inertia_curve(const Matrix& points, int k_min, int k_max,
                                        const KMeansParams& params);

/// Elbow rule: the k maximizing the discrete second difference
/// I(k-1) - 2 I(k) + I(k+1) over interior points, ties to the smallest k.
int elbow_select_k(const std::vector<InertiaPoint>& curve);

/// Model export: JSON body plus the `child_id,cluster` assignment CSV.
std::string model_to_json(const ClusterModel& model);
std::string assignments_to_csv(const ClusterModel& model, const std::vector<std::string>& child_ids);

} // namespace trajkit
