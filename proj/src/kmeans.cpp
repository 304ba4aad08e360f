#include "trajkit/kmeans.hpp"

#include "trajkit/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

namespace trajkit {

namespace {

std::size_t count_distinct_rows(const Matrix& points) {
    std::set<std::vector<double>> rows;
    for (std::size_t i = 0; i < points.rows(); ++i) rows.insert(points.row(i));
    return rows.size();
}

double sq_dist_to(const Matrix& points, std::size_t i, const Matrix& centroids, std::size_t c) {
    double acc = 0.0;
    for (std::size_t d = 0; d < points.cols(); ++d) {
        const double diff = points(i, d) - centroids(c, d);
        acc += diff * diff;
    }
    return acc;
}

} // namespace

Matrix kmeanspp_seed(const Matrix& points, int k, Rng& rng) {
    const std::size_t n = points.rows();
    const std::size_t distinct = count_distinct_rows(points);
    if (k < 1 || static_cast<std::size_t>(k) > distinct) {
        throw TooFewDistinctPoints(k, distinct);
    }

    Matrix seeds(static_cast<std::size_t>(k), points.cols());
    const std::size_t first = rng.uniform_index(n);
    for (std::size_t d = 0; d < points.cols(); ++d) seeds(0, d) = points(first, d);

    std::vector<double> nearest_sq(n, std::numeric_limits<double>::infinity());
    for (int chosen = 1; chosen < k; ++chosen) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = sq_dist_to(points, i, seeds, static_cast<std::size_t>(chosen - 1));
            nearest_sq[i] = std::min(nearest_sq[i], d);
            total += nearest_sq[i];
        }
        const std::size_t pick = rng.weighted_index(nearest_sq, total);
        for (std::size_t d = 0; d < points.cols(); ++d) {
            seeds(static_cast<std::size_t>(chosen), d) = points(pick, d);
        }
    }
    return seeds;
}

LloydStep lloyd_iterate(const Matrix& points, const Matrix& centroids) {
    const std::size_t n = points.rows();
    const std::size_t k = centroids.rows();
    const std::size_t dims = points.cols();

    LloydStep step;
    step.assignments.assign(n, 0);
    std::vector<std::size_t> counts(k, 0);

    for (std::size_t i = 0; i < n; ++i) {
        double best = sq_dist_to(points, i, centroids, 0);
        std::size_t best_c = 0;
        for (std::size_t c = 1; c < k; ++c) {
            const double d = sq_dist_to(points, i, centroids, c);
            if (d < best) {
                best = d;
                best_c = c;
            }
        }
        step.assignments[i] = static_cast<int>(best_c);
        ++counts[best_c];
    }

    step.new_centroids = Matrix(k, dims, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(step.assignments[i]);
        for (std::size_t d = 0; d < dims; ++d) step.new_centroids(c, d) += points(i, d);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            // Re-seed an emptied cluster to the point farthest from its
            // former centroid.
            double far_d = -1.0;
            std::size_t far_i = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = sq_dist_to(points, i, centroids, c);
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            for (std::size_t d = 0; d < dims; ++d) step.new_centroids(c, d) = points(far_i, d);
            continue;
        }
        for (std::size_t d = 0; d < dims; ++d) {
            step.new_centroids(c, d) /= static_cast<double>(counts[c]);
        }
    }

    step.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        step.inertia += sq_dist_to(points, i, step.new_centroids,
                                   static_cast<std::size_t>(step.assignments[i]));
    }
    return step;
}

ClusterModel fit_kmeans(const Matrix& points, const KMeansParams& params) {
    if (params.k < 1 || params.max_iters < 1 || params.n_restarts < 1 || params.tol < 0.0) {
        throw std::invalid_argument("fit_kmeans: invalid params");
    }

    ClusterModel best;
    bool have_best = false;

    for (int restart = 0; restart < params.n_restarts; ++restart) {
        Rng rng(derive_seed(params.seed, "kmeans-restart", static_cast<std::uint64_t>(restart)));
        Matrix centroids = kmeanspp_seed(points, params.k, rng);

        LloydStep step;
        for (int iter = 0; iter < params.max_iters; ++iter) {
            step = lloyd_iterate(points, centroids);
            double max_shift = 0.0;
            for (std::size_t c = 0; c < centroids.rows(); ++c) {
                max_shift = std::max(max_shift, std::sqrt(sq_dist_to(step.new_centroids,
                                                                     c, centroids, c)));
            }
            centroids = step.new_centroids;
            if (max_shift < params.tol) break;
        }

        if (!have_best || step.inertia < best.inertia) {
            best.k = params.k;
            best.assignments = step.assignments;
            best.centroids = step.new_centroids;
            best.inertia = step.inertia;
            best.params = params;
            have_best = true;
        }
    }
    return best;
}

std::vector<InertiaPoint> inertia_curve(const Matrix& points, int k_min, int k_max,
                                        const KMeansParams& params) {
    if (k_min < 1 || k_min >= k_max || static_cast<std::size_t>(k_max) > points.rows()) {
        throw std::invalid_argument("inertia_curve: need 1 <= k_min < k_max <= n");
    }
    std::vector<InertiaPoint> curve;
    for (int k = k_min; k <= k_max; ++k) {
        KMeansParams per_k = params;
        per_k.k = k;
        curve.push_back({k, fit_kmeans(points, per_k).inertia});
    }
    return curve;
}

int elbow_select_k(const std::vector<InertiaPoint>& curve) {
    if (curve.size() < 3) {
        throw CurveTooShort(curve.size());
    }
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i].k != curve[i - 1].k + 1) {
            throw std::invalid_argument("elbow_select_k: curve ks must be consecutive");
        }
    }
    int best_k = curve[1].k;
    double best_dd = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
        const double dd = curve[i - 1].inertia - 2.0 * curve[i].inertia + curve[i + 1].inertia;
        if (dd > best_dd) {
            best_dd = dd;
            best_k = curve[i].k;
        }
    }
    return best_k;
}

std::string model_to_json(const ClusterModel& model) {
    nlohmann::json doc;
    doc["k"] = model.k;
    doc["inertia"] = model.inertia;
    nlohmann::json centroids = nlohmann::json::array();
    for (std::size_t c = 0; c < model.centroids.rows(); ++c) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t d = 0; d < model.centroids.cols(); ++d) row.push_back(model.centroids(c, d));
        centroids.push_back(row);
    }
    doc["centroids"] = centroids;
    doc["params"] = {
        {"k", model.params.k},
        {"max_iters", model.params.max_iters},
        {"tol", model.params.tol},
        {"n_restarts", model.params.n_restarts},
        {"seed", model.params.seed},
    };
    return doc.dump(2) + "\n";
}

std::string assignments_to_csv(const ClusterModel& model, const std::vector<std::string>& child_ids) {
    std::string out = "child_id,cluster\n";
    for (std::size_t i = 0; i < model.assignments.size(); ++i) {
        out += child_ids[i];
        out += ',';
        out += std::to_string(model.assignments[i]);
        out += '\n';
    }
    return out;
}

} // namespace trajkit
