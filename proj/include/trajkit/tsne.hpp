#pragma once

#include "trajkit/dataset.hpp"
#include "trajkit/matrix.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace trajkit {

struct TsneParams {
    double perplexity = 30.0;
    double learning_rate = 200.0;
    int n_iter = 1000;
    double early_exaggeration_factor = 12.0;
    int early_exaggeration_iters = 250;
    double momentum_initial = 0.5;
    double momentum_final = 0.8;
    int momentum_switch_iter = 250;
    std::uint64_t seed = 0;
    double perplexity_tolerance = 1e-5;
    int perplexity_max_bisection_steps = 50;
};

/// Symmetric joint neighbor probabilities over point pairs. Off-diagonal
/// entries are floored at kAffinityFloor so the objective never takes
/// log(0); the diagonal stays exactly zero.
struct AffinityMatrix {
    Matrix p;
};

constexpr double kAffinityFloor = 1e-12;

struct Embedding2D {
    Matrix coords; // n x 2, row order matches the cohort's record order
    TsneParams params;
    double final_kl = 0.0;
    std::vector<std::string> child_ids;
};

/// Per-row output of the bandwidth search.
struct CalibrationResult {
    Matrix conditional;            // row-stochastic, zero diagonal
    std::vector<double> betas;     // Gaussian precisions per row
    std::vector<bool> converged;   // entropy matched within tolerance
    std::vector<bool> degenerate;  // all-zero distance row, forced uniform
};

class CohortTooSmall : public std::runtime_error {
public:
    explicit CohortTooSmall(std::size_t n)
        : std::runtime_error("CohortTooSmall: embedding needs at least 4 records, got " + std::to_string(n)) {}
};

class PerplexityInfeasible : public std::runtime_error {
public:
    PerplexityInfeasible(double perplexity, std::size_t n)
        : std::runtime_error("PerplexityInfeasible: perplexity must be < n - 1 (n = " + std::to_string(n) + ")"),
          perplexity(perplexity) {}
    double perplexity;
};

class DegenerateInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeMismatch : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Symmetric matrix of squared Euclidean distances; zero diagonal.
Matrix pairwise_sq_distances(const Matrix& points);

/// For each row, bisects the Gaussian precision beta until the row's
/// entropy (bits) matches log2(perplexity) within `tolerance`, or
/// `max_steps` bisections have run. Rows whose distances are all zero
/// cannot be calibrated and come back uniform with the degenerate flag set.
CalibrationResult calibrate_perplexity(const Matrix& sq_dists, double perplexity, double tolerance,
                                       int max_steps);

/// p_ij = (c_ij + c_ji) / 2n, floored at kAffinityFloor off the diagonal.
AffinityMatrix symmetrize_affinities(const Matrix& conditional);

struct LowDimAffinities {
    Matrix q;          // normalized over all i != j
    Matrix numerators; // 1 / (1 + squared distance)
};

LowDimAffinities low_dim_affinities(const Matrix& coords);

/// KL(p || q) summed over off-diagonal pairs.
double kl_divergence(const AffinityMatrix& p, const Matrix& q);

/// Analytic gradient of kl_divergence with respect to the 2-D coordinates.
Matrix kl_gradient(const AffinityMatrix& p, const Matrix& coords);

/// Full embedding run: seeded Gaussian init, early exaggeration, momentum
/// gradient descent, per-iteration re-centering. Deterministic for a fixed
/// (record order, params) pair. If `kl_trace` is non-null it receives the
/// KL value (un-exaggerated p) after every iteration.
Embedding2D run_tsne(const Cohort& cohort, const TsneParams& params,
                     std::vector<double>* kl_trace = nullptr);

/// Embedding export in the interchange formats: `child_id,x,y` CSV and a
/// JSON sidecar with the parameters actually used plus the final KL.
std::string embedding_to_csv(const Embedding2D& embedding);
std::string embedding_sidecar_json(const Embedding2D& embedding);

} // namespace trajkit
