#include "trajkit/tsne.hpp"

#include "trajkit/csv.hpp"
#include "trajkit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace trajkit {

Matrix pairwise_sq_distances(const Matrix& points) {
    const std::size_t n = points.rows();
    if (n < 2) {
        throw DegenerateInput("pairwise distances need at least 2 points, got " + std::to_string(n));
    }
    Matrix dists(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = squared_distance(points, i, j);
            dists(i, j) = d;
            dists(j, i) = d;
        }
    }
    return dists;
}

namespace {

constexpr double kLn2 = 0.6931471805599453;

/// Fills `row` with exp(-beta * (d - d_shift)) for j != i and returns the
/// row entropy in bits. The shift keeps exp() in range; entropy is
/// invariant under it.
double gibbs_row_entropy_bits(const Matrix& sq_dists, std::size_t i, double beta, double d_shift,
                              std::vector<double>& row) {
    const std::size_t n = sq_dists.rows();
    double sum = 0.0;
    double weighted_dist = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
            row[j] = 0.0;
            continue;
        }
        const double d = sq_dists(i, j) - d_shift;
        const double w = std::exp(-beta * d);
        row[j] = w;
        sum += w;
        weighted_dist += d * w;
    }
    // H = beta * E[d] + ln(sum), converted from nats to bits.
    const double entropy_nats = beta * (weighted_dist / sum) + std::log(sum);
    for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
    return entropy_nats / kLn2;
}

} // namespace

CalibrationResult calibrate_perplexity(const Matrix& sq_dists, double perplexity, double tolerance,
                                       int max_steps) {
    const std::size_t n = sq_dists.rows();
    // Uniform rows reach entropy log2(n - 1) exactly, so equality is the
    // outer edge of feasibility.
    if (!(perplexity <= static_cast<double>(n) - 1.0)) {
        throw PerplexityInfeasible(perplexity, n);
    }

    CalibrationResult result;
    result.conditional = Matrix(n, n, 0.0);
    result.betas.assign(n, 0.0);
    result.converged.assign(n, false);
    result.degenerate.assign(n, false);

    const double target_bits = std::log2(perplexity);
    std::vector<double> row(n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        double d_min = std::numeric_limits<double>::infinity();
        double d_max = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            d_min = std::min(d_min, sq_dists(i, j));
            d_max = std::max(d_max, sq_dists(i, j));
        }

        if (d_max == 0.0) {
            // Every other point coincides with this one; any beta yields the
            // uniform row, so emit it and flag the row instead of failing.
            const double uniform = 1.0 / static_cast<double>(n - 1);
            for (std::size_t j = 0; j < n; ++j) {
                result.conditional(i, j) = (j == i) ? 0.0 : uniform;
            }
            result.betas[i] = 0.0;
            result.degenerate[i] = true;
            result.converged[i] = true;
            continue;
        }

        double beta = 1.0;
        double beta_lo = 0.0;
        double beta_hi = std::numeric_limits<double>::infinity();
        double entropy = gibbs_row_entropy_bits(sq_dists, i, beta, d_min, row);
        bool ok = std::fabs(entropy - target_bits) <= tolerance;
        int steps = 0;
        while (!ok && steps < max_steps) {
            if (entropy > target_bits) {
                beta_lo = beta;
                beta = std::isinf(beta_hi) ? beta * 2.0 : (beta_lo + beta_hi) / 2.0;
            } else {
                beta_hi = beta;
                beta = (beta_lo + beta_hi) / 2.0;
            }
            entropy = gibbs_row_entropy_bits(sq_dists, i, beta, d_min, row);
            ok = std::fabs(entropy - target_bits) <= tolerance;
            ++steps;
        }
        for (std::size_t j = 0; j < n; ++j) result.conditional(i, j) = row[j];
        result.betas[i] = beta;
        result.converged[i] = ok;
    }
    return result;
}

AffinityMatrix symmetrize_affinities(const Matrix& conditional) {
    const std::size_t n = conditional.rows();
    AffinityMatrix result;
    result.p = Matrix(n, n, 0.0);
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double value = std::max((conditional(i, j) + conditional(j, i)) * scale, kAffinityFloor);
            result.p(i, j) = value;
            result.p(j, i) = value;
        }
    }
    return result;
}

LowDimAffinities low_dim_affinities(const Matrix& coords) {
    const std::size_t n = coords.rows();
    LowDimAffinities result;
    result.numerators = Matrix(n, n, 0.0);
    result.q = Matrix(n, n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double numerator = 1.0 / (1.0 + squared_distance(coords, i, j));
            result.numerators(i, j) = numerator;
            result.numerators(j, i) = numerator;
            total += 2.0 * numerator;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) result.q(i, j) = result.numerators(i, j) / total;
        }
    }
    return result;
}

double kl_divergence(const AffinityMatrix& p, const Matrix& q) {
    const std::size_t n = p.p.rows();
    if (q.rows() != n || q.cols() != n) {
        throw ShapeMismatch("kl_divergence: p is " + std::to_string(n) + "x" + std::to_string(n) +
                            ", q is " + std::to_string(q.rows()) + "x" + std::to_string(q.cols()));
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double pij = p.p(i, j);
            kl += pij * std::log(pij / q(i, j));
        }
    }
    return kl;
}

Matrix kl_gradient(const AffinityMatrix& p, const Matrix& coords) {
    const std::size_t n = p.p.rows();
    if (coords.rows() != n || coords.cols() != 2) {
        throw ShapeMismatch("kl_gradient: coords must be " + std::to_string(n) + "x2");
    }
    const LowDimAffinities low = low_dim_affinities(coords);
    Matrix grad(n, 2, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double mult = 4.0 * (p.p(i, j) - low.q(i, j)) * low.numerators(i, j);
            grad(i, 0) += mult * (coords(i, 0) - coords(j, 0));
            grad(i, 1) += mult * (coords(i, 1) - coords(j, 1));
        }
    }
    return grad;
}

namespace {

void recenter(Matrix& coords) {
    const std::size_t n = coords.rows();
    for (std::size_t d = 0; d < coords.cols(); ++d) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += coords(i, d);
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) coords(i, d) -= mean;
    }
}

/// KL against p scaled by 1/p_scale, so the trace stays comparable while
/// the stored p is exaggerated.
double kl_with_scale(const AffinityMatrix& p, const Matrix& q, double p_scale) {
    const std::size_t n = p.p.rows();
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double pij = p.p(i, j) / p_scale;
            kl += pij * std::log(pij / q(i, j));
        }
    }
    return kl;
}

} // namespace

Embedding2D run_tsne(const Cohort& cohort, const TsneParams& params, std::vector<double>* kl_trace) {
    const std::size_t n = cohort.records.size();
    if (n < 4) {
        throw CohortTooSmall(n);
    }
    if (!(params.perplexity > 0.0)) {
        throw PerplexityInfeasible(params.perplexity, n);
    }

    Matrix points(n, kNumScores);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t q = 0; q < kNumScores; ++q) points(i, q) = cohort.records[i].q_scores[q];
    }

    // Clamp to (n - 1) / 3 so small cohorts remain feasible; the value
    // actually used is recorded in the returned params.
    TsneParams effective = params;
    effective.perplexity = std::min(params.perplexity, (static_cast<double>(n) - 1.0) / 3.0);

    const Matrix sq_dists = pairwise_sq_distances(points);
    const CalibrationResult calibration = calibrate_perplexity(
        sq_dists, effective.perplexity, effective.perplexity_tolerance,
        effective.perplexity_max_bisection_steps);
    AffinityMatrix affinities = symmetrize_affinities(calibration.conditional);

    Rng rng(effective.seed);
    Matrix coords(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        coords(i, 0) = 1e-4 * rng.normal();
        coords(i, 1) = 1e-4 * rng.normal();
    }

    const bool exaggerate = effective.early_exaggeration_iters > 0 &&
                            effective.early_exaggeration_factor != 1.0;
    double p_scale = 1.0;
    if (exaggerate) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                affinities.p(i, j) *= effective.early_exaggeration_factor;
            }
        }
        p_scale = effective.early_exaggeration_factor;
    }

    Matrix velocity(n, 2, 0.0);
    Matrix gains(n, 2, 1.0);
    double momentum = effective.momentum_initial;

    for (int iter = 0; iter < effective.n_iter; ++iter) {
        if (exaggerate && iter == effective.early_exaggeration_iters) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    affinities.p(i, j) /= effective.early_exaggeration_factor;
                }
            }
            p_scale = 1.0;
        }
        if (iter == effective.momentum_switch_iter) {
            momentum = effective.momentum_final;
        }

        const Matrix grad = kl_gradient(affinities, coords);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < 2; ++d) {
                // Per-coordinate gain schedule of the reference descent:
                // grow while the step direction persists, shrink on reversal.
                const bool same_sign = (grad(i, d) > 0.0) == (velocity(i, d) > 0.0);
                gains(i, d) = std::max(0.01, same_sign ? gains(i, d) * 0.8 : gains(i, d) + 0.2);
                velocity(i, d) =
                    momentum * velocity(i, d) - effective.learning_rate * gains(i, d) * grad(i, d);
                coords(i, d) += velocity(i, d);
            }
        }
        recenter(coords);

        if (kl_trace) {
            kl_trace->push_back(kl_with_scale(affinities, low_dim_affinities(coords).q, p_scale));
        }
    }

    if (p_scale != 1.0) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                affinities.p(i, j) /= p_scale;
            }
        }
    }

    Embedding2D embedding;
    embedding.coords = std::move(coords);
    embedding.params = effective;
    embedding.final_kl = kl_divergence(affinities, low_dim_affinities(embedding.coords).q);
    embedding.child_ids.reserve(n);
    for (const auto& rec : cohort.records) embedding.child_ids.push_back(rec.child_id);
    return embedding;
}

std::string embedding_to_csv(const Embedding2D& embedding) {
    std::string out = "child_id,x,y\n";
    for (std::size_t i = 0; i < embedding.coords.rows(); ++i) {
        out += embedding.child_ids[i];
        out += ',';
        out += format_double(embedding.coords(i, 0));
        out += ',';
        out += format_double(embedding.coords(i, 1));
        out += '\n';
    }
    return out;
}

std::string embedding_sidecar_json(const Embedding2D& embedding) {
    nlohmann::json doc;
    doc["final_kl"] = embedding.final_kl;
    doc["n_points"] = embedding.coords.rows();
    doc["params"] = {
        {"perplexity", embedding.params.perplexity},
        {"learning_rate", embedding.params.learning_rate},
        {"n_iter", embedding.params.n_iter},
        {"early_exaggeration_factor", embedding.params.early_exaggeration_factor},
        {"early_exaggeration_iters", embedding.params.early_exaggeration_iters},
        {"momentum_initial", embedding.params.momentum_initial},
        {"momentum_final", embedding.params.momentum_final},
        {"momentum_switch_iter", embedding.params.momentum_switch_iter},
        {"seed", embedding.params.seed},
        {"perplexity_tolerance", embedding.params.perplexity_tolerance},
        {"perplexity_max_bisection_steps", embedding.params.perplexity_max_bisection_steps},
    };
    return doc.dump(2) + "\n";
}

} // namespace trajkit
