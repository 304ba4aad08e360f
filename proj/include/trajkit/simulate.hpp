#pragma once

#include "trajkit/dataset.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace trajkit {

/// Generative model for synthetic longitudinal panels: per-course tier
/// centroids with Gaussian noise, a Markov tier process across
/// consecutive courses, and independent per-year dropout.
struct SimConfig {
    std::vector<int> courses;
    std::map<int, std::vector<std::array<double, kNumScores>>> centroids; // tier-ordered
    std::map<int, std::vector<double>> shares;                            // fractions, sum to 1
    std::map<int, std::vector<std::vector<double>>> kernel; // course_from -> k_from x k_to rows
    double noise_sigma = 3.0;
    std::size_t n_children = 940;
    double dropout_prob = 0.1;
    std::uint64_t seed = 42;
};

/// Latent tier and presence per child per course.
struct GroundTruth {
    std::vector<int> courses;
    std::vector<std::string> child_ids;
    // child-major: tiers[child][course_pos], present[child][course_pos]
    std::vector<std::vector<int>> tiers;
    std::vector<std::vector<bool>> present;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LengthMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Built-in reference configuration: seven courses with the toolkit's
/// bundled tier centroids, shares, and mobility kernels.
SimConfig default_sim_config();

/// Throws ConfigError naming the offending course on any violated
/// constraint (share sums, kernel stochasticity, centroid ranges).
void validate_config(const SimConfig& config);

/// Parses a JSON config file; missing fields fall back to the defaults.
SimConfig load_sim_config(const std::string& path);
std::string sim_config_to_json(const SimConfig& config);

/// Draws initial tiers from the first course's shares, then walks the
/// per-transition kernels; presence flags drawn independently per
/// (child, course).
GroundTruth evolve_tiers(const SimConfig& config);

/// Scores for one course given a tier per child: centroid plus isotropic
/// Gaussian noise, clipped to [0, 100]. Children are named C0001, C0002, ...
Cohort sample_cohort(const SimConfig& config, int course, const std::vector<int>& tiers);

struct Panel {
    std::vector<SessionRecord> records; // present (child, course) sessions, course-major
    GroundTruth truth;
};

Panel simulate_panel(const SimConfig& config);

/// `child_id,course,tier,present` rows for every (child, course) cell.
std::string ground_truth_to_csv(const GroundTruth& truth);

/// Chance-corrected agreement between two flat partitions, in [-1, 1].
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

} // namespace trajkit
