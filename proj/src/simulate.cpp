#include "trajkit/simulate.hpp"

#include "trajkit/csv.hpp"
#include "trajkit/longitudinal.hpp"
#include "trajkit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace trajkit {

namespace {

/// Completes a full tier kernel row set from marginal rates: the stable
/// share sits on the corresponding destination tier, the remainder goes
/// to the adjacent tiers, split by the improving:declining ratio (evenly
/// when both rates are zero). A NaN stability yields a fully stable row.
std::vector<std::vector<double>> build_mobility_kernel(int k_from, int k_to,
                                                       const std::vector<double>& stability_pct,
                                                       double improving_pct, double declining_pct) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(k_from),
                                          std::vector<double>(static_cast<std::size_t>(k_to), 0.0));
    for (int i = 0; i < k_from; ++i) {
        auto& row = rows[static_cast<std::size_t>(i)];
        const int expected = tier_correspondence(k_from, k_to, i);
        const double stab = stability_pct[static_cast<std::size_t>(i)];
        if (std::isnan(stab)) {
            row[static_cast<std::size_t>(expected)] = 1.0;
            continue;
        }
        const double stay = stab / 100.0;
        const double residual = 1.0 - stay;
        row[static_cast<std::size_t>(expected)] = stay;

        const bool can_up = expected + 1 < k_to;
        const bool can_down = expected - 1 >= 0;
        if (can_up && can_down) {
            double up_weight = improving_pct;
            double down_weight = declining_pct;
            if (up_weight + down_weight <= 0.0) {
                up_weight = down_weight = 1.0;
            }
            row[static_cast<std::size_t>(expected + 1)] +=
                residual * up_weight / (up_weight + down_weight);
            row[static_cast<std::size_t>(expected - 1)] +=
                residual * down_weight / (up_weight + down_weight);
        } else if (can_up) {
            row[static_cast<std::size_t>(expected + 1)] += residual;
        } else if (can_down) {
            row[static_cast<std::size_t>(expected - 1)] += residual;
        } else {
            row[static_cast<std::size_t>(expected)] += residual;
        }
    }
    return rows;
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string child_name(std::size_t index, std::size_t n_children) {
    std::size_t width = 4;
    std::size_t probe = 10000;
    while (n_children > probe) {
        ++width;
        probe *= 10;
    }
    std::string digits = std::to_string(index + 1);
    std::string out = "C";
    out.append(width > digits.size() ? width - digits.size() : 0, '0');
    out += digits;
    return out;
}

int categorical(Rng& rng, const std::vector<double>& probs) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

std::array<double, kNumScores> sample_scores(Rng& rng, const std::array<double, kNumScores>& centroid,
                                             double sigma) {
    std::array<double, kNumScores> scores{};
    for (std::size_t d = 0; d < kNumScores; ++d) {
        scores[d] = std::clamp(centroid[d] + sigma * rng.normal(), 0.0, 100.0);
    }
    return scores;
}

} // namespace

SimConfig default_sim_config() {
    SimConfig config;
    config.courses = {2, 3, 4, 5, 6, 7, 8};
    config.noise_sigma = 3.0;
    config.n_children = 940;
    config.dropout_prob = 0.1;
    config.seed = 42;

    config.centroids[2] = {{2.39, 6.26, 0.03, 2.34, 17.04, 29.44},
                           {52.99, 5.07, 0.00, 3.81, 16.51, 20.42}};
    config.shares[2] = {0.6731, 0.3269};

    config.centroids[3] = {{2.82, 5.86, 0.50, 2.00, 16.34, 28.04},
                           {60.60, 14.64, 4.68, 11.88, 23.36, 36.78}};
    config.shares[3] = {0.4080, 0.5920};

    config.centroids[4] = {{2.49, 7.37, 0.33, 2.84, 17.96, 29.66},
                           {63.20, 15.77, 1.21, 8.86, 26.43, 42.90},
                           {74.33, 52.65, 23.25, 44.33, 63.27, 78.00}};
    config.shares[4] = {0.2536, 0.4071, 0.3393};

    config.centroids[5] = {{4.93, 8.35, 0.43, 3.17, 17.41, 30.94},
                           {69.92, 34.46, 6.20, 20.97, 31.24, 58.25},
                           {80.62, 64.87, 32.68, 47.05, 71.94, 84.97}};
    config.shares[5] = {0.2030, 0.3801, 0.4170};

    config.centroids[6] = {{53.03, 18.98, 3.23, 13.79, 22.72, 35.64},
                           {74.20, 74.86, 17.29, 28.41, 58.64, 89.13},
                           {86.26, 62.97, 42.43, 56.83, 77.18, 88.21}};
    config.shares[6] = {0.2162, 0.3861, 0.3977};

    config.centroids[7] = {{73.90, 42.02, 7.16, 25.23, 43.23, 66.43},
                           {73.15, 83.89, 30.77, 37.76, 43.77, 89.15},
                           {86.23, 69.84, 38.19, 50.13, 86.44, 90.97}};
    config.shares[7] = {0.2857, 0.2762, 0.4381};

    config.centroids[8] = {{85.13, 60.09, 25.69, 30.11, 62.34, 86.77},
                           {78.41, 88.39, 31.53, 52.10, 77.35, 91.77}};
    config.shares[8] = {0.5893, 0.4107};

    // Published share percentages round to two decimals and can miss 100
    // by a hair (course 5 sums to 100.01); normalize them.
    for (auto& [course, shares] : config.shares) {
        double total = 0.0;
        for (const double s : shares) total += s;
        for (double& s : shares) s /= total;
    }

    config.kernel[2] = build_mobility_kernel(2, 2, {100.0, 88.0}, 5.9, 0.0);
    config.kernel[3] = build_mobility_kernel(2, 3, {92.7, 80.1}, 9.4, 4.9);
    config.kernel[4] = build_mobility_kernel(3, 3, {94.1, 77.4, 60.0}, 0.0, 21.4);
    config.kernel[5] = build_mobility_kernel(3, 3, {91.3, 68.2, 62.4}, 11.0, 15.8);
    config.kernel[6] = build_mobility_kernel(3, 3, {89.5, 70.4, 66.1}, 14.3, 16.3);
    config.kernel[7] = build_mobility_kernel(3, 2, {68.5, 95.1, kNan}, 7.0, 11.0);
    return config;
}

void validate_config(const SimConfig& config) {
    if (config.courses.empty()) {
        throw ConfigError("config: courses list is empty");
    }
    for (std::size_t i = 0; i < config.courses.size(); ++i) {
        const int course = config.courses[i];
        if (course < kMinCourse || course > kMaxCourse) {
            throw ConfigError("config: course " + std::to_string(course) + " outside [2, 8]");
        }
        if (i > 0 && config.courses[i] <= config.courses[i - 1]) {
            throw ConfigError("config: courses must be strictly increasing");
        }
    }
    if (!(config.noise_sigma > 0.0)) {
        throw ConfigError("config: noise_sigma must be > 0");
    }
    if (config.n_children == 0) {
        throw ConfigError("config: n_children must be > 0");
    }
    if (!(config.dropout_prob >= 0.0 && config.dropout_prob < 1.0)) {
        throw ConfigError("config: dropout_prob must be in [0, 1)");
    }

    for (const int course : config.courses) {
        const auto cents = config.centroids.find(course);
        const auto shares = config.shares.find(course);
        if (cents == config.centroids.end() || cents->second.empty()) {
            throw ConfigError("config: course " + std::to_string(course) + " has no centroids");
        }
        if (shares == config.shares.end() ||
            shares->second.size() != cents->second.size()) {
            throw ConfigError("config: course " + std::to_string(course) +
                              " centroid/share count mismatch");
        }
        double share_sum = 0.0;
        for (const double s : shares->second) {
            if (s < 0.0) {
                throw ConfigError("config: course " + std::to_string(course) + " has a negative share");
            }
            share_sum += s;
        }
        if (std::fabs(share_sum - 1.0) > 1e-6) {
            throw ConfigError("config: course " + std::to_string(course) + " shares sum to " +
                              format_double(share_sum) + ", expected 1");
        }
        for (const auto& centroid : cents->second) {
            for (const double v : centroid) {
                if (!(v >= 0.0 && v <= 100.0)) {
                    throw ConfigError("config: course " + std::to_string(course) +
                                      " centroid entry outside [0, 100]");
                }
            }
        }
    }

    for (std::size_t i = 0; i + 1 < config.courses.size(); ++i) {
        const int from = config.courses[i];
        const int to = config.courses[i + 1];
        if (to != from + 1) continue; // a gap restarts from that course's shares
        const auto kernel = config.kernel.find(from);
        if (kernel == config.kernel.end()) {
            throw ConfigError("config: course " + std::to_string(from) + " has no transition kernel");
        }
        const std::size_t k_from = config.centroids.at(from).size();
        const std::size_t k_to = config.centroids.at(to).size();
        if (kernel->second.size() != k_from) {
            throw ConfigError("config: course " + std::to_string(from) + " kernel has " +
                              std::to_string(kernel->second.size()) + " rows, expected " +
                              std::to_string(k_from));
        }
        for (const auto& row : kernel->second) {
            if (row.size() != k_to) {
                throw ConfigError("config: course " + std::to_string(from) +
                                  " kernel row width mismatch");
            }
            double row_sum = 0.0;
            for (const double p : row) {
                if (p < 0.0) {
                    throw ConfigError("config: course " + std::to_string(from) +
                                      " kernel has a negative entry");
                }
                row_sum += p;
            }
            if (std::fabs(row_sum - 1.0) > 1e-9) {
                throw ConfigError("config: course " + std::to_string(from) + " kernel row sums to " +
                                  format_double(row_sum) + ", expected 1");
            }
        }
    }
}

GroundTruth evolve_tiers(const SimConfig& config) {
    validate_config(config);

    GroundTruth truth;
    truth.courses = config.courses;
    truth.child_ids.reserve(config.n_children);
    truth.tiers.assign(config.n_children, std::vector<int>(config.courses.size(), 0));
    truth.present.assign(config.n_children, std::vector<bool>(config.courses.size(), true));

    Rng tier_rng(derive_seed(config.seed, "tiers"));
    Rng presence_rng(derive_seed(config.seed, "presence"));

    for (std::size_t child = 0; child < config.n_children; ++child) {
        truth.child_ids.push_back(child_name(child, config.n_children));
        int tier = categorical(tier_rng, config.shares.at(config.courses[0]));
        truth.tiers[child][0] = tier;
        for (std::size_t t = 1; t < config.courses.size(); ++t) {
            const int prev_course = config.courses[t - 1];
            if (config.courses[t] == prev_course + 1) {
                tier = categorical(tier_rng, config.kernel.at(prev_course)[static_cast<std::size_t>(tier)]);
            } else {
                tier = categorical(tier_rng, config.shares.at(config.courses[t]));
            }
            truth.tiers[child][t] = tier;
        }
        for (std::size_t t = 0; t < config.courses.size(); ++t) {
            truth.present[child][t] = presence_rng.uniform() >= config.dropout_prob;
        }
    }
    return truth;
}

Cohort sample_cohort(const SimConfig& config, int course, const std::vector<int>& tiers) {
    const auto cents = config.centroids.find(course);
    if (cents == config.centroids.end()) {
        throw ConfigError("sample_cohort: course " + std::to_string(course) + " has no centroids");
    }

    Rng rng(derive_seed(config.seed, "scores", static_cast<std::uint64_t>(course)));
    Cohort cohort;
    cohort.course = course;
    cohort.records.reserve(tiers.size());
    for (std::size_t i = 0; i < tiers.size(); ++i) {
        const auto tier = static_cast<std::size_t>(tiers[i]);
        if (tier >= cents->second.size()) {
            throw ConfigError("sample_cohort: tier " + std::to_string(tiers[i]) +
                              " out of range for course " + std::to_string(course));
        }
        SessionRecord rec;
        rec.child_id = child_name(i, tiers.size());
        rec.course = course;
        rec.q_scores = sample_scores(rng, cents->second[tier], config.noise_sigma);
        cohort.records.push_back(std::move(rec));
    }
    return cohort;
}

Panel simulate_panel(const SimConfig& config) {
    Panel panel;
    panel.truth = evolve_tiers(config);

    for (std::size_t t = 0; t < panel.truth.courses.size(); ++t) {
        const int course = panel.truth.courses[t];
        Rng rng(derive_seed(config.seed, "scores", static_cast<std::uint64_t>(course)));
        const auto& cents = config.centroids.at(course);
        for (std::size_t child = 0; child < config.n_children; ++child) {
            if (!panel.truth.present[child][t]) continue;
            SessionRecord rec;
            rec.child_id = panel.truth.child_ids[child];
            rec.course = course;
            rec.q_scores = sample_scores(
                rng, cents[static_cast<std::size_t>(panel.truth.tiers[child][t])], config.noise_sigma);
            panel.records.push_back(std::move(rec));
        }
    }
    return panel;
}

std::string ground_truth_to_csv(const GroundTruth& truth) {
    std::string out = "child_id,course,tier,present\n";
    for (std::size_t child = 0; child < truth.child_ids.size(); ++child) {
        for (std::size_t t = 0; t < truth.courses.size(); ++t) {
            out += truth.child_ids[child];
            out += ',';
            out += std::to_string(truth.courses[t]);
            out += ',';
            out += std::to_string(truth.tiers[child][t]);
            out += ',';
            out += truth.present[child][t] ? '1' : '0';
            out += '\n';
        }
    }
    return out;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) {
        throw LengthMismatch("adjusted_rand_index: partitions have different lengths");
    }
    const std::size_t n = a.size();
    if (n < 2) return 1.0;

    std::map<int, std::size_t> labels_a;
    std::map<int, std::size_t> labels_b;
    for (const int label : a) labels_a.emplace(label, labels_a.size());
    for (const int label : b) labels_b.emplace(label, labels_b.size());

    std::vector<std::vector<long>> table(labels_a.size(), std::vector<long>(labels_b.size(), 0));
    std::vector<long> sums_a(labels_a.size(), 0);
    std::vector<long> sums_b(labels_b.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ra = labels_a[a[i]];
        const std::size_t cb = labels_b[b[i]];
        ++table[ra][cb];
        ++sums_a[ra];
        ++sums_b[cb];
    }

    const auto comb2 = [](long m) -> double {
        return 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
    };

    double sum_cells = 0.0;
    for (const auto& row : table) {
        for (const long cell : row) sum_cells += comb2(cell);
    }
    double sum_rows = 0.0;
    for (const long m : sums_a) sum_rows += comb2(m);
    double sum_cols = 0.0;
    for (const long m : sums_b) sum_cols += comb2(m);

    const double total_pairs = comb2(static_cast<long>(n));
    const double expected = sum_rows * sum_cols / total_pairs;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) {
        return 1.0; // both partitions trivial in the same way
    }
    return (sum_cells - expected) / (max_index - expected);
}

SimConfig load_sim_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::ios_base::failure("cannot open config file: " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }

    SimConfig config = default_sim_config();
    try {
        if (doc.contains("courses")) config.courses = doc["courses"].get<std::vector<int>>();
        if (doc.contains("noise_sigma")) config.noise_sigma = doc["noise_sigma"].get<double>();
        if (doc.contains("n_children")) config.n_children = doc["n_children"].get<std::size_t>();
        if (doc.contains("dropout_prob")) config.dropout_prob = doc["dropout_prob"].get<double>();
        if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("centroids")) {
            config.centroids.clear();
            for (const auto& [key, value] : doc["centroids"].items()) {
                config.centroids[std::stoi(key)] =
                    value.get<std::vector<std::array<double, kNumScores>>>();
            }
        }
        if (doc.contains("shares")) {
            config.shares.clear();
            for (const auto& [key, value] : doc["shares"].items()) {
                config.shares[std::stoi(key)] = value.get<std::vector<double>>();
            }
        }
        if (doc.contains("kernel")) {
            config.kernel.clear();
            for (const auto& [key, value] : doc["kernel"].items()) {
                config.kernel[std::stoi(key)] = value.get<std::vector<std::vector<double>>>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: bad field type: ") + e.what());
    }

    validate_config(config);
    return config;
}

std::string sim_config_to_json(const SimConfig& config) {
    nlohmann::json doc;
    doc["courses"] = config.courses;
    doc["noise_sigma"] = config.noise_sigma;
    doc["n_children"] = config.n_children;
    doc["dropout_prob"] = config.dropout_prob;
    doc["seed"] = config.seed;
    for (const auto& [course, centroids] : config.centroids) {
        doc["centroids"][std::to_string(course)] = centroids;
    }
    for (const auto& [course, shares] : config.shares) {
        doc["shares"][std::to_string(course)] = shares;
    }
    for (const auto& [course, rows] : config.kernel) {
        doc["kernel"][std::to_string(course)] = rows;
    }
    return doc.dump(2) + "\n";
}

} // namespace trajkit
