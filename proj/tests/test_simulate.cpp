#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "trajkit/dataset.hpp"
#include "trajkit/kmeans.hpp"
#include "trajkit/simulate.hpp"

#include <cmath>
#include <fstream>

using namespace trajkit;

namespace {

SimConfig small_config(int k, double diagonal) {
    SimConfig config;
    config.courses = {2, 3, 4};
    config.noise_sigma = 2.0;
    config.n_children = 50;
    config.dropout_prob = 0.0;
    config.seed = 7;
    for (const int course : config.courses) {
        std::vector<std::array<double, kNumScores>> centroids;
        std::vector<double> shares;
        for (int t = 0; t < k; ++t) {
            std::array<double, kNumScores> centroid{};
            centroid.fill(20.0 + 25.0 * t);
            centroids.push_back(centroid);
            shares.push_back(1.0 / k);
        }
        config.centroids[course] = centroids;
        config.shares[course] = shares;
    }
    for (std::size_t i = 0; i + 1 < config.courses.size(); ++i) {
        std::vector<std::vector<double>> rows(k, std::vector<double>(k, 0.0));
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
                if (a == b) {
                    rows[a][b] = diagonal;
                } else if (std::abs(a - b) == 1) {
                    rows[a][b] = (1.0 - diagonal) / ((a == 0 || a == k - 1) ? 1.0 : 2.0);
                }
            }
        }
        config.kernel[config.courses[i]] = rows;
    }
    return config;
}

} // namespace

TEST_CASE("the default config validates and spans courses 2 through 8") {
    const SimConfig config = default_sim_config();
    validate_config(config);
    CHECK(config.courses == std::vector<int>{2, 3, 4, 5, 6, 7, 8});
    CHECK(config.centroids.at(4).size() == 3);
    CHECK(config.centroids.at(2).size() == 2);
    CHECK(config.centroids.at(8).size() == 2);

    // Kernel rows carry the configured stay rates on the expected columns.
    CHECK(config.kernel.at(2)[0][0] == doctest::Approx(1.0));
    CHECK(config.kernel.at(2)[1][1] == doctest::Approx(0.88));
    CHECK(config.kernel.at(2)[1][0] == doctest::Approx(0.12));
    // 2 -> 3 tiers: the top of 2 maps to the top of 3.
    CHECK(config.kernel.at(3)[1][2] == doctest::Approx(0.801));
    CHECK(config.kernel.at(3)[1][1] == doctest::Approx(0.199));
    // Middle tier with both directions available splits by the
    // improving:declining ratio.
    CHECK(config.kernel.at(5)[1][2] == doctest::Approx(0.318 * 11.0 / 26.8));
    CHECK(config.kernel.at(5)[1][0] == doctest::Approx(0.318 * 15.8 / 26.8));
    // 3 -> 2 tiers with an unpublished stay rate: fully stable fallback.
    CHECK(config.kernel.at(7)[2][1] == doctest::Approx(1.0));
}

TEST_CASE("config validation names the offending course") {
    SimConfig config = default_sim_config();
    config.shares[5] = {0.5, 0.4, 0.2}; // sums to 1.1
    try {
        validate_config(config);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("course 5") != std::string::npos);
    }

    SimConfig bad_kernel = default_sim_config();
    bad_kernel.kernel[4][0] = {0.5, 0.4, 0.0};
    try {
        validate_config(bad_kernel);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("course 4") != std::string::npos);
    }

    SimConfig bad_centroid = default_sim_config();
    bad_centroid.centroids[6][0][0] = 101.0;
    CHECK_THROWS_AS(validate_config(bad_centroid), ConfigError);
}

TEST_CASE("zero noise reproduces the tier centroids exactly") {
    SimConfig config = small_config(3, 0.9);
    config.noise_sigma = 0.0;
    const std::vector<int> tiers = {0, 1, 2, 1};
    const Cohort cohort = sample_cohort(config, 2, tiers);
    REQUIRE(cohort.records.size() == 4);
    for (std::size_t i = 0; i < tiers.size(); ++i) {
        CHECK(cohort.records[i].q_scores ==
              config.centroids.at(2)[static_cast<std::size_t>(tiers[i])]);
    }
}

TEST_CASE("per-tier sample means stay within three standard errors") {
    SimConfig config = small_config(3, 0.9);
    config.noise_sigma = 3.0;
    config.seed = 99;
    const std::size_t per_tier = 200;
    std::vector<int> tiers;
    for (int t = 0; t < 3; ++t) tiers.insert(tiers.end(), per_tier, t);
    const Cohort cohort = sample_cohort(config, 3, tiers);

    for (int t = 0; t < 3; ++t) {
        std::array<double, kNumScores> mean{};
        for (std::size_t i = per_tier * t; i < per_tier * (t + 1); ++i) {
            for (std::size_t q = 0; q < kNumScores; ++q) mean[q] += cohort.records[i].q_scores[q];
        }
        const double bound = 3.0 * config.noise_sigma / std::sqrt(static_cast<double>(per_tier));
        for (std::size_t q = 0; q < kNumScores; ++q) {
            mean[q] /= static_cast<double>(per_tier);
            CHECK(std::fabs(mean[q] - config.centroids.at(3)[static_cast<std::size_t>(t)][q]) <
                  bound);
        }
    }
}

TEST_CASE("noise is clipped to the score range") {
    SimConfig config = small_config(2, 0.9);
    config.noise_sigma = 30.0;
    for (auto& centroid : config.centroids.at(2)) centroid.fill(0.0);
    config.centroids.at(2)[1].fill(100.0);
    const Cohort cohort = sample_cohort(config, 2, std::vector<int>(300, 0));
    const Cohort top = sample_cohort(config, 2, std::vector<int>(300, 1));
    for (const auto& rec : cohort.records) {
        for (const double q : rec.q_scores) {
            CHECK(q >= 0.0);
            CHECK(q <= 100.0);
        }
    }
    bool clipped_low = false;
    for (const auto& rec : cohort.records) {
        for (const double q : rec.q_scores) clipped_low |= (q == 0.0);
    }
    bool clipped_high = false;
    for (const auto& rec : top.records) {
        for (const double q : rec.q_scores) clipped_high |= (q == 100.0);
    }
    CHECK(clipped_low);
    CHECK(clipped_high);
}

TEST_CASE("an identity kernel freezes every child's tier") {
    const SimConfig config = small_config(3, 1.0);
    const GroundTruth truth = evolve_tiers(config);
    for (std::size_t child = 0; child < config.n_children; ++child) {
        for (std::size_t t = 1; t < truth.courses.size(); ++t) {
            CHECK(truth.tiers[child][t] == truth.tiers[child][0]);
        }
    }
}

TEST_CASE("a deterministic off-diagonal kernel row moves every tier-0 child up") {
    SimConfig config = small_config(3, 0.9);
    config.kernel[2] = {{0.0, 1.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
    const GroundTruth truth = evolve_tiers(config);
    bool saw_tier0 = false;
    for (std::size_t child = 0; child < config.n_children; ++child) {
        if (truth.tiers[child][0] == 0) {
            saw_tier0 = true;
            CHECK(truth.tiers[child][1] == 1);
        }
    }
    CHECK(saw_tier0);
}

TEST_CASE("a diagonal-0.9 kernel yields a 90 percent empirical stay rate") {
    SimConfig config = small_config(3, 0.9);
    config.n_children = 2000;
    config.seed = 4;
    const GroundTruth truth = evolve_tiers(config);

    long stays = 0;
    long total = 0;
    for (std::size_t child = 0; child < config.n_children; ++child) {
        for (std::size_t t = 1; t < truth.courses.size(); ++t) {
            ++total;
            if (truth.tiers[child][t] == truth.tiers[child][t - 1]) ++stays;
        }
    }
    const double stay_rate = 100.0 * static_cast<double>(stays) / static_cast<double>(total);
    CHECK(std::fabs(stay_rate - 90.0) < 2.0);
}

TEST_CASE("identical configs generate bit-identical panels") {
    SimConfig config = default_sim_config();
    config.n_children = 120;
    const Panel a = simulate_panel(config);
    const Panel b = simulate_panel(config);
    CHECK(a.records == b.records);
    CHECK(a.truth.tiers == b.truth.tiers);
    CHECK(a.truth.present == b.truth.present);
    CHECK(to_csv(a.records) == to_csv(b.records));
    CHECK(ground_truth_to_csv(a.truth) == ground_truth_to_csv(b.truth));
}

TEST_CASE("dropout removes sessions without renaming children") {
    SimConfig config = default_sim_config();
    config.n_children = 300;
    config.dropout_prob = 0.25;
    const Panel panel = simulate_panel(config);
    CHECK(panel.records.size() < 300 * 7);
    // Expected presence is (1 - p) per cell; allow a generous band.
    const double rate = static_cast<double>(panel.records.size()) / (300.0 * 7.0);
    CHECK(rate > 0.70);
    CHECK(rate < 0.80);
    for (const auto& rec : panel.records) {
        CHECK(rec.child_id.size() == 5);
        CHECK(rec.child_id[0] == 'C');
    }
}

TEST_CASE("raw-space clustering recovers ground-truth tiers at low noise") {
    SimConfig config = small_config(3, 0.9);
    config.noise_sigma = 1.0;
    std::vector<int> tiers;
    for (int t = 0; t < 3; ++t) tiers.insert(tiers.end(), 40, t);
    const Cohort cohort = sample_cohort(config, 2, tiers);

    Matrix points(cohort.records.size(), kNumScores);
    for (std::size_t i = 0; i < cohort.records.size(); ++i) {
        for (std::size_t q = 0; q < kNumScores; ++q) points(i, q) = cohort.records[i].q_scores[q];
    }
    KMeansParams params;
    params.k = 3;
    params.seed = 11;
    const ClusterModel model = fit_kmeans(points, params);
    CHECK(adjusted_rand_index(model.assignments, tiers) == doctest::Approx(1.0));
}

TEST_CASE("adjusted Rand index reference values") {
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 1, 1}) == doctest::Approx(1.0));
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
    CHECK(adjusted_rand_index({0, 1, 2, 3, 4, 5}, {0, 0, 0, 0, 0, 0}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(adjusted_rand_index({0, 1}, {0, 1, 2}), LengthMismatch);

    // Permuting labels never changes the score.
    const std::vector<int> a = {0, 0, 1, 1, 2, 2, 0, 1};
    const std::vector<int> b = {2, 2, 0, 0, 1, 1, 2, 0};
    CHECK(adjusted_rand_index(a, b) == doctest::Approx(1.0));

    const std::vector<int> noisy = {0, 0, 1, 1, 2, 2, 1, 1};
    CHECK(adjusted_rand_index(a, noisy) == adjusted_rand_index(noisy, a));
    CHECK(adjusted_rand_index(a, noisy) < 1.0);
    CHECK(adjusted_rand_index(a, noisy) >= -1.0);
}

TEST_CASE("JSON config round-trip preserves the generated panel") {
    SimConfig config = small_config(3, 0.8);
    config.n_children = 25;
    const std::string path = "trajkit_test_config.json";
    {
        std::ofstream out(path, std::ios::binary);
        out << sim_config_to_json(config);
    }
    const SimConfig loaded = load_sim_config(path);
    std::remove(path.c_str());

    CHECK(loaded.courses == config.courses);
    CHECK(loaded.n_children == config.n_children);
    CHECK(to_csv(simulate_panel(loaded).records) == to_csv(simulate_panel(config).records));
}

TEST_CASE("bad JSON configs are rejected") {
    const std::string path = "trajkit_test_bad_config.json";
    {
        std::ofstream out(path, std::ios::binary);
        out << "{ \"shares\": { \"2\": [0.5, 0.4] } }";
    }
    try {
        load_sim_config(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("course 2") != std::string::npos);
    }
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_sim_config("missing_config.json"), std::ios_base::failure);
}
