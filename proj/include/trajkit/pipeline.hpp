#pragma once

#include "trajkit/dataset.hpp"
#include "trajkit/kmeans.hpp"
#include "trajkit/longitudinal.hpp"
#include "trajkit/profiles.hpp"
#include "trajkit/tsne.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace trajkit {

enum class ClusterSpace { Embedding, Raw };

struct AnalyzeOptions {
    std::string input_csv;
    std::string out_dir;
    std::uint64_t seed = 42;
    double perplexity = 30.0;
    int k_override = 0; // 0 selects k by the elbow rule
    int k_max = 6;
    ClusterSpace cluster_space = ClusterSpace::Embedding;
};

struct CourseAnalysis {
    int course = 0;
    Embedding2D embedding;
    std::vector<InertiaPoint> curve;
    int selected_k = 0;
    ClusterModel model;
    std::vector<ClusterProfile> profiles; // tier-labeled
};

struct AnalyzeResult {
    std::map<int, CourseAnalysis> courses;
    std::vector<MobilitySummary> mobility;
    std::vector<StabilityTable> stability;
};

/// Full pipeline: parse -> per-course embed, elbow, cluster, profile ->
/// cross-course transitions -> all table/plot files plus the manifest.
AnalyzeResult run_analyze(const AnalyzeOptions& options);

struct SimulateOptions {
    std::string config_path; // empty = built-in defaults
    std::string out_dir;
};

void run_simulate(const SimulateOptions& options);

struct TransitionsOptions {
    std::string input_dir; // directory holding a previous analyze run
    std::string out_dir;
};

/// Rebuilds the mobility and stability tables from stored assignment and
/// profile files, without re-running the embedding or clustering.
void run_transitions(const TransitionsOptions& options);

} // namespace trajkit
