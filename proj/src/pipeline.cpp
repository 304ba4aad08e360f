#include "trajkit/pipeline.hpp"

#include "trajkit/csv.hpp"
#include "trajkit/manifest.hpp"
#include "trajkit/rng.hpp"
#include "trajkit/simulate.hpp"
#include "trajkit/svg_scatter.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace trajkit {

namespace {

std::string course_tag(int course) {
    return course < 10 ? "course0" + std::to_string(course) : "course" + std::to_string(course);
}

std::string inertia_curve_csv(const std::vector<InertiaPoint>& curve) {
    std::string out = "k,inertia\n";
    for (const auto& point : curve) {
        out += std::to_string(point.k);
        out += ',';
        out += format_double(point.inertia);
        out += '\n';
    }
    return out;
}

Matrix raw_score_matrix(const Cohort& cohort) {
    Matrix points(cohort.records.size(), kNumScores);
    for (std::size_t i = 0; i < cohort.records.size(); ++i) {
        for (std::size_t q = 0; q < kNumScores; ++q) points(i, q) = cohort.records[i].q_scores[q];
    }
    return points;
}

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw std::ios_base::failure("cannot create output directory: " + out_dir);
    }
}

} // namespace

AnalyzeResult run_analyze(const AnalyzeOptions& options) {
    const std::vector<SessionRecord> records = parse_csv(options.input_csv);
    const std::map<int, Cohort> cohorts = build_cohorts(records);
    if (cohorts.empty()) {
        throw std::invalid_argument("analyze: input has no records");
    }

    ensure_out_dir(options.out_dir);

    RunManifest manifest;
    manifest.command = "analyze";
    manifest.input_sha256 = sha256_file(options.input_csv);
    manifest.seed = options.seed;
    manifest.params = {
        {"perplexity", options.perplexity},
        {"k_override", options.k_override},
        {"k_max", options.k_max},
        {"cluster_space", options.cluster_space == ClusterSpace::Embedding ? "embedding" : "raw"},
    };

    AnalyzeResult result;

    for (const auto& [course, cohort] : cohorts) {
        const std::string tag = course_tag(course);
        CourseAnalysis analysis;
        analysis.course = course;

        TsneParams tsne_params;
        tsne_params.perplexity = options.perplexity;
        tsne_params.seed = derive_seed(options.seed, "tsne/" + tag);
        manifest.stage_seeds["tsne/" + tag] = tsne_params.seed;
        analysis.embedding = run_tsne(cohort, tsne_params);

        const Matrix points = options.cluster_space == ClusterSpace::Embedding
                                  ? analysis.embedding.coords
                                  : raw_score_matrix(cohort);

        KMeansParams kmeans_params;
        kmeans_params.seed = derive_seed(options.seed, "kmeans/" + tag);
        manifest.stage_seeds["kmeans/" + tag] = kmeans_params.seed;

        if (options.k_max < 3) {
            throw std::invalid_argument("analyze: k_max must be at least 3 for elbow selection");
        }
        // n >= 4 is guaranteed here (the embedding step rejects smaller
        // cohorts), so the curve always has the 3 entries the elbow needs.
        const int k_cap = std::min<int>(options.k_max, static_cast<int>(cohort.size()) - 1);
        analysis.curve = inertia_curve(points, 1, k_cap, kmeans_params);
        analysis.selected_k = options.k_override > 0 ? options.k_override
                                                     : elbow_select_k(analysis.curve);

        kmeans_params.k = analysis.selected_k;
        analysis.model = fit_kmeans(points, kmeans_params);
        analysis.profiles = label_clusters_by_performance(centroid_q_profiles(cohort, analysis.model));

        const std::vector<int> tier_ranks = tier_ranks_for_assignments(analysis.model, analysis.profiles);
        std::vector<TierLabel> tier_labels;
        tier_labels.reserve(analysis.profiles.size());
        for (const auto& profile : analysis.profiles) tier_labels.push_back(profile.tier);
        std::sort(tier_labels.begin(), tier_labels.end(),
                  [](const TierLabel& a, const TierLabel& b) { return a.rank < b.rank; });

        write_file_atomic(options.out_dir + "/" + tag + "_embedding.csv",
                          embedding_to_csv(analysis.embedding));
        write_file_atomic(options.out_dir + "/" + tag + "_embedding.json",
                          embedding_sidecar_json(analysis.embedding));
        write_file_atomic(options.out_dir + "/" + tag + "_inertia.csv",
                          inertia_curve_csv(analysis.curve));
        write_file_atomic(options.out_dir + "/" + tag + "_model.json", model_to_json(analysis.model));
        write_file_atomic(options.out_dir + "/" + tag + "_assignments.csv",
                          assignments_to_csv(analysis.model, analysis.embedding.child_ids));
        write_file_atomic(options.out_dir + "/" + tag + "_profiles.csv",
                          profiles_to_csv(analysis.profiles, course));
        emit_scatter_svg(analysis.embedding, tier_ranks, tier_labels,
                         options.out_dir + "/" + tag + "_scatter.svg");

        manifest.files.insert(manifest.files.end(),
                              {tag + "_embedding.csv", tag + "_embedding.json", tag + "_inertia.csv",
                               tag + "_model.json", tag + "_assignments.csv", tag + "_profiles.csv",
                               tag + "_scatter.svg"});
        manifest.selected_k[tag] = analysis.selected_k;
        result.courses.emplace(course, std::move(analysis));
    }

    const std::vector<AlignedPair> pairs = align_consecutive(cohorts);
    for (const auto& pair : pairs) {
        if (pair.children.empty()) continue;
        const auto& from = result.courses.at(pair.course_from);
        const auto& to = result.courses.at(pair.course_to);
        const TransitionMatrix matrix =
            build_transition_matrix(pair, from.model, to.model, from.profiles, to.profiles);
        result.mobility.push_back(mobility_summary(matrix));
        result.stability.push_back(tier_stability_rates(matrix));
    }
    write_file_atomic(options.out_dir + "/mobility.csv", mobility_to_csv(result.mobility));
    write_file_atomic(options.out_dir + "/stability.csv", stability_to_csv(result.stability));
    manifest.files.insert(manifest.files.end(), {"mobility.csv", "stability.csv"});

    write_manifest(manifest, options.out_dir);
    return result;
}

void run_simulate(const SimulateOptions& options) {
    const SimConfig config =
        options.config_path.empty() ? default_sim_config() : load_sim_config(options.config_path);
    validate_config(config);

    ensure_out_dir(options.out_dir);
    const Panel panel = simulate_panel(config);

    const std::string panel_csv = to_csv(panel.records);
    write_file_atomic(options.out_dir + "/panel.csv", panel_csv);
    write_file_atomic(options.out_dir + "/ground_truth.csv", ground_truth_to_csv(panel.truth));

    RunManifest manifest;
    manifest.command = "simulate";
    manifest.input_sha256 = sha256_hex(sim_config_to_json(config));
    manifest.seed = config.seed;
    manifest.stage_seeds["sim/tiers"] = derive_seed(config.seed, "tiers");
    manifest.stage_seeds["sim/presence"] = derive_seed(config.seed, "presence");
    for (const int course : config.courses) {
        manifest.stage_seeds["sim/scores/" + course_tag(course)] =
            derive_seed(config.seed, "scores", static_cast<std::uint64_t>(course));
    }
    manifest.params = nlohmann::json::parse(sim_config_to_json(config));
    manifest.files = {"panel.csv", "ground_truth.csv"};
    write_manifest(manifest, options.out_dir);
}

namespace {

struct StoredCourse {
    int course = 0;
    std::vector<std::string> child_ids;
    std::vector<int> clusters;
    std::vector<int> cluster_to_rank;
};

int tier_rank_from_name(const std::string& name, int k) {
    if (name == "low") return 0;
    if (name == "medium") return 1;
    if (name == "high") return k - 1;
    const std::string prefix = "tier-";
    if (name.rfind(prefix, 0) == 0) return std::stoi(name.substr(prefix.size()));
    throw std::invalid_argument("unknown tier name: " + name);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::ios_base::failure("cannot open: " + path);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        const std::string trimmed = trim(line);
        if (!trimmed.empty()) lines.push_back(trimmed);
    }
    return lines;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

StoredCourse load_stored_course(const std::string& dir, int course) {
    const std::string tag = course < 10 ? "course0" + std::to_string(course)
                                        : "course" + std::to_string(course);
    StoredCourse stored;
    stored.course = course;

    const auto assignment_lines = read_lines(dir + "/" + tag + "_assignments.csv");
    if (assignment_lines.empty() || assignment_lines[0] != "child_id,cluster") {
        throw std::invalid_argument(tag + "_assignments.csv: bad header");
    }
    int max_cluster = -1;
    for (std::size_t i = 1; i < assignment_lines.size(); ++i) {
        const auto fields = split_csv_line(assignment_lines[i]);
        if (fields.size() != 2) {
            throw std::invalid_argument(tag + "_assignments.csv: bad row " + std::to_string(i + 1));
        }
        stored.child_ids.push_back(fields[0]);
        stored.clusters.push_back(std::stoi(fields[1]));
        max_cluster = std::max(max_cluster, stored.clusters.back());
    }

    const auto profile_lines = read_lines(dir + "/" + tag + "_profiles.csv");
    if (profile_lines.empty() ||
        profile_lines[0] != "cluster,tier,q1,q2,q3,q4,q5,q6,pct,course") {
        throw std::invalid_argument(tag + "_profiles.csv: bad header");
    }
    const int k = static_cast<int>(profile_lines.size()) - 1;
    if (k <= max_cluster) {
        throw std::invalid_argument(tag + ": profiles list fewer clusters than assignments use");
    }
    stored.cluster_to_rank.assign(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 1; i < profile_lines.size(); ++i) {
        const auto fields = split_csv_line(profile_lines[i]);
        if (fields.size() != 10) {
            throw std::invalid_argument(tag + "_profiles.csv: bad row " + std::to_string(i + 1));
        }
        stored.cluster_to_rank[static_cast<std::size_t>(std::stoi(fields[0]))] =
            tier_rank_from_name(fields[1], k);
    }
    return stored;
}

} // namespace

void run_transitions(const TransitionsOptions& options) {
    std::vector<StoredCourse> courses;
    for (int course = kMinCourse; course <= kMaxCourse; ++course) {
        const std::string tag = course_tag(course);
        if (!std::filesystem::exists(options.input_dir + "/" + tag + "_assignments.csv")) continue;
        courses.push_back(load_stored_course(options.input_dir, course));
    }
    if (courses.size() < 2) {
        throw std::invalid_argument("transitions: need stored assignments for at least two courses in " +
                                    options.input_dir);
    }

    ensure_out_dir(options.out_dir);

    std::vector<MobilitySummary> mobility;
    std::vector<StabilityTable> stability;
    for (std::size_t i = 0; i + 1 < courses.size(); ++i) {
        const auto& from = courses[i];
        const auto& to = courses[i + 1];
        if (to.course != from.course + 1) continue;

        std::map<std::string, std::size_t> to_index;
        for (std::size_t j = 0; j < to.child_ids.size(); ++j) to_index.emplace(to.child_ids[j], j);

        std::vector<std::pair<int, int>> rank_pairs;
        for (std::size_t j = 0; j < from.child_ids.size(); ++j) {
            const auto hit = to_index.find(from.child_ids[j]);
            if (hit == to_index.end()) continue;
            rank_pairs.emplace_back(
                from.cluster_to_rank[static_cast<std::size_t>(from.clusters[j])],
                to.cluster_to_rank[static_cast<std::size_t>(to.clusters[hit->second])]);
        }
        if (rank_pairs.empty()) continue;

        const TransitionMatrix matrix = make_transition_matrix(
            from.course, to.course, static_cast<int>(from.cluster_to_rank.size()),
            static_cast<int>(to.cluster_to_rank.size()), rank_pairs);
        mobility.push_back(mobility_summary(matrix));
        stability.push_back(tier_stability_rates(matrix));
    }

    write_file_atomic(options.out_dir + "/mobility.csv", mobility_to_csv(mobility));
    write_file_atomic(options.out_dir + "/stability.csv", stability_to_csv(stability));

    RunManifest manifest;
    manifest.command = "transitions";
    manifest.input_sha256 = "";
    manifest.seed = 0;
    manifest.params = {{"input_dir", options.input_dir}};
    manifest.files = {"mobility.csv", "stability.csv"};
    write_manifest(manifest, options.out_dir);
}

} // namespace trajkit
