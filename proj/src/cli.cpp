#include "trajkit/cli.hpp"

#include "trajkit/dataset.hpp"
#include "trajkit/kmeans.hpp"
#include "trajkit/manifest.hpp"
#include "trajkit/pipeline.hpp"
#include "trajkit/simulate.hpp"
#include "trajkit/tsne.hpp"

#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>

namespace trajkit {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

int dispatch(const std::vector<std::string>& argv) {
    CLI::App app{"Longitudinal cohort trajectory analysis toolkit"};
    app.require_subcommand(1);

    AnalyzeOptions analyze;
    std::string cluster_space = "embedding";
    auto* analyze_cmd = app.add_subcommand(
        "analyze", "Embed, cluster, and profile each course, then emit transition tables");
    analyze_cmd->add_option("--input", analyze.input_csv, "Input score CSV")->required();
    analyze_cmd->add_option("--out", analyze.out_dir, "Output directory")->required();
    analyze_cmd->add_option("--seed", analyze.seed, "Master seed for all stages");
    analyze_cmd->add_option("--perplexity", analyze.perplexity, "Embedding perplexity");
    analyze_cmd->add_option("--k", analyze.k_override, "Fixed cluster count (0 = elbow rule)");
    analyze_cmd->add_option("--k-max", analyze.k_max, "Upper bound of the elbow search");
    analyze_cmd->add_option("--cluster-space", cluster_space, "Cluster on 'embedding' or 'raw' scores")
        ->check(CLI::IsMember({"embedding", "raw"}));

    SimulateOptions simulate;
    auto* simulate_cmd =
        app.add_subcommand("simulate", "Generate a synthetic panel with known ground truth");
    simulate_cmd->add_option("--config", simulate.config_path, "JSON config (omit for defaults)");
    simulate_cmd->add_option("--out", simulate.out_dir, "Output directory")->required();

    TransitionsOptions transitions;
    auto* transitions_cmd = app.add_subcommand(
        "transitions", "Recompute mobility and stability tables from stored assignments");
    transitions_cmd->add_option("--input", transitions.input_dir, "Directory of a previous analyze run")
        ->required();
    transitions_cmd->add_option("--out", transitions.out_dir, "Output directory")->required();

    auto* version_cmd = app.add_subcommand("version", "Print the toolkit version");

    // CLI11 wants (argc-style) reversed vector without the program name.
    std::vector<std::string> args(argv.begin() + 1, argv.end());
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    if (version_cmd->parsed()) {
        std::cout << kToolkitVersion << "\n";
        return kExitOk;
    }
    if (analyze_cmd->parsed()) {
        analyze.cluster_space = cluster_space == "raw" ? ClusterSpace::Raw : ClusterSpace::Embedding;
        run_analyze(analyze);
        return kExitOk;
    }
    if (simulate_cmd->parsed()) {
        run_simulate(simulate);
        return kExitOk;
    }
    run_transitions(transitions);
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& argv) {
    try {
        return dispatch(argv);
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

} // namespace trajkit
