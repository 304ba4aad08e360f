#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace trajkit {

inline const char* kToolkitVersion = "0.1.0";

/// Provenance record written last into every output directory. Lists the
/// input digest, the seed and every derived stage seed, all parameters,
/// per-course selected k, and the name of every data file emitted.
struct RunManifest {
    std::string command;
    std::string input_sha256;
    std::uint64_t seed = 0;
    std::map<std::string, std::uint64_t> stage_seeds;
    nlohmann::json params;
    std::map<std::string, int> selected_k; // keyed course02..course08
    std::vector<std::string> files;

    std::string to_json() const;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// UTC timestamp for manifests. Honors SOURCE_DATE_EPOCH so reruns can be
/// made byte-identical; falls back to the current time.
std::string manifest_timestamp();

void write_manifest(const RunManifest& manifest, const std::string& out_dir);

} // namespace trajkit
