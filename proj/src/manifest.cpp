#include "trajkit/manifest.hpp"

#include "trajkit/csv.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace trajkit {

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
    EVP_DigestFinal_ex(ctx, digest, &digest_len);
    EVP_MD_CTX_free(ctx);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * digest_len);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::ios_base::failure("cannot open for digest: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return sha256_hex(buffer.str());
}

std::string manifest_timestamp() {
    std::time_t now = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    }
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

std::string RunManifest::to_json() const {
    nlohmann::json doc;
    doc["version"] = kToolkitVersion;
    doc["command"] = command;
    doc["input_sha256"] = input_sha256;
    doc["seed"] = seed;
    doc["generated_at"] = manifest_timestamp();
    for (const auto& [stage, stage_seed] : stage_seeds) {
        doc["stage_seeds"][stage] = stage_seed;
    }
    doc["params"] = params;
    for (const auto& [course, k] : selected_k) {
        doc["selected_k"][course] = k;
    }
    std::vector<std::string> sorted_files = files;
    std::sort(sorted_files.begin(), sorted_files.end());
    doc["files"] = sorted_files;
    return doc.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::string& out_dir) {
    write_file_atomic(out_dir + "/manifest.json", manifest.to_json());
}

} // namespace trajkit
