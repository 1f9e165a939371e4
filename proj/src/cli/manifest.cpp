#include "qantenna/cli/manifest.hpp"

#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "qantenna/units.hpp"

#ifndef QANTENNA_VERSION
#define QANTENNA_VERSION "unknown"
#endif

namespace qantenna::cli {

std::string version() { return QANTENNA_VERSION; }

std::string sha256_hex(const std::string& bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
        throw std::runtime_error("sha256: OpenSSL digest failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("sha256: cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["kind"] = kind;
    j["version"] = version;
    j["seed"] = seed;
    j["constants"] = {{"wavelength", kWavelength},
                      {"wavenumber", kWavenumber},
                      {"gamma_e", kGammaE},
                      {"cross_section", kCrossSection},
                      {"units", "lengths in lambda0, rates in gamma_e, c = 1"}};
    j["config"] = config;
    j["wall_time_s"] = wall_time_s;
    j["warnings"] = warnings;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& e : outputs) outs.push_back({{"file", e.file}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    j["outputs"] = outs;
    return j;
}

std::filesystem::path write_manifest(const std::filesystem::path& dir, RunManifest manifest,
                                     const std::vector<std::string>& outputs) {
    manifest.outputs.clear();
    for (const auto& f : outputs) {
        const auto p = dir / f;
        manifest.outputs.push_back({f, sha256_file(p), std::filesystem::file_size(p)});
    }
    const auto path = dir / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << manifest.to_json().dump(2) << '\n';
    return path;
}

}  // namespace qantenna::cli
