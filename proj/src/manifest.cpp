// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/cli.hpp>

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace drts {

namespace {

using json = nlohmann::ordered_json;

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw std::runtime_error("sha256 initialisation failed");
        }
    }
    void update(const void* data, std::size_t size) {
        if (EVP_DigestUpdate(ctx_.get(), data, size) != 1) {
            throw std::runtime_error("sha256 update failed");
        }
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
        unsigned int size = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), digest.data(), &size) != 1) {
            throw std::runtime_error("sha256 finalisation failed");
        }
        static constexpr char kHex[] = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < size; ++i) {
            out += kHex[digest[i] >> 4];
            out += kHex[digest[i] & 0xF];
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

json digests_to_json(const std::vector<FileDigest>& files) {
    json out = json::array();
    for (const auto& f : files) {
        out.push_back({{"path", f.path}, {"sha256", f.sha256}});
    }
    return out;
}

std::vector<FileDigest> digests_from_json(const json& node) {
    std::vector<FileDigest> out;
    for (const auto& f : node) {
        out.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
    }
    return out;
}

std::uint64_t parse_seed(std::string_view text) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument("invalid seed '" + std::string(text) + "'");
    }
    return value;
}

} // namespace

std::string sha256_hex(std::string_view data) {
    Sha256 h;
    h.update(data.data(), data.size());
    return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    Sha256 h;
    std::array<char, 1 << 16> buffer{};
    while (in) {
        in.read(buffer.data(), buffer.size());
        h.update(buffer.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

std::string manifest_document(const RunManifest& m) {
    json doc;
    doc["command"] = m.command;
    doc["arguments"] = m.arguments;
    doc["working_directory"] = m.working_directory;
    doc["output_directory"] = m.output_directory;
    doc["seeds"] = m.seeds;
    doc["tool_version"] = m.tool_version;
    doc["config_digest"] = m.config_digest;
    doc["inputs"] = digests_to_json(m.inputs);
    doc["outputs"] = digests_to_json(m.outputs);
    return doc.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view text) {
    try {
        const json doc = json::parse(text);
        RunManifest m;
        m.command = doc.at("command").get<std::string>();
        m.arguments = doc.at("arguments").get<std::vector<std::string>>();
        m.working_directory = doc.at("working_directory").get<std::string>();
        m.output_directory = doc.at("output_directory").get<std::string>();
        m.seeds = doc.value("seeds", std::vector<std::uint64_t>{});
        m.tool_version = doc.at("tool_version").get<std::string>();
        m.config_digest = doc.value("config_digest", std::string{});
        m.inputs = digests_from_json(doc.at("inputs"));
        m.outputs = digests_from_json(doc.at("outputs"));
        return m;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed manifest: ") + e.what());
    }
}

RunManifest load_manifest_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open manifest '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_manifest(buffer.str());
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
    std::vector<std::uint64_t> seeds;
    while (!text.empty()) {
        const auto comma = text.find(',');
        std::string_view item = text.substr(0, comma);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        if (const auto dash = item.find('-'); dash != std::string_view::npos) {
            const std::uint64_t lo = parse_seed(item.substr(0, dash));
            const std::uint64_t hi = parse_seed(item.substr(dash + 1));
            if (lo > hi || hi - lo >= 1'000'000) {
                throw std::invalid_argument("invalid seed range '" + std::string(item) + "'");
            }
            for (std::uint64_t s = lo; s <= hi; ++s) {
                seeds.push_back(s);
            }
        } else {
            seeds.push_back(parse_seed(item));
        }
    }
    if (seeds.empty()) {
        throw std::invalid_argument("empty seed list");
    }
    return seeds;
}

} // namespace drts
