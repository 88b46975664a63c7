// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace drts {

inline constexpr std::string_view kToolVersion = "0.1.0";

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

struct FileDigest {
    std::string path;
    std::string sha256;

    friend bool operator==(const FileDigest&, const FileDigest&) = default;
};

// Everything needed to re-execute a command and check its outputs.
struct RunManifest {
    std::string command;
    std::vector<std::string> arguments; // argv after the program name
    std::string working_directory;
    std::string output_directory;
    std::vector<std::uint64_t> seeds;
    std::string tool_version{kToolVersion};
    std::string config_digest; // sha256 of the primary input, if any
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs; // relative to output_directory

    friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

std::string manifest_document(const RunManifest& manifest);
RunManifest parse_manifest(std::string_view text);
RunManifest load_manifest_file(const std::filesystem::path& path);

// "1,2,5" or ranges such as "1-20" (inclusive), mixed freely.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

// Runs one command line (without the program name). Returns the process exit
// status: 0 on success, 1 on validation failure or a non-identical
// verification, 2 on usage, file or configuration errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace drts
