// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <drts/sched.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace drts {

class ConfigFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A parsed task-set document plus every file it referenced (for manifests).
struct LoadedTaskSet {
    TaskSet taskset;
    SchedulerConfig config;
    std::vector<std::filesystem::path> referenced_files;
};

// Task-set document (JSON):
//
//   {"config": {"t_unit": N, "horizon": N, "background_enabled": bool},
//    "tasks": [{"id": "...", "kind": "realtime" | "background",
//               "period": N, "offset": N, "job_instructions": N,
//               "wcei": WCEI, "execution_model": MODEL}, ...]}
//
// WCEI is one of
//   {"a": "<rational>", "b": N}                  single function
//   {"phases": [{"start_instruction", "end_instruction", "a", "b"}, ...]}
//   {"file": "<path>"}                           WCEI document
//   {"fit": "single"}                            fitted to the model envelope
//   {"fit": "phases", "threshold": "<rational>"}
// and MODEL one of
//   {"processor": {...ProcessorModel fields...}}
//   {"segments": [{"instructions": N, "processor": {...}}, ...]}
//   {"trace": "<path>"}
// Relative paths resolve against `base_dir`.
LoadedTaskSet parse_taskset(std::string_view text, const std::filesystem::path& base_dir);
LoadedTaskSet load_taskset_file(const std::filesystem::path& path);

// Model document for trace generation:
//   {"label": "...", "instructions": N, "processor": {...}}  or
//   {"label": "...", "segments": [...]}, optional "envelope": true.
ExecutionTrace generate_from_document(std::string_view text);

} // namespace drts
