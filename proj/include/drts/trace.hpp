// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace drts {

using Cycles = std::uint64_t;
using Instructions = std::uint64_t;

struct TraceSample {
    Cycles cycle = 0;
    Instructions retired = 0;

    friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed trace file; `line()` is 1-based and counts the header.
class TraceFormatError : public TraceError {
public:
    TraceFormatError(std::size_t line, const std::string& what)
        : TraceError(what + " at line " + std::to_string(line)), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Cycle -> cumulative retired instruction profile. Immutable once built.
//
// Samples have strictly increasing cycles and non-decreasing retired counts,
// and the first sample retires nothing. Between samples the retired count is
// a step function (value of the last sample at or before the query cycle),
// which under-counts progress and is therefore conservative for WCEI fitting.
class ExecutionTrace {
public:
    ExecutionTrace() = default;
    ExecutionTrace(std::vector<TraceSample> samples, std::string label);

    std::span<const TraceSample> samples() const { return samples_; }
    const std::string& label() const { return label_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

    Cycles start_cycle() const { return samples_.front().cycle; }
    Cycles end_cycle() const { return samples_.back().cycle; }
    Cycles duration() const { return end_cycle() - start_cycle(); }
    Instructions total_retired() const { return samples_.back().retired; }

    // Index of the last sample with cycle <= `cycle`; `cycle` must be >= start_cycle().
    std::size_t index_at_or_before(Cycles cycle) const;
    // Index of the first sample with retired >= `count`; `count` must be <= total_retired().
    std::size_t index_reaching(Instructions count) const;

    Instructions retired_at(Cycles cycle) const { return samples_[index_at_or_before(cycle)].retired; }

    friend bool operator==(const ExecutionTrace& lhs, const ExecutionTrace& rhs) {
        return lhs.samples_ == rhs.samples_;
    }

private:
    std::vector<TraceSample> samples_;
    std::string label_;
};

// CSV `cycle,retired`. The header line is optional on input; the cycle and
// retired counters are rebased so the first sample is (0, 0).
ExecutionTrace load_trace(std::istream& source, std::string label);
ExecutionTrace load_trace_file(const std::string& path);
void store_trace(std::ostream& sink, const ExecutionTrace& trace);
void store_trace_file(const std::string& path, const ExecutionTrace& trace);

// Instructions retired in [start, start + duration].
Instructions instructions_in_window(const ExecutionTrace& trace, Cycles start, Cycles duration);

// Smallest sampled cycle at which at least `count` instructions have retired.
Cycles retirement_cycle(const ExecutionTrace& trace, Instructions count);

// Samples covering instructions [begin, end], rebased to (0, 0). The first
// sample is the one reaching `begin`, the last the one reaching `end`.
ExecutionTrace slice_instructions(const ExecutionTrace& trace, Instructions begin, Instructions end);

// Piecewise-IPC stand-in for a cycle-accurate profile.
//
// Instructions are retired in blocks of `sample_stride` (blocks are also split
// at warm-up and dip boundaries). A block's IPC is
//   base * (1 - dip) * (1 - jitter_amplitude * u),  u in [0, 1) seeded per block,
// where base is cold_ipc before `warmup_instructions` and hot_ipc after, and
// dip is `locality_dip_depth` inside the last `locality_dip_length`
// instructions of every `locality_dip_period`. A block takes ceil(len / ipc)
// cycles, so block timings are monotone in IPC.
struct ProcessorModel {
    double hot_ipc = 1.0;
    double cold_ipc = 1.0;
    Instructions warmup_instructions = 0;
    Instructions locality_dip_period = 0;
    Instructions locality_dip_length = 0;
    double locality_dip_depth = 0.0;
    double jitter_amplitude = 0.0;
    std::uint64_t seed = 0;
    Instructions sample_stride = 64;

    // Throws std::invalid_argument on degenerate parameters.
    void validate() const;

    friend bool operator==(const ProcessorModel&, const ProcessorModel&) = default;
};

ExecutionTrace generate_trace(const ProcessorModel& model, Instructions total_instructions,
                              std::string label = "synthetic");

// Same block layout as generate_trace but every block takes the full jitter
// penalty. Any realisation of the model (any seed) is block-wise at least as
// fast, so a WCEI function safe for the envelope is safe for every seed.
ExecutionTrace generate_envelope_trace(const ProcessorModel& model, Instructions total_instructions,
                                       std::string label = "envelope");

struct TraceSegment {
    ProcessorModel model;
    Instructions instructions = 0;
};

// Concatenation of independently modelled segments (multi-phase programs).
ExecutionTrace generate_phased_trace(std::span<const TraceSegment> segments, std::string label = "phased");
ExecutionTrace generate_phased_envelope_trace(std::span<const TraceSegment> segments,
                                              std::string label = "phased-envelope");

} // namespace drts
