// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <drts/rational.hpp>
#include <drts/trace.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace drts {

class WceiError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr Cycles kDefaultTUnit = 1'000'000;

// Worst-Case Executable Instructions: at least floor(a*t - b) instructions
// retire in any duration t >= t_unit.
struct WceiFunction {
    Rational a;       // instructions per cycle
    Instructions b = 0; // cold-miss penalty, instructions
    Cycles t_unit = kDefaultTUnit;

    // a > 0, t_unit > 0 and b <= ceil(a * t_unit).
    void validate() const;

    friend bool operator==(const WceiFunction&, const WceiFunction&) = default;
};

// floor(a*t - b), clamped at 0. Throws WceiError for t < t_unit.
Instructions evaluate(const WceiFunction& f, Cycles t);

// ceil((i + b) / a): the time a budget of `i` instructions may take.
Cycles invert(const WceiFunction& f, Instructions i);

// Minimum over every sample-anchored window of length t_unit of the retired
// instructions, divided by t_unit.
Rational estimate_rate(const ExecutionTrace& trace, Cycles t_unit);

// Maximum counterpart of estimate_rate.
Rational best_rate(const ExecutionTrace& trace, Cycles t_unit);

// Smallest b such that a*t - b never exceeds the instructions observed in any
// window starting at a sample, for every integer duration t >= t_unit.
Instructions estimate_intercept(const ExecutionTrace& trace, const Rational& a, Cycles t_unit);

WceiFunction fit_wcei(const ExecutionTrace& trace, Cycles t_unit);

struct LossReport {
    Rational wcei_rate;
    Rational best_rate;
    double worst_loss_percent = 0.0;
};

LossReport worst_case_loss(const Rational& wcei_rate, const Rational& best_rate);

struct SafetyViolation {
    Cycles start = 0;
    Cycles duration = 0;
    Instructions guaranteed = 0;
    Instructions observed = 0;
};

struct SafetyReport {
    bool safe = true;
    std::vector<SafetyViolation> violations; // first `max_reported`, by start then duration
    bool truncated = false;
};

// Checks evaluate(f, t) <= instructions_in_window(trace, s, t) for every
// sample start s and every integer duration t in [t_unit, end - s].
SafetyReport validate_safety(const WceiFunction& f, const ExecutionTrace& trace, std::size_t max_reported = 100);

struct Phase {
    Instructions start_instruction = 0;
    Instructions end_instruction = 0;
    WceiFunction function;

    friend bool operator==(const Phase&, const Phase&) = default;
};

// Contiguous phases covering [0, end) of a program's instruction stream.
struct PhaseSegmentation {
    std::string label;
    Cycles t_unit = kDefaultTUnit;
    std::vector<Phase> phases;

    void validate() const;
    Instructions total_instructions() const { return phases.empty() ? 0 : phases.back().end_instruction; }
    // Phase containing `instruction`; the last phase for instruction >= end.
    std::size_t phase_index(Instructions instruction) const;

    friend bool operator==(const PhaseSegmentation&, const PhaseSegmentation&) = default;
};

PhaseSegmentation single_phase(std::string label, const WceiFunction& f, Instructions total_instructions);

// Greedy segmentation of the (cycle, retired) curve into phases of distinct
// throughput; each phase gets its own WCEI function. `split_threshold` is the
// relative rate change that opens a new phase.
PhaseSegmentation segment_phases(const ExecutionTrace& trace, Cycles t_unit, double split_threshold);

// Per-t_unit aligned window rates used by segment_phases (exposed for reporting).
std::vector<double> window_rates(const ExecutionTrace& trace, Cycles t_unit);

struct PhaseLoss {
    Instructions start_instruction = 0;
    Instructions end_instruction = 0;
    LossReport loss;
};

// Loss of each phase's function against the best window rate of its own region.
std::vector<PhaseLoss> phase_losses(const ExecutionTrace& trace, const PhaseSegmentation& segmentation);

// JSON document:
//   {"label": ..., "t_unit": N, "phases": [{"start_instruction": N,
//    "end_instruction": N, "a": "<decimal or p/q>", "b": N}, ...]}
std::string to_document(const PhaseSegmentation& segmentation);
PhaseSegmentation parse_document(std::string_view text);
PhaseSegmentation load_document_file(const std::string& path);

} // namespace drts
