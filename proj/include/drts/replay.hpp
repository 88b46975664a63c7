// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <drts/sched.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace drts {

// Run-to-run hardware variation applied to every task driven by a
// ProcessorModel (or segment list). Per seed, each model gets a derived
// jitter seed, its jitter amplitude is multiplied by `jitter_scale`, and a
// speedup u drawn from [speedup_lo, speedup_hi] scales its cold-start deficit
// (hot_ipc - cold_ipc) and its dip depth.
struct PerturbationSpec {
    std::vector<std::uint64_t> seeds;
    double jitter_scale = 1.0;
    double speedup_lo = 1.0;
    double speedup_hi = 1.0;

    void validate() const;
};

// Thrown when a seed makes some task's execution model violate its WCEI.
class PerturbationError : public std::runtime_error {
public:
    PerturbationError(std::uint64_t seed, std::string task, SafetyViolation window, const std::string& what)
        : std::runtime_error(what), seed_(seed), task_(std::move(task)), window_(window) {}
    std::uint64_t seed() const { return seed_; }
    const std::string& task() const { return task_; }
    const SafetyViolation& window() const { return window_; }

private:
    std::uint64_t seed_;
    std::string task_;
    SafetyViolation window_;
};

TaskSet perturb_taskset(const TaskSet& taskset, std::uint64_t seed, const PerturbationSpec& perturbation);

// Re-validates every realtime task's WCEI against its perturbed model.
void check_perturbation_safety(const TaskSet& perturbed, std::uint64_t seed);

// Conventional fixed-priority scheduler preempting at physical timer points.
// Event times are physical; instruction marks come from the physical model.
Timeline simulate_timer_baseline(const TaskSet& taskset, const SchedulerConfig& config);

enum class SchedulerMode { deterministic, timer_baseline };

struct Divergence {
    std::size_t run = 0;
    std::size_t event = 0;
    std::optional<ScheduleEvent> expected;
    std::optional<ScheduleEvent> observed;
};

struct DeterminismReport {
    SchedulerMode mode = SchedulerMode::deterministic;
    std::size_t runs = 0;
    bool identical = true;
    std::optional<Divergence> first_divergence;
    std::vector<std::uint64_t> seeds;
    std::vector<std::size_t> event_counts;
    std::vector<Timeline> timelines; // one per seed, in seed order
};

// Events compared across runs: everything but background_run.
std::vector<ScheduleEvent> realtime_events(const Timeline& timeline);

std::optional<Divergence> compare_runs(const std::vector<ScheduleEvent>& expected,
                                       const std::vector<ScheduleEvent>& observed, std::size_t run);

DeterminismReport verify_determinism(const TaskSet& taskset, const SchedulerConfig& config,
                                     const PerturbationSpec& perturbation,
                                     SchedulerMode mode = SchedulerMode::deterministic);

// CSV `run,seed,events,matches_first` plus human-readable divergence text.
std::string determinism_csv(const DeterminismReport& report);
std::string divergence_text(const DeterminismReport& report);

enum class VarOp { read, write };

struct SharedVarAccess {
    Cycles virtual_time = 0;
    std::string task;
    VarOp operation = VarOp::read;
    std::string variable;
    std::int64_t value = 0;

    friend bool operator==(const SharedVarAccess&, const SharedVarAccess&) = default;
};

using SharedVarTrace = std::vector<SharedVarAccess>;

// One scripted access at a job-relative instruction offset (>= 1). A write
// stores `value`, or the task's last read value when `write_back` is set.
struct ScriptedAccess {
    Instructions instruction = 1;
    VarOp operation = VarOp::read;
    std::string variable;
    std::int64_t value = 0;
    bool write_back = false;
};

struct TaskScript {
    std::string task;
    std::vector<ScriptedAccess> accesses;
};

// Replays the scripts over a timeline's execution slices. Accesses happen in
// slice order; times are interpolated inside their slice.
SharedVarTrace replay_accesses(const Timeline& timeline, const std::vector<TaskScript>& scripts,
                               const std::vector<std::pair<std::string, std::int64_t>>& initial);

std::int64_t final_value(const SharedVarTrace& trace, const std::string& variable, std::int64_t initial);

std::string shared_var_csv(const std::vector<std::pair<std::uint64_t, SharedVarTrace>>& runs);

inline constexpr std::int64_t kStatusLost = 0;
inline constexpr std::int64_t kStatusNormal = 1;

struct RaceRun {
    std::uint64_t seed = 0;
    SharedVarTrace trace;
    std::int64_t final_status = 0;
};

struct RaceDemoResult {
    std::vector<RaceRun> deterministic;
    std::vector<RaceRun> baseline;
};

// The two-task `status` race: a monitor task reads `status`, works, and
// writes the value it read back; a higher-priority receiver sets it to
// NORMAL. If the receiver runs between the monitor's read and write the
// final value is the stale LOST.
struct RaceScenario {
    TaskSet taskset;
    SchedulerConfig config;
    std::vector<TaskScript> scripts;
    std::int64_t initial_status = kStatusLost;
};

RaceScenario race_scenario();

// Seeds 1..seed_count. With `perturb` off every seed runs the nominal models.
RaceDemoResult race_demo(std::size_t seed_count, bool perturb = true);
RaceDemoResult race_demo(const std::vector<std::uint64_t>& seeds, bool perturb = true);

} // namespace drts
