// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <drts/trace.hpp>
#include <drts/wcei.hpp>

#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace drts {

enum class TaskKind { realtime, background };

// How a task physically retires instructions. Every job replays the model
// from instruction 0 (a cold start).
using ExecutionModel = std::variant<std::monostate, ProcessorModel, std::vector<TraceSegment>, ExecutionTrace>;

struct TaskSpec {
    std::string id;
    TaskKind kind = TaskKind::realtime;
    Cycles period = 0; // also the relative deadline
    Cycles offset = 0; // first release
    Instructions job_instructions = 0;
    std::optional<PhaseSegmentation> wcei; // one phase for a single function
    ExecutionModel execution;
};

struct TaskSet {
    std::vector<TaskSpec> tasks;

    std::size_t size() const { return tasks.size(); }
};

struct SchedulerConfig {
    Cycles t_unit = kDefaultTUnit;
    Cycles horizon = 0;
    bool background_enabled = false;
};

// Realtime task indices, highest priority first: shorter period wins, ties by id.
std::vector<std::size_t> rm_priority_order(const TaskSet& taskset);

// The task's physical retirement profile, covering at least one job.
ExecutionTrace physical_trace(const TaskSpec& task);

struct ValidationIssue {
    std::string task; // empty for set-wide rules
    std::string rule;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string describe() const;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(ValidationReport report)
        : std::runtime_error(report.describe()), report_(std::move(report)) {}
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

// Raised when a configuration cannot be scheduled deterministically at all,
// e.g. a WCEI budget of zero instructions.
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ValidationReport validate_taskset(const TaskSet& taskset, const SchedulerConfig& config);

enum class EventKind {
    arrival,
    dispatch,
    budget_installed,
    budget_exhausted,
    preempt,
    complete,
    phase_change,
    deadline_miss,
    idle_begin,
    background_run,
};

std::string_view to_string(EventKind kind);

inline constexpr std::string_view kIdleTask = "idle";

struct ScheduleEvent {
    Cycles virtual_time = 0;
    std::string task;
    EventKind kind = EventKind::arrival;
    Instructions instruction_mark = 0;
    Cycles physical_time = 0;
    Cycles duration = 0; // background_run only

    friend bool operator==(const ScheduleEvent&, const ScheduleEvent&) = default;
};

// A stretch of CPU time given to one job. For the deterministic scheduler
// [virtual_begin, virtual_end] is the installed horizon and the physical
// interval is when the budget actually retired.
struct ExecutionSlice {
    std::string task;
    std::size_t job = 0;
    Cycles virtual_begin = 0;
    Cycles virtual_end = 0;
    Cycles physical_begin = 0;
    Cycles physical_end = 0;
    Instructions mark_begin = 0;
    Instructions mark_end = 0;
};

struct TaskSummary {
    std::string id;
    std::size_t jobs_released = 0;
    std::size_t jobs_completed = 0;
    std::size_t deadline_misses = 0;
    Cycles max_response = 0;
    Cycles min_response = std::numeric_limits<Cycles>::max();
};

struct Timeline {
    std::vector<ScheduleEvent> events;
    std::vector<ExecutionSlice> slices;
    std::vector<TaskSummary> tasks;
    Cycles horizon = 0;
    Cycles busy_cycles = 0;       // physical, within [0, horizon]
    Cycles idle_cycles = 0;       // physical, within [0, horizon]
    Cycles background_cycles = 0; // reclaimed by background tasks
    std::size_t budget_overruns = 0; // budgets retiring after their virtual horizon

    std::size_t deadline_misses() const;
};

// Timeline CSV: `virtual_time,task,kind,instruction_mark`.
std::string timeline_csv(const Timeline& timeline);

struct JobState {
    bool active = false;
    std::size_t index = 0;
    Cycles arrival = 0;
    Cycles deadline = 0;
    Instructions progress = 0;
    bool missed = false;
    std::optional<Cycles> pending_release; // own release while the job was mid-slice
};

struct TaskRuntime {
    Cycles next_arrival = 0;
    JobState job;
};

struct SchedulerState {
    Cycles virtual_now = 0;
    std::optional<std::size_t> running; // task whose slice is in progress
    std::optional<std::size_t> dispatched; // task holding the CPU across slices
    Instructions installed_budget = 0;
    std::optional<Cycles> idle_since; // physical start of the current idle stretch
    std::vector<TaskRuntime> tasks;
};

// Instruction-counter driven rate-monotonic scheduler.
//
// Scheduling arithmetic runs entirely in virtual time: a task is given a
// horizon t, a budget of evaluate(WCEI, t) instructions is installed, and the
// next decision happens at virtual time now + t regardless of when the budget
// physically retires. Physical timings only feed safety bookkeeping and
// background reclaim.
class DeterministicScheduler {
public:
    DeterministicScheduler(TaskSet taskset, SchedulerConfig config);

    const SchedulerState& state() const { return state_; }
    const TaskSet& taskset() const { return taskset_; }

    // Length of the next slice for `task` (the highest-priority ready task):
    // min(next strictly-higher-priority arrival, max(t_unit, invert(remaining
    // instructions of the current phase)))
    Cycles next_horizon(std::size_t task) const;

    // Installs min(evaluate(WCEI, t), instructions left in the phase) and
    // records budget_installed.
    Instructions install_budget(std::size_t task, Cycles t);

    // Produces the background_run for the physical idle stretch ending at
    // `until`, if background work is enabled and available.
    std::optional<ScheduleEvent> reclaim_idle(Cycles until);

    bool done() const { return finished_ && pending_.empty(); }

    // Next event in generation order; nullopt once the run is over.
    std::optional<ScheduleEvent> step();

    // Runs to the horizon; events sorted by virtual time.
    Timeline finish();

private:
    void advance();
    void release_arrivals(Cycles now);
    void release(std::size_t task, Cycles at, Instructions running_mark);
    std::optional<std::size_t> highest_ready() const;
    Cycles higher_priority_gap(std::size_t task) const;
    void run_slice(std::size_t task, Cycles t, Instructions budget);
    void close_idle(Cycles until);
    void finish_run();
    void emit(ScheduleEvent event);
    const Phase& current_phase(std::size_t task) const;

    TaskSet taskset_;
    SchedulerConfig config_;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> rank_; // priority rank by task index
    std::vector<ExecutionTrace> physical_;
    std::optional<std::size_t> background_task_;
    SchedulerState state_;
    Timeline timeline_;
    std::deque<ScheduleEvent> pending_;
    bool finished_ = false;
};

Timeline simulate(const TaskSet& taskset, const SchedulerConfig& config);

} // namespace drts
