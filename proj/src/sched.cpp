// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/sched.hpp>

#include <algorithm>
#include <set>
#include <sstream>

namespace drts {

namespace {

constexpr Cycles kNever = std::numeric_limits<Cycles>::max();

Cycles clip(Cycles value, Cycles horizon) { return std::min(value, horizon); }

} // namespace

std::string_view to_string(EventKind kind) {
    switch (kind) {
    case EventKind::arrival: return "arrival";
    case EventKind::dispatch: return "dispatch";
    case EventKind::budget_installed: return "budget_installed";
    case EventKind::budget_exhausted: return "budget_exhausted";
    case EventKind::preempt: return "preempt";
    case EventKind::complete: return "complete";
    case EventKind::phase_change: return "phase_change";
    case EventKind::deadline_miss: return "deadline_miss";
    case EventKind::idle_begin: return "idle_begin";
    case EventKind::background_run: return "background_run";
    }
    return "unknown";
}

std::vector<std::size_t> rm_priority_order(const TaskSet& taskset) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < taskset.tasks.size(); ++i) {
        if (taskset.tasks[i].kind == TaskKind::realtime) {
            order.push_back(i);
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        const auto& a = taskset.tasks[l];
        const auto& b = taskset.tasks[r];
        return a.period != b.period ? a.period < b.period : a.id < b.id;
    });
    return order;
}

ExecutionTrace physical_trace(const TaskSpec& task) {
    struct Visitor {
        const TaskSpec& task;
        ExecutionTrace operator()(std::monostate) const {
            throw ConfigurationError("task '" + task.id + "' has no execution model");
        }
        ExecutionTrace operator()(const ProcessorModel& model) const {
            return generate_trace(model, task.job_instructions, task.id);
        }
        ExecutionTrace operator()(const std::vector<TraceSegment>& segments) const {
            return generate_phased_trace(segments, task.id);
        }
        ExecutionTrace operator()(const ExecutionTrace& trace) const { return trace; }
    };
    return std::visit(Visitor{task}, task.execution);
}

std::string ValidationReport::describe() const {
    std::ostringstream out;
    for (const auto& issue : issues) {
        out << (issue.task.empty() ? std::string("<config>") : issue.task) << ": " << issue.rule << ": "
            << issue.message << '\n';
    }
    return out.str();
}

ValidationReport validate_taskset(const TaskSet& taskset, const SchedulerConfig& config) {
    ValidationReport report;
    auto add = [&](const std::string& task, std::string rule, std::string message) {
        report.issues.push_back({task, std::move(rule), std::move(message)});
    };
    if (config.t_unit == 0) {
        add("", "t_unit", "t_unit must be positive");
        return report;
    }
    if (config.horizon == 0 || config.horizon % config.t_unit != 0) {
        add("", "horizon", "horizon must be a positive multiple of t_unit");
    }
    std::set<std::string> ids;
    for (const auto& task : taskset.tasks) {
        if (task.id.empty() || task.id == kIdleTask) {
            add(task.id, "id", "task id must be non-empty and not '" + std::string(kIdleTask) + "'");
        }
        if (!ids.insert(task.id).second) {
            add(task.id, "id", "duplicate task id");
        }
        if (task.kind == TaskKind::background) {
            if (task.wcei) {
                add(task.id, "background", "background tasks have no WCEI function");
            }
            continue;
        }
        if (task.period == 0 || task.period % config.t_unit != 0) {
            add(task.id, "period", "period not a multiple of t_unit");
        }
        if (task.offset % config.t_unit != 0) {
            add(task.id, "offset", "offset not a multiple of t_unit");
        }
        if (task.job_instructions == 0) {
            add(task.id, "job_instructions", "realtime jobs must retire at least one instruction");
            continue;
        }
        if (!task.wcei) {
            add(task.id, "wcei", "realtime task without a WCEI function");
            continue;
        }
        const PhaseSegmentation& seg = *task.wcei;
        try {
            seg.validate();
        } catch (const WceiError& e) {
            add(task.id, "wcei", e.what());
            continue;
        }
        if (seg.total_instructions() < task.job_instructions) {
            add(task.id, "phases", "WCEI phases cover " + std::to_string(seg.total_instructions()) +
                                       " instructions, job needs " + std::to_string(task.job_instructions));
            continue;
        }
        ExecutionTrace trace;
        try {
            trace = physical_trace(task);
        } catch (const std::exception& e) {
            add(task.id, "execution_model", e.what());
            continue;
        }
        if (trace.total_retired() < task.job_instructions) {
            add(task.id, "execution_model", "execution model retires only " + std::to_string(trace.total_retired()) +
                                                " of " + std::to_string(task.job_instructions) + " instructions");
            continue;
        }
        for (const auto& phase : seg.phases) {
            if (phase.start_instruction >= task.job_instructions) {
                break;
            }
            const WceiFunction& f = phase.function;
            const std::string where = "phase [" + std::to_string(phase.start_instruction) + ", " +
                                      std::to_string(phase.end_instruction) + ")";
            if (f.t_unit > config.t_unit) {
                add(task.id, "wcei", where + " t_unit exceeds the scheduler t_unit");
                continue;
            }
            if (evaluate(f, config.t_unit) == 0) {
                add(task.id, "zero_budget", where + " guarantees no instruction within t_unit (b too large)");
            }
            const Instructions end = std::min(phase.end_instruction, task.job_instructions);
            if (end < task.job_instructions && invert(f, end - phase.start_instruction) < config.t_unit) {
                add(task.id, "phase_length", where + " is shorter than t_unit");
            }
            const SafetyReport safety = validate_safety(f, slice_instructions(trace, phase.start_instruction, end), 1);
            if (!safety.safe) {
                const auto& v = safety.violations.front();
                add(task.id, "safety",
                    where + " WCEI unsafe for the execution model: window start " + std::to_string(v.start) +
                        " duration " + std::to_string(v.duration) + " guarantees " + std::to_string(v.guaranteed) +
                        " but retires " + std::to_string(v.observed));
            }
        }
    }
    return report;
}

std::size_t Timeline::deadline_misses() const {
    std::size_t total = 0;
    for (const auto& t : tasks) {
        total += t.deadline_misses;
    }
    return total;
}

std::string timeline_csv(const Timeline& timeline) {
    std::string out = "virtual_time,task,kind,instruction_mark\n";
    for (const auto& e : timeline.events) {
        out += std::to_string(e.virtual_time);
        out += ',';
        out += e.task;
        out += ',';
        out += to_string(e.kind);
        out += ',';
        out += std::to_string(e.instruction_mark);
        out += '\n';
    }
    return out;
}

DeterministicScheduler::DeterministicScheduler(TaskSet taskset, SchedulerConfig config)
    : taskset_(std::move(taskset)), config_(config) {
    order_ = rm_priority_order(taskset_);
    rank_.assign(taskset_.size(), kNever);
    for (std::size_t r = 0; r < order_.size(); ++r) {
        rank_[order_[r]] = r;
    }
    physical_.resize(taskset_.size());
    state_.tasks.resize(taskset_.size());
    timeline_.horizon = config_.horizon;
    for (std::size_t i = 0; i < taskset_.size(); ++i) {
        const auto& task = taskset_.tasks[i];
        timeline_.tasks.push_back({task.id});
        if (task.kind == TaskKind::realtime) {
            physical_[i] = physical_trace(task);
            state_.tasks[i].next_arrival = task.offset;
        } else {
            state_.tasks[i].next_arrival = kNever;
            if (!background_task_ || task.id < taskset_.tasks[*background_task_].id) {
                background_task_ = i;
            }
        }
    }
    state_.idle_since = 0;
}

const Phase& DeterministicScheduler::current_phase(std::size_t task) const {
    const auto& seg = *taskset_.tasks[task].wcei;
    return seg.phases[seg.phase_index(state_.tasks[task].job.progress)];
}

void DeterministicScheduler::emit(ScheduleEvent event) {
    timeline_.events.push_back(event);
    pending_.push_back(std::move(event));
}

std::optional<std::size_t> DeterministicScheduler::highest_ready() const {
    for (std::size_t i : order_) {
        if (state_.tasks[i].job.active) {
            return i;
        }
    }
    return std::nullopt;
}

Cycles DeterministicScheduler::higher_priority_gap(std::size_t task) const {
    Cycles gap = kNever;
    for (std::size_t r = 0; r < rank_[task]; ++r) {
        const Cycles next = state_.tasks[order_[r]].next_arrival;
        gap = std::min(gap, next - std::min(next, state_.virtual_now));
    }
    return gap;
}

Cycles DeterministicScheduler::next_horizon(std::size_t task) const {
    const Cycles gap = higher_priority_gap(task);
    if (gap < config_.t_unit) {
        throw ConfigurationError("task '" + taskset_.tasks[task].id + "': higher-priority arrival in " +
                                 std::to_string(gap) + " cycles, less than t_unit");
    }
    const auto& job = state_.tasks[task].job;
    const Phase& phase = current_phase(task);
    const Instructions phase_end = std::min(phase.end_instruction, taskset_.tasks[task].job_instructions);
    const Cycles needed = std::max(config_.t_unit, invert(phase.function, phase_end - job.progress));
    return std::min(gap, needed);
}

Instructions DeterministicScheduler::install_budget(std::size_t task, Cycles t) {
    if (t < config_.t_unit) {
        throw ConfigurationError("horizon shorter than t_unit");
    }
    const auto& job = state_.tasks[task].job;
    const Phase& phase = current_phase(task);
    const Instructions phase_end = std::min(phase.end_instruction, taskset_.tasks[task].job_instructions);
    const Instructions budget = std::min(evaluate(phase.function, t), phase_end - job.progress);
    if (budget == 0) {
        throw ConfigurationError("task '" + taskset_.tasks[task].id + "': WCEI yields a zero budget for t = " +
                                 std::to_string(t));
    }
    state_.installed_budget = budget;
    emit({state_.virtual_now, taskset_.tasks[task].id, EventKind::budget_installed, job.progress,
          state_.virtual_now, 0});
    return budget;
}

void DeterministicScheduler::release(std::size_t task, Cycles at, Instructions running_mark) {
    auto& rt = state_.tasks[task];
    auto& summary = timeline_.tasks[task];
    const bool running = state_.running == task;
    if (rt.job.active && !rt.job.missed) {
        rt.job.missed = true;
        ++summary.deadline_misses;
        emit({at, taskset_.tasks[task].id, EventKind::deadline_miss, running ? running_mark : rt.job.progress, at, 0});
    }
    emit({at, taskset_.tasks[task].id, EventKind::arrival, 0, at, 0});
    ++summary.jobs_released;
    rt.next_arrival = at + taskset_.tasks[task].period;
    if (running) {
        rt.job.pending_release = at;
        return;
    }
    rt.job = JobState{true, summary.jobs_released - 1, at, at + taskset_.tasks[task].period, 0, false, std::nullopt};
    if (state_.dispatched == task) {
        state_.dispatched.reset();
    }
}

void DeterministicScheduler::release_arrivals(Cycles now) {
    for (;;) {
        std::optional<std::size_t> next;
        for (std::size_t i : order_) {
            const Cycles a = state_.tasks[i].next_arrival;
            if (a <= now && a < config_.horizon && (!next || a < state_.tasks[*next].next_arrival)) {
                next = i;
            }
        }
        if (!next) {
            return;
        }
        release(*next, state_.tasks[*next].next_arrival, 0);
    }
}

std::optional<ScheduleEvent> DeterministicScheduler::reclaim_idle(Cycles until) {
    if (!config_.background_enabled || !background_task_ || !state_.idle_since) {
        return std::nullopt;
    }
    const Cycles begin = clip(*state_.idle_since, config_.horizon);
    const Cycles end = clip(until, config_.horizon);
    if (end <= begin) {
        return std::nullopt;
    }
    timeline_.background_cycles += end - begin;
    ScheduleEvent event{begin, taskset_.tasks[*background_task_].id, EventKind::background_run,
                        timeline_.background_cycles, begin, end - begin};
    emit(event);
    return event;
}

void DeterministicScheduler::close_idle(Cycles until) {
    if (!state_.idle_since) {
        return;
    }
    const Cycles begin = clip(*state_.idle_since, config_.horizon);
    const Cycles end = clip(until, config_.horizon);
    if (end > begin) {
        timeline_.idle_cycles += end - begin;
    }
    reclaim_idle(until);
    state_.idle_since.reset();
}

void DeterministicScheduler::run_slice(std::size_t task, Cycles t, Instructions budget) {
    const TaskSpec& spec = taskset_.tasks[task];
    auto& rt = state_.tasks[task];
    const Cycles begin = state_.virtual_now;
    const Cycles end = begin + t;
    const Instructions mark = rt.job.progress;
    const ExecutionTrace& trace = physical_[task];
    const Cycles physical_end = begin + (retirement_cycle(trace, mark + budget) - retirement_cycle(trace, mark));
    state_.running = task;

    // Timer interrupts inside the slice: releases only, never preemption.
    for (;;) {
        std::optional<std::size_t> next;
        for (std::size_t i : order_) {
            const Cycles a = state_.tasks[i].next_arrival;
            if (a > begin && a < end && a < config_.horizon && (!next || a < state_.tasks[*next].next_arrival)) {
                next = i;
            }
        }
        if (!next) {
            break;
        }
        release(*next, state_.tasks[*next].next_arrival, mark);
    }

    rt.job.progress = mark + budget;
    emit({end, spec.id, EventKind::budget_exhausted, rt.job.progress, physical_end, 0});
    timeline_.slices.push_back({spec.id, rt.job.index, begin, end, begin, physical_end, mark, rt.job.progress});
    if (physical_end > end) {
        ++timeline_.budget_overruns;
    }
    timeline_.busy_cycles += clip(physical_end, config_.horizon) - clip(begin, config_.horizon);

    const Phase& phase = current_phase(task);
    auto& summary = timeline_.tasks[task];
    if (rt.job.progress == spec.job_instructions) {
        emit({end, spec.id, EventKind::complete, rt.job.progress, physical_end, 0});
        ++summary.jobs_completed;
        const Cycles response = end - rt.job.arrival;
        summary.max_response = std::max(summary.max_response, response);
        summary.min_response = std::min(summary.min_response, response);
        rt.job.active = false;
        state_.dispatched.reset();
    } else if (rt.job.progress == phase.start_instruction) {
        // current_phase() already moved on: the budget ended on a phase boundary.
        emit({end, spec.id, EventKind::phase_change, rt.job.progress, physical_end, 0});
    } else {
        emit({end, spec.id, EventKind::preempt, rt.job.progress, physical_end, 0});
        state_.dispatched.reset();
    }
    state_.running.reset();
    state_.installed_budget = 0;
    if (rt.job.pending_release) {
        const Cycles at = *rt.job.pending_release;
        rt.job = JobState{true, summary.jobs_released - 1, at, at + spec.period, 0, false, std::nullopt};
        state_.dispatched.reset();
    }
    state_.idle_since = physical_end;
    state_.virtual_now = end;
}

void DeterministicScheduler::advance() {
    if (finished_) {
        return;
    }
    const Cycles now = state_.virtual_now;
    if (now >= config_.horizon) {
        finish_run();
        return;
    }
    release_arrivals(now);
    const auto task = highest_ready();
    Cycles idle_until = kNever;
    if (!task) {
        for (std::size_t i : order_) {
            idle_until = std::min(idle_until, state_.tasks[i].next_arrival);
        }
    } else if (const Cycles gap = higher_priority_gap(*task); gap < config_.t_unit) {
        idle_until = now + gap;
    }
    if (idle_until != kNever || !task) {
        emit({now, std::string(kIdleTask), EventKind::idle_begin, 0, now, 0});
        state_.dispatched.reset();
        if (!state_.idle_since) {
            state_.idle_since = now;
        }
        state_.virtual_now = clip(idle_until, config_.horizon);
        return;
    }

    const Cycles t = next_horizon(*task);
    close_idle(now);
    if (state_.dispatched != task) {
        emit({now, taskset_.tasks[*task].id, EventKind::dispatch, state_.tasks[*task].job.progress, now, 0});
        state_.dispatched = task;
    }
    const Instructions budget = install_budget(*task, t);
    run_slice(*task, t, budget);
}

void DeterministicScheduler::finish_run() {
    const Cycles horizon = config_.horizon;
    for (std::size_t i : order_) {
        auto& job = state_.tasks[i].job;
        if (job.active && !job.missed && job.deadline <= horizon) {
            job.missed = true;
            ++timeline_.tasks[i].deadline_misses;
            emit({job.deadline, taskset_.tasks[i].id, EventKind::deadline_miss, job.progress, job.deadline, 0});
        }
    }
    close_idle(horizon);
    std::stable_sort(timeline_.events.begin(), timeline_.events.end(),
                     [](const ScheduleEvent& a, const ScheduleEvent& b) { return a.virtual_time < b.virtual_time; });
    finished_ = true;
}

std::optional<ScheduleEvent> DeterministicScheduler::step() {
    while (pending_.empty() && !finished_) {
        advance();
    }
    if (pending_.empty()) {
        return std::nullopt;
    }
    ScheduleEvent event = std::move(pending_.front());
    pending_.pop_front();
    return event;
}

Timeline DeterministicScheduler::finish() {
    while (!finished_) {
        advance();
    }
    pending_.clear();
    return timeline_;
}

Timeline simulate(const TaskSet& taskset, const SchedulerConfig& config) {
    const ValidationReport report = validate_taskset(taskset, config);
    if (!report.ok()) {
        throw ValidationError(report);
    }
    return DeterministicScheduler(taskset, config).finish();
}

} // namespace drts
