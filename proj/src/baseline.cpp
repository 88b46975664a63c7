// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/replay.hpp>

#include <algorithm>

namespace drts {

namespace {

constexpr Cycles kNever = std::numeric_limits<Cycles>::max();

struct BaselineTask {
    Cycles next_arrival = kNever;
    JobState job;
    Cycles own_clock = 0; // position in the task's physical trace
};

} // namespace

Timeline simulate_timer_baseline(const TaskSet& taskset, const SchedulerConfig& config) {
    const ValidationReport report = validate_taskset(taskset, config);
    if (!report.ok()) {
        throw ValidationError(report);
    }
    const auto order = rm_priority_order(taskset);
    const Cycles horizon = config.horizon;
    std::vector<ExecutionTrace> traces(taskset.size());
    std::vector<BaselineTask> tasks(taskset.size());
    Timeline timeline;
    timeline.horizon = horizon;
    for (std::size_t i = 0; i < taskset.size(); ++i) {
        timeline.tasks.push_back({taskset.tasks[i].id});
        if (taskset.tasks[i].kind == TaskKind::realtime) {
            traces[i] = physical_trace(taskset.tasks[i]);
            tasks[i].next_arrival = taskset.tasks[i].offset;
        }
    }

    auto emit = [&](Cycles at, const std::string& task, EventKind kind, Instructions mark) {
        timeline.events.push_back({at, task, kind, mark, at, 0});
    };
    auto progress_of = [&](std::size_t i) { return traces[i].retired_at(tasks[i].own_clock); };

    Cycles now = 0;
    std::optional<std::size_t> dispatched;
    // Releases every job due at `now`.
    auto release_due = [&]() {
        for (std::size_t i : order) {
            auto& bt = tasks[i];
            if (bt.next_arrival > now || bt.next_arrival >= horizon) {
                continue;
            }
            const auto& spec = taskset.tasks[i];
            auto& summary = timeline.tasks[i];
            if (bt.job.active && !bt.job.missed) {
                ++summary.deadline_misses;
                emit(now, spec.id, EventKind::deadline_miss, progress_of(i));
            }
            emit(now, spec.id, EventKind::arrival, 0);
            ++summary.jobs_released;
            bt.job = JobState{true, summary.jobs_released - 1, now, now + spec.period, 0, false, std::nullopt};
            bt.own_clock = 0;
            bt.next_arrival = now + spec.period;
            if (dispatched == i) {
                dispatched.reset();
            }
        }
    };
    auto add_idle = [&](Cycles from, Cycles to) {
        from = std::min(from, horizon);
        to = std::min(to, horizon);
        if (to > from) {
            timeline.idle_cycles += to - from;
        }
    };

    release_due();
    while (now < horizon) {
        std::optional<std::size_t> task;
        for (std::size_t i : order) {
            if (tasks[i].job.active) {
                task = i;
                break;
            }
        }
        Cycles next_arrival = kNever;
        for (std::size_t i : order) {
            next_arrival = std::min(next_arrival, tasks[i].next_arrival);
        }
        const Cycles until = std::min(next_arrival, horizon);
        if (!task) {
            emit(now, std::string(kIdleTask), EventKind::idle_begin, 0);
            dispatched.reset();
            add_idle(now, until);
            now = until;
            release_due();
            continue;
        }
        const std::size_t i = *task;
        auto& bt = tasks[i];
        const auto& spec = taskset.tasks[i];
        if (dispatched != i) {
            emit(now, spec.id, EventKind::dispatch, progress_of(i));
            dispatched = i;
        }
        const Instructions mark_begin = progress_of(i);
        const Cycles completion = now + (retirement_cycle(traces[i], spec.job_instructions) - bt.own_clock);
        const Cycles slice_end = std::min(completion, next_arrival);
        bt.own_clock += slice_end - now;
        const Instructions mark_end = slice_end == completion ? spec.job_instructions : progress_of(i);
        if (!timeline.slices.empty() && timeline.slices.back().task == spec.id &&
            timeline.slices.back().job == bt.job.index && timeline.slices.back().physical_end == now) {
            auto& last = timeline.slices.back();
            last.virtual_end = last.physical_end = slice_end;
            last.mark_end = mark_end;
        } else {
            timeline.slices.push_back({spec.id, bt.job.index, now, slice_end, now, slice_end, mark_begin, mark_end});
        }
        timeline.busy_cycles += std::min(slice_end, horizon) - std::min(now, horizon);
        now = slice_end;
        if (slice_end == completion) {
            emit(now, spec.id, EventKind::complete, spec.job_instructions);
            auto& summary = timeline.tasks[i];
            ++summary.jobs_completed;
            const Cycles response = now - bt.job.arrival;
            summary.max_response = std::max(summary.max_response, response);
            summary.min_response = std::min(summary.min_response, response);
            bt.job.active = false;
            dispatched.reset();
            release_due();
        } else {
            // Preempt is recorded before the arrival that causes it, as in the deterministic scheduler.
            const auto rank = static_cast<std::size_t>(std::find(order.begin(), order.end(), i) - order.begin());
            for (std::size_t r = 0; r < rank; ++r) {
                const Cycles a = tasks[order[r]].next_arrival;
                if (a <= now && a < horizon) {
                    emit(now, spec.id, EventKind::preempt, mark_end);
                    dispatched.reset();
                    break;
                }
            }
            release_due();
        }
    }
    for (std::size_t i : order) {
        auto& job = tasks[i].job;
        if (job.active && !job.missed && job.deadline <= horizon) {
            ++timeline.tasks[i].deadline_misses;
            emit(job.deadline, taskset.tasks[i].id, EventKind::deadline_miss, progress_of(i));
        }
    }
    std::stable_sort(timeline.events.begin(), timeline.events.end(),
                     [](const ScheduleEvent& a, const ScheduleEvent& b) { return a.virtual_time < b.virtual_time; });
    return timeline;
}

} // namespace drts
