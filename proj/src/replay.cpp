// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/replay.hpp>

#include <algorithm>
#include <random>
#include <sstream>

namespace drts {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

ProcessorModel perturb_model(ProcessorModel model, std::uint64_t seed, std::uint64_t salt,
                             const PerturbationSpec& spec) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(salt)));
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double speedup = spec.speedup_lo + (spec.speedup_hi - spec.speedup_lo) * u;
    model.seed = splitmix64(model.seed ^ splitmix64(seed + salt));
    model.jitter_amplitude *= spec.jitter_scale;
    model.cold_ipc = model.hot_ipc - speedup * (model.hot_ipc - model.cold_ipc);
    model.locality_dip_depth *= speedup;
    model.validate();
    return model;
}

std::string describe(const ScheduleEvent& e) {
    return std::to_string(e.virtual_time) + " " + e.task + " " + std::string(to_string(e.kind)) + " @" +
           std::to_string(e.instruction_mark);
}

} // namespace

void PerturbationSpec::validate() const {
    if (!(jitter_scale >= 0.0)) {
        throw std::invalid_argument("jitter_scale must be non-negative");
    }
    if (!(speedup_lo > 0.0) || speedup_hi > 1.0 || speedup_lo > speedup_hi) {
        throw std::invalid_argument("speedup range must satisfy 0 < lo <= hi <= 1");
    }
}

TaskSet perturb_taskset(const TaskSet& taskset, std::uint64_t seed, const PerturbationSpec& perturbation) {
    perturbation.validate();
    TaskSet out = taskset;
    for (std::size_t i = 0; i < out.tasks.size(); ++i) {
        auto& exec = out.tasks[i].execution;
        const std::uint64_t salt = (static_cast<std::uint64_t>(i) + 1) << 20;
        if (auto* model = std::get_if<ProcessorModel>(&exec)) {
            *model = perturb_model(*model, seed, salt, perturbation);
        } else if (auto* segments = std::get_if<std::vector<TraceSegment>>(&exec)) {
            for (std::size_t k = 0; k < segments->size(); ++k) {
                (*segments)[k].model = perturb_model((*segments)[k].model, seed, salt + k, perturbation);
            }
        }
    }
    return out;
}

void check_perturbation_safety(const TaskSet& perturbed, std::uint64_t seed) {
    for (const auto& task : perturbed.tasks) {
        if (task.kind != TaskKind::realtime || !task.wcei) {
            continue;
        }
        const ExecutionTrace trace = physical_trace(task);
        for (const auto& phase : task.wcei->phases) {
            if (phase.start_instruction >= task.job_instructions) {
                break;
            }
            const Instructions end = std::min(phase.end_instruction, task.job_instructions);
            const SafetyReport report =
                validate_safety(phase.function, slice_instructions(trace, phase.start_instruction, end), 1);
            if (!report.safe) {
                const auto& v = report.violations.front();
                throw PerturbationError(seed, task.id, v,
                                        "seed " + std::to_string(seed) + " breaks WCEI safety of task '" + task.id +
                                            "': window start " + std::to_string(v.start) + " duration " +
                                            std::to_string(v.duration) + " guarantees " +
                                            std::to_string(v.guaranteed) + " but retires " +
                                            std::to_string(v.observed));
            }
        }
    }
}

std::vector<ScheduleEvent> realtime_events(const Timeline& timeline) {
    std::vector<ScheduleEvent> out;
    out.reserve(timeline.events.size());
    for (const auto& e : timeline.events) {
        if (e.kind != EventKind::background_run) {
            out.push_back(e);
        }
    }
    return out;
}

std::optional<Divergence> compare_runs(const std::vector<ScheduleEvent>& expected,
                                       const std::vector<ScheduleEvent>& observed, std::size_t run) {
    const std::size_t n = std::min(expected.size(), observed.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = expected[i];
        const auto& b = observed[i];
        if (a.task != b.task || a.kind != b.kind || a.instruction_mark != b.instruction_mark ||
            a.virtual_time != b.virtual_time) {
            return Divergence{run, i, a, b};
        }
    }
    if (expected.size() != observed.size()) {
        Divergence d{run, n, std::nullopt, std::nullopt};
        if (n < expected.size()) {
            d.expected = expected[n];
        }
        if (n < observed.size()) {
            d.observed = observed[n];
        }
        return d;
    }
    return std::nullopt;
}

DeterminismReport verify_determinism(const TaskSet& taskset, const SchedulerConfig& config,
                                     const PerturbationSpec& perturbation, SchedulerMode mode) {
    perturbation.validate();
    if (perturbation.seeds.empty()) {
        throw std::invalid_argument("verify_determinism needs at least one seed");
    }
    DeterminismReport report;
    report.mode = mode;
    report.seeds = perturbation.seeds;
    std::vector<ScheduleEvent> reference;
    for (std::size_t run = 0; run < perturbation.seeds.size(); ++run) {
        const std::uint64_t seed = perturbation.seeds[run];
        const TaskSet perturbed = perturb_taskset(taskset, seed, perturbation);
        check_perturbation_safety(perturbed, seed);
        Timeline timeline = mode == SchedulerMode::deterministic ? simulate(perturbed, config)
                                                                 : simulate_timer_baseline(perturbed, config);
        auto events = realtime_events(timeline);
        report.event_counts.push_back(events.size());
        if (run == 0) {
            reference = std::move(events);
        } else if (!report.first_divergence) {
            report.first_divergence = compare_runs(reference, events, run);
        }
        report.timelines.push_back(std::move(timeline));
    }
    report.runs = perturbation.seeds.size();
    report.identical = !report.first_divergence.has_value();
    return report;
}

std::string determinism_csv(const DeterminismReport& report) {
    std::vector<ScheduleEvent> reference;
    std::string out = "run,seed,events,matches_first\n";
    for (std::size_t run = 0; run < report.runs; ++run) {
        auto events = realtime_events(report.timelines[run]);
        bool matches = true;
        if (run == 0) {
            reference = events;
        } else {
            matches = !compare_runs(reference, events, run).has_value();
        }
        out += std::to_string(run) + "," + std::to_string(report.seeds[run]) + "," +
               std::to_string(report.event_counts[run]) + "," + (matches ? "1" : "0") + "\n";
    }
    return out;
}

std::string divergence_text(const DeterminismReport& report) {
    std::ostringstream out;
    out << (report.mode == SchedulerMode::deterministic ? "deterministic" : "timer-baseline") << " scheduler, "
        << report.runs << " runs: " << (report.identical ? "identical" : "DIVERGED") << '\n';
    if (const auto& d = report.first_divergence) {
        out << "first divergence: run " << d->run << " (seed " << report.seeds[d->run] << "), event " << d->event
            << '\n';
        out << "- expected: " << (d->expected ? describe(*d->expected) : std::string("<end of timeline>")) << '\n';
        out << "+ observed: " << (d->observed ? describe(*d->observed) : std::string("<end of timeline>")) << '\n';
    }
    return out.str();
}

SharedVarTrace replay_accesses(const Timeline& timeline, const std::vector<TaskScript>& scripts,
                               const std::vector<std::pair<std::string, std::int64_t>>& initial) {
    std::vector<std::pair<std::string, std::int64_t>> memory = initial;
    auto cell = [&](const std::string& name) -> std::int64_t& {
        for (auto& [key, value] : memory) {
            if (key == name) {
                return value;
            }
        }
        memory.emplace_back(name, 0);
        return memory.back().second;
    };
    std::vector<std::pair<std::string, std::int64_t>> registers;
    auto reg = [&](const std::string& task) -> std::int64_t& {
        for (auto& [key, value] : registers) {
            if (key == task) {
                return value;
            }
        }
        registers.emplace_back(task, 0);
        return registers.back().second;
    };

    SharedVarTrace trace;
    for (const auto& slice : timeline.slices) {
        const auto script = std::find_if(scripts.begin(), scripts.end(),
                                         [&](const TaskScript& s) { return s.task == slice.task; });
        if (script == scripts.end() || slice.mark_end == slice.mark_begin) {
            continue;
        }
        std::vector<ScriptedAccess> due;
        for (const auto& access : script->accesses) {
            if (access.instruction > slice.mark_begin && access.instruction <= slice.mark_end) {
                due.push_back(access);
            }
        }
        std::stable_sort(due.begin(), due.end(),
                         [](const ScriptedAccess& a, const ScriptedAccess& b) { return a.instruction < b.instruction; });
        for (const auto& access : due) {
            const Cycles span = slice.virtual_end - slice.virtual_begin;
            const Cycles at = slice.virtual_begin + static_cast<Cycles>(static_cast<u128>(access.instruction -
                                                                                          slice.mark_begin) *
                                                                        span / (slice.mark_end - slice.mark_begin));
            std::int64_t& value = cell(access.variable);
            if (access.operation == VarOp::read) {
                reg(slice.task) = value;
                trace.push_back({at, slice.task, VarOp::read, access.variable, value});
            } else {
                value = access.write_back ? reg(slice.task) : access.value;
                trace.push_back({at, slice.task, VarOp::write, access.variable, value});
            }
        }
    }
    return trace;
}

std::int64_t final_value(const SharedVarTrace& trace, const std::string& variable, std::int64_t initial) {
    std::int64_t value = initial;
    for (const auto& access : trace) {
        if (access.variable == variable && access.operation == VarOp::write) {
            value = access.value;
        }
    }
    return value;
}

std::string shared_var_csv(const std::vector<std::pair<std::uint64_t, SharedVarTrace>>& runs) {
    std::string out = "run,seed,virtual_time,task,operation,variable,value\n";
    for (std::size_t run = 0; run < runs.size(); ++run) {
        for (const auto& a : runs[run].second) {
            out += std::to_string(run) + "," + std::to_string(runs[run].first) + "," + std::to_string(a.virtual_time) +
                   "," + a.task + "," + (a.operation == VarOp::read ? "read" : "write") + "," + a.variable + "," +
                   std::to_string(a.value) + "\n";
        }
    }
    return out;
}

} // namespace drts
