// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/replay.hpp>

namespace drts {

namespace {

constexpr Cycles kRaceTUnit = 1000;
constexpr Instructions kMonitorJob = 8000;
constexpr Instructions kReceiverJob = 1000;

TaskSpec fitted(TaskSpec task, const ProcessorModel& model, Cycles t_unit) {
    const ExecutionTrace envelope = generate_envelope_trace(model, task.job_instructions, task.id);
    task.wcei = single_phase(task.id, fit_wcei(envelope, t_unit), task.job_instructions);
    task.execution = model;
    return task;
}

} // namespace

RaceScenario race_scenario() {
    ProcessorModel monitor_model;
    monitor_model.hot_ipc = 1.0;
    monitor_model.cold_ipc = 0.5;
    monitor_model.warmup_instructions = 20000;
    monitor_model.jitter_amplitude = 0.1;
    monitor_model.seed = 7;
    monitor_model.sample_stride = 8;

    ProcessorModel receiver_model;
    receiver_model.sample_stride = 8;

    TaskSpec monitor;
    monitor.id = "monitor";
    monitor.period = 40 * kRaceTUnit;
    monitor.job_instructions = kMonitorJob;

    TaskSpec receiver;
    receiver.id = "receiver";
    receiver.period = 20 * kRaceTUnit;
    receiver.offset = 10 * kRaceTUnit;
    receiver.job_instructions = kReceiverJob;

    RaceScenario scenario;
    scenario.taskset.tasks.push_back(fitted(monitor, monitor_model, kRaceTUnit));
    scenario.taskset.tasks.push_back(fitted(receiver, receiver_model, kRaceTUnit));
    scenario.config.t_unit = kRaceTUnit;
    scenario.config.horizon = 25 * kRaceTUnit;

    scenario.scripts.push_back({"monitor",
                                {{4000, VarOp::read, "status", 0, false},
                                 {6500, VarOp::write, "status", 0, true}}});
    scenario.scripts.push_back({"receiver", {{500, VarOp::write, "status", kStatusNormal, false}}});
    scenario.initial_status = kStatusLost;
    return scenario;
}

RaceDemoResult race_demo(std::size_t seed_count, bool perturb) {
    std::vector<std::uint64_t> seeds;
    for (std::size_t s = 1; s <= seed_count; ++s) {
        seeds.push_back(s);
    }
    return race_demo(seeds, perturb);
}

RaceDemoResult race_demo(const std::vector<std::uint64_t>& seeds, bool perturb) {
    const RaceScenario scenario = race_scenario();
    PerturbationSpec perturbation;
    perturbation.seeds = seeds;
    if (perturb) {
        perturbation.jitter_scale = 1.0;
        perturbation.speedup_lo = 0.3;
        perturbation.speedup_hi = 1.0;
    } else {
        perturbation.jitter_scale = 0.0;
    }

    RaceDemoResult result;
    for (const SchedulerMode mode : {SchedulerMode::deterministic, SchedulerMode::timer_baseline}) {
        const DeterminismReport report = verify_determinism(scenario.taskset, scenario.config, perturbation, mode);
        auto& runs = mode == SchedulerMode::deterministic ? result.deterministic : result.baseline;
        for (std::size_t r = 0; r < report.runs; ++r) {
            RaceRun run;
            run.seed = report.seeds[r];
            run.trace = replay_accesses(report.timelines[r], scenario.scripts, {{"status", scenario.initial_status}});
            run.final_status = final_value(run.trace, "status", scenario.initial_status);
            runs.push_back(std::move(run));
        }
    }
    return result;
}

} // namespace drts
