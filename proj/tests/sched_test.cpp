// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/sched.hpp>

#include <doctest.h>

#include <algorithm>
#include <map>
#include <tuple>

using namespace drts;

namespace {

constexpr Cycles kUnit = 1000;

ProcessorModel ideal_model() {
    ProcessorModel m;
    m.sample_stride = 1;
    return m;
}

TaskSpec task(std::string id, Cycles period, Instructions job, std::string_view a, Instructions b = 0,
              Cycles offset = 0) {
    TaskSpec t;
    t.id = std::move(id);
    t.period = period;
    t.offset = offset;
    t.job_instructions = job;
    t.wcei = single_phase(t.id, WceiFunction{Rational::parse(a), b, kUnit}, job);
    t.execution = ideal_model();
    return t;
}

SchedulerConfig config(Cycles horizon, bool background = false) {
    return SchedulerConfig{kUnit, horizon, background};
}

// tau1 runs alone first, idles on early completion, then preempts tau2
// twice; tau2 is always preempted exactly at its installed budget.
TaskSet two_task_set() {
    return TaskSet{{task("tau1", 4000, 1000, "0.5"), task("tau2", 12000, 3000, "0.5", 0, 4000)}};
}

using Row = std::tuple<Cycles, std::string, EventKind, Instructions>;

std::vector<Row> rows(const Timeline& t, bool with_budget_events) {
    std::vector<Row> out;
    for (const auto& e : t.events) {
        if (!with_budget_events && (e.kind == EventKind::budget_installed || e.kind == EventKind::budget_exhausted)) {
            continue;
        }
        out.emplace_back(e.virtual_time, e.task, e.kind, e.instruction_mark);
    }
    return out;
}

} // namespace

TEST_CASE("next_horizon examples") {
    {
        const TaskSet set{{task("solo", 20000, 10000, "1")}};
        DeterministicScheduler s(set, config(20000));
        CHECK(s.next_horizon(0) == 10000);
    }
    {
        const TaskSet set{{task("tau1", 10000, 1000, "1", 0, 3000), task("tau2", 20000, 10000, "1")}};
        DeterministicScheduler s(set, config(20000));
        CHECK(s.next_horizon(1) == 3 * kUnit);
    }
    {
        const TaskSet set{{task("t", 10000, 400, "0.5", 100)}};
        DeterministicScheduler s(set, config(10000));
        CHECK(s.next_horizon(0) == 1000);
    }
}

TEST_CASE("install_budget examples") {
    {
        const TaskSet set{{task("t", 20000, 10000, "1")}};
        DeterministicScheduler s(set, config(20000));
        CHECK(s.install_budget(0, 5000) == 5000);
        CHECK(s.state().installed_budget == 5000);
    }
    {
        TaskSpec t = task("t", 2000000, 2000000, "0.56");
        t.wcei->t_unit = 1000000;
        t.wcei->phases[0].function.t_unit = 1000000;
        DeterministicScheduler s(TaskSet{{t}}, SchedulerConfig{1000000, 2000000, false});
        CHECK(s.install_budget(0, 1000000) == 560000);
    }
    {
        DeterministicScheduler s(TaskSet{{task("t", 10000, 1000, "0.5", 500)}}, config(10000));
        CHECK_THROWS_AS(s.install_budget(0, 1000), ConfigurationError);
        CHECK_THROWS_AS(s.install_budget(0, 999), ConfigurationError);
    }
}

TEST_CASE("phase boundary clamps the budget and emits phase_change") {
    TaskSpec t = task("t", 10000, 2000, "1");
    const WceiFunction f{Rational(1, 1), 0, kUnit};
    t.wcei = PhaseSegmentation{"t", kUnit, {{0, 300, f}, {300, 2000, f}}};
    DeterministicScheduler s(TaskSet{{t}}, config(10000));
    CHECK(s.install_budget(0, 1000) == 300);

    // A preemption leaves 300 instructions of a 1300-instruction phase.
    t.job_instructions = 3000;
    t.wcei = PhaseSegmentation{"t", kUnit, {{0, 1300, f}, {1300, 3000, f}}};
    const TaskSet set{{task("hi", 2000, 500, "1", 0, 1000), t}};
    const Timeline tl = simulate(set, config(10000));
    const auto r = rows(tl, true);
    const auto it = std::find_if(r.begin(), r.end(), [](const Row& x) { return std::get<2>(x) == EventKind::phase_change; });
    REQUIRE(it != r.end());
    CHECK(std::get<3>(*it) == 1300);
    CHECK(std::get<0>(*it) == 3000);
    CHECK(tl.tasks[1].jobs_completed == 1);
}

TEST_CASE("two-task preemption timeline") {
    const Timeline tl = simulate(two_task_set(), config(16000));
    const std::vector<Row> expected{
        {0, "tau1", EventKind::arrival, 0},
        {0, "tau1", EventKind::dispatch, 0},
        {2000, "tau1", EventKind::complete, 1000},
        {2000, "idle", EventKind::idle_begin, 0},
        {4000, "tau1", EventKind::arrival, 0},
        {4000, "tau2", EventKind::arrival, 0},
        {4000, "tau1", EventKind::dispatch, 0},
        {6000, "tau1", EventKind::complete, 1000},
        {6000, "tau2", EventKind::dispatch, 0},
        {8000, "tau2", EventKind::preempt, 1000},
        {8000, "tau1", EventKind::arrival, 0},
        {8000, "tau1", EventKind::dispatch, 0},
        {10000, "tau1", EventKind::complete, 1000},
        {10000, "tau2", EventKind::dispatch, 1000},
        {12000, "tau2", EventKind::preempt, 2000},
        {12000, "tau1", EventKind::arrival, 0},
        {12000, "tau1", EventKind::dispatch, 0},
        {14000, "tau1", EventKind::complete, 1000},
        {14000, "tau2", EventKind::dispatch, 2000},
        {16000, "tau2", EventKind::complete, 3000},
    };
    CHECK(rows(tl, false) == expected);
    CHECK(tl.deadline_misses() == 0);
    CHECK(tl.budget_overruns == 0);
    // Physically the ideal tasks finish each budget in half the virtual slice.
    for (const auto& s : tl.slices) {
        CHECK(s.physical_end - s.physical_begin == (s.virtual_end - s.virtual_begin) / 2);
    }
}

TEST_CASE("preempted marks equal the sum of installed budgets") {
    const Timeline tl = simulate(two_task_set(), config(48000));
    std::map<std::string, Instructions> installed;
    Instructions pending = 0;
    for (const auto& e : tl.events) {
        if (e.kind == EventKind::budget_installed) {
            CHECK(e.instruction_mark == installed[e.task]);
        } else if (e.kind == EventKind::budget_exhausted) {
            pending = e.instruction_mark;
            installed[e.task] = pending;
        } else if (e.kind == EventKind::preempt) {
            CHECK(e.instruction_mark == installed[e.task]);
        } else if (e.kind == EventKind::complete) {
            installed[e.task] = 0;
        }
    }
}

TEST_CASE("ideal task completes at half its period with no idle loss") {
    const TaskSet set{{task("t", 10 * kUnit, 5 * kUnit, "1")}};
    const Timeline tl = simulate(set, config(100 * kUnit));
    std::size_t completions = 0;
    for (const auto& e : tl.events) {
        if (e.kind == EventKind::complete) {
            CHECK(e.virtual_time % (10 * kUnit) == 5 * kUnit);
            CHECK(e.physical_time == e.virtual_time);
            ++completions;
        }
    }
    CHECK(completions == 10);
    CHECK(tl.busy_cycles == 50 * kUnit);
    CHECK(tl.idle_cycles == 50 * kUnit);
}

TEST_CASE("conservative WCEI: physical completion at half the virtual time") {
    const TaskSet set{{task("t", 10 * kUnit, 2 * kUnit, "0.5")}};
    const Timeline tl = simulate(set, config(10 * kUnit));
    const auto done = std::find_if(tl.events.begin(), tl.events.end(),
                                   [](const ScheduleEvent& e) { return e.kind == EventKind::complete; });
    REQUIRE(done != tl.events.end());
    CHECK(done->virtual_time == invert(set.tasks[0].wcei->phases[0].function, 2 * kUnit));
    CHECK(done->virtual_time == 4 * kUnit);
    CHECK(done->physical_time == 2 * kUnit);
    CHECK(tl.idle_cycles == 8 * kUnit);
}

TEST_CASE("empty task set idles") {
    const Timeline tl = simulate(TaskSet{}, config(5 * kUnit));
    CHECK(tl.idle_cycles == 5 * kUnit);
    CHECK(tl.busy_cycles == 0);
    for (const auto& e : tl.events) {
        CHECK(e.kind == EventKind::idle_begin);
    }
}

TEST_CASE("deadline misses are recorded, not thrown") {
    const TaskSet set{{task("hog", 4 * kUnit, 3 * kUnit, "0.5")}};
    const Timeline tl = simulate(set, config(12 * kUnit));
    CHECK(tl.deadline_misses() > 0);
}

TEST_CASE("three-task set at low utilisation never misses") {
    const TaskSet set{{task("a", 10 * kUnit, 1500, "0.5"), task("b", 20 * kUnit, 3000, "0.5"),
                       task("c", 40 * kUnit, 6000, "0.5")}};
    const Timeline tl = simulate(set, config(100 * 40 * kUnit));
    CHECK(tl.deadline_misses() == 0);
    CHECK(tl.budget_overruns == 0);
    for (const auto& s : tl.tasks) {
        CHECK(s.jobs_completed == s.jobs_released);
    }
}

TEST_CASE("validate_taskset rules") {
    CHECK(validate_taskset(two_task_set(), config(16000)).ok());

    TaskSet bad_period{{task("t", 1500, 100, "1")}};
    const auto r1 = validate_taskset(bad_period, config(3000));
    REQUIRE_FALSE(r1.ok());
    CHECK(r1.issues.front().task == "t");
    CHECK(r1.issues.front().rule == "period");
    CHECK(r1.issues.front().message == "period not a multiple of t_unit");

    TaskSpec greedy = task("g", 10000, 3000, "1");
    ProcessorModel slow = ideal_model();
    slow.hot_ipc = slow.cold_ipc = 0.8;
    greedy.execution = slow;
    const auto r2 = validate_taskset(TaskSet{{greedy}}, config(10000));
    REQUIRE_FALSE(r2.ok());
    CHECK(r2.issues.front().rule == "safety");

    TaskSpec bg;
    bg.id = "bg";
    bg.kind = TaskKind::background;
    bg.wcei = single_phase("bg", WceiFunction{Rational(1, 1), 0, kUnit}, 10);
    CHECK(validate_taskset(TaskSet{{bg}}, config(1000)).issues.front().rule == "background");

    CHECK_FALSE(validate_taskset(TaskSet{}, config(1500)).ok());
    CHECK_THROWS_AS(simulate(bad_period, config(3000)), ValidationError);
}

TEST_CASE("background reclaim") {
    TaskSpec bg;
    bg.id = "bg";
    bg.kind = TaskKind::background;

    SUBCASE("fills each idle gap exactly") {
        // Busy [0, 3000) of every 5000: a 2000-cycle gap per period.
        const TaskSet set{{task("t", 5 * kUnit, 3 * kUnit, "1"), bg}};
        const Timeline tl = simulate(set, config(10 * kUnit, true));
        std::vector<Cycles> runs;
        for (const auto& e : tl.events) {
            if (e.kind == EventKind::background_run) {
                runs.push_back(e.duration);
            }
        }
        CHECK(runs == std::vector<Cycles>{2000, 2000});
    }
    SUBCASE("no idle, no background") {
        const TaskSet set{{task("t", 5 * kUnit, 5 * kUnit, "1"), bg}};
        const Timeline tl = simulate(set, config(10 * kUnit, true));
        CHECK(std::none_of(tl.events.begin(), tl.events.end(),
                           [](const ScheduleEvent& e) { return e.kind == EventKind::background_run; }));
    }
    SUBCASE("throughput equals idle time and realtime events are untouched") {
        TaskSet with_bg = two_task_set();
        with_bg.tasks.push_back(bg);
        const Timeline off = simulate(two_task_set(), config(48000));
        const Timeline on = simulate(with_bg, config(48000, true));
        CHECK(on.background_cycles == off.idle_cycles);
        std::vector<ScheduleEvent> rt;
        for (const auto& e : on.events) {
            if (e.kind != EventKind::background_run) {
                rt.push_back(e);
            }
        }
        CHECK(rt == off.events);
    }
}

TEST_CASE("virtual time dominates physical time") {
    ProcessorModel jittery;
    jittery.cold_ipc = 0.6;
    jittery.warmup_instructions = 300;
    jittery.jitter_amplitude = 0.2;
    jittery.sample_stride = 8;
    TaskSet set{{task("a", 10 * kUnit, 1000, "1"), task("b", 20 * kUnit, 2000, "1")}};
    for (auto& t : set.tasks) {
        t.execution = jittery;
        const ExecutionTrace env = generate_envelope_trace(jittery, t.job_instructions);
        t.wcei = single_phase(t.id, fit_wcei(env, kUnit), t.job_instructions);
    }
    const Timeline tl = simulate(set, config(200 * kUnit));
    for (const auto& e : tl.events) {
        CHECK(e.physical_time <= e.virtual_time);
    }
    for (const auto& s : tl.slices) {
        CHECK(s.physical_end <= s.virtual_end);
    }
    CHECK(tl.budget_overruns == 0);
}

TEST_CASE("timeline CSV") {
    const Timeline tl = simulate(two_task_set(), config(16000));
    const std::string csv = timeline_csv(tl);
    CHECK(csv.rfind("virtual_time,task,kind,instruction_mark\n0,tau1,arrival,0\n", 0) == 0);
}

TEST_CASE("step yields events in generation order") {
    DeterministicScheduler s(two_task_set(), config(16000));
    std::vector<ScheduleEvent> stepped;
    while (auto e = s.step()) {
        stepped.push_back(*e);
    }
    CHECK(s.done());
    CHECK(stepped.front().kind == EventKind::arrival);
    const Timeline tl = simulate(two_task_set(), config(16000));
    CHECK(stepped.size() == tl.events.size());
}
