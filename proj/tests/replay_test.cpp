// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/replay.hpp>

#include <doctest.h>

#include <set>
#include <tuple>

using namespace drts;

namespace {

constexpr Cycles kUnit = 1000;

ProcessorModel jittery(std::uint64_t seed) {
    ProcessorModel m;
    m.cold_ipc = 0.6;
    m.warmup_instructions = 500;
    m.jitter_amplitude = 0.2;
    m.seed = seed;
    m.sample_stride = 8;
    return m;
}

TaskSpec fitted(std::string id, Cycles period, Instructions job, const ProcessorModel& m) {
    TaskSpec t;
    t.id = std::move(id);
    t.period = period;
    t.job_instructions = job;
    t.execution = m;
    t.wcei = single_phase(t.id, fit_wcei(generate_envelope_trace(m, job), kUnit), job);
    return t;
}

TaskSet three_tasks() {
    return TaskSet{{fitted("t1", 10 * kUnit, 1000, jittery(1)), fitted("t2", 20 * kUnit, 2000, jittery(2)),
                    fitted("t3", 40 * kUnit, 4000, jittery(3))}};
}

PerturbationSpec seeds(std::uint64_t n, double jitter_scale = 1.0) {
    PerturbationSpec p;
    for (std::uint64_t s = 1; s <= n; ++s) {
        p.seeds.push_back(s);
    }
    p.jitter_scale = jitter_scale;
    p.speedup_lo = 0.5;
    p.speedup_hi = 1.0;
    return p;
}

std::vector<ScheduleEvent> marks(const Timeline& t) {
    std::vector<ScheduleEvent> out;
    for (const auto& e : t.events) {
        if (e.kind == EventKind::arrival || e.kind == EventKind::dispatch || e.kind == EventKind::preempt ||
            e.kind == EventKind::complete) {
            out.push_back({e.virtual_time, e.task, e.kind, e.instruction_mark, 0, 0});
        }
    }
    return out;
}

} // namespace

TEST_CASE("deterministic schedule is identical across perturbations") {
    const SchedulerConfig cfg{kUnit, 10 * 40 * kUnit, false};
    const auto report = verify_determinism(three_tasks(), cfg, seeds(10));
    CHECK(report.identical);
    CHECK_FALSE(report.first_divergence);
    CHECK(report.runs == 10);
    CHECK(determinism_csv(report).rfind("run,seed,events,matches_first\n0,1,", 0) == 0);
}

TEST_CASE("timer baseline diverges under the same perturbations") {
    const SchedulerConfig cfg{kUnit, 10 * 40 * kUnit, false};
    const auto report = verify_determinism(three_tasks(), cfg, seeds(10), SchedulerMode::timer_baseline);
    CHECK_FALSE(report.identical);
    REQUIRE(report.first_divergence);
    CHECK(report.first_divergence->run > 0);
    const std::string text = divergence_text(report);
    CHECK(text.find("DIVERGED") != std::string::npos);
    CHECK(text.find("- expected: ") != std::string::npos);
}

TEST_CASE("one seed is trivially identical") {
    const SchedulerConfig cfg{kUnit, 40 * kUnit, false};
    CHECK(verify_determinism(three_tasks(), cfg, seeds(1)).identical);
    CHECK(verify_determinism(three_tasks(), cfg, seeds(1), SchedulerMode::timer_baseline).identical);
    CHECK_THROWS_AS(verify_determinism(three_tasks(), cfg, PerturbationSpec{}), std::invalid_argument);
}

TEST_CASE("unsafe perturbations are rejected with seed and window") {
    const SchedulerConfig cfg{kUnit, 40 * kUnit, false};
    try {
        verify_determinism(three_tasks(), cfg, seeds(3, 4.5));
        FAIL("expected a perturbation error");
    } catch (const PerturbationError& e) {
        CHECK(e.seed() == 1);
        CHECK(e.window().guaranteed > e.window().observed);
        CHECK(std::string(e.what()).find("seed 1") != std::string::npos);
    }
}

TEST_CASE("perturbation spec validation") {
    PerturbationSpec p;
    p.speedup_lo = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.speedup_lo = 0.5;
    p.speedup_hi = 1.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.speedup_hi = 0.4;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = PerturbationSpec{};
    p.jitter_scale = -1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("baseline on ideal models matches the deterministic schedule") {
    ProcessorModel ideal;
    ideal.sample_stride = 1;
    TaskSet set{{fitted("hi", 4 * kUnit, 1000, ideal), fitted("lo", 12 * kUnit, 5000, ideal)}};
    const SchedulerConfig cfg{kUnit, 48 * kUnit, false};
    const Timeline det = simulate(set, cfg);
    const Timeline base = simulate_timer_baseline(set, cfg);
    CHECK(marks(det) == marks(base));
    const auto a = verify_determinism(set, cfg, seeds(3), SchedulerMode::timer_baseline);
    CHECK(a.identical);
}

TEST_CASE("baseline preemption marks move with jitter") {
    TaskSet set{{fitted("hi", 4 * kUnit, 1000, jittery(1)), fitted("lo", 12 * kUnit, 6000, jittery(2))}};
    const SchedulerConfig cfg{kUnit, 12 * kUnit, false};
    PerturbationSpec p;
    p.seeds = {1, 2};
    const TaskSet s1 = perturb_taskset(set, 1, p);
    const TaskSet s2 = perturb_taskset(set, 2, p);
    auto first_preempt = [](const Timeline& t) {
        for (const auto& e : t.events) {
            if (e.kind == EventKind::preempt) {
                return e.instruction_mark;
            }
        }
        return Instructions{0};
    };
    const Instructions m1 = first_preempt(simulate_timer_baseline(s1, cfg));
    const Instructions m2 = first_preempt(simulate_timer_baseline(s2, cfg));
    CHECK(m1 != 0);
    CHECK(m1 != m2);
    CHECK(first_preempt(simulate(s1, cfg)) == first_preempt(simulate(s2, cfg)));
}

TEST_CASE("single-task baseline interleaving is identical across seeds") {
    // Without preemption only completion times move; task, kind and mark agree.
    TaskSet set{{fitted("only", 10 * kUnit, 3000, jittery(5))}};
    const SchedulerConfig cfg{kUnit, 100 * kUnit, false};
    const auto report = verify_determinism(set, cfg, seeds(5), SchedulerMode::timer_baseline);
    auto strip = [](const Timeline& t) {
        std::vector<std::tuple<std::string, EventKind, Instructions>> out;
        for (const auto& e : t.events) {
            out.emplace_back(e.task, e.kind, e.instruction_mark);
        }
        return out;
    };
    for (const auto& t : report.timelines) {
        CHECK(strip(t) == strip(report.timelines.front()));
    }
}

TEST_CASE("perturb_taskset is deterministic and keeps non-model tasks") {
    PerturbationSpec p;
    p.seeds = {7};
    p.speedup_lo = 0.3;
    const TaskSet a = perturb_taskset(three_tasks(), 7, p);
    const TaskSet b = perturb_taskset(three_tasks(), 7, p);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::get<ProcessorModel>(a.tasks[i].execution) == std::get<ProcessorModel>(b.tasks[i].execution));
        const auto& m = std::get<ProcessorModel>(a.tasks[i].execution);
        CHECK(m.cold_ipc >= 0.6);
        CHECK(m.cold_ipc <= 1.0);
    }
}

TEST_CASE("shared-variable replay follows slice order") {
    Timeline t;
    t.slices.push_back({"a", 0, 0, 1000, 0, 500, 0, 100});
    t.slices.push_back({"b", 0, 1000, 2000, 1000, 1500, 0, 50});
    t.slices.push_back({"a", 0, 2000, 3000, 2000, 2500, 100, 200});
    const std::vector<TaskScript> scripts{
        {"a", {{50, VarOp::read, "x", 0, false}, {150, VarOp::write, "x", 0, true}}},
        {"b", {{10, VarOp::write, "x", 9, false}}}};
    const SharedVarTrace trace = replay_accesses(t, scripts, {{"x", 3}});
    const SharedVarTrace expected{{500, "a", VarOp::read, "x", 3},
                                  {1200, "b", VarOp::write, "x", 9},
                                  {2500, "a", VarOp::write, "x", 3}};
    CHECK(trace == expected);
    CHECK(final_value(trace, "x", 3) == 3);
    CHECK(replay_accesses(t, scripts, {{"x", 3}}) == trace);
    CHECK(shared_var_csv({{1, trace}}).rfind("run,seed,virtual_time,task,operation,variable,value\n0,1,500,a,read,x,3\n",
                                             0) == 0);
}

TEST_CASE("race demo") {
    SUBCASE("deterministic runs agree, baseline splits") {
        const RaceDemoResult r = race_demo(20);
        std::set<std::int64_t> det_final;
        for (const auto& run : r.deterministic) {
            det_final.insert(run.final_status);
            CHECK(run.trace == r.deterministic.front().trace);
        }
        CHECK(det_final.size() == 1);

        std::set<std::int64_t> base_final;
        for (const auto& run : r.baseline) {
            base_final.insert(run.final_status);
        }
        CHECK(base_final.count(kStatusLost) == 1);
        CHECK(base_final.size() == 2);
    }
    SUBCASE("zero jitter: both schedulers agree") {
        const RaceDemoResult r = race_demo(2, false);
        REQUIRE(r.deterministic.size() == 2);
        REQUIRE(r.baseline.size() == 2);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(r.deterministic[i].final_status == r.baseline[i].final_status);
        }
        CHECK(r.baseline[0].trace == r.baseline[1].trace);
    }
}
