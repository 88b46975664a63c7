// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <drts/wcei.hpp>

#include <doctest.h>

#include <cmath>

using namespace drts;

namespace {

constexpr Cycles kTUnit = 100000;

ProcessorModel plateau(double ipc, std::uint64_t seed) {
    ProcessorModel m;
    m.hot_ipc = ipc;
    m.cold_ipc = ipc;
    m.jitter_amplitude = 0.02;
    m.seed = seed;
    m.sample_stride = 64;
    return m;
}

// Each plateau lasts about 8 * 10^5 cycles.
ExecutionTrace three_plateaus() {
    const std::vector<TraceSegment> segs{
        {plateau(1.22, 1), 976000}, {plateau(0.61, 2), 488000}, {plateau(0.48, 3), 384000}};
    return generate_phased_trace(segs, "three-plateau");
}

} // namespace

TEST_CASE("uniform trace is one phase at any threshold") {
    ProcessorModel m = plateau(0.9, 4);
    const ExecutionTrace t = generate_trace(m, 1000000);
    for (double th : {0.05, 0.2, 1.0, 10.0}) {
        const PhaseSegmentation seg = segment_phases(t, kTUnit, th);
        CHECK(seg.phases.size() == 1);
        CHECK(seg.total_instructions() == t.total_retired());
    }
}

TEST_CASE("three plateaus split into three phases near the plateau rates") {
    const ExecutionTrace t = three_plateaus();
    const PhaseSegmentation seg = segment_phases(t, kTUnit, 0.2);
    REQUIRE(seg.phases.size() == 3);
    const double expected[] = {1.22, 0.61, 0.48};
    for (std::size_t i = 0; i < 3; ++i) {
        // Plateau IPC with full jitter lies in [0.98 r, r]; fitted rate within 5%.
        CHECK(std::abs(seg.phases[i].function.a.to_double() - expected[i]) / expected[i] < 0.05);
    }
    CHECK(seg.total_instructions() == t.total_retired());
    CHECK_NOTHROW(seg.validate());

    const auto losses = phase_losses(t, seg);
    const WceiFunction single = fit_wcei(t, kTUnit);
    const double single_loss = worst_case_loss(single.a, best_rate(t, kTUnit)).worst_loss_percent;
    for (const auto& p : losses) {
        CHECK(p.loss.worst_loss_percent <= single_loss);
    }
    CHECK(single_loss > 50.0);
}

TEST_CASE("each phase function is safe on its own region") {
    const ExecutionTrace t = three_plateaus();
    const PhaseSegmentation seg = segment_phases(t, kTUnit, 0.2);
    for (const auto& p : seg.phases) {
        const ExecutionTrace region = slice_instructions(t, p.start_instruction, p.end_instruction);
        CHECK(validate_safety(p.function, region, 1).safe);
    }
}

TEST_CASE("a huge threshold collapses to the global minimum rate") {
    const ExecutionTrace t = three_plateaus();
    const PhaseSegmentation seg = segment_phases(t, kTUnit, 10.0);
    REQUIRE(seg.phases.size() == 1);
    CHECK(seg.phases.front().function.a == oracle::min_rate(t, kTUnit));
}

TEST_CASE("phases are at least one t_unit long") {
    const ExecutionTrace t = three_plateaus();
    for (double th : {0.01, 0.05, 0.2}) {
        const PhaseSegmentation seg = segment_phases(t, kTUnit, th);
        for (const auto& p : seg.phases) {
            const Cycles span = retirement_cycle(t, p.end_instruction) - retirement_cycle(t, p.start_instruction);
            CHECK(span >= kTUnit);
        }
    }
}

TEST_CASE("segmentation argument checks") {
    const ExecutionTrace t = three_plateaus();
    CHECK_THROWS(segment_phases(t, kTUnit, 0.0));
    CHECK_THROWS(segment_phases(t, 0, 0.2));
}

TEST_CASE("phase_index") {
    const WceiFunction f{Rational(1, 2), 0, 1000};
    PhaseSegmentation seg{"x", 1000, {{0, 100, f}, {100, 250, f}}};
    CHECK(seg.phase_index(0) == 0);
    CHECK(seg.phase_index(99) == 0);
    CHECK(seg.phase_index(100) == 1);
    CHECK(seg.phase_index(1000) == 1);
}
