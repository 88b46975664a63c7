// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <drts/trace.hpp>

#include <doctest.h>

#include <sstream>

using namespace drts;

namespace {

ProcessorModel ideal() {
    ProcessorModel m;
    m.sample_stride = 1;
    return m;
}

ProcessorModel two_speed() {
    ProcessorModel m;
    m.hot_ipc = 1.0;
    m.cold_ipc = 0.5;
    m.warmup_instructions = 100;
    return m;
}

ProcessorModel busy_model(std::uint64_t seed) {
    ProcessorModel m;
    m.hot_ipc = 1.1;
    m.cold_ipc = 0.4;
    m.warmup_instructions = 3000;
    m.locality_dip_period = 20000;
    m.locality_dip_length = 4000;
    m.locality_dip_depth = 0.4;
    m.jitter_amplitude = 0.2;
    m.seed = seed;
    m.sample_stride = 16;
    return m;
}

} // namespace

TEST_CASE("load_trace parses a small CSV") {
    std::istringstream in("0,0\n100,90\n200,185\n");
    const ExecutionTrace t = load_trace(in, "small");
    CHECK(t.size() == 3);
    CHECK(t.total_retired() == 185);
    CHECK(t.end_cycle() == 200);
}

TEST_CASE("load_trace rejects a cycle going backwards") {
    std::istringstream in("cycle,retired\n0,0\n200,185\n150,190\n");
    try {
        load_trace(in, "bad");
        FAIL("expected a format error");
    } catch (const TraceFormatError& e) {
        CHECK(e.line() == 4);
        CHECK(std::string(e.what()) == "non-monotone cycle at line 4");
    }
}

TEST_CASE("load_trace rejects malformed rows and empty input") {
    std::istringstream garbage("0,0\n10,x\n");
    CHECK_THROWS_AS(load_trace(garbage, "g"), TraceFormatError);
    std::istringstream shrinking("0,0\n10,5\n20,4\n");
    CHECK_THROWS_AS(load_trace(shrinking, "s"), TraceFormatError);
    std::istringstream empty("");
    CHECK_THROWS_AS(load_trace(empty, "e"), TraceFormatError);
}

TEST_CASE("store and reload round trip") {
    ProcessorModel m = busy_model(3);
    m.sample_stride = 64;
    const ExecutionTrace original = generate_trace(m, 900000);
    REQUIRE(original.duration() >= 1000000);
    std::stringstream buffer;
    store_trace(buffer, original);
    const ExecutionTrace reloaded = load_trace(buffer, "reloaded");
    CHECK(reloaded == original);
}

TEST_CASE("ideal processor retires one instruction per cycle") {
    const ExecutionTrace t = generate_trace(ideal(), 1000);
    CHECK(t.total_retired() == 1000);
    for (const auto& s : t.samples()) {
        CHECK(s.retired == s.cycle);
    }
    CHECK(instructions_in_window(t, 0, 500) == 500);
    CHECK(retirement_cycle(t, 250) == 250);
}

TEST_CASE("two-speed model warm-up arithmetic") {
    const ExecutionTrace t = generate_trace(two_speed(), 1000);
    CHECK(retirement_cycle(t, 100) == 200);
    CHECK(t.duration() == 1100);
    CHECK(instructions_in_window(t, 0, 200) == 100);
    CHECK(instructions_in_window(t, 0, 0) == 0);
    CHECK(retirement_cycle(t, 0) == 0);
}

TEST_CASE("generation is deterministic per seed and bounded") {
    const ExecutionTrace a = generate_trace(busy_model(9), 200000);
    const ExecutionTrace b = generate_trace(busy_model(9), 200000);
    const ExecutionTrace c = generate_trace(busy_model(10), 200000);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    const auto s = a.samples();
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double ipc = double(s[i].retired - s[i - 1].retired) / double(s[i].cycle - s[i - 1].cycle);
        CHECK(ipc <= 1.1 + 1e-9);
        CHECK(ipc > 0.0);
    }
}

TEST_CASE("envelope is never faster than any realisation") {
    const ExecutionTrace env = generate_envelope_trace(busy_model(1), 100000);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const ExecutionTrace t = generate_trace(busy_model(seed), 100000);
        CHECK(t.duration() <= env.duration());
        for (Instructions k = 0; k <= 100000; k += 997) {
            CHECK(retirement_cycle(t, k) <= retirement_cycle(env, k));
        }
    }
}

TEST_CASE("window queries agree with linear-scan oracle") {
    const ExecutionTrace t = generate_trace(busy_model(4), 20000);
    for (Cycles start = 0; start < t.end_cycle(); start += 1237) {
        for (Cycles d : {Cycles{0}, Cycles{1}, Cycles{50}, Cycles{999}, Cycles{5000}}) {
            if (start + d > t.end_cycle()) {
                continue;
            }
            CHECK(instructions_in_window(t, start, d) == oracle::window(t, start, d));
        }
    }
}

TEST_CASE("windows are additive and consistent with retirement_cycle") {
    const ExecutionTrace t = generate_trace(busy_model(5), 30000);
    for (Cycles s = 0; s + 3000 <= t.end_cycle(); s += 2111) {
        for (Cycles d1 : {Cycles{1}, Cycles{400}, Cycles{1500}}) {
            const Cycles d2 = 3000 - d1;
            CHECK(instructions_in_window(t, s, d1) + instructions_in_window(t, s + d1, d2) ==
                  instructions_in_window(t, s, d1 + d2));
        }
    }
    for (Instructions k = 0; k <= t.total_retired(); k += 313) {
        CHECK(instructions_in_window(t, 0, retirement_cycle(t, k)) >= k);
    }
}

TEST_CASE("slice_instructions rebases a sub-range") {
    const ExecutionTrace t = generate_trace(two_speed(), 1000);
    const ExecutionTrace hot = slice_instructions(t, 100, 1000);
    CHECK(hot.start_cycle() == 0);
    CHECK(hot.total_retired() == 900);
    CHECK(hot.duration() == 900);
}

TEST_CASE("model validation") {
    ProcessorModel m;
    m.hot_ipc = 0.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m = ProcessorModel{};
    m.jitter_amplitude = 1.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m = ProcessorModel{};
    m.sample_stride = 0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}
