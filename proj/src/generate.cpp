// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/trace.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace drts {

void ProcessorModel::validate() const {
    if (!(hot_ipc > 0.0) || !std::isfinite(hot_ipc)) {
        throw std::invalid_argument("hot_ipc must be positive");
    }
    if (!(cold_ipc > 0.0) || cold_ipc > hot_ipc) {
        throw std::invalid_argument("cold_ipc must be in (0, hot_ipc]");
    }
    if (!(locality_dip_depth >= 0.0) || locality_dip_depth >= 1.0) {
        throw std::invalid_argument("locality_dip_depth must be in [0, 1)");
    }
    if (!(jitter_amplitude >= 0.0) || jitter_amplitude >= 1.0) {
        throw std::invalid_argument("jitter_amplitude must be in [0, 1)");
    }
    if (locality_dip_length > locality_dip_period) {
        throw std::invalid_argument("locality_dip_length exceeds locality_dip_period");
    }
    if (sample_stride == 0) {
        throw std::invalid_argument("sample_stride must be positive");
    }
}

namespace {

enum class Jitter { seeded, worst_case };

class BlockGenerator {
public:
    BlockGenerator(const ProcessorModel& model, Jitter jitter) : model_(model), jitter_(jitter), rng_(model.seed) {
        model_.validate();
    }

    // Appends samples for `count` instructions continuing from samples.back().
    void append(std::vector<TraceSample>& samples, Instructions count) {
        const Instructions base = samples.back().retired;
        Cycles cycle = samples.back().cycle;
        Instructions k = 0;
        while (k < count) {
            const Instructions end = block_end(k, count);
            const double ipc = block_ipc(k);
            const double len = static_cast<double>(end - k);
            const auto cycles = static_cast<Cycles>(std::ceil(len / ipc));
            cycle += std::max<Cycles>(cycles, 1);
            samples.push_back({cycle, base + end});
            k = end;
        }
    }

private:
    Instructions block_end(Instructions k, Instructions count) const {
        Instructions end = std::min(count, (k / model_.sample_stride + 1) * model_.sample_stride);
        if (k < model_.warmup_instructions) {
            end = std::min(end, model_.warmup_instructions);
        }
        if (model_.locality_dip_period > 0 && model_.locality_dip_length > 0) {
            const Instructions period = model_.locality_dip_period;
            const Instructions dip_start = period - model_.locality_dip_length;
            const Instructions in_period = k % period;
            const Instructions next = in_period < dip_start ? dip_start : period;
            end = std::min(end, k - in_period + next);
        }
        return end;
    }

    bool in_dip(Instructions k) const {
        if (model_.locality_dip_period == 0 || model_.locality_dip_length == 0) {
            return false;
        }
        return k % model_.locality_dip_period >= model_.locality_dip_period - model_.locality_dip_length;
    }

    double block_ipc(Instructions k) {
        double ipc = k < model_.warmup_instructions ? model_.cold_ipc : model_.hot_ipc;
        if (in_dip(k)) {
            ipc *= 1.0 - model_.locality_dip_depth;
        }
        if (model_.jitter_amplitude > 0.0) {
            double u = 1.0;
            if (jitter_ == Jitter::seeded) {
                u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
            }
            ipc *= 1.0 - model_.jitter_amplitude * u;
        }
        return ipc;
    }

    ProcessorModel model_;
    Jitter jitter_;
    std::mt19937_64 rng_;
};

ExecutionTrace generate(std::span<const TraceSegment> segments, Jitter jitter, std::string label) {
    Instructions total = 0;
    std::size_t expected = 1;
    for (const auto& seg : segments) {
        total += seg.instructions;
        expected += seg.instructions / std::max<Instructions>(seg.model.sample_stride, 1) + 2;
    }
    if (total == 0) {
        throw std::invalid_argument("total_instructions must be positive");
    }
    std::vector<TraceSample> samples;
    samples.reserve(expected);
    samples.push_back({0, 0});
    for (const auto& seg : segments) {
        BlockGenerator(seg.model, jitter).append(samples, seg.instructions);
    }
    return ExecutionTrace(std::move(samples), std::move(label));
}

} // namespace

ExecutionTrace generate_trace(const ProcessorModel& model, Instructions total_instructions, std::string label) {
    const TraceSegment seg{model, total_instructions};
    return generate(std::span(&seg, 1), Jitter::seeded, std::move(label));
}

ExecutionTrace generate_envelope_trace(const ProcessorModel& model, Instructions total_instructions,
                                       std::string label) {
    const TraceSegment seg{model, total_instructions};
    return generate(std::span(&seg, 1), Jitter::worst_case, std::move(label));
}

ExecutionTrace generate_phased_trace(std::span<const TraceSegment> segments, std::string label) {
    return generate(segments, Jitter::seeded, std::move(label));
}

ExecutionTrace generate_phased_envelope_trace(std::span<const TraceSegment> segments, std::string label) {
    return generate(segments, Jitter::worst_case, std::move(label));
}

} // namespace drts
