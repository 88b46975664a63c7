// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/wcei.hpp>

#include <algorithm>
#include <cmath>

namespace drts {

void PhaseSegmentation::validate() const {
    if (phases.empty()) {
        throw WceiError("segmentation '" + label + "' has no phases");
    }
    if (phases.front().start_instruction != 0) {
        throw WceiError("segmentation '" + label + "' does not start at instruction 0");
    }
    for (std::size_t i = 0; i < phases.size(); ++i) {
        const auto& p = phases[i];
        if (p.end_instruction <= p.start_instruction) {
            throw WceiError("segmentation '" + label + "': empty phase " + std::to_string(i));
        }
        if (i > 0 && p.start_instruction != phases[i - 1].end_instruction) {
            throw WceiError("segmentation '" + label + "': phase " + std::to_string(i) + " is not contiguous");
        }
        p.function.validate();
    }
}

std::size_t PhaseSegmentation::phase_index(Instructions instruction) const {
    auto it = std::upper_bound(phases.begin(), phases.end(), instruction,
                               [](Instructions k, const Phase& p) { return k < p.end_instruction; });
    if (it == phases.end()) {
        return phases.size() - 1;
    }
    return static_cast<std::size_t>(it - phases.begin());
}

PhaseSegmentation single_phase(std::string label, const WceiFunction& f, Instructions total_instructions) {
    PhaseSegmentation seg{std::move(label), f.t_unit, {Phase{0, total_instructions, f}}};
    seg.validate();
    return seg;
}

std::vector<double> window_rates(const ExecutionTrace& trace, Cycles t_unit) {
    if (t_unit == 0) {
        throw WceiError("t_unit must be positive");
    }
    std::vector<double> rates;
    const std::size_t count = trace.duration() / t_unit;
    rates.reserve(count);
    for (std::size_t m = 0; m < count; ++m) {
        const Instructions w = instructions_in_window(trace, m * t_unit, t_unit);
        rates.push_back(static_cast<double>(w) / static_cast<double>(t_unit));
    }
    return rates;
}

namespace {

double median(std::vector<double> values) {
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (values.size() % 2 == 1) {
        return *mid;
    }
    const double upper = *mid;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

bool deviates(double rate, double reference, double threshold) {
    return std::abs(rate - reference) > threshold * reference;
}

// Knee of the curve inside [lo, hi]: the extremum of retired - mid*cycle,
// which rises before a slowdown and falls after it (and vice versa).
std::size_t refine_boundary(const ExecutionTrace& trace, Cycles lo, Cycles hi, double before, double after) {
    const auto s = trace.samples();
    const std::size_t first = trace.index_at_or_before(lo);
    const std::size_t last = trace.index_at_or_before(hi);
    const double mid = 0.5 * (before + after);
    const bool slowdown = after < before;
    std::size_t best = first;
    double best_value = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        const double e = static_cast<double>(s[i].retired) - mid * static_cast<double>(s[i].cycle);
        if (i == first || (slowdown ? e > best_value : e < best_value)) {
            best = i;
            best_value = e;
        }
    }
    return best;
}

} // namespace

PhaseSegmentation segment_phases(const ExecutionTrace& trace, Cycles t_unit, double split_threshold) {
    if (!(split_threshold > 0.0)) {
        throw WceiError("split threshold must be positive");
    }
    if (t_unit == 0 || trace.duration() < 2 * t_unit) {
        throw WceiError("segmentation needs a trace of at least 2*t_unit cycles");
    }
    const auto rates = window_rates(trace, t_unit);
    const auto s = trace.samples();

    // Sample indices where phases begin.
    std::vector<std::size_t> starts{0};
    std::vector<double> members{rates[0]};
    for (std::size_t m = 1; m < rates.size(); ++m) {
        const double reference = median(members);
        const bool confirmed = m + 1 < rates.size() && deviates(rates[m], reference, split_threshold) &&
                               deviates(rates[m + 1], reference, split_threshold);
        if (!confirmed) {
            members.push_back(rates[m]);
            continue;
        }
        const Cycles lo = std::max(s[starts.back()].cycle, (m - 1) * t_unit);
        const Cycles hi = (m + 1) * t_unit;
        const std::size_t boundary = refine_boundary(trace, lo, hi, reference, rates[m + 1]);
        if (boundary > starts.back() && s[boundary].retired > s[starts.back()].retired &&
            s[boundary].retired < trace.total_retired()) {
            starts.push_back(boundary);
        }
        // The window holding the change is excluded from the new median.
        members.assign(1, rates[m + 1]);
        ++m;
    }

    // Merge phases shorter than one t_unit into their predecessor.
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const std::size_t end = i + 1 < starts.size() ? starts[i + 1] : s.size() - 1;
        if (!kept.empty() && s[end].cycle - s[starts[i]].cycle < t_unit) {
            continue;
        }
        kept.push_back(starts[i]);
    }
    // A short first phase merges forward instead.
    while (kept.size() > 1 && s[kept[1]].cycle - s[kept[0]].cycle < t_unit) {
        kept.erase(kept.begin() + 1);
    }

    PhaseSegmentation seg;
    seg.label = trace.label();
    seg.t_unit = t_unit;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const Instructions begin = s[kept[i]].retired;
        const Instructions end = i + 1 < kept.size() ? s[kept[i + 1]].retired : trace.total_retired();
        const ExecutionTrace region = slice_instructions(trace, begin, end);
        seg.phases.push_back({begin, end, fit_wcei(region, t_unit)});
    }
    seg.validate();
    return seg;
}

std::vector<PhaseLoss> phase_losses(const ExecutionTrace& trace, const PhaseSegmentation& segmentation) {
    std::vector<PhaseLoss> out;
    for (const auto& p : segmentation.phases) {
        const ExecutionTrace region =
            slice_instructions(trace, p.start_instruction, std::min(p.end_instruction, trace.total_retired()));
        out.push_back({p.start_instruction, p.end_instruction,
                       worst_case_loss(p.function.a, best_rate(region, segmentation.t_unit))});
    }
    return out;
}

} // namespace drts
