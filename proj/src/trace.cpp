// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/trace.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace drts {

ExecutionTrace::ExecutionTrace(std::vector<TraceSample> samples, std::string label)
    : samples_(std::move(samples)), label_(std::move(label)) {
    if (samples_.empty()) {
        throw TraceError("trace '" + label_ + "' has no samples");
    }
    if (samples_.front().retired != 0) {
        throw TraceError("trace '" + label_ + "' must start at retired = 0");
    }
    for (std::size_t i = 1; i < samples_.size(); ++i) {
        if (samples_[i].cycle <= samples_[i - 1].cycle) {
            throw TraceError("trace '" + label_ + "': non-monotone cycle at sample " + std::to_string(i));
        }
        if (samples_[i].retired < samples_[i - 1].retired) {
            throw TraceError("trace '" + label_ + "': decreasing retired count at sample " + std::to_string(i));
        }
    }
}

std::size_t ExecutionTrace::index_at_or_before(Cycles cycle) const {
    auto it = std::upper_bound(samples_.begin(), samples_.end(), cycle,
                               [](Cycles c, const TraceSample& s) { return c < s.cycle; });
    if (it == samples_.begin()) {
        throw TraceError("cycle " + std::to_string(cycle) + " precedes trace '" + label_ + "'");
    }
    return static_cast<std::size_t>(it - samples_.begin()) - 1;
}

std::size_t ExecutionTrace::index_reaching(Instructions count) const {
    auto it = std::lower_bound(samples_.begin(), samples_.end(), count,
                               [](const TraceSample& s, Instructions c) { return s.retired < c; });
    if (it == samples_.end()) {
        throw TraceError("instruction count " + std::to_string(count) + " beyond trace '" + label_ + "' (" +
                         std::to_string(total_retired()) + " retired)");
    }
    return static_cast<std::size_t>(it - samples_.begin());
}

namespace {

bool parse_field(std::string_view text, std::uint64_t& out) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    if (text.empty()) {
        return false;
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

} // namespace

ExecutionTrace load_trace(std::istream& source, std::string label) {
    std::vector<TraceSample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        std::string_view view(line);
        if (!view.empty() && view.back() == '\r') {
            view.remove_suffix(1);
        }
        if (view.empty()) {
            continue;
        }
        if (line_no == 1 && view == "cycle,retired") {
            continue;
        }
        const auto comma = view.find(',');
        TraceSample sample;
        if (comma == std::string_view::npos || !parse_field(view.substr(0, comma), sample.cycle) ||
            !parse_field(view.substr(comma + 1), sample.retired)) {
            throw TraceFormatError(line_no, "malformed row '" + std::string(view) + "'");
        }
        if (!samples.empty()) {
            if (sample.cycle <= samples.back().cycle) {
                throw TraceFormatError(line_no, "non-monotone cycle");
            }
            if (sample.retired < samples.back().retired) {
                throw TraceFormatError(line_no, "decreasing retired count");
            }
        }
        samples.push_back(sample);
    }
    if (samples.empty()) {
        throw TraceFormatError(line_no, "trace has no samples");
    }
    const TraceSample origin = samples.front();
    for (auto& s : samples) {
        s.cycle -= origin.cycle;
        s.retired -= origin.retired;
    }
    return ExecutionTrace(std::move(samples), std::move(label));
}

ExecutionTrace load_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw TraceError("cannot open trace file '" + path + "'");
    }
    return load_trace(in, path);
}

void store_trace(std::ostream& sink, const ExecutionTrace& trace) {
    sink << "cycle,retired\n";
    for (const auto& s : trace.samples()) {
        sink << s.cycle << ',' << s.retired << '\n';
    }
}

void store_trace_file(const std::string& path, const ExecutionTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw TraceError("cannot write trace file '" + path + "'");
    }
    store_trace(out, trace);
}

Instructions instructions_in_window(const ExecutionTrace& trace, Cycles start, Cycles duration) {
    if (start < trace.start_cycle() || start > trace.end_cycle() || duration > trace.end_cycle() - start) {
        throw TraceError("window [" + std::to_string(start) + ", +" + std::to_string(duration) +
                         "] exceeds trace '" + trace.label() + "'");
    }
    return trace.retired_at(start + duration) - trace.retired_at(start);
}

Cycles retirement_cycle(const ExecutionTrace& trace, Instructions count) {
    return trace.samples()[trace.index_reaching(count)].cycle;
}

ExecutionTrace slice_instructions(const ExecutionTrace& trace, Instructions begin, Instructions end) {
    if (begin > end) {
        throw TraceError("empty instruction slice");
    }
    const std::size_t first = trace.index_reaching(begin);
    const std::size_t last = trace.index_reaching(end);
    const TraceSample origin = trace.samples()[first];
    std::vector<TraceSample> out;
    out.reserve(last - first + 1);
    for (std::size_t i = first; i <= last; ++i) {
        const auto& s = trace.samples()[i];
        out.push_back({s.cycle - origin.cycle, s.retired - origin.retired});
    }
    return ExecutionTrace(std::move(out), trace.label() + "[" + std::to_string(begin) + "," + std::to_string(end) + ")");
}

} // namespace drts
