// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/taskset.hpp>

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace drts {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigFileError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

double number(const json& node, const char* key, double fallback) {
    if (!node.contains(key)) {
        return fallback;
    }
    const json& v = node.at(key);
    if (v.is_string()) {
        return Rational::parse(v.get<std::string>()).to_double();
    }
    return v.get<double>();
}

ProcessorModel parse_model(const json& node) {
    ProcessorModel m;
    m.hot_ipc = number(node, "hot_ipc", m.hot_ipc);
    m.cold_ipc = number(node, "cold_ipc", m.hot_ipc);
    m.warmup_instructions = node.value("warmup_instructions", m.warmup_instructions);
    m.locality_dip_period = node.value("locality_dip_period", m.locality_dip_period);
    m.locality_dip_length = node.value("locality_dip_length", m.locality_dip_length);
    m.locality_dip_depth = number(node, "locality_dip_depth", m.locality_dip_depth);
    m.jitter_amplitude = number(node, "jitter_amplitude", m.jitter_amplitude);
    m.seed = node.value("seed", m.seed);
    m.sample_stride = node.value("sample_stride", m.sample_stride);
    m.validate();
    return m;
}

std::vector<TraceSegment> parse_segments(const json& node) {
    std::vector<TraceSegment> out;
    for (const auto& entry : node) {
        out.push_back({parse_model(entry.at("processor")), entry.at("instructions").get<Instructions>()});
    }
    if (out.empty()) {
        throw ConfigFileError("segment list is empty");
    }
    return out;
}

fs::path resolve(const fs::path& base, const std::string& path) {
    const fs::path p(path);
    return p.is_absolute() ? p : base / p;
}

// Trace used for fitting: the envelope of a synthetic model, or the trace itself.
ExecutionTrace fitting_trace(const TaskSpec& task) {
    if (const auto* model = std::get_if<ProcessorModel>(&task.execution)) {
        return generate_envelope_trace(*model, task.job_instructions, task.id);
    }
    if (const auto* segments = std::get_if<std::vector<TraceSegment>>(&task.execution)) {
        return generate_phased_envelope_trace(*segments, task.id);
    }
    return physical_trace(task);
}

PhaseSegmentation parse_wcei(const json& node, const TaskSpec& task, Cycles t_unit, const fs::path& base,
                             std::vector<fs::path>& files) {
    if (node.contains("file")) {
        const fs::path path = resolve(base, node.at("file").get<std::string>());
        files.push_back(path);
        return parse_document(read_file(path));
    }
    if (node.contains("phases")) {
        json doc = node;
        doc["t_unit"] = node.value("t_unit", t_unit);
        doc["label"] = node.value("label", task.id);
        return parse_document(doc.dump());
    }
    if (node.contains("fit")) {
        const std::string kind = node.at("fit").get<std::string>();
        const ExecutionTrace trace = fitting_trace(task);
        if (kind == "single") {
            return single_phase(task.id, fit_wcei(trace, t_unit), trace.total_retired());
        }
        if (kind == "phases") {
            const double threshold = Rational::parse(node.value("threshold", std::string("0.2"))).to_double();
            PhaseSegmentation seg = segment_phases(trace, t_unit, threshold);
            seg.label = task.id;
            return seg;
        }
        throw ConfigFileError("unknown fit kind '" + kind + "'");
    }
    WceiFunction f;
    f.a = Rational::parse(node.at("a").get<std::string>());
    f.b = node.value("b", Instructions{0});
    f.t_unit = t_unit;
    f.validate();
    return single_phase(task.id, f, task.job_instructions);
}

} // namespace

LoadedTaskSet parse_taskset(std::string_view text, const fs::path& base_dir) {
    LoadedTaskSet out;
    std::string current = "<config>";
    try {
        const json doc = json::parse(text);
        const json& cfg = doc.at("config");
        out.config.t_unit = cfg.value("t_unit", kDefaultTUnit);
        out.config.horizon = cfg.at("horizon").get<Cycles>();
        out.config.background_enabled = cfg.value("background_enabled", false);
        for (const auto& node : doc.at("tasks")) {
            TaskSpec task;
            task.id = node.at("id").get<std::string>();
            current = task.id;
            const std::string kind = node.value("kind", std::string("realtime"));
            if (kind == "realtime") {
                task.kind = TaskKind::realtime;
            } else if (kind == "background") {
                task.kind = TaskKind::background;
            } else {
                throw ConfigFileError("unknown task kind '" + kind + "'");
            }
            task.period = node.value("period", Cycles{0});
            task.offset = node.value("offset", Cycles{0});
            task.job_instructions = node.value("job_instructions", Instructions{0});
            if (node.contains("execution_model")) {
                const json& model = node.at("execution_model");
                if (model.contains("processor")) {
                    task.execution = parse_model(model.at("processor"));
                } else if (model.contains("segments")) {
                    task.execution = parse_segments(model.at("segments"));
                } else if (model.contains("trace")) {
                    const fs::path path = resolve(base_dir, model.at("trace").get<std::string>());
                    out.referenced_files.push_back(path);
                    task.execution = load_trace_file(path.string());
                } else {
                    throw ConfigFileError("execution_model needs 'processor', 'segments' or 'trace'");
                }
            }
            if (node.contains("wcei")) {
                task.wcei = parse_wcei(node.at("wcei"), task, out.config.t_unit, base_dir, out.referenced_files);
            }
            out.taskset.tasks.push_back(std::move(task));
        }
    } catch (const ConfigFileError& e) {
        throw ConfigFileError(current + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigFileError(current + ": malformed task-set document: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigFileError(current + ": " + e.what());
    } catch (const WceiError& e) {
        throw ConfigFileError(current + ": " + e.what());
    } catch (const TraceError& e) {
        throw ConfigFileError(current + ": " + e.what());
    }
    return out;
}

LoadedTaskSet load_taskset_file(const fs::path& path) {
    return parse_taskset(read_file(path), path.parent_path());
}

ExecutionTrace generate_from_document(std::string_view text) {
    try {
        const json doc = json::parse(text);
        const std::string label = doc.value("label", std::string("synthetic"));
        const bool envelope = doc.value("envelope", false);
        if (doc.contains("segments")) {
            const auto segments = parse_segments(doc.at("segments"));
            return envelope ? generate_phased_envelope_trace(segments, label) : generate_phased_trace(segments, label);
        }
        const ProcessorModel model = parse_model(doc.at("processor"));
        const auto total = doc.at("instructions").get<Instructions>();
        return envelope ? generate_envelope_trace(model, total, label) : generate_trace(model, total, label);
    } catch (const json::exception& e) {
        throw ConfigFileError(std::string("malformed model document: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigFileError(std::string("invalid model: ") + e.what());
    }
}

} // namespace drts
