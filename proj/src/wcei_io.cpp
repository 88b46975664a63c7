// SPDX-FileCopyrightText: © 2026 The drts authors
//
// SPDX-License-Identifier: Apache-2.0

#include <drts/wcei.hpp>

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace drts {

using json = nlohmann::ordered_json;

std::string to_document(const PhaseSegmentation& segmentation) {
    json doc;
    doc["label"] = segmentation.label;
    doc["t_unit"] = segmentation.t_unit;
    json phases = json::array();
    for (const auto& p : segmentation.phases) {
        json entry;
        entry["start_instruction"] = p.start_instruction;
        entry["end_instruction"] = p.end_instruction;
        entry["a"] = p.function.a.to_string();
        entry["b"] = p.function.b;
        phases.push_back(std::move(entry));
    }
    doc["phases"] = std::move(phases);
    return doc.dump(2) + "\n";
}

PhaseSegmentation parse_document(std::string_view text) {
    PhaseSegmentation seg;
    try {
        const json doc = json::parse(text);
        seg.label = doc.value("label", std::string{});
        seg.t_unit = doc.at("t_unit").get<Cycles>();
        for (const auto& entry : doc.at("phases")) {
            Phase p;
            p.start_instruction = entry.at("start_instruction").get<Instructions>();
            p.end_instruction = entry.at("end_instruction").get<Instructions>();
            p.function.a = Rational::parse(entry.at("a").get<std::string>());
            p.function.b = entry.at("b").get<Instructions>();
            p.function.t_unit = seg.t_unit;
            seg.phases.push_back(p);
        }
    } catch (const json::exception& e) {
        throw WceiError(std::string("malformed WCEI document: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw WceiError(std::string("malformed WCEI document: ") + e.what());
    }
    seg.validate();
    return seg;
}

PhaseSegmentation load_document_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw WceiError("cannot open WCEI document '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_document(buffer.str());
}

} // namespace drts
