#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "mcshape/invariants.hpp"

// JSON interfaces.
//
// Polygon input: {"components": [{"rings": [[[x, y], ...], ...]}, ...]} with
// outer rings positively oriented (positive shoelace in the x-right/y-down
// frame) and holes negatively oriented. Report output is emitted with every
// floating-point value printed at 17 significant digits so equal inputs give
// byte-identical files.

namespace mcshape {

/// Shortest-of-17-significant-digits rendering; round-trips any double.
inline std::string fmt_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

inline std::vector<PolygonSet> parse_polygon_components(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("polygon JSON parse error: ") + e.what());
    }

    if (!doc.is_object() || !doc.contains("components") || !doc["components"].is_array())
        throw io_error("polygon JSON must be an object with a \"components\" array");

    std::vector<PolygonSet> components;
    for (const auto& comp : doc["components"]) {
        if (!comp.is_object() || !comp.contains("rings") || !comp["rings"].is_array())
            throw io_error("each component must be an object with a \"rings\" array");
        PolygonSet poly;
        for (const auto& ring_json : comp["rings"]) {
            if (!ring_json.is_array() || ring_json.size() < 3)
                throw io_error("each ring must be an array of at least 3 [x, y] vertices");
            Ring ring;
            for (const auto& vertex : ring_json) {
                if (!vertex.is_array() || vertex.size() != 2 || !vertex[0].is_number() ||
                    !vertex[1].is_number())
                    throw io_error("each vertex must be a [x, y] number pair");
                ring.push_back({vertex[0].get<double>(), vertex[1].get<double>()});
            }
            poly.rings.push_back(std::move(ring));
        }
        if (poly.rings.empty()) throw io_error("component has no rings");
        components.push_back(std::move(poly));
    }
    if (components.empty()) throw io_error("polygon JSON has no components");
    return components;
}

inline std::string measure_report_json(const MeasureReport& report) {
    std::string out = "{\"n\":" + std::to_string(report.n);
    out += ",\"area_total\":" + fmt_double(report.area_total);
    out += ",\"components\":[";
    for (std::size_t k = 0; k < report.per_component.size(); ++k) {
        if (k > 0) out.push_back(',');
        out += "{\"area\":" + fmt_double(report.per_component[k].area);
        out += ",\"A\":" + fmt_double(report.per_component[k].A) + "}";
    }
    out += "],\"A_union\":" + fmt_double(report.A_union);
    out += ",\"M\":" + fmt_double(report.M) + "}";
    return out;
}

// CSV column order is frozen: input,n,area_total,A_union,M
inline std::string measure_csv_header() { return "input,n,area_total,A_union,M"; }

inline std::string measure_csv_row(const std::string& input, const MeasureReport& report) {
    return input + "," + std::to_string(report.n) + "," + fmt_double(report.area_total) + "," +
           fmt_double(report.A_union) + "," + fmt_double(report.M);
}

} // namespace mcshape
