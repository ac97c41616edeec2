#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcshape/mcshape.hpp"

// Shared test utilities: canonical shapes, random simple polygons, a raster
// cross-check in world units, a subprocess runner for the CLI, and a small
// structural validator for the shipped JSON schemas.

namespace testutil {

inline double rel_err(double actual, double expected) {
    return std::abs(actual - expected) / std::max(1e-300, std::abs(expected));
}

// ---------------------------------------------------------------------------
// Canonical shapes
// ---------------------------------------------------------------------------

inline mcshape::PolygonSet rect_polygon(double x0, double y0, double x1, double y1) {
    return {{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}}};
}

inline mcshape::PolygonSet unit_square() { return rect_polygon(0, 0, 1, 1); }

inline mcshape::PolygonSet square_centered(double cx, double cy, double side) {
    const double h = side / 2.0;
    return rect_polygon(cx - h, cy - h, cx + h, cy + h);
}

inline mcshape::PolygonSet right_triangle() {
    return {{{{0, 0}, {1, 0}, {0, 1}}}};
}

inline mcshape::PolygonSet disk_polygon(double cx, double cy, double radius, int vertices) {
    mcshape::Ring ring;
    ring.reserve(vertices);
    for (int i = 0; i < vertices; ++i) {
        const double angle = 2.0 * M_PI * i / vertices;
        ring.push_back({cx + radius * std::cos(angle), cy + radius * std::sin(angle)});
    }
    return {{ring}};
}

/// Star-shaped (hence simple) polygon with jittered angles and radii.
inline mcshape::PolygonSet random_star_polygon(mcshape::Xoshiro256pp& rng, int min_vertices = 5,
                                               int max_vertices = 12, double center_span = 5.0) {
    const int nv =
        min_vertices + static_cast<int>(rng.uniform() * (max_vertices - min_vertices + 1));
    const double cx = rng.uniform(-center_span, center_span);
    const double cy = rng.uniform(-center_span, center_span);
    mcshape::Ring ring;
    ring.reserve(nv);
    for (int i = 0; i < nv; ++i) {
        const double angle = 2.0 * M_PI * (i + 0.8 * rng.uniform()) / nv;
        const double radius = rng.uniform(0.3, 1.5);
        ring.push_back({cx + radius * std::cos(angle), cy + radius * std::sin(angle)});
    }
    return {{ring}};
}

/// Disjoint star polygons on a coarse grid (cell pitch 4, shape radius <= 1.5).
inline std::vector<mcshape::PolygonSet> random_disjoint_components(mcshape::Xoshiro256pp& rng,
                                                                   int count) {
    std::vector<mcshape::PolygonSet> components;
    for (int k = 0; k < count; ++k) {
        mcshape::PolygonSet poly = random_star_polygon(rng, 5, 12, 0.4);
        const double dx = 4.0 * (k % 3);
        const double dy = 4.0 * (k / 3);
        for (mcshape::Ring& ring : poly.rings)
            for (mcshape::Point& p : ring) {
                p.x += dx;
                p.y += dy;
            }
        components.push_back(std::move(poly));
    }
    return components;
}

/// Raw moments of the rasterized polygon expressed back in world units
/// (the lattice is scaled by `resolution`, so m_pq rescales by R^(p+q+2)).
inline mcshape::RawMoments raster_world_moments(const mcshape::PolygonSet& poly, int resolution) {
    const mcshape::RasterMask mask = mcshape::rasterize(poly, resolution);
    mcshape::RawMoments m = mcshape::raster_raw_moments(mask);
    const double r = resolution;
    m.m00 /= r * r;
    m.m10 /= r * r * r;
    m.m01 /= r * r * r;
    m.m20 /= r * r * r * r;
    m.m11 /= r * r * r * r;
    m.m02 /= r * r * r * r;
    return m;
}

// ---------------------------------------------------------------------------
// Subprocess runner for CLI tests
// ---------------------------------------------------------------------------

struct CmdResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::filesystem::path test_scratch_dir() {
    const std::filesystem::path dir = std::filesystem::current_path() / "mcshape_test_tmp";
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string cli_binary() {
    const char* bin = std::getenv("MCSHAPE_BIN");
    return bin ? bin : "./tools/mcshape";
}

inline CmdResult run_cli(const std::string& args, const std::string& stdin_data = "",
                         const std::string& env_prefix = "") {
    static int invocation = 0;
    const std::filesystem::path dir = test_scratch_dir();
    const std::string tag = std::to_string(++invocation);
    const std::filesystem::path in_path = dir / ("in" + tag);
    const std::filesystem::path out_path = dir / ("out" + tag);
    const std::filesystem::path err_path = dir / ("err" + tag);

    {
        std::ofstream in(in_path, std::ios::binary);
        in << stdin_data;
    }
    const std::string command = env_prefix + cli_binary() + " " + args + " <" + in_path.string() +
                                " >" + out_path.string() + " 2>" + err_path.string();
    const int status = std::system(command.c_str());

    CmdResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

// ---------------------------------------------------------------------------
// Structural JSON-schema check (type / properties / required / items subset)
// ---------------------------------------------------------------------------

inline bool matches_schema(const nlohmann::json& schema, const nlohmann::json& value,
                           std::string& why) {
    if (schema.contains("type")) {
        const std::string type = schema["type"].get<std::string>();
        const bool ok = (type == "object" && value.is_object()) ||
                        (type == "array" && value.is_array()) ||
                        (type == "string" && value.is_string()) ||
                        (type == "boolean" && value.is_boolean()) ||
                        (type == "integer" && value.is_number_integer()) ||
                        (type == "number" && value.is_number());
        if (!ok) {
            why = "expected type " + type + ", got " + std::string(value.type_name());
            return false;
        }
    }
    if (schema.contains("required")) {
        for (const auto& key : schema["required"]) {
            if (!value.contains(key.get<std::string>())) {
                why = "missing required key " + key.get<std::string>();
                return false;
            }
        }
    }
    if (schema.contains("properties") && value.is_object()) {
        for (const auto& [key, sub] : schema["properties"].items()) {
            if (!value.contains(key)) continue;
            if (!matches_schema(sub, value[key], why)) {
                why = key + ": " + why;
                return false;
            }
        }
    }
    if (schema.contains("items") && value.is_array()) {
        for (std::size_t i = 0; i < value.size(); ++i) {
            if (!matches_schema(schema["items"], value[i], why)) {
                why = "item " + std::to_string(i) + ": " + why;
                return false;
            }
        }
    }
    return true;
}

} // namespace testutil
