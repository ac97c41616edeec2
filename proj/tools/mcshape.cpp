// mcshape: multi-component shape measures from label images and polygon sets.
//
// Subcommands: measure, segment, synthesize, invariance, oracle.
// Exit codes: 0 ok, 2 parse/usage error, 3 degenerate shape,
// 4 degenerate histogram, 5 invariance failure.
// Every run is deterministic given flags + input bytes + seed; floats print
// at 17 significant digits. MCSHAPE_THREADS caps internal parallelism.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcshape/mcshape.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDegenerateShape = 3;
constexpr int kExitDegenerateHistogram = 4;
constexpr int kExitInvarianceFailure = 5;

constexpr double kInvarianceTolerance = 1e-10;
constexpr std::size_t kDiscretePixelCap = 400; // N^3 tuple enumeration guard

int thread_cap_from_env() {
    const char* value = std::getenv("MCSHAPE_THREADS");
    if (value == nullptr) return 0;
    const int parsed = std::atoi(value);
    return parsed > 0 ? parsed : 1;
}

bool looks_like_image(const std::vector<std::uint8_t>& bytes) {
    return bytes.size() >= 2 &&
           ((bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) ||
            (bytes[0] == 137 && bytes[1] == 'P'));
}

mcshape::RasterMask mask_from_label_image(const mcshape::LabelImage& li) {
    mcshape::RasterMask mask = mcshape::make_mask(li.width, li.height);
    for (std::size_t idx = 0; idx < li.labels.size(); ++idx)
        mask.grid[idx] = li.labels[idx] != li.background_label ? 1 : 0;
    return mask;
}

std::string json_kv(const std::string& key, const std::string& rendered) {
    return "\"" + key + "\":" + rendered;
}

// ---------------------------------------------------------------------------
// measure
// ---------------------------------------------------------------------------

struct MeasureArgs {
    std::string labels_path;
    std::string polygons_path;
    int background = 0;
    std::string format = "json";
    bool connected = false; // re-split the nonbackground mask into connected regions
    int connectivity = 8;
    bool validate_overlap = false;
    int overlap_resolution = 64;
};

mcshape::MeasureReport measure_label_file(const std::string& path, const MeasureArgs& args) {
    mcshape::LabelImage li = mcshape::read_label(path, args.background);
    if (args.connected) {
        li = mcshape::connected_components(mask_from_label_image(li), args.connectivity);
    }
    const auto shape = mcshape::label_to_components(li);
    mcshape::MeasureOptions options;
    options.validate_overlap = args.validate_overlap;
    options.overlap_resolution = args.overlap_resolution;
    return mcshape::measure_m(shape, options);
}

int run_measure(const MeasureArgs& args) {
    mcshape::MeasureOptions options;
    options.validate_overlap = args.validate_overlap;
    options.overlap_resolution = args.overlap_resolution;

    if (args.labels_path.empty() && args.polygons_path.empty()) {
        // Batch mode: one label-image path per stdin line, one CSV row each.
        if (args.format != "csv") {
            std::cerr << "measure: provide --labels or --polygons (JSON mode has no stdin batch)\n";
            return kExitUsage;
        }
        std::cout << mcshape::measure_csv_header() << "\n";
        std::string line;
        while (std::getline(std::cin, line)) {
            if (line.empty()) continue;
            const mcshape::MeasureReport report = measure_label_file(line, args);
            std::cout << mcshape::measure_csv_row(line, report) << "\n";
        }
        return kExitOk;
    }

    mcshape::MeasureReport report;
    std::string input;
    if (!args.polygons_path.empty()) {
        input = args.polygons_path;
        const auto bytes = mcshape::read_file(args.polygons_path);
        const std::vector<mcshape::PolygonSet> components =
            mcshape::parse_polygon_components(std::string(bytes.begin(), bytes.end()));
        report = mcshape::measure_m(std::span<const mcshape::PolygonSet>(components), options);
    } else {
        input = args.labels_path;
        report = measure_label_file(args.labels_path, args);
    }

    if (args.format == "csv") {
        std::cout << mcshape::measure_csv_header() << "\n"
                  << mcshape::measure_csv_row(input, report) << "\n";
    } else {
        std::cout << mcshape::measure_report_json(report) << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// segment
// ---------------------------------------------------------------------------

struct SegmentArgs {
    std::string input;
    std::string output;
    int median_window = 3;
    int classes = 4;
};

int run_segment(const SegmentArgs& args) {
    const mcshape::GrayImage original = mcshape::read_image(args.input);
    const mcshape::GrayImage filtered = mcshape::median_filter(original, args.median_window);
    const mcshape::OtsuResult otsu = mcshape::multi_otsu(filtered, args.classes);
    mcshape::write_label(args.output, otsu.labels);

    std::vector<long long> class_pixels(static_cast<std::size_t>(args.classes), 0);
    for (int label : otsu.labels.labels) ++class_pixels[static_cast<std::size_t>(label)];

    std::string out = "{" + json_kv("input", "\"" + args.input + "\"");
    out += "," + json_kv("output", "\"" + args.output + "\"");
    out += "," + json_kv("classes", std::to_string(args.classes));
    out += "," + json_kv("median_window", std::to_string(args.median_window));
    out += ",\"thresholds\":[";
    for (std::size_t i = 0; i < otsu.thresholds.size(); ++i) {
        if (i > 0) out.push_back(',');
        out += std::to_string(otsu.thresholds[i]);
    }
    out += "],\"class_pixels\":[";
    for (std::size_t i = 0; i < class_pixels.size(); ++i) {
        if (i > 0) out.push_back(',');
        out += std::to_string(class_pixels[i]);
    }
    out += "]," + json_kv("width", std::to_string(otsu.labels.width));
    out += "," + json_kv("height", std::to_string(otsu.labels.height)) + "}";
    std::cout << out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// synthesize
// ---------------------------------------------------------------------------

struct SynthesizeArgs {
    std::string layout = "grid2x2";
    double side = 1.0;
    double spacing = 1.0;
    int resolution = 32;
    std::string output;
};

int run_synthesize(const SynthesizeArgs& args) {
    const mcshape::LabelImage li =
        mcshape::synthesize_four_squares(args.side, args.spacing, args.resolution);
    mcshape::write_label(args.output, li);

    std::string out = "{" + json_kv("layout", "\"" + args.layout + "\"");
    out += "," + json_kv("side", mcshape::fmt_double(args.side));
    out += "," + json_kv("spacing", mcshape::fmt_double(args.spacing));
    out += "," + json_kv("resolution", std::to_string(args.resolution));
    out += "," + json_kv("width", std::to_string(li.width));
    out += "," + json_kv("height", std::to_string(li.height));
    out += "," + json_kv("output", "\"" + args.output + "\"") + "}";
    std::cout << out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// invariance
// ---------------------------------------------------------------------------

struct InvarianceArgs {
    std::string polygons_path;
    std::string labels_path;
    int trials = 100;
    std::uint64_t seed = 1;
};

mcshape::AffineMap random_nonsingular_map(mcshape::Xoshiro256pp& rng) {
    for (;;) {
        mcshape::AffineMap map{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3),
                               rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
        if (std::abs(map.det()) >= 0.1) return map;
    }
}

int run_invariance(const InvarianceArgs& args) {
    if (!args.labels_path.empty()) {
        std::cerr << "invariance: raster input is refused; the exact-invariance contract lives "
                     "on the polygon path (use --polygons)\n";
        return kExitUsage;
    }
    const auto bytes = mcshape::read_file(args.polygons_path);
    const std::vector<mcshape::PolygonSet> components =
        mcshape::parse_polygon_components(std::string(bytes.begin(), bytes.end()));

    const double m_reference =
        mcshape::measure_m(std::span<const mcshape::PolygonSet>(components)).M;
    mcshape::Xoshiro256pp rng(args.seed);

    std::string rows;
    double max_rel = 0.0;
    for (int trial = 0; trial < args.trials; ++trial) {
        const mcshape::AffineMap map = random_nonsingular_map(rng);
        std::vector<mcshape::PolygonSet> mapped;
        mapped.reserve(components.size());
        for (const mcshape::PolygonSet& poly : components)
            mapped.push_back(mcshape::apply_affine(poly, map));
        const double m_mapped =
            mcshape::measure_m(std::span<const mcshape::PolygonSet>(mapped)).M;
        const double deviation = std::abs(m_mapped - m_reference);
        max_rel = std::max(max_rel, deviation / std::max(1.0, std::abs(m_reference)));

        if (trial > 0) rows.push_back(',');
        rows += "{" + json_kv("trial", std::to_string(trial));
        rows += "," + json_kv("det", mcshape::fmt_double(map.det()));
        rows += "," + json_kv("M", mcshape::fmt_double(m_mapped));
        rows += "," + json_kv("abs_deviation", mcshape::fmt_double(deviation)) + "}";
    }

    const bool pass = max_rel <= kInvarianceTolerance;
    std::string out = "{" + json_kv("input", "\"" + args.polygons_path + "\"");
    out += "," + json_kv("trials", std::to_string(args.trials));
    out += "," + json_kv("seed", std::to_string(args.seed));
    out += "," + json_kv("m_reference", mcshape::fmt_double(m_reference));
    out += "," + json_kv("tolerance", mcshape::fmt_double(kInvarianceTolerance));
    out += "," + json_kv("max_rel_deviation", mcshape::fmt_double(max_rel));
    out += "," + json_kv("pass", pass ? "true" : "false");
    out += ",\"per_trial\":[" + rows + "]}";
    std::cout << out << "\n";
    return pass ? kExitOk : kExitInvarianceFailure;
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

struct OracleArgs {
    std::string shape_path;
    long long samples = 1'000'000;
    std::uint64_t seed = 1;
    bool discrete = false;
};

int run_oracle(const OracleArgs& args) {
    const auto bytes = mcshape::read_file(args.shape_path);

    if (args.discrete) {
        if (!looks_like_image(bytes)) {
            std::cerr << "oracle: --discrete needs a raster mask (PGM/PNG)\n";
            return kExitUsage;
        }
        const mcshape::LabelImage li = mcshape::label_from_gray(mcshape::decode_image(bytes));
        const mcshape::RasterMask mask = mask_from_label_image(li);

        std::vector<mcshape::Point> centers;
        for (int j = 0; j < mask.height; ++j)
            for (int i = 0; i < mask.width; ++i)
                if (mask.occupied(i, j)) centers.push_back({i + 0.5, j + 0.5});
        if (centers.size() > kDiscretePixelCap) {
            std::cerr << "oracle: --discrete refused for " << centers.size()
                      << " pixels (cap " << kDiscretePixelCap
                      << "; the order-3 sum is cubic in the pixel count)\n";
            return kExitUsage;
        }
        if (centers.empty()) throw mcshape::degenerate_shape("mask has no occupied pixels");

        const double sum2 = mcshape::discrete_tuple_sum(centers, 2);
        const double id2 = mcshape::discrete_tuple_identity(centers, 2);
        const double sum3 = mcshape::discrete_tuple_sum(centers, 3);
        const double id3 = mcshape::discrete_tuple_identity(centers, 3);
        auto rel = [](double a, double b) {
            return std::abs(a - b) / std::max(1.0, std::abs(b));
        };

        std::string out = "{" + json_kv("input", "\"" + args.shape_path + "\"");
        out += "," + json_kv("mode", "\"discrete\"");
        out += "," + json_kv("points", std::to_string(centers.size()));
        out += "," + json_kv("order2_sum", mcshape::fmt_double(sum2));
        out += "," + json_kv("order2_identity", mcshape::fmt_double(id2));
        out += "," + json_kv("order2_rel_error", mcshape::fmt_double(rel(sum2, id2)));
        out += "," + json_kv("order3_sum", mcshape::fmt_double(sum3));
        out += "," + json_kv("order3_identity", mcshape::fmt_double(id3));
        out += "," + json_kv("order3_rel_error", mcshape::fmt_double(rel(sum3, id3))) + "}";
        std::cout << out << "\n";
        return kExitOk;
    }

    mcshape::McEstimate estimate;
    mcshape::RawMoments moments;
    const int threads = thread_cap_from_env();
    if (looks_like_image(bytes)) {
        const mcshape::RasterMask mask =
            mask_from_label_image(mcshape::label_from_gray(mcshape::decode_image(bytes)));
        moments = mcshape::raster_raw_moments(mask);
        estimate = mcshape::mc_expected_sq_area(mask, args.samples, args.seed, threads);
    } else {
        // Area-disjoint components merge into one polygon set: the estimand
        // is a property of the union shape.
        const std::vector<mcshape::PolygonSet> components =
            mcshape::parse_polygon_components(std::string(bytes.begin(), bytes.end()));
        mcshape::PolygonSet merged;
        for (const mcshape::PolygonSet& poly : components)
            merged.rings.insert(merged.rings.end(), poly.rings.begin(), poly.rings.end());
        moments = mcshape::polygon_raw_moments(merged);
        estimate = mcshape::mc_expected_sq_area(merged, args.samples, args.seed, threads);
    }

    const double invariant_a = mcshape::affine_invariant_A(
        mcshape::normalized_from_central(mcshape::central_from_raw(moments)));
    const double theoretical = mcshape::expected_sq_area_theoretical(moments.m00, invariant_a);
    const double z = (estimate.mean - theoretical) / estimate.std_error;

    std::string out = "{" + json_kv("input", "\"" + args.shape_path + "\"");
    out += "," + json_kv("mode", "\"monte-carlo\"");
    out += "," + json_kv("n_samples", std::to_string(estimate.n_samples));
    out += "," + json_kv("seed", std::to_string(estimate.seed));
    out += "," + json_kv("area", mcshape::fmt_double(moments.m00));
    out += "," + json_kv("A", mcshape::fmt_double(invariant_a));
    out += "," + json_kv("mean", mcshape::fmt_double(estimate.mean));
    out += "," + json_kv("std_error", mcshape::fmt_double(estimate.std_error));
    out += "," + json_kv("accept_ratio", mcshape::fmt_double(estimate.accept_ratio));
    out += "," + json_kv("theoretical", mcshape::fmt_double(theoretical));
    out += "," + json_kv("z", mcshape::fmt_double(z)) + "}";
    std::cout << out << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-component shape measures (A and M) for label images and polygon sets"};
    app.require_subcommand(1);

    MeasureArgs measure_args;
    CLI::App* measure = app.add_subcommand("measure", "compute M(S) with a per-component report");
    measure->add_option("--labels", measure_args.labels_path, "label image (PGM/PNG, gray = label)");
    measure->add_option("--polygons", measure_args.polygons_path, "polygon components JSON");
    measure->add_option("--background", measure_args.background, "background label (default 0)");
    measure->add_option("--format", measure_args.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    measure->add_flag("--connected", measure_args.connected,
                      "ignore label values and split the nonbackground mask into connected regions");
    measure->add_option("--connectivity", measure_args.connectivity,
                        "pixel adjacency for --connected (4 or 8)")
        ->check(CLI::IsMember({4, 8}));
    measure->add_flag("--validate-overlap", measure_args.validate_overlap,
                      "check components for area overlap");
    measure->add_option("--overlap-resolution", measure_args.overlap_resolution,
                        "overlap check cells per unit")
        ->check(CLI::PositiveNumber);

    SegmentArgs segment_args;
    CLI::App* segment =
        app.add_subcommand("segment", "median filter + k-class Otsu thresholding to a label image");
    segment->add_option("--input", segment_args.input, "grayscale image (PGM/PNG)")->required();
    segment->add_option("--output", segment_args.output, "label PGM to write")->required();
    segment->add_option("--median", segment_args.median_window, "odd median window >= 3");
    segment->add_option("--classes", segment_args.classes, "number of intensity classes (2..4)")
        ->check(CLI::Range(2, 4));

    SynthesizeArgs synthesize_args;
    CLI::App* synthesize =
        app.add_subcommand("synthesize", "render a 4-component square layout as a label image");
    synthesize->add_option("--layout", synthesize_args.layout, "layout name")
        ->check(CLI::IsMember({"grid2x2"}));
    synthesize->add_option("--side", synthesize_args.side, "square side length")->required();
    synthesize->add_option("--spacing", synthesize_args.spacing, "gap between squares")->required();
    synthesize->add_option("--resolution", synthesize_args.resolution, "pixels per unit")
        ->required();
    synthesize->add_option("--output", synthesize_args.output, "label PGM to write")->required();

    InvarianceArgs invariance_args;
    CLI::App* invariance =
        app.add_subcommand("invariance", "verify M under random nonsingular affine maps");
    invariance->add_option("--polygons", invariance_args.polygons_path, "polygon components JSON");
    invariance->add_option("--labels", invariance_args.labels_path,
                           "(refused; raster invariance is approximate)");
    invariance->add_option("--trials", invariance_args.trials, "number of random maps")
        ->check(CLI::PositiveNumber);
    invariance->add_option("--seed", invariance_args.seed, "map-generator seed");

    OracleArgs oracle_args;
    CLI::App* oracle = app.add_subcommand(
        "oracle", "Monte Carlo / exact verification of the squared-triangle-area identity");
    oracle->add_option("--shape", oracle_args.shape_path, "shape input (polygons JSON or mask image)")
        ->required();
    oracle->add_option("--samples", oracle_args.samples, "Monte Carlo triple count (>= 2)");
    oracle->add_option("--seed", oracle_args.seed, "sampling seed");
    oracle->add_flag("--discrete", oracle_args.discrete,
                     "exact tuple sums over occupied pixel centers (<= 400 pixels)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (measure->parsed()) {
            if (!measure_args.labels_path.empty() && !measure_args.polygons_path.empty()) {
                std::cerr << "measure: --labels and --polygons are mutually exclusive\n";
                return kExitUsage;
            }
            return run_measure(measure_args);
        }
        if (segment->parsed()) return run_segment(segment_args);
        if (synthesize->parsed()) return run_synthesize(synthesize_args);
        if (invariance->parsed()) {
            if (invariance_args.polygons_path.empty() && invariance_args.labels_path.empty()) {
                std::cerr << "invariance: --polygons is required\n";
                return kExitUsage;
            }
            return run_invariance(invariance_args);
        }
        if (oracle->parsed()) {
            if (oracle_args.samples < 2 && !oracle_args.discrete) {
                std::cerr << "oracle: --samples must be >= 2\n";
                return kExitUsage;
            }
            return run_oracle(oracle_args);
        }
    } catch (const mcshape::degenerate_histogram& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerateHistogram;
    } catch (const mcshape::degenerate_shape& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerateShape;
    } catch (const mcshape::overlapping_components& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerateShape;
    } catch (const mcshape::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const mcshape::singular_map& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitOk;
}
