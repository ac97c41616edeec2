#pragma once

#include <concepts>
#include <numeric>
#include <span>
#include <tuple>
#include <vector>

#include "mcshape/moments.hpp"

// The affine invariant A(S) = mu20*mu02 - mu11^2 and the multi-component
// measure M(S) = A(union) - sum_i (a_i / a_total)^4 * A(S_i).

namespace mcshape {

template <class S>
concept ShapeLike = requires(const S& s, double x) {
    { raw_moments(s) } -> std::same_as<RawMoments>;
    { contains(s, x, x) } -> std::same_as<bool>;
    { bounding_box(s) } -> std::same_as<BoundingBox>;
};

inline RawMoments raw_moments(const PolygonSet& poly) { return polygon_raw_moments(poly); }
inline RawMoments raw_moments(const RasterMask& mask) { return raster_raw_moments(mask); }

/// Ordered list of pairwise area-disjoint components. Components need not be
/// topologically connected; a "component" is whatever the caller declares one.
template <ShapeLike S>
struct MultiComponentShape {
    std::vector<S> components;
};

using PolygonComponents = MultiComponentShape<PolygonSet>;
using RasterComponents = MultiComponentShape<RasterMask>;

struct ComponentEntry {
    double area = 0.0;
    double A = 0.0;
};

struct MeasureReport {
    int n = 0;
    double area_total = 0.0;
    std::vector<ComponentEntry> per_component;
    double A_union = 0.0;
    double M = 0.0;
};

struct MeasureOptions {
    bool validate_overlap = false; // label-collision check, off by default
    int overlap_resolution = 64;   // sample cells per length unit
};

// ---------------------------------------------------------------------------
// The invariant A and its un-normalized form
// ---------------------------------------------------------------------------

/// A(S) = mu20*mu02 - mu11^2. Nonnegative in exact arithmetic; values within
/// 1e-15 below zero are rounding residue and clamp to 0.
inline double affine_invariant_A(const NormalizedMoments& mu) {
    double value = mu.mu20 * mu.mu02 - mu.mu11 * mu.mu11;
    if (value < 0.0 && value >= -1e-15) value = 0.0;
    return value;
}

inline double affine_invariant_A(const CentralMoments& c) {
    return affine_invariant_A(normalized_from_central(c));
}

/// Un-normalized form M20*M02 - M11^2 = a^4 * A(S). Near-degenerate shapes
/// can land a rounding hair below zero; those clamp to 0.
inline double component_term(const CentralMoments& c) {
    if (!(c.a > 0.0)) throw degenerate_shape("central moments have non-positive area");
    double value = c.M20 * c.M02 - c.M11 * c.M11;
    if (value < 0.0 && value >= -1e-12 * std::max(1.0, c.M20 * c.M02)) value = 0.0;
    return value;
}

// ---------------------------------------------------------------------------
// Overlap validation (optional)
// ---------------------------------------------------------------------------

namespace detail {

/// Rasterizes all components onto one sample lattice and looks for label
/// collisions. Pipelines built from label images are disjoint by
/// construction, which is why this is opt-in.
template <ShapeLike S>
void check_disjoint(std::span<const S> components, int cells_per_unit) {
    if (cells_per_unit < 1) throw std::invalid_argument("overlap resolution must be >= 1");

    BoundingBox box = bounding_box(components[0]);
    for (std::size_t k = 1; k < components.size(); ++k) {
        const BoundingBox b = bounding_box(components[k]);
        box.min_x = std::min(box.min_x, b.min_x);
        box.min_y = std::min(box.min_y, b.min_y);
        box.max_x = std::max(box.max_x, b.max_x);
        box.max_y = std::max(box.max_y, b.max_y);
    }

    const long long nx = static_cast<long long>(std::ceil(box.width() * cells_per_unit)) + 1;
    const long long ny = static_cast<long long>(std::ceil(box.height() * cells_per_unit)) + 1;
    if (nx * ny > (1LL << 26))
        throw std::invalid_argument("overlap validation grid too large; lower the resolution");

    const double step = 1.0 / cells_per_unit;
    for (long long j = 0; j < ny; ++j) {
        const double y = box.min_y + (j + 0.5) * step;
        for (long long i = 0; i < nx; ++i) {
            const double x = box.min_x + (i + 0.5) * step;
            int owner = -1;
            for (std::size_t k = 0; k < components.size(); ++k) {
                if (!contains(components[k], x, y)) continue;
                if (owner >= 0)
                    throw overlapping_components("components " + std::to_string(owner) + " and " +
                                                 std::to_string(k) + " overlap near (" +
                                                 std::to_string(x) + ", " + std::to_string(y) + ")");
                owner = static_cast<int>(k);
            }
        }
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// The measure M
// ---------------------------------------------------------------------------

/// Computes M(S) with a per-component report. Union moments are the sums of
/// per-component raw moments, exact because components are area-disjoint.
/// All reductions run in a canonical order (components sorted by their moment
/// tuples), so M is bitwise identical under component reordering.
template <ShapeLike S>
MeasureReport measure_m(std::span<const S> components, const MeasureOptions& options = {}) {
    if (components.empty()) throw degenerate_shape("no components");
    if (options.validate_overlap && components.size() > 1)
        detail::check_disjoint(components, options.overlap_resolution);

    std::vector<RawMoments> raw(components.size());
    std::vector<double> a_values(components.size());
    for (std::size_t k = 0; k < components.size(); ++k) {
        try {
            raw[k] = raw_moments(components[k]);
        } catch (const degenerate_shape&) {
            throw degenerate_shape("component " + std::to_string(k) + " is degenerate");
        }
        a_values[k] = affine_invariant_A(central_from_raw(raw[k]));
    }

    std::vector<std::size_t> order(components.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        const RawMoments& a = raw[lhs];
        const RawMoments& b = raw[rhs];
        return std::tie(a.m00, a.m10, a.m01, a.m20, a.m11, a.m02) <
               std::tie(b.m00, b.m10, b.m01, b.m20, b.m11, b.m02);
    });

    RawMoments union_raw;
    for (std::size_t k : order) {
        union_raw.m00 += raw[k].m00;
        union_raw.m10 += raw[k].m10;
        union_raw.m01 += raw[k].m01;
        union_raw.m20 += raw[k].m20;
        union_raw.m11 += raw[k].m11;
        union_raw.m02 += raw[k].m02;
    }

    MeasureReport report;
    report.n = static_cast<int>(components.size());
    report.area_total = union_raw.m00;
    report.A_union = affine_invariant_A(central_from_raw(union_raw));

    report.per_component.resize(components.size());
    for (std::size_t k = 0; k < components.size(); ++k)
        report.per_component[k] = {raw[k].m00, a_values[k]};

    double weighted_sum = 0.0;
    for (std::size_t k : order) {
        const double weight = raw[k].m00 / report.area_total;
        const double w2 = weight * weight;
        weighted_sum += w2 * w2 * a_values[k];
    }
    // Not clamped: a negative M, should one ever arise, is reported as-is.
    report.M = report.A_union - weighted_sum;
    return report;
}

template <ShapeLike S>
MeasureReport measure_m(const MultiComponentShape<S>& shape, const MeasureOptions& options = {}) {
    return measure_m(std::span<const S>(shape.components), options);
}

} // namespace mcshape
