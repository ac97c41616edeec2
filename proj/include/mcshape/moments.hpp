#pragma once

#include <cmath>

#include "mcshape/geometry.hpp"

// Geometric moments up to order 2.
//
// m_pq = integral of x^p y^q over the shape. Raw moments are accumulated in
// coordinates shifted by the bounding-box corner and recentered through the
// Steiner (parallel-axis) identities, which keeps the sums well conditioned
// for shapes far from the origin.

namespace mcshape {

struct RawMoments {
    double m00 = 0.0;
    double m10 = 0.0, m01 = 0.0;
    double m20 = 0.0, m11 = 0.0, m02 = 0.0;
};

struct CentralMoments {
    double a = 0.0;            // area (= m00)
    double xc = 0.0, yc = 0.0; // centroid
    double M20 = 0.0, M11 = 0.0, M02 = 0.0;
};

/// Translation- and scale-invariant second-order moments.
struct NormalizedMoments {
    double mu20 = 0.0, mu11 = 0.0, mu02 = 0.0;
};

namespace detail {

/// Neumaier compensated accumulator; used for large raster sums.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Steiner shift: moments of the same shape in x -> x + dx, y -> y + dy.
inline RawMoments steiner_shift(const RawMoments& m, double dx, double dy) {
    RawMoments out;
    out.m00 = m.m00;
    out.m10 = m.m10 + dx * m.m00;
    out.m01 = m.m01 + dy * m.m00;
    out.m20 = m.m20 + 2.0 * dx * m.m10 + dx * dx * m.m00;
    out.m11 = m.m11 + dx * m.m01 + dy * m.m10 + dx * dy * m.m00;
    out.m02 = m.m02 + 2.0 * dy * m.m01 + dy * dy * m.m00;
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Raw moments
// ---------------------------------------------------------------------------

/// Exact moments of the region bounded by the rings, via the Green's-theorem
/// contour forms. Additive over rings through signed areas, so holes
/// (negatively oriented rings) subtract for free.
inline RawMoments polygon_raw_moments(const PolygonSet& poly) {
    const BoundingBox box = bounding_box(poly);

    double s00 = 0.0, s10 = 0.0, s01 = 0.0, s20 = 0.0, s11 = 0.0, s02 = 0.0;
    for (const Ring& ring : poly.rings) {
        const std::size_t n = ring.size();
        if (n < 3) throw degenerate_shape("ring has fewer than 3 vertices");
        for (std::size_t i = 0; i < n; ++i) {
            const double x1 = ring[i].x - box.min_x;
            const double y1 = ring[i].y - box.min_y;
            const double x2 = ring[(i + 1) % n].x - box.min_x;
            const double y2 = ring[(i + 1) % n].y - box.min_y;
            const double cross = x1 * y2 - x2 * y1;
            s00 += cross;
            s10 += cross * (x1 + x2);
            s01 += cross * (y1 + y2);
            s20 += cross * (x1 * x1 + x1 * x2 + x2 * x2);
            s11 += cross * (2.0 * x1 * y1 + x1 * y2 + x2 * y1 + 2.0 * x2 * y2);
            s02 += cross * (y1 * y1 + y1 * y2 + y2 * y2);
        }
    }

    RawMoments shifted;
    shifted.m00 = s00 / 2.0;
    shifted.m10 = s10 / 6.0;
    shifted.m01 = s01 / 6.0;
    shifted.m20 = s20 / 12.0;
    shifted.m11 = s11 / 24.0;
    shifted.m02 = s02 / 12.0;

    if (!(shifted.m00 > 0.0)) throw degenerate_shape("polygon net signed area is not positive");
    return detail::steiner_shift(shifted, box.min_x, box.min_y);
}

/// Each occupied pixel contributes the exact integral of x^p y^q over its
/// unit square (antiderivative differences), so axis-aligned pixel unions
/// have exact moments. Sums are compensated.
inline RawMoments raster_raw_moments(const RasterMask& mask) {
    detail::CompensatedSum s00, s10, s01, s20, s11, s02;
    bool any = false;
    for (int j = 0; j < mask.height; ++j) {
        const double iy1 = j + 0.5;                          // int of y over [j, j+1]
        const double iy2 = static_cast<double>(j) * j + j + 1.0 / 3.0; // int of y^2
        for (int i = 0; i < mask.width; ++i) {
            if (!mask.occupied(i, j)) continue;
            any = true;
            const double ix1 = i + 0.5;
            const double ix2 = static_cast<double>(i) * i + i + 1.0 / 3.0;
            s00.add(1.0);
            s10.add(ix1);
            s01.add(iy1);
            s20.add(ix2);
            s11.add(ix1 * iy1);
            s02.add(iy2);
        }
    }
    if (!any) throw degenerate_shape("mask has no occupied pixels");

    RawMoments shifted;
    shifted.m00 = s00.value();
    shifted.m10 = s10.value();
    shifted.m01 = s01.value();
    shifted.m20 = s20.value();
    shifted.m11 = s11.value();
    shifted.m02 = s02.value();
    return detail::steiner_shift(shifted, mask.x0, mask.y0);
}

// ---------------------------------------------------------------------------
// Central and normalized moments
// ---------------------------------------------------------------------------

inline CentralMoments central_from_raw(const RawMoments& m) {
    if (!(m.m00 > 0.0)) throw degenerate_shape("moments have non-positive area");
    CentralMoments c;
    c.a = m.m00;
    c.xc = m.m10 / m.m00;
    c.yc = m.m01 / m.m00;
    c.M20 = m.m20 - m.m10 * m.m10 / m.m00;
    c.M11 = m.m11 - m.m10 * m.m01 / m.m00;
    c.M02 = m.m02 - m.m01 * m.m01 / m.m00;
    return c;
}

/// mu_pq = M_pq / a^((p+q+2)/2), which is M_pq / a^2 at order 2.
inline NormalizedMoments normalized_from_central(const CentralMoments& c) {
    if (!(c.a > 0.0)) throw degenerate_shape("central moments have non-positive area");
    const double a2 = c.a * c.a;
    return {c.M20 / a2, c.M11 / a2, c.M02 / a2};
}

/// Floating-point slack on the exact-math positive-semidefinite form
/// M20*M02 - M11^2 >= 0.
inline bool psd_within_slack(const CentralMoments& c) {
    const double form = c.M20 * c.M02 - c.M11 * c.M11;
    return form >= -1e-12 * std::max(1.0, c.M20 * c.M02);
}

} // namespace mcshape
