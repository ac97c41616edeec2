#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mcshape/error.hpp"

// Shape representations and affine transforms.
//
// Coordinate convention: x grows rightward, y grows downward (image row
// order), origin at the grid corner. A ring is positively oriented when its
// shoelace sum is positive in this frame; outer boundaries are positive,
// holes negative.

namespace mcshape {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

using Ring = std::vector<Point>;

/// One shape bounded by polygonal rings. Rings are implicitly closed
/// (last vertex connects to the first). Holes are negatively oriented rings
/// contained in a positively oriented ring; the net signed area of a valid
/// shape is strictly positive.
struct PolygonSet {
    std::vector<Ring> rings;
};

/// Binary occupancy grid. Pixel (i, j) covers the closed unit square
/// [x0 + i, x0 + i + 1] x [y0 + j, y0 + j + 1]; the mask denotes the union
/// of occupied squares.
struct RasterMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> grid; // row-major, 0/1
    double x0 = 0.0;
    double y0 = 0.0;

    bool occupied(int i, int j) const {
        return i >= 0 && i < width && j >= 0 && j < height &&
               grid[static_cast<std::size_t>(j) * width + i] != 0;
    }
    void set(int i, int j, bool on = true) {
        grid[static_cast<std::size_t>(j) * width + i] = on ? 1 : 0;
    }
    std::size_t pixel_count() const {
        std::size_t n = 0;
        for (std::uint8_t v : grid) n += (v != 0);
        return n;
    }
};

inline RasterMask make_mask(int width, int height, double x0 = 0.0, double y0 = 0.0) {
    if (width < 1 || height < 1) throw std::invalid_argument("mask dimensions must be positive");
    RasterMask m;
    m.width = width;
    m.height = height;
    m.x0 = x0;
    m.y0 = y0;
    m.grid.assign(static_cast<std::size_t>(width) * height, 0);
    return m;
}

struct BoundingBox {
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
};

/// Affine map p -> J p + t with linear part J = (j11 j12; j21 j22).
struct AffineMap {
    double j11 = 1.0, j12 = 0.0;
    double j21 = 0.0, j22 = 1.0;
    double tx = 0.0, ty = 0.0;

    double det() const { return j11 * j22 - j12 * j21; }
    bool singular() const { return std::abs(det()) <= 1e-12; }

    Point apply(Point p) const {
        return {j11 * p.x + j12 * p.y + tx, j21 * p.x + j22 * p.y + ty};
    }

    AffineMap inverse() const {
        const double d = det();
        if (std::abs(d) <= 1e-12) throw singular_map("affine map is singular");
        AffineMap inv;
        inv.j11 = j22 / d;
        inv.j12 = -j12 / d;
        inv.j21 = -j21 / d;
        inv.j22 = j11 / d;
        inv.tx = -(inv.j11 * tx + inv.j12 * ty);
        inv.ty = -(inv.j21 * tx + inv.j22 * ty);
        return inv;
    }

    static AffineMap identity() { return {}; }
    static AffineMap translation(double dx, double dy) { return {1, 0, 0, 1, dx, dy}; }
    static AffineMap scaling(double sx, double sy) { return {sx, 0, 0, sy, 0, 0}; }
};

// ---------------------------------------------------------------------------
// Signed areas and bounding boxes
// ---------------------------------------------------------------------------

/// Shoelace sum / 2; positive for positively oriented rings.
inline double ring_signed_area(const Ring& ring) {
    const std::size_t n = ring.size();
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = ring[i];
        const Point& b = ring[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * twice;
}

inline double net_signed_area(const PolygonSet& poly) {
    double total = 0.0;
    for (const Ring& ring : poly.rings) total += ring_signed_area(ring);
    return total;
}

inline BoundingBox bounding_box(const PolygonSet& poly) {
    if (poly.rings.empty() || poly.rings.front().empty())
        throw degenerate_shape("polygon set has no vertices");
    BoundingBox box{poly.rings[0][0].x, poly.rings[0][0].y, poly.rings[0][0].x, poly.rings[0][0].y};
    for (const Ring& ring : poly.rings) {
        for (const Point& p : ring) {
            box.min_x = std::min(box.min_x, p.x);
            box.min_y = std::min(box.min_y, p.y);
            box.max_x = std::max(box.max_x, p.x);
            box.max_y = std::max(box.max_y, p.y);
        }
    }
    return box;
}

/// Tight bounding box of occupied pixels (in length units).
inline BoundingBox bounding_box(const RasterMask& mask) {
    int min_i = mask.width, min_j = mask.height, max_i = -1, max_j = -1;
    for (int j = 0; j < mask.height; ++j) {
        for (int i = 0; i < mask.width; ++i) {
            if (!mask.occupied(i, j)) continue;
            min_i = std::min(min_i, i);
            min_j = std::min(min_j, j);
            max_i = std::max(max_i, i);
            max_j = std::max(max_j, j);
        }
    }
    if (max_i < 0) throw degenerate_shape("mask has no occupied pixels");
    return {mask.x0 + min_i, mask.y0 + min_j, mask.x0 + max_i + 1, mask.y0 + max_j + 1};
}

// ---------------------------------------------------------------------------
// Point membership
// ---------------------------------------------------------------------------

inline int ring_winding_number(const Ring& ring, double px, double py) {
    const std::size_t n = ring.size();
    int wn = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = ring[i];
        const Point& b = ring[(i + 1) % n];
        const double side = (b.x - a.x) * (py - a.y) - (px - a.x) * (b.y - a.y);
        if (a.y <= py) {
            if (b.y > py && side > 0.0) ++wn;
        } else {
            if (b.y <= py && side < 0.0) --wn;
        }
    }
    return wn;
}

/// Nonzero-winding membership; oppositely oriented hole rings cancel.
inline bool contains(const PolygonSet& poly, double px, double py) {
    int wn = 0;
    for (const Ring& ring : poly.rings) wn += ring_winding_number(ring, px, py);
    return wn != 0;
}

inline bool contains(const RasterMask& mask, double px, double py) {
    const int i = static_cast<int>(std::floor(px - mask.x0));
    const int j = static_cast<int>(std::floor(py - mask.y0));
    return mask.occupied(i, j);
}

// ---------------------------------------------------------------------------
// Affine transforms
// ---------------------------------------------------------------------------

/// Maps every vertex exactly. When det < 0 the ring vertex orders are
/// reversed so orientation invariants still hold.
inline PolygonSet apply_affine(const PolygonSet& poly, const AffineMap& map) {
    if (map.singular()) throw singular_map("affine map is singular");
    PolygonSet out;
    out.rings.reserve(poly.rings.size());
    const bool reflect = map.det() < 0.0;
    for (const Ring& ring : poly.rings) {
        Ring mapped;
        mapped.reserve(ring.size());
        for (const Point& p : ring) mapped.push_back(map.apply(p));
        if (reflect) std::reverse(mapped.begin(), mapped.end());
        out.rings.push_back(std::move(mapped));
    }
    return out;
}

/// Inverse-mapped nearest-neighbor resampling. The output grid keeps the
/// input origin; output pixel (i, j) is occupied iff the preimage of its
/// center lies in an occupied input pixel. Approximate by nature; the exact
/// invariance contract lives on the polygon path.
inline RasterMask apply_affine(const RasterMask& mask, const AffineMap& map,
                               int out_width, int out_height) {
    if (map.singular()) throw singular_map("affine map is singular");
    const AffineMap inv = map.inverse();
    RasterMask out = make_mask(out_width, out_height, mask.x0, mask.y0);
    bool any = false;
    for (int j = 0; j < out_height; ++j) {
        for (int i = 0; i < out_width; ++i) {
            const Point src = inv.apply({mask.x0 + i + 0.5, mask.y0 + j + 0.5});
            if (contains(mask, src.x, src.y)) {
                out.set(i, j);
                any = true;
            }
        }
    }
    if (!any) throw degenerate_shape("transformed mask has no occupied pixels");
    return out;
}

} // namespace mcshape
