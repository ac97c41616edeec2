#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mcshape/geometry.hpp"
#include "mcshape/invariants.hpp"

// Image pipeline: median filtering, k-class Otsu thresholding, connected
// component labeling, and conversion of label images into component sets.

namespace mcshape {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // row-major

    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
};

inline GrayImage make_gray(int width, int height, std::uint8_t fill = 0) {
    if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be positive");
    GrayImage g;
    g.width = width;
    g.height = height;
    g.pixels.assign(static_cast<std::size_t>(width) * height, fill);
    return g;
}

/// Integer grid realizing the labeling F: S -> {1..n}; equal labels mean the
/// same component, background_label (default 0) means no component.
struct LabelImage {
    int width = 0;
    int height = 0;
    std::vector<int> labels; // row-major
    int background_label = 0;

    int at(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
    int& at(int x, int y) {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
};

inline LabelImage make_labels(int width, int height, int background_label = 0) {
    if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be positive");
    LabelImage li;
    li.width = width;
    li.height = height;
    li.background_label = background_label;
    li.labels.assign(static_cast<std::size_t>(width) * height, background_label);
    return li;
}

// ---------------------------------------------------------------------------
// Median filter
// ---------------------------------------------------------------------------

/// window x window median; borders handled by edge replication.
inline GrayImage median_filter(const GrayImage& image, int window) {
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("median window must be odd and >= 3");

    GrayImage out = image;
    const int half = window / 2;
    std::vector<std::uint8_t> neighborhood(static_cast<std::size_t>(window) * window);

    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            std::size_t count = 0;
            for (int dy = -half; dy <= half; ++dy) {
                const int sy = std::clamp(y + dy, 0, image.height - 1);
                for (int dx = -half; dx <= half; ++dx) {
                    const int sx = std::clamp(x + dx, 0, image.width - 1);
                    neighborhood[count++] = image.at(sx, sy);
                }
            }
            auto mid = neighborhood.begin() + count / 2;
            std::nth_element(neighborhood.begin(), mid, neighborhood.begin() + count);
            out.at(x, y) = *mid;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Multi-level Otsu thresholding
// ---------------------------------------------------------------------------

struct OtsuResult {
    std::vector<int> thresholds; // k-1 ascending intensities
    LabelImage labels;           // class index per pixel; lowest band = 0
};

namespace detail {

/// Between-class variance is maximized exactly when sum_c s_c^2 / w_c is,
/// with s_c and w_c the intensity sum and count of class c.
class OtsuObjective {
public:
    explicit OtsuObjective(const std::array<std::uint64_t, 256>& histogram) {
        double cum_count = 0.0, cum_sum = 0.0;
        for (int v = 0; v < 256; ++v) {
            cum_count += static_cast<double>(histogram[v]);
            cum_sum += static_cast<double>(histogram[v]) * v;
            count_[v + 1] = cum_count;
            sum_[v + 1] = cum_sum;
        }
    }

    // Class of intensities in (lo, hi], -1 <= lo < hi <= 255.
    double class_score(int lo, int hi) const {
        const double w = count_[hi + 1] - count_[lo + 1];
        if (w <= 0.0) return 0.0;
        const double s = sum_[hi + 1] - sum_[lo + 1];
        return s * s / w;
    }

private:
    std::array<double, 257> count_{};
    std::array<double, 257> sum_{};
};

} // namespace detail

/// Exhaustive search over ascending threshold tuples on the 256-bin
/// histogram. Pixel v gets class c with t_{c-1} < v <= t_c (t_0 = -1,
/// t_k = 255). Ties break to the lexicographically smallest tuple.
inline OtsuResult multi_otsu(const GrayImage& image, int classes) {
    if (classes < 2 || classes > 4) throw std::invalid_argument("classes must be 2, 3, or 4");

    std::array<std::uint64_t, 256> histogram{};
    for (std::uint8_t v : image.pixels) ++histogram[v];

    int populated = 0;
    for (std::uint64_t h : histogram) populated += (h != 0);
    if (populated < classes)
        throw degenerate_histogram("histogram has fewer than " + std::to_string(classes) +
                                   " populated bins");

    const detail::OtsuObjective objective(histogram);

    std::vector<int> best;
    double best_score = -1.0;
    std::vector<int> tuple(classes - 1);

    // Lexicographic scan with strict improvement keeps the smallest maximizer.
    auto scan = [&](auto&& self, int depth, int lo) -> void {
        if (depth == classes - 1) {
            double score = objective.class_score(-1, tuple[0]);
            for (int c = 1; c < classes - 1; ++c) score += objective.class_score(tuple[c - 1], tuple[c]);
            score += objective.class_score(tuple[classes - 2], 255);
            if (score > best_score) {
                best_score = score;
                best = tuple;
            }
            return;
        }
        for (int t = lo; t <= 254 - (classes - 2 - depth); ++t) {
            tuple[depth] = t;
            self(self, depth + 1, t + 1);
        }
    };
    scan(scan, 0, 0);

    OtsuResult result;
    result.thresholds = best;
    result.labels = make_labels(image.width, image.height);
    for (std::size_t idx = 0; idx < image.pixels.size(); ++idx) {
        const int v = image.pixels[idx];
        int cls = classes - 1;
        for (int c = 0; c < classes - 1; ++c) {
            if (v <= best[c]) {
                cls = c;
                break;
            }
        }
        result.labels.labels[idx] = cls;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Connected components
// ---------------------------------------------------------------------------

namespace detail {

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

} // namespace detail

/// Two-pass labeling of occupied pixels. Components are numbered 1..n in
/// first-encounter (row-major) order; background is 0.
inline LabelImage connected_components(const RasterMask& mask, int connectivity = 8) {
    if (connectivity != 4 && connectivity != 8)
        throw std::invalid_argument("connectivity must be 4 or 8");

    LabelImage out = make_labels(mask.width, mask.height);
    std::vector<int> provisional(out.labels.size(), 0);
    detail::UnionFind uf(static_cast<int>(out.labels.size() / 2 + 2));
    int next = 1;

    for (int j = 0; j < mask.height; ++j) {
        for (int i = 0; i < mask.width; ++i) {
            if (!mask.occupied(i, j)) continue;
            const std::size_t idx = static_cast<std::size_t>(j) * mask.width + i;

            int neighbors[4];
            int neighbor_count = 0;
            auto visit = [&](int ni, int nj) {
                if (ni < 0 || nj < 0 || ni >= mask.width || !mask.occupied(ni, nj)) return;
                neighbors[neighbor_count++] =
                    provisional[static_cast<std::size_t>(nj) * mask.width + ni];
            };
            visit(i - 1, j);
            visit(i, j - 1);
            if (connectivity == 8) {
                visit(i - 1, j - 1);
                visit(i + 1, j - 1);
            }

            if (neighbor_count == 0) {
                provisional[idx] = next++;
            } else {
                int lowest = neighbors[0];
                for (int k = 1; k < neighbor_count; ++k) lowest = std::min(lowest, neighbors[k]);
                provisional[idx] = lowest;
                for (int k = 0; k < neighbor_count; ++k) uf.unite(lowest, neighbors[k]);
            }
        }
    }

    // Second pass: roots renumbered in first-encounter order.
    std::vector<int> remap(next, 0);
    int assigned = 0;
    for (std::size_t idx = 0; idx < provisional.size(); ++idx) {
        if (provisional[idx] == 0) continue;
        const int root = uf.find(provisional[idx]);
        if (remap[root] == 0) remap[root] = ++assigned;
        out.labels[idx] = remap[root];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Label image -> components
// ---------------------------------------------------------------------------

/// One mask per distinct nonbackground label, ordered by ascending label
/// value (label gaps allowed). Masks are cropped to their tight bounding box
/// with integer origins, so geometry is preserved exactly.
inline MultiComponentShape<RasterMask> label_to_components(const LabelImage& li) {
    std::vector<int> present;
    for (int v : li.labels) {
        if (v == li.background_label) continue;
        present.push_back(v);
    }
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    if (present.empty())
        throw degenerate_shape("no components: label image has no nonbackground labels");

    MultiComponentShape<RasterMask> shape;
    shape.components.reserve(present.size());
    for (int label : present) {
        int min_x = li.width, min_y = li.height, max_x = -1, max_y = -1;
        for (int y = 0; y < li.height; ++y)
            for (int x = 0; x < li.width; ++x)
                if (li.at(x, y) == label) {
                    min_x = std::min(min_x, x);
                    min_y = std::min(min_y, y);
                    max_x = std::max(max_x, x);
                    max_y = std::max(max_y, y);
                }
        RasterMask mask = make_mask(max_x - min_x + 1, max_y - min_y + 1,
                                    static_cast<double>(min_x), static_cast<double>(min_y));
        for (int y = min_y; y <= max_y; ++y)
            for (int x = min_x; x <= max_x; ++x)
                if (li.at(x, y) == label) mask.set(x - min_x, y - min_y);
        shape.components.push_back(std::move(mask));
    }
    return shape;
}

// ---------------------------------------------------------------------------
// Synthetic four-square layouts
// ---------------------------------------------------------------------------

/// grid2x2 layout: four side-`side` squares centered at (+-c, +-c) with
/// c = (side + spacing) / 2, rendered at `resolution` pixels per unit.
/// Labels run 1..4 in row-major order of the centers.
inline LabelImage synthesize_four_squares(double side, double spacing, int resolution) {
    if (!(side > 0.0)) throw std::invalid_argument("side must be positive");
    if (spacing < 0.0) throw std::invalid_argument("spacing must be nonnegative (squares overlap)");
    if (resolution < 1) throw std::invalid_argument("resolution must be >= 1");

    const double center = (side + spacing) / 2.0;
    const double extent = 2.0 * side + spacing; // full width of the layout
    const int size = std::max(1, static_cast<int>(std::llround(extent * resolution)));

    const std::array<Point, 4> centers{{{-center, -center}, {center, -center},
                                        {-center, center}, {center, center}}};

    LabelImage out = make_labels(size, size);
    for (int y = 0; y < size; ++y) {
        const double wy = -extent / 2.0 + (y + 0.5) / resolution;
        for (int x = 0; x < size; ++x) {
            const double wx = -extent / 2.0 + (x + 0.5) / resolution;
            for (std::size_t k = 0; k < centers.size(); ++k) {
                if (wx >= centers[k].x - side / 2.0 && wx < centers[k].x + side / 2.0 &&
                    wy >= centers[k].y - side / 2.0 && wy < centers[k].y + side / 2.0) {
                    out.at(x, y) = static_cast<int>(k) + 1;
                    break;
                }
            }
        }
    }
    return out;
}

} // namespace mcshape
