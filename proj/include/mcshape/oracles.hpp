#pragma once

#include <atomic>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "mcshape/invariants.hpp"
#include "mcshape/rng.hpp"

// Independent verification machinery: a Monte Carlo estimator for the
// expected squared triangle area, exact brute-force tuple sums over point
// sets, and a high-resolution rasterization cross-check for the measure.

namespace mcshape {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long long n_samples = 0;
    std::uint64_t seed = 0;
    double accept_ratio = 1.0; // rejection-sampling acceptance (1 for masks)
};

/// E[Area(ABC)^2] for A, B, C drawn uniformly from a shape of area a equals
/// (3/2) * a^2 * A(S).
inline double expected_sq_area_theoretical(double area, double invariant_a) {
    return 1.5 * area * area * invariant_a;
}

namespace detail {

inline double squared_triangle_area(Point a, Point b, Point c) {
    const double d = (a.x - c.x) * (b.y - c.y) - (a.y - c.y) * (b.x - c.x);
    return 0.25 * d * d;
}

struct PolygonSampler {
    const PolygonSet* poly;
    BoundingBox box;

    explicit PolygonSampler(const PolygonSet& p) : poly(&p), box(bounding_box(p)) {
        if (!(net_signed_area(p) > 0.0))
            throw degenerate_shape("polygon net signed area is not positive");
    }

    Point sample(Xoshiro256pp& rng, long long& attempts) const {
        for (;;) {
            ++attempts;
            const Point p{box.min_x + box.width() * rng.uniform(),
                          box.min_y + box.height() * rng.uniform()};
            if (contains(*poly, p.x, p.y)) return p;
        }
    }
};

/// Rejection-free: a uniformly random occupied pixel, then a uniform point
/// within its unit square.
struct RasterSampler {
    const RasterMask* mask;
    std::vector<std::pair<int, int>> occupied;

    explicit RasterSampler(const RasterMask& m) : mask(&m) {
        for (int j = 0; j < m.height; ++j)
            for (int i = 0; i < m.width; ++i)
                if (m.occupied(i, j)) occupied.emplace_back(i, j);
        if (occupied.empty()) throw degenerate_shape("mask has no occupied pixels");
    }

    Point sample(Xoshiro256pp& rng, long long& attempts) const {
        ++attempts;
        std::size_t idx = static_cast<std::size_t>(rng.uniform() * occupied.size());
        if (idx >= occupied.size()) idx = occupied.size() - 1;
        const auto [i, j] = occupied[idx];
        return {mask->x0 + i + rng.uniform(), mask->y0 + j + rng.uniform()};
    }
};

struct ShardPartial {
    double sum = 0.0;
    double sum_sq = 0.0;
    long long attempts = 0;
};

inline int resolve_thread_count(int requested, std::size_t shard_count) {
    int threads = requested;
    if (threads <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        threads = hw == 0 ? 1 : static_cast<int>(hw);
    }
    if (static_cast<std::size_t>(threads) > shard_count)
        threads = static_cast<int>(shard_count);
    return std::max(threads, 1);
}

// Sampling is sharded into fixed-size blocks with per-shard derived seeds and
// reduced in shard order, so the estimate is bitwise independent of the
// thread count.
constexpr long long kMcShardSize = 1LL << 16;

template <class Sampler>
McEstimate mc_estimate(const Sampler& sampler, long long n, std::uint64_t seed, int threads) {
    if (n < 2) throw std::invalid_argument("Monte Carlo sample count must be >= 2");

    const std::size_t shard_count = static_cast<std::size_t>((n + kMcShardSize - 1) / kMcShardSize);
    std::vector<ShardPartial> partials(shard_count);

    auto run_shard = [&](std::size_t shard) {
        Xoshiro256pp rng(shard_seed(seed, shard));
        const long long begin = static_cast<long long>(shard) * kMcShardSize;
        const long long end = std::min(n, begin + kMcShardSize);
        ShardPartial part;
        for (long long s = begin; s < end; ++s) {
            const Point a = sampler.sample(rng, part.attempts);
            const Point b = sampler.sample(rng, part.attempts);
            const Point c = sampler.sample(rng, part.attempts);
            const double value = squared_triangle_area(a, b, c);
            part.sum += value;
            part.sum_sq += value * value;
        }
        partials[shard] = part;
    };

    const int worker_count = resolve_thread_count(threads, shard_count);
    if (worker_count == 1) {
        for (std::size_t shard = 0; shard < shard_count; ++shard) run_shard(shard);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(worker_count);
        for (int w = 0; w < worker_count; ++w) {
            workers.emplace_back([&] {
                for (;;) {
                    const std::size_t shard = next.fetch_add(1);
                    if (shard >= shard_count) return;
                    run_shard(shard);
                }
            });
        }
        for (auto& worker : workers) worker.join();
    }

    double sum = 0.0, sum_sq = 0.0;
    long long attempts = 0;
    for (const ShardPartial& part : partials) {
        sum += part.sum;
        sum_sq += part.sum_sq;
        attempts += part.attempts;
    }

    McEstimate est;
    est.n_samples = n;
    est.seed = seed;
    est.mean = sum / static_cast<double>(n);
    const double variance =
        std::max(0.0, (sum_sq - static_cast<double>(n) * est.mean * est.mean) /
                          static_cast<double>(n - 1));
    est.std_error = std::sqrt(variance / static_cast<double>(n));
    est.accept_ratio = static_cast<double>(3 * n) / static_cast<double>(attempts);
    return est;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Monte Carlo estimator
// ---------------------------------------------------------------------------

/// Sample mean (and standard error) of the squared area of triangles whose
/// vertices are drawn independently and uniformly from the shape. The
/// estimand is (3/2) * a^2 * A(S). `threads` <= 0 picks the hardware count.
inline McEstimate mc_expected_sq_area(const PolygonSet& poly, long long n, std::uint64_t seed,
                                      int threads = 0) {
    return detail::mc_estimate(detail::PolygonSampler(poly), n, seed, threads);
}

inline McEstimate mc_expected_sq_area(const RasterMask& mask, long long n, std::uint64_t seed,
                                      int threads = 0) {
    return detail::mc_estimate(detail::RasterSampler(mask), n, seed, threads);
}

// ---------------------------------------------------------------------------
// Exact discrete tuple sums
// ---------------------------------------------------------------------------

/// Brute-force sum over all ordered tuples of points, in centroid-centered
/// coordinates. Order 3 sums squared triangle areas over N^3 triples; order 2
/// sums (x*v - y*u)^2 / 4 over N^2 pairs.
inline double discrete_tuple_sum(std::span<const Point> points, int order) {
    if (points.empty()) throw std::invalid_argument("point set is empty");
    if (order != 2 && order != 3) throw std::invalid_argument("order must be 2 or 3");

    const std::size_t n = points.size();
    double cx = 0.0, cy = 0.0;
    for (const Point& p : points) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);

    std::vector<Point> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = {points[i].x - cx, points[i].y - cy};

    double total = 0.0;
    if (order == 2) {
        for (const Point& p : centered)
            for (const Point& q : centered) {
                const double d = p.x * q.y - p.y * q.x;
                total += 0.25 * d * d;
            }
    } else {
        for (const Point& p : centered)
            for (const Point& q : centered)
                for (const Point& r : centered) total += detail::squared_triangle_area(p, q, r);
    }
    return total;
}

/// What the tuple sum must equal by the moment identities:
/// order 2 -> (M20*M02 - M11^2) / 2,  order 3 -> (3N/2) * (M20*M02 - M11^2),
/// with Mpq the discrete central moments of the point set.
inline double discrete_tuple_identity(std::span<const Point> points, int order) {
    if (points.empty()) throw std::invalid_argument("point set is empty");
    if (order != 2 && order != 3) throw std::invalid_argument("order must be 2 or 3");

    const std::size_t n = points.size();
    double cx = 0.0, cy = 0.0;
    for (const Point& p : points) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);

    double m20 = 0.0, m11 = 0.0, m02 = 0.0;
    for (const Point& p : points) {
        const double dx = p.x - cx;
        const double dy = p.y - cy;
        m20 += dx * dx;
        m11 += dx * dy;
        m02 += dy * dy;
    }
    const double form = m20 * m02 - m11 * m11;
    return order == 2 ? 0.5 * form : 1.5 * static_cast<double>(n) * form;
}

// ---------------------------------------------------------------------------
// Rasterization cross-check
// ---------------------------------------------------------------------------

/// Renders a polygon onto the integer lattice of the frame scaled by
/// `resolution` pixels per length unit; a pixel is occupied iff its center is
/// inside the shape (holes respected). The mask lives in scaled coordinates:
/// one mask unit is 1/resolution of a world unit.
inline RasterMask rasterize(const PolygonSet& poly, int resolution) {
    if (resolution < 1) throw std::invalid_argument("resolution must be >= 1");
    const BoundingBox box = bounding_box(poly);
    const double r = resolution;

    const long long i0 = static_cast<long long>(std::floor(box.min_x * r));
    const long long j0 = static_cast<long long>(std::floor(box.min_y * r));
    const long long i1 = static_cast<long long>(std::ceil(box.max_x * r));
    const long long j1 = static_cast<long long>(std::ceil(box.max_y * r));
    const long long width = std::max<long long>(i1 - i0, 1);
    const long long height = std::max<long long>(j1 - j0, 1);
    if (width * height > (1LL << 28))
        throw std::invalid_argument("rasterization grid too large; lower the resolution");

    RasterMask mask = make_mask(static_cast<int>(width), static_cast<int>(height),
                                static_cast<double>(i0), static_cast<double>(j0));
    bool any = false;
    for (long long j = 0; j < height; ++j) {
        const double y = (j0 + j + 0.5) / r;
        for (long long i = 0; i < width; ++i) {
            const double x = (i0 + i + 0.5) / r;
            if (contains(poly, x, y)) {
                mask.set(static_cast<int>(i), static_cast<int>(j));
                any = true;
            }
        }
    }
    if (!any) throw degenerate_shape("polygon rasterizes to zero pixels");
    return mask;
}

/// Cross-validates the polygon-path measure by rasterizing every component
/// on a shared lattice and running the raster backend. Reported areas are
/// rescaled back to world units; A and M are scale invariant and unaffected.
inline MeasureReport highres_raster_oracle(std::span<const PolygonSet> components, int resolution) {
    if (resolution < 4) throw std::invalid_argument("oracle resolution must be >= 4");
    if (components.empty()) throw degenerate_shape("no components");

    std::vector<RasterMask> masks;
    masks.reserve(components.size());
    for (const PolygonSet& poly : components) masks.push_back(rasterize(poly, resolution));

    MeasureReport report = measure_m(std::span<const RasterMask>(masks));
    const double scale2 = static_cast<double>(resolution) * resolution;
    report.area_total /= scale2;
    for (ComponentEntry& entry : report.per_component) entry.area /= scale2;
    return report;
}

inline MeasureReport highres_raster_oracle(const MultiComponentShape<PolygonSet>& shape,
                                           int resolution) {
    return highres_raster_oracle(std::span<const PolygonSet>(shape.components), resolution);
}

} // namespace mcshape
