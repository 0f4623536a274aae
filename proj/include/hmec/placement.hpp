#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "hmec/env.hpp"
#include "hmec/random.hpp"

namespace hmec {

struct KMeansResult {
    std::vector<Point2> centroids;
    std::vector<std::size_t> labels;
    double wcss = 0.0;
    std::size_t iterations = 0;
    std::vector<double> wcss_trace; // of the winning restart, one entry per assignment step
};

struct KMeansOptions {
    std::size_t max_iterations = 100;
    std::size_t restarts = 4;
};

namespace detail {

inline double assign_labels(std::span<const Point2> pts, std::span<const Point2> cents,
                            std::vector<std::size_t>& labels) {
    double wcss = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t c = 0; c < cents.size(); ++c) {
            const double d = squared_distance(pts[i], cents[c]);
            if (d < best) {
                best = d;
                arg = c;
            }
        }
        labels[i] = arg;
        wcss += best;
    }
    return wcss;
}

inline std::vector<Point2> kmeanspp_init(std::span<const Point2> pts, std::size_t k, Rng& rng) {
    std::vector<Point2> cents;
    cents.push_back(pts[uniform_index(rng, pts.size())]);
    std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
    while (cents.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            d2[i] = std::min(d2[i], squared_distance(pts[i], cents.back()));
            total += d2[i];
        }
        if (total <= 0.0) {
            cents.push_back(pts[uniform_index(rng, pts.size())]);
            continue;
        }
        double r = uniform01(rng) * total;
        std::size_t pick = pts.size() - 1;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            r -= d2[i];
            if (r < 0) {
                pick = i;
                break;
            }
        }
        cents.push_back(pts[pick]);
    }
    return cents;
}

inline KMeansResult lloyd(std::span<const Point2> pts, std::vector<Point2> cents, std::size_t max_iterations) {
    KMeansResult r;
    r.labels.assign(pts.size(), 0);
    const std::size_t k = cents.size();
    double wcss = assign_labels(pts, cents, r.labels);
    r.wcss_trace.push_back(wcss);
    for (std::size_t it = 0; it < max_iterations; ++it) {
        std::vector<Point2> sum(k);
        std::vector<std::size_t> cnt(k, 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            sum[r.labels[i]] = sum[r.labels[i]] + pts[i];
            ++cnt[r.labels[i]];
        }
        for (std::size_t c = 0; c < k; ++c)
            if (cnt[c]) cents[c] = sum[c] * (1.0 / static_cast<double>(cnt[c]));
        // empty clusters keep their previous centroid, which cannot raise WCSS
        auto old = r.labels;
        wcss = assign_labels(pts, cents, r.labels);
        r.wcss_trace.push_back(wcss);
        r.iterations = it + 1;
        if (old == r.labels) break;
    }
    r.centroids = std::move(cents);
    r.wcss = wcss;
    return r;
}

} // namespace detail

/// k-means over UE positions (k-means++ seeding, best of several restarts).
/// With fewer distinct positions than k, the centroids are the distinct
/// positions and the remainder sit at `fallback`.
inline KMeansResult cluster_ues(std::span<const Point2> points, std::size_t k, std::uint64_t seed,
                                Point2 fallback = {}, KMeansOptions opt = {}) {
    if (k < 1) throw std::invalid_argument("cluster_ues: k must be >= 1");
    std::vector<Point2> distinct;
    for (const auto& p : points)
        if (std::find(distinct.begin(), distinct.end(), p) == distinct.end()) {
            distinct.push_back(p);
            if (distinct.size() > k) break;
        }
    if (distinct.size() < k) {
        KMeansResult r;
        r.centroids = distinct;
        while (r.centroids.size() < k) r.centroids.push_back(fallback);
        r.labels.assign(points.size(), 0);
        if (!points.empty()) r.wcss = detail::assign_labels(points, r.centroids, r.labels);
        r.wcss_trace = {r.wcss};
        return r;
    }
    Rng rng = make_rng(seed, 0xC1u);
    KMeansResult best;
    best.wcss = std::numeric_limits<double>::infinity();
    for (std::size_t rep = 0; rep < std::max<std::size_t>(1, opt.restarts); ++rep) {
        auto r = detail::lloyd(points, detail::kmeanspp_init(points, k, rng), opt.max_iterations);
        if (r.wcss < best.wcss) best = std::move(r);
    }
    return best;
}

/// Orthogonal projection onto the road, clamped to the in-zone segment.
inline Point2 project_to_road(Point2 p, const LineCoeffs& road, const Zone& zone) {
    if (!road.valid()) throw std::invalid_argument("project_to_road: degenerate line");
    auto seg = clip_line_to_zone(road, zone);
    const Point2 q = orthogonal_projection(p, road);
    if (!seg) return q;
    const double t = (q.x - seg->origin.x) * seg->dir.x + (q.y - seg->origin.y) * seg->dir.y;
    Point2 out = seg->at(std::clamp(t, seg->t_lo, seg->t_hi));
    // Clipping arithmetic can drift the point a few ulps off the line.
    return orthogonal_projection(out, road);
}

/// Re-positions the mobile nodes: k = (#UAV + #GV) centroids; the centroids
/// nearest the road go to the GVs (projected onto it), the rest become UAV
/// ground positions in lexicographic order. GS nodes are untouched.
inline std::vector<NodeSpec> place_mobile_nodes(const WorldState& world, std::uint64_t seed,
                                                KMeansOptions opt = {}) {
    std::vector<std::size_t> uavs, gvs;
    for (std::size_t j = 0; j < world.nodes.size(); ++j) {
        if (world.nodes[j].kind == NodeKind::UAV) uavs.push_back(j);
        if (world.nodes[j].kind == NodeKind::GV) gvs.push_back(j);
    }
    auto nodes = world.nodes;
    const std::size_t k = uavs.size() + gvs.size();
    if (k == 0 || world.ues.empty()) return nodes;

    std::vector<Point2> pts;
    pts.reserve(world.ues.size());
    for (const auto& ue : world.ues) pts.push_back(ue.position);
    const Zone zone = world.scenario.zone();
    const auto& road = world.scenario.road;
    auto centroids = cluster_ues(pts, k, seed, zone.center(), opt).centroids;

    std::vector<std::size_t> order(k);
    for (std::size_t c = 0; c < k; ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return road.distance_to(centroids[a]) < road.distance_to(centroids[b]);
    });
    for (std::size_t g = 0; g < gvs.size(); ++g)
        nodes[gvs[g]].position = project_to_road(centroids[order[g]], road, zone);

    std::vector<Point2> rest;
    for (std::size_t c = gvs.size(); c < k; ++c) rest.push_back(zone.clamp(centroids[order[c]]));
    std::sort(rest.begin(), rest.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    for (std::size_t u = 0; u < uavs.size(); ++u) {
        nodes[uavs[u]].position = rest[u];
        nodes[uavs[u]].altitude_m = world.scenario.uav_altitude_m;
    }
    return nodes;
}

} // namespace hmec
