#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmec/geometry.hpp"
#include "hmec/random.hpp"

namespace hmec {

enum class NodeKind { GS, GV, UAV };

inline const char* to_string(NodeKind k) {
    switch (k) {
    case NodeKind::GS: return "GS";
    case NodeKind::GV: return "GV";
    case NodeKind::UAV: return "UAV";
    }
    return "?";
}

/// Log-distance path loss: gain = min(1, ref_gain * d^-exponent), d the 3-D
/// distance in meters. Air-to-ground links use exponent_air.
struct ChannelModel {
    double ref_gain = 1e-3;
    double exponent_air = 2.0;
    double exponent_ground = 3.0;
    bool rayleigh = false;
};

struct TaskDistribution {
    double cycles_min = 0.5e9;
    double cycles_max = 1.5e9;
    double bits_min = 1e5;
    double bits_max = 1e6;
    double weight = 1.0;
};

enum class TaskChurn { PerEpoch, Fixed };

struct Scenario {
    double zone_width = 50.0;
    double zone_height = 50.0;
    double epoch_seconds = 3.0;
    double bandwidth_hz = 1e6;
    double tx_power_watts = 0.1;
    double noise_watts = 1e-10;
    LineCoeffs road{3.0, 2.0, -180.0};
    double ue_max_speed = 1.0;
    double ue_local_capacity_cps = 1e9;
    double uav_altitude_m = 10.0;
    ChannelModel channel;
    TaskDistribution tasks;
    TaskChurn churn = TaskChurn::PerEpoch;
    std::uint64_t rng_seed = 0;

    Zone zone() const { return {zone_width, zone_height}; }

    void validate() const {
        if (!(zone_width > 0) || !(zone_height > 0))
            throw std::invalid_argument("scenario: zone dimensions must be positive");
        if (!(epoch_seconds > 0)) throw std::invalid_argument("scenario: epoch_seconds must be positive");
        if (!(bandwidth_hz > 0)) throw std::invalid_argument("scenario: bandwidth_hz must be positive");
        if (!(tx_power_watts > 0) || !(noise_watts > 0))
            throw std::invalid_argument("scenario: tx_power_watts and noise_watts must be positive");
        if (!road.valid()) throw std::invalid_argument("scenario: road coefficients need a^2 + b^2 > 0");
        if (ue_max_speed < 0) throw std::invalid_argument("scenario: ue_max_speed must be >= 0");
        if (!(ue_local_capacity_cps > 0))
            throw std::invalid_argument("scenario: ue_local_capacity_cps must be positive");
        if (!(channel.ref_gain > 0 && channel.ref_gain <= 1))
            throw std::invalid_argument("scenario: channel.ref_gain must lie in (0, 1]");
        if (!(channel.exponent_air > 0) || !(channel.exponent_ground > 0))
            throw std::invalid_argument("scenario: path-loss exponents must be positive");
        if (!(tasks.cycles_min > 0) || tasks.cycles_max < tasks.cycles_min)
            throw std::invalid_argument("scenario: task cycles range invalid");
        if (!(tasks.bits_min > 0) || tasks.bits_max < tasks.bits_min)
            throw std::invalid_argument("scenario: task bits range invalid");
        if (tasks.weight < 0) throw std::invalid_argument("scenario: task weight must be >= 0");
    }
};

struct NodeSpec {
    NodeKind kind = NodeKind::GS;
    Point2 position;
    double altitude_m = 0.0;
    double capacity_cps = 0.0;
    double coverage_radius_m = std::numeric_limits<double>::infinity();

    bool is_mobile() const { return kind != NodeKind::GS; }
};

struct Task {
    double cycles = 0.0;
    double bits = 0.0;
    double weight = 1.0;
};

struct UEState {
    Point2 position;
    Point2 velocity;
    Point2 waypoint;
    double speed = 0.0;
    double local_capacity_cps = 1e9;
    Task task;
};

struct WorldState {
    Scenario scenario;
    std::vector<NodeSpec> nodes;
    std::vector<UEState> ues;
    // Small-scale fading per (ue, node), all ones unless Rayleigh is enabled.
    std::vector<std::vector<double>> fading;
    std::uint64_t epoch = 0;

    std::size_t n_ues() const { return ues.size(); }
    std::size_t n_nodes() const { return nodes.size(); }

    friend bool operator==(const WorldState& a, const WorldState& b) {
        auto same_ue = [](const UEState& x, const UEState& y) {
            return x.position == y.position && x.velocity == y.velocity && x.waypoint == y.waypoint &&
                   x.speed == y.speed && x.local_capacity_cps == y.local_capacity_cps &&
                   x.task.cycles == y.task.cycles && x.task.bits == y.task.bits &&
                   x.task.weight == y.task.weight;
        };
        auto same_node = [](const NodeSpec& x, const NodeSpec& y) {
            return x.kind == y.kind && x.position == y.position && x.altitude_m == y.altitude_m &&
                   x.capacity_cps == y.capacity_cps && x.coverage_radius_m == y.coverage_radius_m;
        };
        return a.epoch == b.epoch && a.fading == b.fading &&
               std::equal(a.ues.begin(), a.ues.end(), b.ues.begin(), b.ues.end(), same_ue) &&
               std::equal(a.nodes.begin(), a.nodes.end(), b.nodes.begin(), b.nodes.end(), same_node);
    }
};

inline constexpr double kRoadTolerance = 1e-6;

inline double distance3d(Point2 ue, const NodeSpec& node) {
    const double dz = node.altitude_m;
    return std::sqrt(squared_distance(ue, node.position) + dz * dz);
}

inline bool in_coverage(Point2 ue, const NodeSpec& node) {
    return distance3d(ue, node) <= node.coverage_radius_m;
}

inline void validate_node(const NodeSpec& n, const Scenario& sc) {
    if (!(n.capacity_cps > 0)) throw std::invalid_argument("node: capacity_cps must be positive");
    if (!(n.coverage_radius_m > 0)) throw std::invalid_argument("node: coverage_radius_m must be positive");
    if (!sc.zone().contains(n.position, 1e-9))
        throw std::invalid_argument(std::string("node: ") + to_string(n.kind) + " position outside the zone");
    if (n.kind == NodeKind::GV && sc.road.distance_to(n.position) > kRoadTolerance)
        throw std::invalid_argument("node: GV position is off the road line");
}

namespace detail {

inline Task draw_task(const TaskDistribution& d, Rng& rng) {
    Task t;
    t.cycles = uniform(rng, d.cycles_min, d.cycles_max);
    t.bits = uniform(rng, d.bits_min, d.bits_max);
    t.weight = d.weight;
    return t;
}

inline Point2 draw_point(const Zone& z, Rng& rng) {
    Point2 p;
    p.x = uniform(rng, 0.0, z.width);
    p.y = uniform(rng, 0.0, z.height);
    return p;
}

inline double draw_speed(double max_speed, Rng& rng) {
    // (0, max]: 1 - U with U in [0,1) lies in (0,1].
    return max_speed * (1.0 - uniform01(rng));
}

inline UEState draw_ue(const Scenario& sc, Rng& rng) {
    UEState ue;
    ue.position = draw_point(sc.zone(), rng);
    ue.waypoint = draw_point(sc.zone(), rng);
    ue.speed = draw_speed(sc.ue_max_speed, rng);
    ue.local_capacity_cps = sc.ue_local_capacity_cps;
    ue.task = draw_task(sc.tasks, rng);
    return ue;
}

inline void redraw_fading(WorldState& w, Rng& rng) {
    w.fading.assign(w.ues.size(), std::vector<double>(w.nodes.size(), 1.0));
    if (!w.scenario.channel.rayleigh) return;
    for (auto& row : w.fading)
        for (auto& f : row) f = exponential01(rng);
}

} // namespace detail

inline WorldState init_world(const Scenario& scenario, std::size_t n_ues,
                             const std::vector<NodeSpec>& node_specs, std::uint64_t seed) {
    scenario.validate();
    if (n_ues < 1) throw std::invalid_argument("init_world: need at least one UE");
    if (node_specs.empty()) throw std::invalid_argument("init_world: node list is empty");
    for (const auto& n : node_specs) validate_node(n, scenario);

    WorldState w;
    w.scenario = scenario;
    w.scenario.rng_seed = seed;
    w.nodes = node_specs;
    Rng rng = make_rng(seed, 0x1417);
    w.ues.reserve(n_ues);
    for (std::size_t i = 0; i < n_ues; ++i) w.ues.push_back(detail::draw_ue(scenario, rng));
    detail::redraw_fading(w, rng);
    return w;
}

/// Random-waypoint step: each UE heads for its waypoint at its drawn speed;
/// on arrival it draws a fresh waypoint and speed.
inline WorldState step_mobility(const WorldState& world, Rng& rng) {
    WorldState next = world;
    const Scenario& sc = world.scenario;
    const Zone zone = sc.zone();
    const double dt = sc.epoch_seconds;
    for (auto& ue : next.ues) {
        const Point2 to = ue.waypoint - ue.position;
        const double remaining = norm(to);
        const double reach = ue.speed * dt;
        if (remaining <= reach) {
            ue.velocity = remaining > 0 ? to * (ue.speed / remaining) : Point2{};
            ue.position = ue.waypoint;
            ue.waypoint = detail::draw_point(zone, rng);
            ue.speed = detail::draw_speed(sc.ue_max_speed, rng);
        } else {
            ue.velocity = to * (ue.speed / remaining);
            ue.position = ue.position + ue.velocity * dt;
        }
        const Point2 clamped = zone.clamp(ue.position);
        if (!(clamped == ue.position)) {
            ue.position = clamped;
            ue.waypoint = detail::draw_point(zone, rng);
        }
        if (sc.churn == TaskChurn::PerEpoch) ue.task = detail::draw_task(sc.tasks, rng);
    }
    detail::redraw_fading(next, rng);
    next.epoch = world.epoch + 1;
    return next;
}

/// Grow (new UEs uniform over the zone) or shrink (drop highest indices).
inline WorldState resize_ues(const WorldState& world, std::size_t n, Rng& rng) {
    WorldState next = world;
    if (n < next.ues.size()) next.ues.resize(n);
    while (next.ues.size() < n) next.ues.push_back(detail::draw_ue(world.scenario, rng));
    if (next.ues.size() != world.ues.size()) {
        next.fading.resize(n, std::vector<double>(next.nodes.size(), 1.0));
        if (world.scenario.channel.rayleigh)
            for (std::size_t i = world.ues.size(); i < n; ++i)
                for (auto& f : next.fading[i]) f = exponential01(rng);
    }
    return next;
}

/// Large-scale log-distance gain times an optional small-scale factor.
inline double channel_gain(Point2 ue_pos, const NodeSpec& node, const ChannelModel& ch,
                           double small_scale = 1.0) {
    const double d = distance3d(ue_pos, node);
    const double exponent = node.kind == NodeKind::UAV ? ch.exponent_air : ch.exponent_ground;
    if (d <= 0.0) return 1.0;
    const double g = ch.ref_gain * std::pow(d, -exponent) * small_scale;
    return std::fmin(1.0, g);
}

/// Shannon rate over one orthogonal channel.
inline double link_rate(double gain, const Scenario& sc) {
    const double g = std::fmax(gain, 0.0);
    return sc.bandwidth_hz * std::log2(1.0 + sc.tx_power_watts * g / sc.noise_watts);
}

inline double gain(const WorldState& w, std::size_t ue, std::size_t node) {
    const double f = w.fading.empty() ? 1.0 : w.fading[ue][node];
    return channel_gain(w.ues[ue].position, w.nodes[node], w.scenario.channel, f);
}

/// Per-UE gains to every node, row-major N x M.
inline std::vector<std::vector<double>> gain_matrix(const WorldState& w) {
    std::vector<std::vector<double>> g(w.n_ues(), std::vector<double>(w.n_nodes()));
    for (std::size_t i = 0; i < w.n_ues(); ++i)
        for (std::size_t j = 0; j < w.n_nodes(); ++j) g[i][j] = gain(w, i, j);
    return g;
}

} // namespace hmec
