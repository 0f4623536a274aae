#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "hmec/env.hpp"
#include "hmec/placement.hpp"

namespace hmec {

/// A UE-count schedule ramps linearly from `ue_start` at epoch 0 to
/// `ue_end` at the last epoch.
struct TrajectorySpec {
    std::size_t horizon = 200;
    std::size_t ue_start = 10;
    std::size_t ue_end = 10;
    bool freeze_placement = false;
    KMeansOptions kmeans;

    std::size_t ues_at(std::size_t t) const {
        if (horizon <= 1 || ue_start == ue_end) return ue_start;
        const double f = static_cast<double>(t) / static_cast<double>(horizon - 1);
        const double n = static_cast<double>(ue_start) + f * (static_cast<double>(ue_end) - static_cast<double>(ue_start));
        return static_cast<std::size_t>(std::llround(n));
    }
};

/// Deterministic world sequence: mobility step, UE-count update, then
/// mobile-node placement, once per epoch.
inline std::vector<WorldState> make_trajectory(const Scenario& scenario, const std::vector<NodeSpec>& nodes,
                                               const TrajectorySpec& spec, std::uint64_t seed) {
    std::vector<WorldState> out;
    out.reserve(spec.horizon);
    WorldState w = init_world(scenario, spec.ues_at(0), nodes, seed);
    Rng rng = make_rng(seed, 0x7A4);
    for (std::size_t t = 0; t < spec.horizon; ++t) {
        if (t > 0) {
            w = step_mobility(w, rng);
            w = resize_ues(w, spec.ues_at(t), rng);
        }
        if (!(spec.freeze_placement && t > 0)) w.nodes = place_mobile_nodes(w, derive_seed(seed, 0x9000 + t), spec.kmeans);
        out.push_back(w);
    }
    return out;
}

} // namespace hmec
