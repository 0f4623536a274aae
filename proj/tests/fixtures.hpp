#pragma once

#include <vector>

#include "hmec/env.hpp"
#include "hmec/placement.hpp"

namespace hmec::test {

/// GS at (25,25), a GV on the road, two UAVs at the zone center.
inline std::vector<NodeSpec> desk_nodes(const Scenario& sc = {}) {
    std::vector<NodeSpec> v;
    NodeSpec gs;
    gs.kind = NodeKind::GS;
    gs.position = {25, 25};
    gs.capacity_cps = 50e9;
    v.push_back(gs);
    NodeSpec gv;
    gv.kind = NodeKind::GV;
    gv.position = project_to_road(sc.zone().center(), sc.road, sc.zone());
    gv.capacity_cps = 30e9;
    v.push_back(gv);
    for (int k = 0; k < 2; ++k) {
        NodeSpec u;
        u.kind = NodeKind::UAV;
        u.position = sc.zone().center();
        u.altitude_m = sc.uav_altitude_m;
        u.capacity_cps = 15e9;
        u.coverage_radius_m = 25;
        v.push_back(u);
    }
    return v;
}

inline WorldState desk_world(std::size_t n, std::uint64_t seed) {
    Scenario sc;
    WorldState w = init_world(sc, n, desk_nodes(sc), seed);
    w.nodes = place_mobile_nodes(w, seed);
    return w;
}

} // namespace hmec::test
