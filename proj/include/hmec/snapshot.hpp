#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hmec/problem.hpp"

namespace hmec {

/// Epoch register: every UE's inputs (H_i, F_i, D_i, W) and the decisions
/// taken for it at one epoch.
struct EpochSnapshot {
    std::uint64_t epoch = 0;

    // inputs
    std::vector<std::vector<double>> gains; // N x M
    std::vector<double> cycles;
    std::vector<double> bits;
    std::vector<AvgAllocProfile> avg_alloc; // W seen by each UE, N x M

    // raw network outputs, before repair (empty for baselines)
    std::vector<int> raw_assoc;
    std::vector<double> raw_fraction;
    std::vector<std::vector<double>> probs;

    // what was executed
    Assignment executed;
    double objective = 0.0;
    double mean_entropy = 0.0;

    std::size_t size() const { return cycles.size(); }
};

/// Where the W feature comes from.
///  History:  W_t counted from the executed decisions of earlier epochs,
///            identical for every UE of the epoch.
///  Register: UEs are decided in index order and each sees, per node, the
///            allocation per UE that node would give after admitting it,
///            counted from the decisions already in this epoch's register:
///            C_j / (n_j + 1).
enum class AvgAllocSource { History, Register };

/// Per-UE W rows for the Register source, given the association of every UE.
inline std::vector<AvgAllocProfile> register_profiles(std::span<const double> caps, std::span<const int> assoc) {
    std::vector<AvgAllocProfile> rows;
    rows.reserve(assoc.size());
    std::vector<std::size_t> count(caps.size(), 0);
    for (int a : assoc) {
        AvgAllocProfile w(caps.size());
        for (std::size_t j = 0; j < caps.size(); ++j) w[j] = caps[j] / static_cast<double>(count[j] + 1);
        rows.push_back(std::move(w));
        if (a >= 1 && static_cast<std::size_t>(a) <= caps.size()) ++count[static_cast<std::size_t>(a - 1)];
    }
    return rows;
}

/// Fills the input half of a snapshot from the world; every UE gets the
/// same W row.
inline EpochSnapshot register_inputs(const WorldState& w, const AvgAllocProfile& avg_alloc) {
    EpochSnapshot s;
    s.epoch = w.epoch;
    s.gains = gain_matrix(w);
    s.cycles.reserve(w.n_ues());
    s.bits.reserve(w.n_ues());
    for (const auto& ue : w.ues) {
        s.cycles.push_back(ue.task.cycles);
        s.bits.push_back(ue.task.bits);
    }
    s.avg_alloc.assign(w.n_ues(), avg_alloc);
    return s;
}

/// W: per node, the mean allocation over all UEs it served across the
/// history window. Nodes that served nobody fall back to their capacity.
inline AvgAllocProfile compute_avg_alloc(std::span<const EpochSnapshot> history,
                                         std::span<const double> capacities) {
    const std::size_t m = capacities.size();
    std::vector<double> sum(m, 0.0);
    std::vector<std::size_t> count(m, 0);
    for (const auto& snap : history) {
        const auto& asg = snap.executed;
        for (std::size_t i = 0; i < asg.assoc.size(); ++i) {
            const int a = asg.assoc[i];
            if (a <= 0 || static_cast<std::size_t>(a) > m) continue;
            sum[static_cast<std::size_t>(a - 1)] += asg.alloc[i];
            ++count[static_cast<std::size_t>(a - 1)];
        }
    }
    AvgAllocProfile w(m);
    for (std::size_t j = 0; j < m; ++j) w[j] = count[j] ? sum[j] / static_cast<double>(count[j]) : capacities[j];
    return w;
}

inline std::vector<double> capacities(const WorldState& w) {
    std::vector<double> c;
    c.reserve(w.n_nodes());
    for (const auto& n : w.nodes) c.push_back(n.capacity_cps);
    return c;
}

} // namespace hmec
