#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmec/env.hpp"

namespace hmec {

/// Association value 0 means local execution; j >= 1 means edge node j-1.
inline constexpr int kLocal = 0;

struct Assignment {
    std::vector<int> assoc;
    std::vector<double> alloc; // cycles/s granted to each UE

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

enum class Constraint { C1, C2, C3 };

inline const char* to_string(Constraint c) {
    switch (c) {
    case Constraint::C1: return "C1";
    case Constraint::C2: return "C2";
    case Constraint::C3: return "C3";
    }
    return "?";
}

struct Violation {
    Constraint constraint;
    std::size_t index; // UE index for C1/C2, node index for C3
    std::string detail;
};

struct FeasibilityReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    explicit operator bool() const { return ok(); }

    std::string to_text() const {
        if (ok()) return "feasible";
        std::ostringstream os;
        for (std::size_t k = 0; k < violations.size(); ++k) {
            const auto& v = violations[k];
            if (k) os << "; ";
            os << to_string(v.constraint) << (v.constraint == Constraint::C3 ? " node " : " ue ") << v.index
               << ": " << v.detail;
        }
        return os.str();
    }
};

class InfeasibleAssignment : public std::runtime_error {
public:
    explicit InfeasibleAssignment(FeasibilityReport report)
        : std::runtime_error("infeasible assignment: " + report.to_text()), report_(std::move(report)) {}
    const FeasibilityReport& report() const { return report_; }

private:
    FeasibilityReport report_;
};

/// Relative slack allowed on the C3 capacity sum.
inline constexpr double kCapacityRelTol = 1e-12;

inline double local_latency(const UEState& ue) { return ue.task.cycles / ue.local_capacity_cps; }

inline double edge_latency(const UEState& ue, double alloc_cps, double rate_bps) {
    return ue.task.bits / rate_bps + ue.task.cycles / alloc_cps;
}

inline double rate(const WorldState& w, std::size_t ue, std::size_t node) {
    return link_rate(gain(w, ue, node), w.scenario);
}

/// Latency of UE `i` under association `a` (0 = local) with allocation `f`.
inline double latency(const WorldState& w, std::size_t i, int a, double f) {
    const auto& ue = w.ues[i];
    if (a == kLocal) return local_latency(ue);
    const auto j = static_cast<std::size_t>(a - 1);
    return edge_latency(ue, f, rate(w, i, j));
}

inline FeasibilityReport feasible(const WorldState& w, const Assignment& asg) {
    FeasibilityReport r;
    const std::size_t n = w.n_ues(), m = w.n_nodes();
    if (asg.assoc.size() != n || asg.alloc.size() != n) {
        std::ostringstream os;
        os << "assignment length " << asg.assoc.size() << "/" << asg.alloc.size() << " does not match " << n
           << " UEs";
        r.violations.push_back({Constraint::C1, 0, os.str()});
        return r;
    }
    std::vector<double> load(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const int a = asg.assoc[i];
        if (a < 0 || a > static_cast<int>(m)) {
            r.violations.push_back({Constraint::C1, i, "target " + std::to_string(a) + " out of range"});
            continue;
        }
        if (a == kLocal) continue;
        const auto j = static_cast<std::size_t>(a - 1);
        if (!in_coverage(w.ues[i].position, w.nodes[j])) {
            std::ostringstream os;
            os << "outside coverage of node " << j << " (" << distance3d(w.ues[i].position, w.nodes[j])
               << " m > " << w.nodes[j].coverage_radius_m << " m)";
            r.violations.push_back({Constraint::C2, i, os.str()});
        }
        if (!(asg.alloc[i] > 0) || !std::isfinite(asg.alloc[i]))
            r.violations.push_back({Constraint::C3, j, "ue " + std::to_string(i) + " has no allocated resource"});
        else
            load[j] += asg.alloc[i];
    }
    for (std::size_t j = 0; j < m; ++j) {
        const double cap = w.nodes[j].capacity_cps;
        if (load[j] > cap * (1.0 + kCapacityRelTol)) {
            std::ostringstream os;
            os << "allocated " << load[j] << " cycles/s exceeds capacity " << cap;
            r.violations.push_back({Constraint::C3, j, os.str()});
        }
    }
    return r;
}

/// Total weighted latency. Throws InfeasibleAssignment exactly when
/// feasible() reports violations.
inline double objective(const WorldState& w, const Assignment& asg) {
    auto report = feasible(w, asg);
    if (!report) throw InfeasibleAssignment(std::move(report));
    double total = 0.0;
    for (std::size_t i = 0; i < w.n_ues(); ++i)
        total += w.ues[i].task.weight * latency(w, i, asg.assoc[i], asg.alloc[i]);
    return total;
}

/// Minimizer of sum(F_k / f_k) subject to sum(f_k) <= C: f_k proportional
/// to sqrt(F_k), using the whole capacity.
inline std::vector<double> optimal_split(std::span<const double> loads, double capacity) {
    std::vector<double> f(loads.size());
    if (loads.empty()) return f;
    double s = 0.0;
    for (double l : loads) s += std::sqrt(l);
    for (std::size_t k = 0; k < loads.size(); ++k) f[k] = capacity * std::sqrt(loads[k]) / s;
    return f;
}

/// Fills alloc for a given association: local UEs get their own capacity,
/// each node's capacity is split over its UEs by the square-root rule on
/// weighted cycles w_i * F_i.
inline Assignment allocate(const WorldState& w, std::vector<int> assoc) {
    Assignment asg;
    asg.alloc.assign(assoc.size(), 0.0);
    std::vector<std::vector<std::size_t>> members(w.n_nodes());
    for (std::size_t i = 0; i < assoc.size(); ++i) {
        if (assoc[i] == kLocal)
            asg.alloc[i] = w.ues[i].local_capacity_cps;
        else
            members[static_cast<std::size_t>(assoc[i] - 1)].push_back(i);
    }
    for (std::size_t j = 0; j < members.size(); ++j) {
        if (members[j].empty()) continue;
        std::vector<double> loads;
        loads.reserve(members[j].size());
        for (auto i : members[j]) loads.push_back(w.ues[i].task.weight * w.ues[i].task.cycles);
        auto f = optimal_split(loads, w.nodes[j].capacity_cps);
        for (std::size_t k = 0; k < members[j].size(); ++k) asg.alloc[members[j][k]] = f[k];
    }
    asg.assoc = std::move(assoc);
    return asg;
}

/// Precomputed per-world cost tables. With the square-root split the cost of
/// an association vector is
///   sum_local w_i F_i / f_loc_i + sum_offloaded w_i D_i / r_ij
///     + sum_j (sum_{i->j} sqrt(w_i F_i))^2 / C_j,
/// which the optimizers evaluate directly and update incrementally.
struct Instance {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<double> local_cost;             // w_i F_i / f_loc
    std::vector<std::vector<double>> comm_cost; // w_i D_i / r_ij
    std::vector<double> root_load;              // sqrt(w_i F_i)
    std::vector<double> capacity;
    std::vector<std::vector<int>> targets; // feasible associations per UE, local first
    std::vector<std::vector<char>> covered;
    std::vector<std::vector<double>> dist; // 3-D distances

    explicit Instance(const WorldState& w) : n(w.n_ues()), m(w.n_nodes()) {
        local_cost.resize(n);
        comm_cost.assign(n, std::vector<double>(m));
        root_load.resize(n);
        targets.resize(n);
        covered.assign(n, std::vector<char>(m, 0));
        dist.assign(n, std::vector<double>(m));
        for (const auto& node : w.nodes) capacity.push_back(node.capacity_cps);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& ue = w.ues[i];
            const double wt = ue.task.weight;
            local_cost[i] = wt * local_latency(ue);
            root_load[i] = std::sqrt(wt * ue.task.cycles);
            targets[i].push_back(kLocal);
            for (std::size_t j = 0; j < m; ++j) {
                comm_cost[i][j] = wt * ue.task.bits / rate(w, i, j);
                dist[i][j] = distance3d(ue.position, w.nodes[j]);
                covered[i][j] = in_coverage(ue.position, w.nodes[j]) ? 1 : 0;
                if (covered[i][j]) targets[i].push_back(static_cast<int>(j + 1));
            }
        }
    }

    bool allowed(std::size_t i, int a) const {
        return a == kLocal || (a >= 1 && a <= static_cast<int>(m) && covered[i][static_cast<std::size_t>(a - 1)]);
    }

    bool feasible(std::span<const int> assoc) const {
        if (assoc.size() != n) return false;
        for (std::size_t i = 0; i < n; ++i)
            if (!allowed(i, assoc[i])) return false;
        return true;
    }

    double cost(std::span<const int> assoc) const {
        std::vector<double> s(m, 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const int a = assoc[i];
            if (a == kLocal) {
                total += local_cost[i];
            } else {
                const auto j = static_cast<std::size_t>(a - 1);
                total += comm_cost[i][j];
                s[j] += root_load[i];
            }
        }
        for (std::size_t j = 0; j < m; ++j) total += s[j] * s[j] / capacity[j];
        return total;
    }

    /// Space size (M+1)^N, saturating.
    double space_size() const { return std::pow(static_cast<double>(m + 1), static_cast<double>(n)); }
};

/// Running per-node sums so a single-UE move costs O(1) to evaluate.
class IncrementalCost {
public:
    IncrementalCost(const Instance& inst, std::vector<int> assoc) : inst_(&inst), assoc_(std::move(assoc)) {
        sums_.assign(inst.m, 0.0);
        linear_ = 0.0;
        for (std::size_t i = 0; i < inst.n; ++i) {
            const int a = assoc_[i];
            if (a == kLocal) {
                linear_ += inst.local_cost[i];
            } else {
                linear_ += inst.comm_cost[i][static_cast<std::size_t>(a - 1)];
                sums_[static_cast<std::size_t>(a - 1)] += inst.root_load[i];
            }
        }
    }

    double cost() const {
        double total = linear_;
        for (std::size_t j = 0; j < inst_->m; ++j) total += sums_[j] * sums_[j] / inst_->capacity[j];
        return total;
    }

    double delta(std::size_t i, int to) const {
        const int from = assoc_[i];
        if (from == to) return 0.0;
        const double r = inst_->root_load[i];
        double d = 0.0;
        if (from == kLocal) {
            d -= inst_->local_cost[i];
        } else {
            const auto j = static_cast<std::size_t>(from - 1);
            const double s = sums_[j];
            d -= inst_->comm_cost[i][j];
            d += ((s - r) * (s - r) - s * s) / inst_->capacity[j];
        }
        if (to == kLocal) {
            d += inst_->local_cost[i];
        } else {
            const auto j = static_cast<std::size_t>(to - 1);
            const double s = sums_[j];
            d += inst_->comm_cost[i][j];
            d += ((s + r) * (s + r) - s * s) / inst_->capacity[j];
        }
        return d;
    }

    void apply(std::size_t i, int to) {
        const int from = assoc_[i];
        if (from == to) return;
        const double r = inst_->root_load[i];
        if (from == kLocal) {
            linear_ -= inst_->local_cost[i];
        } else {
            linear_ -= inst_->comm_cost[i][static_cast<std::size_t>(from - 1)];
            sums_[static_cast<std::size_t>(from - 1)] -= r;
        }
        if (to == kLocal) {
            linear_ += inst_->local_cost[i];
        } else {
            linear_ += inst_->comm_cost[i][static_cast<std::size_t>(to - 1)];
            sums_[static_cast<std::size_t>(to - 1)] += r;
        }
        assoc_[i] = to;
    }

    const std::vector<int>& assoc() const { return assoc_; }

private:
    const Instance* inst_;
    std::vector<int> assoc_;
    std::vector<double> sums_;
    double linear_ = 0.0;
};

/// Per-node mean allocated compute per served UE; length M.
using AvgAllocProfile = std::vector<double>;

} // namespace hmec
