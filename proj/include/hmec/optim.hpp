#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmec/problem.hpp"
#include "hmec/random.hpp"

namespace hmec {

enum class Tier { Exhaustive, Heuristic };
enum class RefineMode { Auto, Neighbor, Anneal };

struct OptimizerBudget {
    Tier tier = Tier::Heuristic;
    std::size_t max_evals = 4096; // exhaustive enumeration limit
    std::size_t population = 60;
    std::size_t generations = 100;
    std::size_t tournament = 3;
    double crossover_rate = 0.9;
    bool polish = true; // best-improvement descent on the GA winner

    double sa_initial_temp = 0.0; // <= 0: estimated from random neighbor deltas
    double sa_cooling = 0.95;
    std::size_t sa_steps = 500;
    RefineMode refine = RefineMode::Auto;
    double neighbor_space_limit = 4096; // Auto picks Neighbor when (M+1)^N is at most this

    void validate() const {
        if (max_evals < 1) throw std::invalid_argument("optimizer: max_evals must be >= 1");
        if (!(sa_cooling > 0 && sa_cooling < 1)) throw std::invalid_argument("optimizer: sa_cooling must lie in (0,1)");
        if (population < 2) throw std::invalid_argument("optimizer: population must be >= 2");
        if (tournament < 1) throw std::invalid_argument("optimizer: tournament must be >= 1");
        if (crossover_rate < 0 || crossover_rate > 1)
            throw std::invalid_argument("optimizer: crossover_rate must lie in [0,1]");
    }
};

struct SolveResult {
    Assignment assignment;
    double objective = 0.0;
    std::size_t evals = 0;
};

class TierError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

/// Strict weak order used everywhere a winner is picked: objective, then
/// lexicographic association. Keeps results independent of visit order.
inline bool better(double obj_a, const std::vector<int>& a, double obj_b, const std::vector<int>& b) {
    if (obj_a != obj_b) return obj_a < obj_b;
    return a < b;
}

inline SolveResult finish(const WorldState& w, const Instance& inst, std::vector<int> assoc, std::size_t evals) {
    SolveResult r;
    r.objective = inst.cost(assoc);
    r.assignment = allocate(w, std::move(assoc));
    r.evals = evals;
    return r;
}

} // namespace detail

inline std::vector<int> local_assoc(std::size_t n) { return std::vector<int>(n, kLocal); }

/// Nearest coverage-feasible node by 3-D distance; local when none covers.
inline std::vector<int> greedy_assoc(const Instance& inst) {
    std::vector<int> a(inst.n, kLocal);
    for (std::size_t i = 0; i < inst.n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < inst.m; ++j)
            if (inst.covered[i][j] && inst.dist[i][j] < best) {
                best = inst.dist[i][j];
                a[i] = static_cast<int>(j + 1);
            }
    }
    return a;
}

/// Uniform over {local} plus the covering nodes, per UE.
inline std::vector<int> random_assoc(const Instance& inst, Rng& rng) {
    std::vector<int> a(inst.n);
    for (std::size_t i = 0; i < inst.n; ++i) a[i] = inst.targets[i][uniform_index(rng, inst.targets[i].size())];
    return a;
}

/// Brute force over every feasible association vector.
inline SolveResult solve_exhaustive(const WorldState& w, const OptimizerBudget& budget) {
    const Instance inst(w);
    if (inst.space_size() > static_cast<double>(budget.max_evals))
        throw TierError("solve_exhaustive: search space " + std::to_string(inst.space_size()) +
                        " exceeds budget " + std::to_string(budget.max_evals) + "; use the heuristic tier");
    std::vector<std::size_t> digit(inst.n, 0);
    std::vector<int> cur(inst.n, kLocal);
    std::vector<int> best = cur;
    double best_obj = std::numeric_limits<double>::infinity();
    std::size_t evals = 0;
    while (true) {
        for (std::size_t i = 0; i < inst.n; ++i) cur[i] = inst.targets[i][digit[i]];
        const double obj = inst.cost(cur);
        ++evals;
        if (detail::better(obj, cur, best_obj, best)) {
            best_obj = obj;
            best = cur;
        }
        std::size_t i = 0;
        while (i < inst.n && ++digit[i] == inst.targets[i].size()) digit[i++] = 0;
        if (i == inst.n) break;
    }
    return detail::finish(w, inst, std::move(best), evals);
}

/// Repeated best-improvement sweeps over all single-UE reassignments
/// (Hamming distance 1). Stops at a local optimum or after `max_sweeps`.
inline std::vector<int> neighbor_descent(const Instance& inst, std::vector<int> assoc, std::size_t max_sweeps,
                                         std::size_t& evals) {
    IncrementalCost state(inst, std::move(assoc));
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double best_delta = 0.0;
        std::size_t best_i = 0;
        int best_to = kLocal;
        bool found = false;
        for (std::size_t i = 0; i < inst.n; ++i)
            for (int to : inst.targets[i]) {
                if (to == state.assoc()[i]) continue;
                const double d = state.delta(i, to);
                ++evals;
                // relative guard against accepting float noise as improvement
                if (d < best_delta - 1e-12 * (1.0 + std::abs(state.cost()))) {
                    best_delta = d;
                    best_i = i;
                    best_to = to;
                    found = true;
                }
            }
        if (!found) break;
        state.apply(best_i, best_to);
    }
    return state.assoc();
}

/// Integer-coded genetic algorithm over association vectors. The initial
/// population carries Local, Greedy and ten Random solutions, and the best
/// individual always survives, so the result is never worse than those.
inline SolveResult solve_heuristic(const WorldState& w, const OptimizerBudget& budget, std::uint64_t seed) {
    budget.validate();
    const Instance inst(w);
    Rng rng = make_rng(seed, 0x6A);
    const std::size_t n = inst.n;
    if (n == 0) return detail::finish(w, inst, {}, 0);

    struct Individual {
        std::vector<int> genes;
        double cost;
    };
    std::size_t evals = 0;
    auto make = [&](std::vector<int> g) {
        ++evals;
        const double c = inst.cost(g);
        return Individual{std::move(g), c};
    };

    std::vector<Individual> pop;
    pop.reserve(budget.population);
    pop.push_back(make(local_assoc(n)));
    pop.push_back(make(greedy_assoc(inst)));
    for (int r = 0; r < 10; ++r) pop.push_back(make(random_assoc(inst, rng)));
    while (pop.size() < budget.population) pop.push_back(make(random_assoc(inst, rng)));

    auto best_of = [](const std::vector<Individual>& p) {
        std::size_t b = 0;
        for (std::size_t k = 1; k < p.size(); ++k)
            if (detail::better(p[k].cost, p[k].genes, p[b].cost, p[b].genes)) b = k;
        return b;
    };
    auto tournament = [&]() -> const Individual& {
        std::size_t b = uniform_index(rng, pop.size());
        for (std::size_t t = 1; t < budget.tournament; ++t) {
            std::size_t c = uniform_index(rng, pop.size());
            if (detail::better(pop[c].cost, pop[c].genes, pop[b].cost, pop[b].genes)) b = c;
        }
        return pop[b];
    };

    const double mutation = 1.0 / static_cast<double>(n);
    for (std::size_t gen = 0; gen < budget.generations; ++gen) {
        std::vector<Individual> next;
        next.reserve(pop.size());
        next.push_back(pop[best_of(pop)]);
        while (next.size() < pop.size()) {
            const auto& p1 = tournament();
            const auto& p2 = tournament();
            std::vector<int> child = p1.genes;
            if (uniform01(rng) < budget.crossover_rate)
                for (std::size_t i = 0; i < n; ++i)
                    if (uniform01(rng) < 0.5) child[i] = p2.genes[i];
            for (std::size_t i = 0; i < n; ++i)
                if (uniform01(rng) < mutation) child[i] = inst.targets[i][uniform_index(rng, inst.targets[i].size())];
            next.push_back(make(std::move(child)));
        }
        pop = std::move(next);
    }
    auto best = pop[best_of(pop)].genes;
    if (budget.polish) best = neighbor_descent(inst, std::move(best), std::numeric_limits<std::size_t>::max(), evals);
    return detail::finish(w, inst, std::move(best), evals);
}

/// Sample generator: exhaustive when the space fits the budget, GA otherwise.
inline SolveResult solve_global(const WorldState& w, const OptimizerBudget& budget, std::uint64_t seed) {
    const Instance inst(w);
    if (budget.tier == Tier::Exhaustive || inst.space_size() <= static_cast<double>(budget.max_evals)) {
        if (inst.space_size() <= static_cast<double>(budget.max_evals)) return solve_exhaustive(w, budget);
        throw TierError("solve_global: exhaustive tier requested but search space exceeds budget");
    }
    return solve_heuristic(w, budget, seed);
}

/// Makes any assignment feasible: bad targets go local, UEs outside a UAV's
/// coverage move to the nearest covering node (or local), and every node whose
/// allocations are invalid or oversubscribed is re-split by the square-root rule.
/// Feasible inputs come back unchanged.
inline Assignment repair(const WorldState& w, Assignment asg) {
    const std::size_t n = w.n_ues(), m = w.n_nodes();
    asg.assoc.resize(n, kLocal);
    asg.alloc.resize(n, 0.0);
    std::vector<char> resplit(m, 0);
    for (std::size_t i = 0; i < n; ++i) {
        int& a = asg.assoc[i];
        if (a < 0 || a > static_cast<int>(m)) a = kLocal;
        if (a != kLocal && !in_coverage(w.ues[i].position, w.nodes[static_cast<std::size_t>(a - 1)])) {
            const int old = a;
            a = kLocal;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < m; ++j) {
                const double d = distance3d(w.ues[i].position, w.nodes[j]);
                if (in_coverage(w.ues[i].position, w.nodes[j]) && d < best) {
                    best = d;
                    a = static_cast<int>(j + 1);
                }
            }
            resplit[static_cast<std::size_t>(old - 1)] = 1;
            if (a != kLocal) resplit[static_cast<std::size_t>(a - 1)] = 1;
        }
        if (a == kLocal && !(asg.alloc[i] > 0)) asg.alloc[i] = w.ues[i].local_capacity_cps;
    }
    std::vector<double> load(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (asg.assoc[i] == kLocal) continue;
        const auto j = static_cast<std::size_t>(asg.assoc[i] - 1);
        if (!(asg.alloc[i] > 0) || !std::isfinite(asg.alloc[i])) resplit[j] = 1;
        else load[j] += asg.alloc[i];
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (load[j] > w.nodes[j].capacity_cps * (1.0 + kCapacityRelTol)) resplit[j] = 1;
        if (!resplit[j]) continue;
        std::vector<std::size_t> members;
        std::vector<double> loads;
        for (std::size_t i = 0; i < n; ++i)
            if (asg.assoc[i] == static_cast<int>(j + 1)) {
                members.push_back(i);
                loads.push_back(w.ues[i].task.weight * w.ues[i].task.cycles);
            }
        auto f = optimal_split(loads, w.nodes[j].capacity_cps);
        for (std::size_t k = 0; k < members.size(); ++k) asg.alloc[members[k]] = f[k];
    }
    return asg;
}

namespace detail {

inline std::vector<int> anneal(const Instance& inst, std::vector<int> start, const OptimizerBudget& budget, Rng& rng,
                               std::size_t& evals) {
    IncrementalCost state(inst, std::move(start));
    std::vector<std::size_t> movable;
    for (std::size_t i = 0; i < inst.n; ++i)
        if (inst.targets[i].size() > 1) movable.push_back(i);
    if (movable.empty() || budget.sa_steps == 0) return state.assoc();

    auto propose = [&](std::size_t& i, int& to) {
        i = movable[uniform_index(rng, movable.size())];
        const auto& t = inst.targets[i];
        const int cur = state.assoc()[i];
        do {
            to = t[uniform_index(rng, t.size())];
        } while (to == cur);
    };

    double temp = budget.sa_initial_temp;
    if (temp <= 0) {
        // sample std-dev of 20 random-neighbor deltas
        double s = 0, s2 = 0;
        const int k = 20;
        for (int r = 0; r < k; ++r) {
            std::size_t i;
            int to;
            propose(i, to);
            const double d = state.delta(i, to);
            ++evals;
            s += d;
            s2 += d * d;
        }
        const double mean = s / k;
        temp = std::sqrt(std::fmax(0.0, (s2 - k * mean * mean) / (k - 1)));
        if (!(temp > 0)) temp = 1e-9;
    }

    double cur_cost = state.cost();
    std::vector<int> best = state.assoc();
    double best_cost = cur_cost;
    const std::size_t level = std::max<std::size_t>(1, inst.n);
    for (std::size_t step = 0; step < budget.sa_steps; ++step) {
        std::size_t i;
        int to;
        propose(i, to);
        const double d = state.delta(i, to);
        ++evals;
        if (d <= 0 || uniform01(rng) < std::exp(-d / temp)) {
            state.apply(i, to);
            cur_cost += d;
            if (cur_cost < best_cost) {
                // re-evaluate exactly before accepting a new incumbent
                const double exact = inst.cost(state.assoc());
                cur_cost = exact;
                if (better(exact, state.assoc(), best_cost, best)) {
                    best_cost = exact;
                    best = state.assoc();
                }
            }
        }
        if ((step + 1) % level == 0) temp *= budget.sa_cooling;
    }
    return best;
}

} // namespace detail

/// Local improvement of a feasible action: neighbor enumeration on small
/// spaces, simulated annealing over single-UE moves on large ones. Returns
/// the best point visited, so the objective never increases.
inline SolveResult refine_action(const WorldState& w, const Assignment& asg, const OptimizerBudget& budget,
                                 std::uint64_t seed) {
    budget.validate();
    const Instance inst(w);
    const auto start = repair(w, asg);
    std::size_t evals = 1;
    const double start_obj = objective(w, start);
    if (budget.sa_steps == 0 || inst.n == 0) return SolveResult{start, start_obj, evals};
    RefineMode mode = budget.refine;
    if (mode == RefineMode::Auto)
        mode = inst.space_size() <= budget.neighbor_space_limit ? RefineMode::Neighbor : RefineMode::Anneal;

    std::vector<int> out;
    if (mode == RefineMode::Neighbor) {
        out = neighbor_descent(inst, start.assoc, budget.sa_steps, evals);
    } else {
        Rng rng = make_rng(seed, 0x5A);
        out = detail::anneal(inst, start.assoc, budget, rng, evals);
    }
    const double out_obj = inst.cost(out);
    // The caller's allocation may be worse than the square-root split, so
    // compare against its actual objective.
    if (!(out_obj < start_obj)) return SolveResult{start, start_obj, evals};
    return detail::finish(w, inst, std::move(out), evals);
}

/// Uniform-random exploration in the style of epsilon-greedy: each candidate
/// re-draws every UE's target uniformly with probability `explore_prob`.
/// Returns the best of the start and the candidates.
inline SolveResult explore_random(const WorldState& w, const Assignment& asg, double explore_prob,
                                  std::size_t candidates, std::uint64_t seed) {
    const Instance inst(w);
    const auto start = repair(w, asg);
    Rng rng = make_rng(seed, 0xE9);
    const double start_obj = objective(w, start);
    std::vector<int> best = start.assoc;
    double best_obj = inst.cost(start.assoc);
    std::size_t evals = 1;
    for (std::size_t c = 0; c < candidates; ++c) {
        auto cand = start.assoc;
        for (std::size_t i = 0; i < inst.n; ++i)
            if (uniform01(rng) < explore_prob) cand[i] = inst.targets[i][uniform_index(rng, inst.targets[i].size())];
        const double obj = inst.cost(cand);
        ++evals;
        if (obj < best_obj) {
            best_obj = obj;
            best = std::move(cand);
        }
    }
    if (!(best_obj < start_obj)) return SolveResult{start, start_obj, evals};
    return detail::finish(w, inst, std::move(best), evals);
}

} // namespace hmec
