#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmec/memory.hpp"
#include "hmec/net.hpp"
#include "hmec/optim.hpp"
#include "hmec/snapshot.hpp"
#include "hmec/trajectory.hpp"

namespace hmec {

enum class BaselineKind { Random, Greedy, Local };

/// How the DNN controller's entropy threshold is chosen.
///  Fixed:      the configured value.
///  HalfMax:    half of the maximum entropy, 0.5 ln(M+1).
///  Calibrated: the pretrained net's mean output entropy on its corpus.
enum class ThresholdRule { Fixed, HalfMax, Calibrated };

// ---------------------------------------------------------------------------
// Shared pieces

/// Rolling window of executed epochs from which W is counted.
class AllocHistory {
public:
    explicit AllocHistory(std::size_t window = 10) : window_(window) {}

    void push(const EpochSnapshot& s) {
        EpochSnapshot slim;
        slim.epoch = s.epoch;
        slim.executed = s.executed;
        snaps_.push_back(std::move(slim));
        while (snaps_.size() > window_) snaps_.pop_front();
    }

    AvgAllocProfile profile(std::span<const double> caps) const {
        std::vector<EpochSnapshot> v(snaps_.begin(), snaps_.end());
        return compute_avg_alloc(v, caps);
    }

    std::size_t window() const { return window_; }
    const std::deque<EpochSnapshot>& snapshots() const { return snaps_; }
    void clear() { snaps_.clear(); }

private:
    std::size_t window_;
    std::deque<EpochSnapshot> snaps_;
};

inline double reward_of(double objective) { return objective > 0 ? 1.0 / objective : 0.0; }

/// Raw (un-normalized) features of UE i in a snapshot.
inline std::vector<double> snapshot_features(const EpochSnapshot& s, std::size_t i) {
    return raw_features(s.gains[i], s.cycles[i], s.bits[i], s.avg_alloc[i]);
}

/// Fraction of the serving node's capacity; 1 for local execution.
inline double fraction_of(const WorldState& w, const Assignment& a, std::size_t i) {
    if (a.assoc[i] == kLocal) return 1.0;
    const double c = w.nodes[static_cast<std::size_t>(a.assoc[i] - 1)].capacity_cps;
    return std::fmin(1.0, std::fmax(a.alloc[i] / c, 1e-12));
}

/// Labelled samples (raw features) for every UE in a snapshot. With the
/// Register source the W rows are rebuilt from the target decisions, so each
/// sample sees the register exactly as it would have looked had the earlier
/// UEs followed the target.
inline std::vector<Sample> label_snapshot(const WorldState& w, const EpochSnapshot& s, const Assignment& target,
                                          AvgAllocSource source) {
    std::vector<Sample> out;
    out.reserve(s.size());
    std::vector<AvgAllocProfile> rows;
    if (source == AvgAllocSource::Register) rows = register_profiles(capacities(w), target.assoc);
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto x = source == AvgAllocSource::Register ? raw_features(s.gains[i], s.cycles[i], s.bits[i], rows[i])
                                                    : snapshot_features(s, i);
        out.push_back(Sample{std::move(x), target.assoc[i], fraction_of(w, target, i)});
    }
    return out;
}

inline std::vector<Sample> normalized(std::span<const Sample> raw, const NormStats& norm) {
    std::vector<Sample> out;
    out.reserve(raw.size());
    for (const auto& s : raw) out.push_back(Sample{norm.apply(s.input), s.target_assoc, s.target_fraction});
    return out;
}

/// One forward pass per UE, in index order; argmax association, fraction
/// head scaled to the chosen node's capacity. Raw outputs are recorded, then
/// the association is repaired and the nodes' capacity split by the
/// square-root rule.
inline EpochSnapshot decide_with_net(const Mlp& net, const NormStats& norm, const WorldState& w,
                                     const AvgAllocProfile& history_profile, AvgAllocSource source) {
    EpochSnapshot s = register_inputs(w, history_profile);
    const std::size_t n = w.n_ues();
    const auto caps = capacities(w);
    std::vector<std::size_t> count(caps.size(), 0);
    Assignment raw;
    raw.assoc.resize(n);
    raw.alloc.resize(n);
    s.raw_assoc.resize(n);
    s.raw_fraction.resize(n);
    s.probs.resize(n);
    double h = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (source == AvgAllocSource::Register)
            for (std::size_t j = 0; j < caps.size(); ++j)
                s.avg_alloc[i][j] = caps[j] / static_cast<double>(count[j] + 1);
        auto out = net.forward(norm.apply(snapshot_features(s, i)));
        const int a = out.argmax();
        if (a >= 1) ++count[static_cast<std::size_t>(a - 1)];
        s.raw_assoc[i] = a;
        s.raw_fraction[i] = out.fraction;
        h += entropy(out.probs);
        s.probs[i] = std::move(out.probs);
        raw.assoc[i] = a;
        raw.alloc[i] = a == kLocal ? w.ues[i].local_capacity_cps
                                   : out.fraction * w.nodes[static_cast<std::size_t>(a - 1)].capacity_cps;
    }
    s.mean_entropy = n ? h / static_cast<double>(n) : 0.0;
    s.executed = allocate(w, repair(w, std::move(raw)).assoc);
    s.objective = n ? objective(w, s.executed) : 0.0;
    return s;
}

/// Re-expresses the first layer so the net computes the same function under
/// new normalization statistics.
inline void rebase_input_norm(Mlp& net, const NormStats& old_norm, const NormStats& new_norm) {
    auto& w = net.weights().front();
    auto& b = net.biases().front();
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
        const auto k = static_cast<std::size_t>(c);
        const double ratio = new_norm.scale[k] / old_norm.scale[k];
        const double shift = (new_norm.mean[k] - old_norm.mean[k]) / old_norm.scale[k];
        b += w.col(c) * shift;
        w.col(c) *= ratio;
    }
    net.reset_momentum();
}

// ---------------------------------------------------------------------------
// Baselines

inline EpochSnapshot baseline_decide(const WorldState& w, BaselineKind kind, std::uint64_t seed) {
    EpochSnapshot s = register_inputs(w, {});
    const Instance inst(w);
    std::vector<int> assoc;
    switch (kind) {
    case BaselineKind::Local: assoc = local_assoc(inst.n); break;
    case BaselineKind::Greedy: assoc = greedy_assoc(inst); break;
    case BaselineKind::Random: {
        Rng rng = make_rng(seed, 0xBA5E + w.epoch);
        assoc = random_assoc(inst, rng);
        break;
    }
    }
    s.executed = repair(w, allocate(w, std::move(assoc)));
    s.objective = w.n_ues() ? objective(w, s.executed) : 0.0;
    return s;
}

// ---------------------------------------------------------------------------
// DNN-based controller

struct DnnAreConfig {
    NetConfig net;
    OptimizerBudget budget;
    std::size_t pretrain_worlds = 100;
    std::size_t pretrain_ues = 10;
    std::size_t min_samples = 1000;
    std::size_t memory_capacity = 5000;
    std::size_t fine_tune_steps = 50;
    ThresholdRule threshold_rule = ThresholdRule::Calibrated;
    double entropy_threshold = 0.0; // used by ThresholdRule::Fixed, must be > 0
    bool incremental = true;
    std::size_t history_window = 10;
    double norm_refresh_fraction = 0.5;
    AvgAllocSource avg_alloc_source = AvgAllocSource::Register;

    /// Resolves tau; `calibrated` is the mean output entropy of the
    /// pretrained net over its own corpus.
    double threshold_for(std::size_t m, double calibrated) const {
        switch (threshold_rule) {
        case ThresholdRule::Fixed:
            if (!(entropy_threshold > 0)) throw std::invalid_argument("dnn: entropy_threshold must be > 0");
            return entropy_threshold;
        case ThresholdRule::HalfMax: return 0.5 * std::log(static_cast<double>(m + 1));
        case ThresholdRule::Calibrated: break;
        }
        if (!(calibrated > 0)) throw std::invalid_argument("dnn: calibrated entropy threshold is not positive");
        return calibrated;
    }
};

struct PretrainResult {
    Mlp net;
    NormStats norm;
    std::vector<Sample> corpus; // raw features
    FitReport report;
    AllocHistory history;
    std::size_t worlds = 0;
    std::size_t evals = 0;
    double corpus_entropy = 0.0; // mean output entropy of the fitted net over the corpus
};

/// Offline stage: label a trajectory of worlds with the global optimizer
/// until both `pretrain_worlds` worlds and `min_samples` samples are
/// reached, then fit the net on the corpus.
inline PretrainResult pretrain_dnn(const Scenario& scenario, const std::vector<NodeSpec>& nodes,
                                   const DnnAreConfig& cfg, std::uint64_t seed) {
    if (cfg.pretrain_worlds < 1) throw std::invalid_argument("pretrain_dnn: n_worlds must be >= 1");
    if (cfg.pretrain_ues < 1) throw std::invalid_argument("pretrain_dnn: pretrain_ues must be >= 1");
    const std::size_t per_world = cfg.pretrain_ues;
    const std::size_t worlds =
        std::max(cfg.pretrain_worlds, (cfg.min_samples + per_world - 1) / per_world);
    TrajectorySpec spec;
    spec.horizon = worlds;
    spec.ue_start = spec.ue_end = per_world;
    const auto traj = make_trajectory(scenario, nodes, spec, derive_seed(seed, 0x9E7));

    PretrainResult r{Mlp{}, {}, {}, {}, AllocHistory(cfg.history_window), worlds, 0};
    const auto caps = capacities(traj.front());
    for (std::size_t t = 0; t < traj.size(); ++t) {
        const auto& w = traj[t];
        EpochSnapshot s = register_inputs(w, r.history.profile(caps));
        const auto sol = solve_global(w, cfg.budget, derive_seed(seed, 0x10000 + t));
        r.evals += sol.evals;
        s.executed = sol.assignment;
        s.objective = sol.objective;
        auto labelled = label_snapshot(w, s, sol.assignment, cfg.avg_alloc_source);
        r.corpus.insert(r.corpus.end(), labelled.begin(), labelled.end());
        r.history.push(s);
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(r.corpus.size());
    for (const auto& smp : r.corpus) rows.push_back(smp.input);
    r.norm = NormStats::fit(rows);
    NetConfig nc = cfg.net;
    nc.input_dim = 2 * caps.size() + 2;
    nc.n_classes = caps.size() + 1;
    nc.seed = derive_seed(seed, 0x11E7);
    r.net = Mlp(nc);
    const auto enc = normalized(r.corpus, r.norm);
    r.report = fit(r.net, enc, derive_seed(seed, 0xF1));
    double h = 0.0;
    for (const auto& smp : enc) h += entropy(r.net.forward(smp.input).probs);
    r.corpus_entropy = enc.empty() ? 0.0 : h / static_cast<double>(enc.size());
    return r;
}

struct UpdateReport {
    bool triggered = false;
    std::size_t evals = 0;
    double train_loss = 0.0; // mean minibatch loss over the update
    double label_objective = 0.0;
};

/// Online DNN-based controller: per-UE decisions, epoch register, and
/// entropy-gated incremental learning over a FIFO sample memory.
class DnnAre {
public:
    DnnAre(DnnAreConfig cfg, PretrainResult pre, std::uint64_t seed)
        : cfg_(std::move(cfg)), net_(std::move(pre.net)), norm_(std::move(pre.norm)), memory_(cfg_.memory_capacity),
          history_(std::move(pre.history)), corpus_entropy_(pre.corpus_entropy), seed_(seed) {
        tau_ = cfg_.threshold_for(net_.config().n_classes - 1, corpus_entropy_);
        for (auto& s : pre.corpus) memory_.push(std::move(s));
        memory_.mark_refresh();
    }

    EpochSnapshot decide(const WorldState& w) const {
        return decide_with_net(net_, norm_, w, history_.profile(capacities(w)), cfg_.avg_alloc_source);
    }

    /// Entropy check; above the threshold the epoch is re-labelled by the
    /// global optimizer, pushed to memory and the net fine-tuned in place.
    /// `labels` may carry a pre-computed optimizer solution for this world.
    UpdateReport incremental_update(const WorldState& w, const EpochSnapshot& s, const SolveResult* labels = nullptr) {
        UpdateReport rep;
        history_.push(s);
        if (!cfg_.incremental || s.size() == 0) return rep;
        if (!(s.mean_entropy > tau_)) return rep;
        rep.triggered = true;
        SolveResult sol;
        if (labels) {
            sol = *labels;
        } else {
            sol = solve_global(w, cfg_.budget, derive_seed(seed_, 0x20000 + s.epoch));
            rep.evals = sol.evals;
        }
        rep.label_objective = sol.objective;
        for (auto& smp : label_snapshot(w, s, sol.assignment, cfg_.avg_alloc_source)) memory_.push(std::move(smp));
        maybe_refresh_norm();
        rep.train_loss = fine_tune(cfg_.fine_tune_steps, derive_seed(seed_, 0x30000 + s.epoch));
        return rep;
    }

    double fine_tune(std::size_t steps, std::uint64_t seed) {
        Rng rng = make_rng(seed);
        double sum = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            auto mb = normalized(memory_.draw(net_.config().minibatch, rng), norm_);
            sum += net_.train_step(mb, net_.config().learning_rate);
        }
        return steps ? sum / static_cast<double>(steps) : 0.0;
    }

    /// Loss of the current net on raw-feature samples.
    double loss_on(std::span<const Sample> raw) const { return net_.loss(normalized(raw, norm_)); }
    double memory_loss() const { return loss_on(memory_.samples()); }

    const Mlp& net() const { return net_; }
    const NormStats& norm() const { return norm_; }
    const SampleMemory& memory() const { return memory_; }
    const AllocHistory& history() const { return history_; }
    const DnnAreConfig& config() const { return cfg_; }
    double threshold() const { return tau_; }
    double corpus_entropy() const { return corpus_entropy_; }
    Mlp& net() { return net_; }
    SampleMemory& memory() { return memory_; }
    AllocHistory& history() { return history_; }
    void set_norm(NormStats n) { norm_ = std::move(n); }

private:
    void maybe_refresh_norm() {
        if (static_cast<double>(memory_.replaced_since_refresh()) <
            cfg_.norm_refresh_fraction * static_cast<double>(memory_.capacity()))
            return;
        std::vector<std::vector<double>> rows;
        for (const auto& e : memory_.entries()) rows.push_back(e.sample.input);
        auto fresh = NormStats::fit(rows);
        rebase_input_norm(net_, norm_, fresh);
        norm_ = std::move(fresh);
        memory_.mark_refresh();
    }

    DnnAreConfig cfg_;
    Mlp net_;
    NormStats norm_;
    SampleMemory memory_;
    AllocHistory history_;
    double corpus_entropy_;
    double tau_ = 0.0;
    std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// DRL-based controller

/// Refinement defaults for the DRL controller: deterministic neighbor
/// descent from the policy's action, at most 100 sweeps.
inline OptimizerBudget drl_refine_budget() {
    OptimizerBudget b;
    b.refine = RefineMode::Neighbor;
    b.sa_steps = 100;
    return b;
}

struct DrlAreConfig {
    NetConfig net;
    OptimizerBudget budget = drl_refine_budget();
    std::size_t buffer_capacity = 10000;
    std::size_t batch_size = 1000;
    double alpha = 0.6;
    double epsilon = 1e-6;
    bool refinement = true;
    // Ablation only: random exploration in place of refinement. 100
    // candidates per epoch is about what neighbor descent evaluates at desk
    // scale, so the pair runs on a comparable evaluation budget.
    double explore_prob = 0.1;
    std::size_t explore_candidates = 100;
    std::size_t history_window = 10;
    std::size_t norm_warmup_worlds = 20;
    std::size_t norm_warmup_ues = 10;
    AvgAllocSource avg_alloc_source = AvgAllocSource::Register;
};

struct DrlUpdateReport {
    double raw_objective = 0.0;
    double refined_objective = 0.0;
    double priority = 0.0;
    double pre_loss = 0.0;   // policy loss on this epoch's transitions before the update
    double train_loss = 0.0; // mean minibatch loss of the update pass
    std::size_t evals = 0;
    std::size_t batch = 0;
};

/// Normalization for the policy, fitted on unlabelled states of warm-up
/// worlds whose W comes from uniformly random decisions.
inline NormStats drl_warmup_norm(const Scenario& scenario, const std::vector<NodeSpec>& nodes,
                                 const DrlAreConfig& cfg, std::uint64_t seed) {
    TrajectorySpec spec;
    spec.horizon = std::max<std::size_t>(1, cfg.norm_warmup_worlds);
    spec.ue_start = spec.ue_end = std::max<std::size_t>(1, cfg.norm_warmup_ues);
    const auto traj = make_trajectory(scenario, nodes, spec, derive_seed(seed, 0xDA7));
    AllocHistory hist(cfg.history_window);
    std::vector<std::vector<double>> rows;
    const auto caps = capacities(traj.front());
    for (const auto& w : traj) {
        EpochSnapshot s = register_inputs(w, hist.profile(caps));
        s.executed = baseline_decide(w, BaselineKind::Random, derive_seed(seed, 0xDA8)).executed;
        for (auto& smp : label_snapshot(w, s, s.executed, cfg.avg_alloc_source)) rows.push_back(std::move(smp.input));
        hist.push(s);
    }
    return NormStats::fit(rows);
}

class DrlAre {
public:
    DrlAre(DrlAreConfig cfg, std::size_t n_nodes, NormStats norm, std::uint64_t seed)
        : cfg_(std::move(cfg)), norm_(std::move(norm)), buffer_(cfg_.buffer_capacity, cfg_.alpha),
          history_(cfg_.history_window), seed_(seed) {
        NetConfig nc = cfg_.net;
        nc.input_dim = 2 * n_nodes + 2;
        nc.n_classes = n_nodes + 1;
        nc.seed = derive_seed(seed, 0x90C1);
        policy_ = Mlp(nc);
    }

    EpochSnapshot decide(const WorldState& w) const {
        return decide_with_net(policy_, norm_, w, history_.profile(capacities(w)), cfg_.avg_alloc_source);
    }

    /// Refine the executed action, store per-UE transitions with priority
    /// (reward gain + epsilon), then train one pass over a prioritized batch.
    DrlUpdateReport update(const WorldState& w, const EpochSnapshot& s) {
        DrlUpdateReport rep;
        history_.push(s);
        if (s.size() == 0) return rep;
        const std::uint64_t es = derive_seed(seed_, 0x40000 + s.epoch);
        const SolveResult better = cfg_.refinement
                                       ? refine_action(w, s.executed, cfg_.budget, es)
                                       : explore_random(w, s.executed, cfg_.explore_prob, cfg_.explore_candidates, es);
        rep.evals = better.evals;
        rep.raw_objective = s.objective;
        rep.refined_objective = better.objective;
        rep.priority = (reward_of(better.objective) - reward_of(s.objective)) + cfg_.epsilon;
        rep.priority = std::fmax(rep.priority, cfg_.epsilon);

        auto fresh = label_snapshot(w, s, better.assignment, cfg_.avg_alloc_source);
        rep.pre_loss = policy_.loss(normalized(fresh, norm_));
        for (auto& smp : fresh) {
            Transition t;
            t.state = std::move(smp.input);
            t.action = smp.target_assoc;
            t.fraction = smp.target_fraction;
            t.priority = rep.priority;
            buffer_.push(std::move(t));
        }

        Rng rng = make_rng(es, 0xB47C);
        auto batch = normalized(buffer_.sample(cfg_.batch_size, rng), norm_);
        rep.batch = batch.size();
        const std::size_t mb = policy_.config().minibatch;
        double sum = 0.0;
        std::size_t steps = 0;
        for (std::size_t k = 0; k < batch.size(); k += mb) {
            std::span<const Sample> part(batch.data() + k, std::min(mb, batch.size() - k));
            sum += policy_.train_step(part, policy_.config().learning_rate);
            ++steps;
        }
        rep.train_loss = steps ? sum / static_cast<double>(steps) : 0.0;
        return rep;
    }

    const Mlp& policy() const { return policy_; }
    Mlp& policy() { return policy_; }
    const NormStats& norm() const { return norm_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    ReplayBuffer& buffer() { return buffer_; }
    const AllocHistory& history() const { return history_; }
    AllocHistory& history() { return history_; }
    const DrlAreConfig& config() const { return cfg_; }

private:
    DrlAreConfig cfg_;
    NormStats norm_;
    Mlp policy_;
    ReplayBuffer buffer_;
    AllocHistory history_;
    std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Checkpoints
//
//   hmec-checkpoint 1
//   kind dnn|drl
//   <net block, see save_net>
//   <norm block, see save_norm>
//   corpus_entropy <x>                           (dnn)
//   history <epochs>
//     epoch <t> <n>  then n associations, then n allocations
//   memory <capacity> <size> <next_seq>          (dnn)
//     <seq> <class> <fraction> <dim> <features...>
//   buffer <capacity> <size> <next_seq> <alpha>  (drl)
//     <seq> <class> <fraction> <priority> <dim> <features...>

namespace detail {

inline void save_history(std::ostream& os, const AllocHistory& h) {
    os << "history " << h.snapshots().size() << '\n';
    for (const auto& s : h.snapshots()) {
        os << "epoch " << s.epoch << ' ' << s.executed.assoc.size() << '\n';
        for (std::size_t i = 0; i < s.executed.assoc.size(); ++i) os << (i ? " " : "") << s.executed.assoc[i];
        os << '\n';
        write_doubles(os, s.executed.alloc.data(), s.executed.alloc.size());
    }
}

inline void load_history(std::istream& is, AllocHistory& h) {
    expect(is, "history");
    std::size_t k = 0;
    is >> k;
    h.clear();
    for (std::size_t e = 0; e < k; ++e) {
        expect(is, "epoch");
        EpochSnapshot s;
        std::size_t n = 0;
        is >> s.epoch >> n;
        s.executed.assoc.resize(n);
        s.executed.alloc.resize(n);
        for (auto& a : s.executed.assoc) is >> a;
        for (auto& f : s.executed.alloc) f = read_double(is);
        h.push(s);
    }
}

inline void save_sample_line(std::ostream& os, std::uint64_t seq, int cls, double frac, const std::vector<double>& x) {
    os << seq << ' ' << cls << ' ' << std::hexfloat << frac << std::defaultfloat << ' ' << x.size() << ' ';
    write_doubles(os, x.data(), x.size());
}

} // namespace detail

inline constexpr int kCheckpointVersion = 1;

inline void save_checkpoint(std::ostream& os, const DnnAre& c) {
    os << "hmec-checkpoint " << kCheckpointVersion << "\nkind dnn\n";
    save_net(os, c.net());
    save_norm(os, c.norm());
    os << "corpus_entropy " << std::hexfloat << c.corpus_entropy() << std::defaultfloat << '\n';
    detail::save_history(os, c.history());
    const auto& m = c.memory();
    os << "memory " << m.capacity() << ' ' << m.size() << ' ' << m.next_seq() << '\n';
    for (const auto& e : m.entries())
        detail::save_sample_line(os, e.seq, e.sample.target_assoc, e.sample.target_fraction, e.sample.input);
}

inline void save_checkpoint(std::ostream& os, const DrlAre& c) {
    os << "hmec-checkpoint " << kCheckpointVersion << "\nkind drl\n";
    save_net(os, c.policy());
    save_norm(os, c.norm());
    detail::save_history(os, c.history());
    const auto& b = c.buffer();
    os << "buffer " << b.capacity() << ' ' << b.size() << ' ' << b.next_seq() << ' ' << std::hexfloat << b.alpha()
       << std::defaultfloat << '\n';
    for (const auto& t : b.entries()) {
        os << t.seq << ' ' << t.action << ' ' << std::hexfloat << t.fraction << ' ' << t.priority << std::defaultfloat
           << ' ' << t.state.size() << ' ';
        detail::write_doubles(os, t.state.data(), t.state.size());
    }
}

namespace detail {
inline std::string read_checkpoint_kind(std::istream& is) {
    expect(is, "hmec-checkpoint");
    int v = 0;
    is >> v;
    if (v != kCheckpointVersion) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(v));
    expect(is, "kind");
    std::string kind;
    is >> kind;
    return kind;
}
} // namespace detail

/// Restores a DNN controller. The config supplies the online knobs; the
/// net, norm statistics, W history and sample memory come from the stream.
inline DnnAre load_dnn_checkpoint(std::istream& is, DnnAreConfig cfg, std::uint64_t seed) {
    if (detail::read_checkpoint_kind(is) != "dnn") throw std::runtime_error("checkpoint: not a dnn checkpoint");
    PretrainResult pre{load_net(is), load_norm(is), {}, {}, AllocHistory(cfg.history_window), 0, 0, 0.0};
    detail::expect(is, "corpus_entropy");
    pre.corpus_entropy = detail::read_double(is);
    detail::load_history(is, pre.history);
    detail::expect(is, "memory");
    std::size_t cap = 0, size = 0;
    std::uint64_t next = 0;
    is >> cap >> size >> next;
    cfg.memory_capacity = cap;
    std::deque<SampleMemory::Entry> entries;
    for (std::size_t k = 0; k < size; ++k) {
        SampleMemory::Entry e;
        std::size_t dim = 0;
        is >> e.seq >> e.sample.target_assoc;
        e.sample.target_fraction = detail::read_double(is);
        is >> dim;
        e.sample.input.resize(dim);
        for (auto& x : e.sample.input) x = detail::read_double(is);
        entries.push_back(std::move(e));
    }
    if (!is) throw std::runtime_error("checkpoint: truncated memory block");
    DnnAre c(cfg, std::move(pre), seed);
    c.memory().restore(std::move(entries), next);
    c.memory().mark_refresh();
    return c;
}

inline DrlAre load_drl_checkpoint(std::istream& is, DrlAreConfig cfg, std::uint64_t seed) {
    if (detail::read_checkpoint_kind(is) != "drl") throw std::runtime_error("checkpoint: not a drl checkpoint");
    Mlp net = load_net(is);
    NormStats norm = load_norm(is);
    AllocHistory hist(cfg.history_window);
    detail::load_history(is, hist);
    detail::expect(is, "buffer");
    std::size_t cap = 0, size = 0;
    std::uint64_t next = 0;
    is >> cap >> size >> next;
    cfg.buffer_capacity = cap;
    cfg.alpha = detail::read_double(is);
    std::deque<Transition> entries;
    for (std::size_t k = 0; k < size; ++k) {
        Transition t;
        std::size_t dim = 0;
        is >> t.seq >> t.action;
        t.fraction = detail::read_double(is);
        t.priority = detail::read_double(is);
        is >> dim;
        t.state.resize(dim);
        for (auto& x : t.state) x = detail::read_double(is);
        entries.push_back(std::move(t));
    }
    if (!is) throw std::runtime_error("checkpoint: truncated buffer block");
    DrlAre c(cfg, net.config().n_classes - 1, norm, seed);
    c.policy() = std::move(net);
    c.history() = std::move(hist);
    c.buffer().restore(std::move(entries), next);
    return c;
}

} // namespace hmec
