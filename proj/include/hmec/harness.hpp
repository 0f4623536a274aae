#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hmec/config.hpp"
#include "hmec/csv.hpp"
#include "hmec/sched.hpp"
#include "hmec/trajectory.hpp"

namespace hmec {

/// One scheduler, one epoch. Optional columns are empty when the scheduler
/// has no such quantity (baselines have no entropy or losses).
struct EpochRecord {
    std::size_t epoch = 0;
    SchedulerKind scheduler = SchedulerKind::Local;
    std::string variant; // ablation label; empty otherwise
    std::size_t n_ues = 0;
    double total_cycles = 0.0;
    double total_bits = 0.0;
    double objective = 0.0;
    double reward = 0.0;
    std::optional<double> mean_entropy;
    std::optional<double> train_loss;
    std::optional<double> test_loss;
    std::optional<double> latency_ms;
    std::size_t optimizer_evals = 0;
    bool triggered = false;
};

// Stream tags for seed derivation; shared by run, sweep and ablation so a
// degenerate sweep reproduces a run exactly.
inline constexpr std::uint64_t kStreamPretrain = 0xD1A;
inline constexpr std::uint64_t kStreamController = 0xC71;
inline constexpr std::uint64_t kStreamBaseline = 0xBA5;
inline constexpr std::uint64_t kStreamOracle = 0x0AC;
inline constexpr std::uint64_t kStreamLabels = 0x1AB;

inline std::vector<WorldState> build_trajectory(const Config& c, std::size_t horizon, std::size_t ue_start,
                                                std::size_t ue_end, std::uint64_t seed) {
    TrajectorySpec spec;
    spec.horizon = horizon;
    spec.ue_start = ue_start;
    spec.ue_end = ue_end;
    spec.freeze_placement = c.freeze_placement;
    spec.kmeans = c.kmeans;
    return make_trajectory(c.scenario, c.nodes, spec, seed);
}

namespace detail {

inline EpochRecord base_record(std::size_t t, SchedulerKind k, const WorldState& w) {
    EpochRecord r;
    r.epoch = t;
    r.scheduler = k;
    r.n_ues = w.n_ues();
    for (const auto& ue : w.ues) {
        r.total_cycles += ue.task.cycles;
        r.total_bits += ue.task.bits;
    }
    return r;
}

inline void fill_outcome(EpochRecord& r, const EpochSnapshot& s) {
    r.objective = s.objective;
    r.reward = reward_of(s.objective);
}

class Stopwatch {
public:
    explicit Stopwatch(bool on) : on_(on), t0_(std::chrono::steady_clock::now()) {}
    std::optional<double> ms() const {
        if (!on_) return std::nullopt;
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    bool on_;
    std::chrono::steady_clock::time_point t0_;
};

} // namespace detail

inline PretrainResult pretrain_for(const Config& c, std::size_t n_ues, std::uint64_t seed) {
    DnnAreConfig d = c.dnn_config();
    if (d.pretrain_ues == 0) d.pretrain_ues = std::max<std::size_t>(1, n_ues);
    return pretrain_dnn(c.scenario, c.nodes, d, derive_seed(seed, kStreamPretrain));
}

/// Online DNN-ARE over a trajectory. Test loss is measured each epoch on
/// generator labels of the current world, before any update; the same labels
/// serve the incremental trigger. Train loss is the loss over the sample
/// memory after the update.
inline std::vector<EpochRecord> run_dnn(const Config& c, const std::vector<WorldState>& traj, PretrainResult pre,
                                        std::uint64_t seed, bool incremental, bool timing) {
    DnnAreConfig d = c.dnn_config();
    d.incremental = incremental;
    DnnAre ctl(d, std::move(pre), derive_seed(seed, kStreamController));
    std::vector<EpochRecord> out;
    for (std::size_t t = 0; t < traj.size(); ++t) {
        const auto& w = traj[t];
        auto r = detail::base_record(t, SchedulerKind::DnnAre, w);
        detail::Stopwatch sw(timing);
        const auto s = ctl.decide(w);
        r.latency_ms = sw.ms();
        detail::fill_outcome(r, s);
        r.mean_entropy = s.mean_entropy;
        if (w.n_ues() > 0) {
            const auto labels = solve_global(w, d.budget, derive_seed(seed, kStreamLabels + (t << 12)));
            r.test_loss = ctl.loss_on(label_snapshot(w, s, labels.assignment, d.avg_alloc_source));
            const auto up = ctl.incremental_update(w, s, &labels);
            r.triggered = up.triggered;
            if (up.triggered) r.optimizer_evals = labels.evals;
        } else {
            ctl.incremental_update(w, s);
        }
        r.train_loss = ctl.memory_loss();
        out.push_back(std::move(r));
    }
    return out;
}

/// Online DRL-ARE. Test loss is the policy's loss on this epoch's refined
/// transitions before the update; train loss is the mean minibatch loss of
/// the update pass.
inline std::vector<EpochRecord> run_drl(const Config& c, const std::vector<WorldState>& traj, std::uint64_t seed,
                                        bool refinement, bool timing) {
    DrlAreConfig d = c.drl_config();
    d.refinement = refinement;
    const std::uint64_t cs = derive_seed(seed, kStreamController);
    DrlAre ctl(d, c.nodes.size(), drl_warmup_norm(c.scenario, c.nodes, d, cs), cs);
    std::vector<EpochRecord> out;
    for (std::size_t t = 0; t < traj.size(); ++t) {
        const auto& w = traj[t];
        auto r = detail::base_record(t, SchedulerKind::DrlAre, w);
        detail::Stopwatch sw(timing);
        const auto s = ctl.decide(w);
        r.latency_ms = sw.ms();
        detail::fill_outcome(r, s);
        r.mean_entropy = s.mean_entropy;
        if (w.n_ues() > 0) {
            const auto up = ctl.update(w, s);
            r.optimizer_evals = up.evals;
            r.train_loss = up.train_loss;
            r.test_loss = up.pre_loss;
            r.triggered = up.refined_objective < up.raw_objective;
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<EpochRecord> run_fixed(const Config& c, SchedulerKind k, const std::vector<WorldState>& traj,
                                          std::uint64_t seed, bool timing) {
    std::vector<EpochRecord> out;
    for (std::size_t t = 0; t < traj.size(); ++t) {
        const auto& w = traj[t];
        auto r = detail::base_record(t, k, w);
        detail::Stopwatch sw(timing);
        if (k == SchedulerKind::Oracle) {
            const auto sol = w.n_ues() ? solve_global(w, c.optimizer, derive_seed(seed, kStreamOracle + (t << 12)))
                                       : SolveResult{};
            r.latency_ms = sw.ms();
            r.objective = sol.objective;
            r.reward = reward_of(sol.objective);
            r.optimizer_evals = sol.evals;
        } else {
            const BaselineKind b = k == SchedulerKind::Greedy   ? BaselineKind::Greedy
                                   : k == SchedulerKind::Random ? BaselineKind::Random
                                                                : BaselineKind::Local;
            const auto s = baseline_decide(w, b, derive_seed(seed, kStreamBaseline));
            r.latency_ms = sw.ms();
            detail::fill_outcome(r, s);
        }
        out.push_back(std::move(r));
    }
    return out;
}

/// Runs one scheduler over a trajectory; DNN-ARE pretrains at the
/// trajectory's first UE count.
inline std::vector<EpochRecord> run_scheduler(const Config& c, SchedulerKind k, const std::vector<WorldState>& traj,
                                              std::uint64_t seed, bool timing = false) {
    switch (k) {
    case SchedulerKind::DnnAre:
        return run_dnn(c, traj, pretrain_for(c, traj.empty() ? 1 : traj.front().n_ues(), seed), seed,
                       c.dnn.incremental, timing);
    case SchedulerKind::DrlAre: return run_drl(c, traj, seed, c.drl.refinement, timing);
    default: return run_fixed(c, k, traj, seed, timing);
    }
}

// ---------------------------------------------------------------------------
// Summaries

struct RunSummary {
    SchedulerKind scheduler = SchedulerKind::Local;
    std::string variant;
    std::size_t epochs = 0;
    double mean_objective = 0.0;
    double final_objective = 0.0; // mean over the last score_window epochs
    double final_reward = 0.0;
    std::size_t triggers = 0;
    std::size_t optimizer_evals = 0;
};

inline RunSummary summarize(std::span<const EpochRecord> recs, std::size_t window) {
    RunSummary s;
    if (recs.empty()) return s;
    s.scheduler = recs.front().scheduler;
    s.variant = recs.front().variant;
    s.epochs = recs.size();
    const std::size_t from = recs.size() > window ? recs.size() - window : 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        s.mean_objective += recs[i].objective;
        if (i >= from) {
            s.final_objective += recs[i].objective;
            s.final_reward += recs[i].reward;
        }
        s.triggers += recs[i].triggered;
        s.optimizer_evals += recs[i].optimizer_evals;
    }
    s.mean_objective /= static_cast<double>(recs.size());
    s.final_objective /= static_cast<double>(recs.size() - from);
    s.final_reward /= static_cast<double>(recs.size() - from);
    return s;
}

/// First epoch at which the trailing moving average (window `ma`) of reward
/// reaches `level` times the final-window mean reward.
inline std::size_t epochs_to_fraction(std::span<const EpochRecord> recs, double level, std::size_t final_window,
                                      std::size_t ma = 10) {
    if (recs.empty()) return 0;
    const auto s = summarize(recs, final_window);
    const double target = level * s.final_reward;
    double acc = 0.0;
    for (std::size_t t = 0; t < recs.size(); ++t) {
        acc += recs[t].reward;
        if (t >= ma) acc -= recs[t - ma].reward;
        const double avg = acc / static_cast<double>(std::min(t + 1, ma));
        if (avg >= target) return t;
    }
    return recs.size();
}

// ---------------------------------------------------------------------------
// CSV output

inline const std::vector<std::string>& epoch_header() {
    static const std::vector<std::string> h{"epoch",      "scheduler",  "n_ues",     "objective",
                                            "reward",     "mean_entropy", "train_loss", "test_loss",
                                            "decisions_latency_ms", "optimizer_evals", "seed", "config_hash"};
    return h;
}

inline void write_epoch_rows(CsvWriter& w, std::span<const EpochRecord> recs, std::uint64_t seed,
                             const std::string& hash) {
    for (const auto& r : recs)
        w.row({std::to_string(r.epoch), to_string(r.scheduler), std::to_string(r.n_ues), CsvWriter::num(r.objective),
               CsvWriter::num(r.reward), CsvWriter::num(r.mean_entropy), CsvWriter::num(r.train_loss),
               CsvWriter::num(r.test_loss), CsvWriter::num(r.latency_ms), std::to_string(r.optimizer_evals),
               std::to_string(seed), hash});
}

inline const std::vector<std::string>& summary_header() {
    static const std::vector<std::string> h{"scheduler",    "epochs",          "mean_objective",
                                            "final_objective", "final_reward", "triggers",
                                            "optimizer_evals", "seed",         "config_hash"};
    return h;
}

inline void write_summary_row(CsvWriter& w, const RunSummary& s, std::uint64_t seed, const std::string& hash) {
    w.row({s.variant.empty() ? to_string(s.scheduler) : s.variant, std::to_string(s.epochs),
           CsvWriter::num(s.mean_objective), CsvWriter::num(s.final_objective), CsvWriter::num(s.final_reward),
           std::to_string(s.triggers), std::to_string(s.optimizer_evals), std::to_string(seed), hash});
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
    return os;
}

inline void write_placement(const std::filesystem::path& p, const std::vector<WorldState>& traj, std::uint64_t seed,
                            const std::string& hash) {
    auto os = open_out(p);
    CsvWriter w(os);
    w.row({"epoch", "node", "kind", "x", "y", "altitude_m", "seed", "config_hash"});
    for (std::size_t t = 0; t < traj.size(); ++t)
        for (std::size_t j = 0; j < traj[t].nodes.size(); ++j) {
            const auto& n = traj[t].nodes[j];
            w.row({std::to_string(t), std::to_string(j), to_string(n.kind), CsvWriter::num(n.position.x),
                   CsvWriter::num(n.position.y), CsvWriter::num(n.altitude_m), std::to_string(seed), hash});
        }
}

// ---------------------------------------------------------------------------
// Entry points

struct ExperimentResult {
    std::vector<std::vector<EpochRecord>> runs; // one per scheduler, config order
    std::vector<RunSummary> summaries;
};

/// Runs every configured scheduler on one seeded trajectory. Writes
/// epochs.csv, summary.csv, placement.csv and config.json under `out_dir`.
inline ExperimentResult run_experiment(const Config& c, const std::filesystem::path& out_dir) {
    const auto& e = c.experiment;
    const std::string hash = config_hash(c);
    const auto traj = build_trajectory(c, e.horizon, e.ue_start, e.ue_end, e.seed);
    ExperimentResult res;
    for (auto k : e.schedulers) {
        res.runs.push_back(run_scheduler(c, k, traj, e.seed, e.timing));
        res.summaries.push_back(summarize(res.runs.back(), e.score_window));
    }
    std::filesystem::create_directories(out_dir);
    {
        auto os = open_out(out_dir / "epochs.csv");
        CsvWriter w(os);
        w.row(epoch_header());
        for (const auto& r : res.runs) write_epoch_rows(w, r, e.seed, hash);
    }
    {
        auto os = open_out(out_dir / "summary.csv");
        CsvWriter w(os);
        w.row(summary_header());
        for (const auto& s : res.summaries) write_summary_row(w, s, e.seed, hash);
    }
    write_placement(out_dir / "placement.csv", traj, e.seed, hash);
    auto os = open_out(out_dir / "config.json");
    os << config_to_json(c).dump(2) << '\n';
    return res;
}

/// Worker count for sweeps: HMEC_WORKERS if set and positive, else the
/// hardware concurrency.
inline std::size_t worker_count() {
    if (const char* v = std::getenv("HMEC_WORKERS")) {
        char* end = nullptr;
        const long n = std::strtol(v, &end, 10);
        if (end != v && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs `jobs[i]()` for every i on a bounded pool; results are merged by the
/// caller in index order.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < workers; ++k)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

struct SweepCell {
    std::size_t n_ues = 0;
    SchedulerKind scheduler = SchedulerKind::Local;
    std::uint64_t seed = 0;
    double objective = 0.0; // final-window mean
};

struct SweepStat {
    std::size_t n_ues = 0;
    SchedulerKind scheduler = SchedulerKind::Local;
    double mean = 0.0;
    double std = 0.0; // sample standard deviation
    std::size_t count = 0;
};

inline std::vector<SweepStat> sweep_stats(const std::vector<SweepCell>& cells) {
    std::vector<SweepStat> out;
    for (const auto& c : cells) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const SweepStat& s) { return s.n_ues == c.n_ues && s.scheduler == c.scheduler; });
        if (it == out.end()) {
            out.push_back({c.n_ues, c.scheduler, 0.0, 0.0, 0});
            it = out.end() - 1;
        }
        it->mean += c.objective;
        ++it->count;
    }
    for (auto& s : out) {
        s.mean /= static_cast<double>(s.count);
        double ss = 0.0;
        for (const auto& c : cells)
            if (c.n_ues == s.n_ues && c.scheduler == s.scheduler) ss += (c.objective - s.mean) * (c.objective - s.mean);
        s.std = s.count > 1 ? std::sqrt(ss / static_cast<double>(s.count - 1)) : 0.0;
    }
    return out;
}

/// Cross product of UE counts x schedulers x seeds; each cell is a full
/// run at fixed N scored by its final-window mean objective. Writes
/// sweep.csv (one row per cell) and sweep_summary.csv (mean and std).
inline std::vector<SweepCell> sweep_ues(const Config& c, const std::filesystem::path& out_dir) {
    const auto& sw = c.sweep;
    for (auto n : sw.ue_counts)
        if (n < 1) throw std::invalid_argument("sweep: UE counts must be >= 1");
    std::vector<SweepCell> cells;
    for (auto n : sw.ue_counts)
        for (auto k : sw.schedulers)
            for (auto s : sw.seeds) cells.push_back({n, k, s, 0.0});
    parallel_for(cells.size(), worker_count(), [&](std::size_t i) {
        auto& cell = cells[i];
        const auto traj = build_trajectory(c, c.experiment.horizon, cell.n_ues, cell.n_ues, cell.seed);
        const auto recs = run_scheduler(c, cell.scheduler, traj, cell.seed);
        cell.objective = summarize(recs, c.experiment.score_window).final_objective;
    });
    const std::string hash = config_hash(c);
    std::filesystem::create_directories(out_dir);
    {
        auto os = open_out(out_dir / "sweep.csv");
        CsvWriter w(os);
        w.row({"n_ues", "scheduler", "seed", "objective", "config_hash"});
        for (const auto& cell : cells)
            w.row({std::to_string(cell.n_ues), to_string(cell.scheduler), std::to_string(cell.seed),
                   CsvWriter::num(cell.objective), hash});
    }
    auto os = open_out(out_dir / "sweep_summary.csv");
    CsvWriter w(os);
    w.row({"n_ues", "scheduler", "mean_objective", "std_objective", "count", "config_hash"});
    for (const auto& s : sweep_stats(cells))
        w.row({std::to_string(s.n_ues), to_string(s.scheduler), CsvWriter::num(s.mean), CsvWriter::num(s.std),
               std::to_string(s.count), hash});
    return cells;
}

struct AblationResult {
    std::vector<EpochRecord> full;    // the ARE variant
    std::vector<EpochRecord> ablated; // incremental learning or refinement switched off
};

/// Runs an ARE variant and its ablation on the same seeded trajectory. The
/// DNN pair shares one pretrained net.
inline AblationResult run_ablation(const Config& c, AblationMode mode, std::uint64_t seed) {
    const auto& a = c.ablation;
    AblationResult res;
    if (mode == AblationMode::DnnNoIncremental) {
        const auto traj = build_trajectory(c, a.horizon, a.dnn_ue_start, a.dnn_ue_end, seed);
        auto pre = pretrain_for(c, traj.front().n_ues(), seed);
        res.full = run_dnn(c, traj, pre, seed, true, false);
        res.ablated = run_dnn(c, traj, std::move(pre), seed, false, false);
        for (auto& r : res.full) r.variant = "DNN-ARE";
        for (auto& r : res.ablated) r.variant = "DNN";
    } else {
        const auto traj = build_trajectory(c, a.horizon, a.drl_ues, a.drl_ues, seed);
        res.full = run_drl(c, traj, seed, true, false);
        res.ablated = run_drl(c, traj, seed, false, false);
        for (auto& r : res.full) r.variant = "DRL-ARE";
        for (auto& r : res.ablated) r.variant = "DRL";
    }
    return res;
}

/// Writes ablation_<mode>.csv: paired per-epoch rows with the environment
/// columns (n_ues, total_cycles, total_bits) that must agree across a pair.
inline AblationResult ablation(const Config& c, AblationMode mode, const std::filesystem::path& out_dir) {
    const std::uint64_t seed = c.experiment.seed;
    auto res = run_ablation(c, mode, seed);
    const std::string hash = config_hash(c);
    std::filesystem::create_directories(out_dir);
    auto os = open_out(out_dir / (std::string("ablation_") + to_string(mode) + ".csv"));
    CsvWriter w(os);
    w.row({"epoch", "variant", "n_ues", "total_cycles", "total_bits", "objective", "reward", "mean_entropy",
           "train_loss", "test_loss", "triggered", "optimizer_evals", "seed", "config_hash"});
    for (const auto* run : {&res.full, &res.ablated})
        for (const auto& r : *run)
            w.row({std::to_string(r.epoch), r.variant, std::to_string(r.n_ues), CsvWriter::num(r.total_cycles),
                   CsvWriter::num(r.total_bits), CsvWriter::num(r.objective), CsvWriter::num(r.reward),
                   CsvWriter::num(r.mean_entropy), CsvWriter::num(r.train_loss), CsvWriter::num(r.test_loss),
                   r.triggered ? "1" : "0", std::to_string(r.optimizer_evals), std::to_string(seed), hash});
    auto ss = open_out(out_dir / (std::string("ablation_") + to_string(mode) + "_summary.csv"));
    CsvWriter sw(ss);
    sw.row(summary_header());
    write_summary_row(sw, summarize(res.full, c.experiment.score_window), seed, hash);
    write_summary_row(sw, summarize(res.ablated, c.experiment.score_window), seed, hash);
    return res;
}

} // namespace hmec
