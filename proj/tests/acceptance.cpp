// Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hmec/harness.hpp"

using namespace hmec;

namespace {

int g_failed = 0;

void report(int id, bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failed;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, static_cast<double>(args)...);
    return buf;
}

Config desk() { return config_from_json(preset_json("desk")); }

WorldState placed_world(const Config& c, std::size_t n, std::uint64_t seed) {
    WorldState w = init_world(c.scenario, n, c.nodes, seed);
    w.nodes = place_mobile_nodes(w, derive_seed(seed, 1), c.kmeans);
    return w;
}

bool rel_close(double a, double b, double tol) { return std::fabs(a - b) <= tol * std::fmax(std::fabs(a), std::fabs(b)); }

// ---------------------------------------------------------------------------

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    const Config c = desk();
    OptimizerBudget b;
    OptimizerBudget sa = b;
    sa.sa_steps = 500;
    sa.refine = RefineMode::Anneal;
    std::size_t within = 0, reached = 0, total = 0;
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 200; ++k) {
        const std::size_t n = 1 + k % 5; // 5^5 = 3125 <= 4096
        const WorldState w = placed_world(c, n, 1000 + k);
        const auto ex = solve_exhaustive(w, b);
        const auto heur = solve_heuristic(w, b, k);
        const double gap = heur.objective / ex.objective - 1.0;
        worst = std::fmax(worst, gap);
        within += gap <= 0.02;
        Rng rng = make_rng(k, 0xACC1);
        const Instance inst(w);
        const auto start = allocate(w, random_assoc(inst, rng));
        const auto ref = refine_action(w, start, sa, k);
        reached += rel_close(ref.objective, ex.objective, 1e-9);
        ++total;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double frac = static_cast<double>(reached) / static_cast<double>(total);
    report(1, within == total && frac >= 0.9 && secs < 300, "oracle equivalence",
           fmt("heuristic within 2%% on %.0f/200 (worst gap %.2e); refine reaches optimum on %.1f%%; %.1fs",
               static_cast<double>(within), worst, 100 * frac, secs));
}

// Independent minimizer: pairwise exchange, each pair split by golden-section
// search on the one-dimensional convex restriction.
std::vector<double> numeric_split(const std::vector<double>& load, double cap) {
    const std::size_t n = load.size();
    std::vector<double> f(n, cap / static_cast<double>(n));
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int sweep = 0; sweep < 400; ++sweep)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double s = f[i] + f[j];
                auto h = [&](double x) { return load[i] / x + load[j] / (s - x); };
                double lo = 0.0, hi = s;
                double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
                double h1 = h(x1), h2 = h(x2);
                for (int it = 0; it < 200 && hi - lo > 1e-15 * s; ++it) {
                    if (h1 < h2) {
                        hi = x2;
                        x2 = x1;
                        h2 = h1;
                        x1 = hi - g * (hi - lo);
                        h1 = h(x1);
                    } else {
                        lo = x1;
                        x1 = x2;
                        h1 = h2;
                        x2 = lo + g * (hi - lo);
                        h2 = h(x2);
                    }
                }
                f[i] = 0.5 * (lo + hi);
                f[j] = s - f[i];
            }
    return f;
}

void criterion2() {
    Rng rng = make_rng(2, 0);
    std::size_t ok = 0;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const std::size_t n = 1 + uniform_index(rng, 8);
        std::vector<double> load(n);
        for (auto& l : load) l = uniform(rng, 0.5e9, 1.5e9) * uniform(rng, 0.5, 2.0);
        const double cap = uniform(rng, 1e9, 60e9);
        const auto a = optimal_split(load, cap);
        const auto b = numeric_split(load, cap);
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i) e = std::fmax(e, std::fabs(a[i] - b[i]) / b[i]);
        worst = std::fmax(worst, e);
        ok += e <= 1e-6;
    }
    const auto fx = optimal_split(std::vector<double>{1e9, 4e9}, 50e9);
    const bool fixture = rel_close(fx[0], 50e9 / 3.0, 1e-12) && rel_close(fx[1], 100e9 / 3.0, 1e-12);
    report(2, ok == 1000 && fixture, "closed-form split",
           fmt("%.0f/1000 within 1e-6 relative (worst %.2e); fixture [%.6g, %.6g]", static_cast<double>(ok), worst,
               fx[0], fx[1]));
}

void criterion3() {
    struct Shape {
        std::size_t in;
        std::vector<std::size_t> hidden;
        std::size_t classes;
    };
    const std::vector<Shape> shapes{{3, {4}, 2}, {6, {8, 5}, 3}, {10, {64, 32}, 5}};
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::size_t s = 0; s < shapes.size(); ++s) {
        NetConfig nc;
        nc.input_dim = shapes[s].in;
        nc.hidden = shapes[s].hidden;
        nc.n_classes = shapes[s].classes;
        nc.seed = 30 + s;
        Mlp net(nc);
        Rng rng = make_rng(31, s);
        std::vector<Sample> batch;
        for (int k = 0; k < 6; ++k) {
            Sample smp;
            for (std::size_t d = 0; d < nc.input_dim; ++d) smp.input.push_back(uniform(rng, -1, 1));
            smp.target_assoc = static_cast<int>(uniform_index(rng, nc.n_classes));
            smp.target_fraction = uniform(rng, 0.05, 0.95);
            batch.push_back(smp);
        }
        Mlp::Gradients g;
        net.gradient(batch, g);
        const double h = 1e-6;
        auto check = [&](double& p, double analytic) {
            const double keep = p;
            p = keep + h;
            const double up = net.loss(batch);
            p = keep - h;
            const double dn = net.loss(batch);
            p = keep;
            const double fd = (up - dn) / (2 * h);
            const double e = std::fabs(fd - analytic) / std::fmax(1e-6, std::fmax(std::fabs(fd), std::fabs(analytic)));
            worst = std::fmax(worst, e);
            ++checked;
        };
        for (std::size_t l = 0; l < net.n_layers(); ++l) {
            auto& W = net.weights()[l];
            for (Eigen::Index r = 0; r < W.rows(); ++r)
                for (Eigen::Index c = 0; c < W.cols(); ++c) check(W(r, c), g.dW[l](r, c));
            auto& b = net.biases()[l];
            for (Eigen::Index r = 0; r < b.size(); ++r) check(b(r), g.db[l](r));
        }
    }
    report(3, worst <= 1e-4, "gradient check",
           fmt("%.0f parameters over 3 nets, worst relative error %.2e", static_cast<double>(checked), worst));
}

double window_mean(const std::vector<EpochRecord>& r, std::size_t from, std::size_t to,
                   const std::function<double(const EpochRecord&)>& f) {
    double s = 0.0;
    for (std::size_t t = from; t < to; ++t) s += f(r[t]);
    return s / static_cast<double>(to - from);
}

void criterion4() {
    const Config c = desk();
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto res = run_ablation(c, AblationMode::DnnNoIncremental, seed);
        auto test = [](const EpochRecord& r) { return *r.test_loss; };
        auto gap = [](const EpochRecord& r) { return *r.test_loss - *r.train_loss; };
        const double on = window_mean(res.full, 150, 200, test);
        const double off = window_mean(res.ablated, 150, 200, test);
        const double g0 = window_mean(res.ablated, 0, 50, gap);
        const double g1 = window_mean(res.ablated, 150, 200, gap);
        const bool pass = on <= off && g1 > g0;
        ok = ok && pass;
        detail += fmt("[seed %.0f test %.3f vs %.3f, gap %.3f -> %.3f] ", static_cast<double>(seed), on, off, g0, g1);
    }
    report(4, ok, "incremental learning vs ablation", detail);
}

void criterion5() {
    const Config c = desk();
    int wins = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto res = run_ablation(c, AblationMode::DrlNoRefinement, seed);
        const auto t_full = epochs_to_fraction(res.full, 0.9, 50);
        const auto t_abl = epochs_to_fraction(res.ablated, 0.9, 50);
        const double r_full = summarize(res.full, 50).final_reward;
        const double r_abl = summarize(res.ablated, 50).final_reward;
        wins += (t_full < t_abl && r_full > r_abl);
        detail += fmt("[t90 %.0f vs %.0f, reward %.3f vs %.3f] ", static_cast<double>(t_full),
                      static_cast<double>(t_abl), r_full, r_abl);
    }
    report(5, wins >= 4, "refinement vs random exploration", fmt("%.0f/5 seeds; ", wins) + detail);
}

void criterion6() {
    Config c = desk();
    c.sweep.ue_counts = {10, 20, 50};
    c.sweep.seeds = {1, 2, 3, 4, 5};
    c.sweep.schedulers = {SchedulerKind::DnnAre, SchedulerKind::DrlAre, SchedulerKind::Greedy,
                          SchedulerKind::Random, SchedulerKind::Local,  SchedulerKind::Oracle};
    const auto dir = std::filesystem::temp_directory_path() / "hmec_acceptance_sweep";
    const auto stats = sweep_stats(sweep_ues(c, dir));
    auto mean = [&](std::size_t n, SchedulerKind k) {
        for (const auto& s : stats)
            if (s.n_ues == n && s.scheduler == k) return s.mean;
        return std::nan("");
    };
    bool ok = true;
    std::string detail;
    for (std::size_t n : c.sweep.ue_counts) {
        const double dnn = mean(n, SchedulerKind::DnnAre), drl = mean(n, SchedulerKind::DrlAre);
        const double gr = mean(n, SchedulerKind::Greedy), rnd = mean(n, SchedulerKind::Random);
        const double loc = mean(n, SchedulerKind::Local), orc = mean(n, SchedulerKind::Oracle);
        bool pass = dnn <= 1.1 * drl && dnn < gr && drl < gr && gr < loc && std::fmax(dnn, drl) < rnd && rnd < loc;
        if (n == 10) pass = pass && dnn <= 1.1 * orc && drl <= 1.1 * orc;
        ok = ok && pass;
        detail += "[N=" + std::to_string(n) +
                  fmt(" dnn %.3f drl %.3f greedy %.3f random %.3f", dnn, drl, gr, rnd) +
                  fmt(" local %.3f oracle %.3f] ", loc, orc);
    }
    report(6, ok, "scheduler ordering across N", detail);
}

void criterion7() {
    const Config c = desk();
    const auto traj = build_trajectory(c, 91, 10, 100, 7);
    auto pre = pretrain_for(c, 10, 7);
    const std::size_t dim = pre.net.config().input_dim;
    DnnAre dnn(c.dnn_config(), std::move(pre), 7);
    DrlAreConfig rc = c.drl_config();
    DrlAre drl(rc, c.nodes.size(), drl_warmup_norm(c.scenario, c.nodes, rc, 7), 7);
    std::size_t feasible_epochs = 0;
    for (const auto& w : traj) {
        const auto a = dnn.decide(w);
        dnn.incremental_update(w, a);
        const auto b = drl.decide(w);
        drl.update(w, b);
        feasible_epochs += feasible(w, a.executed).ok() && feasible(w, b.executed).ok();
    }
    const bool same_dim = dnn.net().config().input_dim == dim && drl.policy().config().input_dim == dim;
    report(7, feasible_epochs == traj.size() && same_dim && traj.back().n_ues() == 100, "UE count 10 to 100",
           fmt("%.0f/%.0f epochs feasible for both controllers, input dim %.0f throughout",
               static_cast<double>(feasible_epochs), static_cast<double>(traj.size()), static_cast<double>(dim)));
}

void criterion8() {
    bool ok = true;
    std::string detail;
    // FIFO and capacity, replay buffer at the default size.
    ReplayBuffer buf;
    for (std::size_t k = 0; k < 10001; ++k) buf.push(Transition{{double(k)}, 0, 1.0, 1.0 + double(k % 7), 0});
    ok = ok && buf.size() == 10000 && buf.entries().front().seq == 1 && buf.entries().back().seq == 10000;
    bool ordered = true;
    for (std::size_t i = 1; i < buf.size(); ++i) ordered = ordered && buf.entries()[i].seq == buf.entries()[i - 1].seq + 1;
    Rng rng = make_rng(8, 0);
    ok = ok && ordered && buf.sample(1000, rng).size() == 1000;
    detail += fmt("buffer size %.0f, oldest seq %.0f; ", static_cast<double>(buf.size()),
                  static_cast<double>(buf.entries().front().seq));
    // Sample memory.
    SampleMemory mem(1000);
    for (std::size_t k = 0; k < 1050; ++k) mem.push(Sample{{double(k)}, 0, 1.0});
    ok = ok && mem.size() == 1000 && mem.entries().front().seq == 50;
    detail += fmt("memory size %.0f, oldest seq %.0f; ", static_cast<double>(mem.size()),
                  static_cast<double>(mem.entries().front().seq));
    // Priority-proportional frequencies.
    ReplayBuffer pb(16, 0.6);
    for (int k = 0; k < 8; ++k) pb.push(Transition{{0.0}, 0, 1.0, 0.1 + 0.5 * k, 0});
    const std::size_t draws = 100000;
    std::vector<std::size_t> hits(pb.size(), 0);
    Rng r2 = make_rng(88, 0);
    // a batch is capped at the buffer size, so draw many batches
    for (std::size_t d = 0; d < draws; d += pb.size())
        for (auto i : pb.sample_indices(pb.size(), r2)) ++hits[i];
    double worst_z = 0.0;
    for (std::size_t i = 0; i < pb.size(); ++i) {
        const double p = pb.probability(i);
        const double sd = std::sqrt(draws * p * (1 - p));
        worst_z = std::fmax(worst_z, std::fabs(static_cast<double>(hits[i]) - draws * p) / sd);
    }
    ok = ok && worst_z <= 3.0;
    detail += fmt("priority sampling worst deviation %.2f sigma over 1e5 draws", worst_z);
    report(8, ok, "buffer and memory semantics", detail);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion9() {
    Config c = desk();
    c.experiment.horizon = 60;
    c.experiment.schedulers = {SchedulerKind::DnnAre, SchedulerKind::DrlAre, SchedulerKind::Greedy,
                               SchedulerKind::Random, SchedulerKind::Local};
    const auto base = std::filesystem::temp_directory_path() / "hmec_acceptance_det";
    run_experiment(c, base / "a");
    run_experiment(c, base / "b");
    bool ok = true;
    for (const char* f : {"epochs.csv", "summary.csv", "placement.csv"}) ok = ok && slurp(base / "a" / f) == slurp(base / "b" / f);
    const auto ra = parse_csv(slurp(base / "a" / "epochs.csv"));
    const auto rb = parse_csv(slurp(base / "b" / "epochs.csv"));
    double worst = 0.0;
    ok = ok && ra.size() == rb.size() && ra.size() > 1;
    for (std::size_t i = 1; ok && i < ra.size(); ++i) {
        const double x = std::stod(ra[i][3]), y = std::stod(rb[i][3]);
        worst = std::fmax(worst, std::fabs(x - y) / std::fmax(std::fabs(x), 1e-300));
    }
    ok = ok && worst <= 1e-9;
    report(9, ok, "determinism",
           fmt("%.0f epoch rows byte-identical across repeat runs; worst objective difference %.1e",
               static_cast<double>(ra.size() - 1), worst));
}

} // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    std::printf("%d of 9 criteria failed\n", g_failed);
    return g_failed ? 1 : 0;
}
