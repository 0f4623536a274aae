// hmec: batch driver for the offloading simulator.
//
//   hmec run     --config cfg.json --out out/ [--seed N] [--scheduler NAME]...
//   hmec sweep   --config cfg.json --out out/ [--scheduler NAME]...
//   hmec ablate  --config cfg.json --out out/ --mode dnn_no_incremental|drl_no_refinement
//   hmec pretrain --config cfg.json --out out/
//
// --preset desk|paper|paper-matlab supplies a base config that --config
// overrides field by field. HMEC_WORKERS bounds the sweep worker pool.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hmec/harness.hpp"

namespace {

struct Common {
    std::string config;
    std::string preset;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::vector<std::string> schedulers;
};

void add_common(CLI::App* sub, Common& c, bool with_schedulers) {
    sub->add_option("--config", c.config, "JSON config file");
    sub->add_option("--preset", c.preset, "Base preset: desk, paper, paper-matlab");
    sub->add_option("--out", c.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", c.seed, "Override experiment.seed");
    if (with_schedulers)
        sub->add_option("--scheduler", c.schedulers, "Scheduler(s): DNN-ARE, DRL-ARE, Greedy, Random, Local, Oracle");
}

hmec::Config resolve(const Common& c) {
    if (c.config.empty() && c.preset.empty()) throw hmec::ConfigError("config: pass --config or --preset");
    hmec::Config cfg = hmec::load_config(c.config, c.preset);
    if (c.seed) cfg.experiment.seed = *c.seed;
    if (!c.schedulers.empty()) {
        std::vector<hmec::SchedulerKind> ks;
        for (const auto& s : c.schedulers) ks.push_back(hmec::detail::parse_scheduler(s));
        cfg.experiment.schedulers = ks;
        cfg.sweep.schedulers = ks;
    }
    return cfg;
}

void print_summary(const std::vector<hmec::RunSummary>& ss) {
    std::printf("%-10s %14s %14s %8s\n", "scheduler", "mean_obj", "final_obj", "triggers");
    for (const auto& s : ss)
        std::printf("%-10s %14.6f %14.6f %8zu\n", s.variant.empty() ? hmec::to_string(s.scheduler) : s.variant.c_str(),
                    s.mean_objective, s.final_objective, s.triggers);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Offloading simulator for heterogeneous mobile edge computing"};
    app.require_subcommand(1);

    Common run_opt, sweep_opt, ablate_opt, pre_opt;
    std::string mode;
    auto* run = app.add_subcommand("run", "Run the configured schedulers on one seeded trajectory");
    add_common(run, run_opt, true);
    auto* sweep = app.add_subcommand("sweep", "Sweep UE counts x schedulers x seeds");
    add_common(sweep, sweep_opt, true);
    auto* abl = app.add_subcommand("ablate", "Run an ARE variant against its ablation");
    add_common(abl, ablate_opt, false);
    abl->add_option("--mode", mode, "dnn_no_incremental or drl_no_refinement")
        ->check(CLI::IsMember({"dnn_no_incremental", "drl_no_refinement"}));
    auto* pre = app.add_subcommand("pretrain", "Pretrain the DNN controller and write a checkpoint");
    add_common(pre, pre_opt, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto cfg = resolve(run_opt);
            const auto res = hmec::run_experiment(cfg, run_opt.out);
            print_summary(res.summaries);
        } else if (*sweep) {
            const auto cfg = resolve(sweep_opt);
            const auto cells = hmec::sweep_ues(cfg, sweep_opt.out);
            std::printf("%-6s %-10s %14s %14s\n", "n_ues", "scheduler", "mean_obj", "std_obj");
            for (const auto& s : hmec::sweep_stats(cells))
                std::printf("%-6zu %-10s %14.6f %14.6f\n", s.n_ues, hmec::to_string(s.scheduler), s.mean, s.std);
        } else if (*abl) {
            auto cfg = resolve(ablate_opt);
            if (mode == "drl_no_refinement") cfg.ablation.mode = hmec::AblationMode::DrlNoRefinement;
            else if (mode == "dnn_no_incremental") cfg.ablation.mode = hmec::AblationMode::DnnNoIncremental;
            const auto res = hmec::ablation(cfg, cfg.ablation.mode, ablate_opt.out);
            print_summary({hmec::summarize(res.full, cfg.experiment.score_window),
                           hmec::summarize(res.ablated, cfg.experiment.score_window)});
        } else if (*pre) {
            const auto cfg = resolve(pre_opt);
            const std::uint64_t seed = cfg.experiment.seed;
            auto result = hmec::pretrain_for(cfg, cfg.experiment.ue_start, seed);
            std::filesystem::create_directories(pre_opt.out);
            const std::string hash = hmec::config_hash(cfg);
            {
                std::ofstream os(std::filesystem::path(pre_opt.out) / "pretrain.csv", std::ios::binary);
                hmec::CsvWriter w(os);
                w.row({"worlds", "samples", "passes", "initial_loss", "final_loss", "corpus_entropy",
                       "optimizer_evals", "seed", "config_hash"});
                w.row({std::to_string(result.worlds), std::to_string(result.corpus.size()),
                       std::to_string(result.report.passes), hmec::CsvWriter::num(result.report.initial_loss),
                       hmec::CsvWriter::num(result.report.final_loss), hmec::CsvWriter::num(result.corpus_entropy),
                       std::to_string(result.evals), std::to_string(seed), hash});
            }
            hmec::DnnAre ctl(cfg.dnn_config(), std::move(result), hmec::derive_seed(seed, hmec::kStreamController));
            std::ofstream os(std::filesystem::path(pre_opt.out) / "dnn.ckpt");
            hmec::save_checkpoint(os, ctl);
            std::printf("pretrained: %zu samples, loss %.4f, tau %.4f\n", ctl.memory().size(),
                        ctl.memory_loss(), ctl.threshold());
        }
    } catch (const hmec::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
