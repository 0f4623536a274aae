#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hmec/sched.hpp"

using namespace hmec;

namespace {

DnnAreConfig quick_dnn() {
    DnnAreConfig c;
    c.pretrain_worlds = 10;
    c.pretrain_ues = 10;
    c.min_samples = 1000;
    c.budget.population = 20;
    c.budget.generations = 15;
    c.net.iterations = 60;
    c.net.learning_rate = 0.05;
    c.fine_tune_steps = 5;
    return c;
}

/// Pretraining is the slow part, so the suite shares one result.
const PretrainResult& shared_pretrain() {
    static const PretrainResult r = [] {
        Scenario sc;
        return pretrain_dnn(sc, test::desk_nodes(sc), quick_dnn(), 5);
    }();
    return r;
}

DrlAreConfig quick_drl() {
    DrlAreConfig c;
    c.batch_size = 64;
    c.norm_warmup_worlds = 3;
    return c;
}

} // namespace

TEST(Reward, InverseObjective) {
    EXPECT_DOUBLE_EQ(reward_of(2.0), 0.5);
    EXPECT_EQ(reward_of(0.0), 0.0);
}

TEST(Threshold, Rules) {
    DnnAreConfig c;
    c.threshold_rule = ThresholdRule::HalfMax;
    EXPECT_NEAR(c.threshold_for(4, 0.0), 0.5 * std::log(5.0), 1e-12);
    c.threshold_rule = ThresholdRule::Fixed;
    EXPECT_THROW(c.threshold_for(4, 1.0), std::invalid_argument);
    c.entropy_threshold = 0.7;
    EXPECT_EQ(c.threshold_for(4, 1.0), 0.7);
    c.threshold_rule = ThresholdRule::Calibrated;
    EXPECT_EQ(c.threshold_for(4, 0.3), 0.3);
    EXPECT_THROW(c.threshold_for(4, 0.0), std::invalid_argument);
}

TEST(Baselines, LocalGreedyRandom) {
    const auto w = test::desk_world(12, 2);
    const auto local = baseline_decide(w, BaselineKind::Local, 1);
    double sum = 0;
    for (const auto& ue : w.ues) sum += ue.task.cycles / ue.local_capacity_cps;
    EXPECT_NEAR(local.objective, sum, 1e-12 * sum);
    const auto greedy = baseline_decide(w, BaselineKind::Greedy, 1);
    EXPECT_TRUE(feasible(w, greedy.executed).ok());
    const auto r1 = baseline_decide(w, BaselineKind::Random, 3);
    EXPECT_EQ(r1.executed, baseline_decide(w, BaselineKind::Random, 3).executed);
    EXPECT_TRUE(feasible(w, r1.executed).ok());
}

TEST(LabelSnapshot, TargetsAndRegisterRows) {
    const auto w = test::desk_world(5, 3);
    const auto target = allocate(w, {1, 1, kLocal, 2, 1});
    const auto s = register_inputs(w, capacities(w));
    const auto samples = label_snapshot(w, s, target, AvgAllocSource::Register);
    ASSERT_EQ(samples.size(), 5u);
    const auto rows = register_profiles(capacities(w), target.assoc);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(samples[i].target_assoc, target.assoc[i]);
        EXPECT_EQ(samples[i].input.size(), 2 * w.n_nodes() + 2);
        EXPECT_NEAR(samples[i].input[6], rows[i][0] * 1e-9, 1e-12);
    }
    EXPECT_EQ(samples[2].target_fraction, 1.0);
    EXPECT_NEAR(samples[0].target_fraction, target.alloc[0] / w.nodes[0].capacity_cps, 1e-12);
}

TEST(RebaseNorm, PreservesFunction) {
    auto cfg = NetConfig::for_nodes(2);
    cfg.hidden = {6};
    Mlp net(cfg);
    std::vector<std::vector<double>> a{{1, 2, 3, 4, 5, 6}, {2, 0, 1, 1, 0, 3}};
    std::vector<std::vector<double>> b{{10, -2, 3, 8, 5, 1}, {0, 4, 2, 1, 9, 3}, {5, 5, 5, 5, 5, 5}};
    const auto na = NormStats::fit(a), nb = NormStats::fit(b);
    const std::vector<double> raw{3, 1, 2, 7, 4, 2};
    const auto before = net.forward(na.apply(raw));
    rebase_input_norm(net, na, nb);
    const auto after = net.forward(nb.apply(raw));
    for (std::size_t k = 0; k < before.probs.size(); ++k) EXPECT_NEAR(after.probs[k], before.probs[k], 1e-12);
    EXPECT_NEAR(after.fraction, before.fraction, 1e-12);
}

TEST(Pretrain, CorpusSizeLossDropAndErrors) {
    const auto& r = shared_pretrain();
    EXPECT_GE(r.corpus.size(), 1000u);
    EXPECT_EQ(r.worlds, 100u);
    EXPECT_LE(r.report.final_loss, 0.5 * r.report.initial_loss);
    EXPECT_GT(r.corpus_entropy, 0.0);
    auto bad = quick_dnn();
    bad.pretrain_worlds = 0;
    Scenario sc;
    EXPECT_THROW(pretrain_dnn(sc, test::desk_nodes(sc), bad, 1), std::invalid_argument);
}

TEST(Pretrain, Deterministic) {
    Scenario sc;
    auto c = quick_dnn();
    c.min_samples = 100;
    c.net.iterations = 10;
    const auto a = pretrain_dnn(sc, test::desk_nodes(sc), c, 8);
    const auto b = pretrain_dnn(sc, test::desk_nodes(sc), c, 8);
    EXPECT_TRUE(a.net.same_parameters(b.net));
    EXPECT_EQ(a.norm, b.norm);
    EXPECT_EQ(a.corpus, b.corpus);
}

TEST(DnnAre, DecideIsPerUeAndFeasible) {
    DnnAre ctl(quick_dnn(), shared_pretrain(), 1);
    const auto w = test::desk_world(14, 40);
    const auto s = ctl.decide(w);
    ASSERT_EQ(s.size(), 14u);
    ASSERT_EQ(s.probs.size(), 14u);
    ASSERT_EQ(s.raw_assoc.size(), 14u);
    for (std::size_t i = 0; i < 14; ++i) EXPECT_EQ(snapshot_features(s, i).size(), 2 * w.n_nodes() + 2);
    EXPECT_TRUE(feasible(w, s.executed).ok());
    EXPECT_NEAR(s.objective, objective(w, s.executed), 1e-12 * s.objective);
    EXPECT_GE(s.mean_entropy, 0.0);
    EXPECT_LE(s.mean_entropy, std::log(5.0) + 1e-12);
}

TEST(DnnAre, EmptyEpoch) {
    DnnAre ctl(quick_dnn(), shared_pretrain(), 1);
    auto w = test::desk_world(3, 41);
    Rng rng = make_rng(1, 0);
    w = resize_ues(w, 0, rng);
    const auto s = ctl.decide(w);
    EXPECT_EQ(s.size(), 0u);
    EXPECT_EQ(s.objective, 0.0);
    EXPECT_FALSE(ctl.incremental_update(w, s).triggered);
}

TEST(DnnAre, UpdateIsNoOpBelowThreshold) {
    DnnAre ctl(quick_dnn(), shared_pretrain(), 1);
    const auto w = test::desk_world(10, 42);
    auto s = ctl.decide(w);
    s.mean_entropy = ctl.threshold();
    const Mlp before = ctl.net();
    const auto seq = ctl.memory().next_seq();
    const auto rep = ctl.incremental_update(w, s);
    EXPECT_FALSE(rep.triggered);
    EXPECT_TRUE(ctl.net().same_parameters(before));
    EXPECT_EQ(ctl.memory().next_seq(), seq);
}

TEST(DnnAre, UniformOutputTriggersUpdate) {
    DnnAre ctl(quick_dnn(), shared_pretrain(), 1);
    const auto w = test::desk_world(10, 43);
    auto s = ctl.decide(w);
    s.mean_entropy = std::log(5.0);
    const Mlp before = ctl.net();
    const auto seq = ctl.memory().next_seq();
    const auto rep = ctl.incremental_update(w, s);
    EXPECT_TRUE(rep.triggered);
    EXPECT_GT(rep.evals, 0u);
    EXPECT_FALSE(ctl.net().same_parameters(before));
    EXPECT_EQ(ctl.memory().next_seq(), seq + 10);
}

TEST(DnnAre, DisabledIncrementalNeverTriggers) {
    auto cfg = quick_dnn();
    cfg.incremental = false;
    DnnAre ctl(cfg, shared_pretrain(), 1);
    const auto w = test::desk_world(10, 44);
    auto s = ctl.decide(w);
    s.mean_entropy = std::log(5.0);
    EXPECT_FALSE(ctl.incremental_update(w, s).triggered);
}

TEST(DrlAre, UpdateRefinesAndFillsBuffer) {
    Scenario sc;
    const auto cfg = quick_drl();
    const auto norm = drl_warmup_norm(sc, test::desk_nodes(sc), cfg, 2);
    DrlAre ctl(cfg, 4, norm, 2);
    const auto w = test::desk_world(10, 45);
    const auto s = ctl.decide(w);
    EXPECT_TRUE(feasible(w, s.executed).ok());
    const auto rep = ctl.update(w, s);
    EXPECT_LE(rep.refined_objective, rep.raw_objective);
    EXPECT_GE(rep.priority, cfg.epsilon);
    EXPECT_EQ(ctl.buffer().size(), 10u);
    EXPECT_EQ(rep.batch, 10u);
}

TEST(DrlAre, AblationUsesRandomExploration) {
    Scenario sc;
    auto cfg = quick_drl();
    cfg.refinement = false;
    const auto norm = drl_warmup_norm(sc, test::desk_nodes(sc), cfg, 2);
    DrlAre ctl(cfg, 4, norm, 2);
    const auto w = test::desk_world(10, 46);
    const auto rep = ctl.update(w, ctl.decide(w));
    EXPECT_EQ(rep.evals, cfg.explore_candidates + 1);
    EXPECT_LE(rep.refined_objective, rep.raw_objective);
}

TEST(Checkpoint, DnnRoundTrip) {
    DnnAre ctl(quick_dnn(), shared_pretrain(), 1);
    const auto w = test::desk_world(10, 47);
    auto s = ctl.decide(w);
    s.mean_entropy = std::log(5.0);
    ctl.incremental_update(w, s);
    std::stringstream ss;
    save_checkpoint(ss, ctl);
    const std::string text = ss.str();
    std::stringstream in(text);
    EXPECT_EQ(detail::read_checkpoint_kind(in), "dnn");
    std::stringstream in2(text);
    const auto back = load_dnn_checkpoint(in2, quick_dnn(), 1);
    EXPECT_TRUE(back.net().same_parameters(ctl.net()));
    EXPECT_EQ(back.norm(), ctl.norm());
    EXPECT_EQ(back.memory().size(), ctl.memory().size());
    EXPECT_EQ(back.threshold(), ctl.threshold());
    const auto w2 = test::desk_world(10, 48);
    EXPECT_EQ(back.decide(w2).executed, ctl.decide(w2).executed);
    std::stringstream again;
    save_checkpoint(again, back);
    EXPECT_EQ(again.str(), text);
}

TEST(Checkpoint, DrlRoundTripAndKindMismatch) {
    Scenario sc;
    const auto cfg = quick_drl();
    DrlAre ctl(cfg, 4, drl_warmup_norm(sc, test::desk_nodes(sc), cfg, 3), 3);
    const auto w = test::desk_world(10, 49);
    ctl.update(w, ctl.decide(w));
    std::stringstream ss;
    save_checkpoint(ss, ctl);
    const std::string text = ss.str();
    std::stringstream in(text);
    const auto back = load_drl_checkpoint(in, cfg, 3);
    std::stringstream again;
    save_checkpoint(again, back);
    EXPECT_EQ(again.str(), text);
    std::stringstream wrong(text);
    EXPECT_THROW(load_dnn_checkpoint(wrong, quick_dnn(), 3), std::runtime_error);
}
