#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "ssfgnet/canonical_json.hpp"
#include "ssfgnet/error.hpp"
#include "ssfgnet/experiment.hpp"
#include "ssfgnet/metrics.hpp"
#include "ssfgnet/optim.hpp"

namespace {

using namespace ssfgnet;
using namespace ssfgnet::harness;

// Optimizer ------------------------------------------------------------------

TEST(Adam, ZeroGradientLeavesParametersAndDecaysMoments) {
    ad::Parameter p("w", Tensor({3}, {1.0, -2.0, 0.5}));
    std::vector<ad::Parameter*> params{&p};
    AdamState st;
    p.grad = Tensor({3}, {0.4, 0.4, 0.4});
    adam_step(params, st, {}, 0.1);
    const Tensor after_first = p.value;
    const Tensor m1 = st.m[0];
    const Tensor v1 = st.v[0];
    p.zero_grad();
    adam_step(params, st, {}, 0.1);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(st.m[0][i], 0.9 * m1[i]);
        EXPECT_DOUBLE_EQ(st.v[0][i], 0.999 * v1[i]);
    }
    // A fresh state with zero gradient does not move.
    ad::Parameter q("q", Tensor({2}, {3.0, 4.0}));
    std::vector<ad::Parameter*> qs{&q};
    AdamState fresh;
    q.zero_grad();
    adam_step(qs, fresh, {}, 0.1);
    EXPECT_EQ(q.value[0], 3.0);
    EXPECT_EQ(q.value[1], 4.0);
    EXPECT_EQ(fresh.m[0][0], 0.0);
    (void)after_first;
}

TEST(Adam, FirstStepIsSignedLearningRate) {
    ad::Parameter p("w", Tensor({4}, {0.0, 1.0, -1.0, 2.0}));
    const Tensor start = p.value;
    p.grad = Tensor({4}, {3.0, -0.5, 20.0, -7.0});
    std::vector<ad::Parameter*> params{&p};
    AdamState st;
    adam_step(params, st, {}, 1e-2);
    for (std::size_t i = 0; i < 4; ++i) {
        const double sign = p.grad[i] > 0 ? 1.0 : -1.0;
        EXPECT_NEAR(p.value[i] - start[i], -1e-2 * sign, 1e-9);
    }
}

TEST(Adam, ConvergesOnQuadratic) {
    const std::vector<double> target{0.7, -1.3, 2.2, 0.0, -0.4};
    ad::Parameter p("w", Tensor({5}));
    std::vector<ad::Parameter*> params{&p};
    AdamState st;
    for (int step = 0; step < 2000; ++step) {
        for (std::size_t i = 0; i < 5; ++i) p.grad[i] = 2.0 * (p.value[i] - target[i]);
        adam_step(params, st, {}, 1e-2);
    }
    double dist = 0.0;
    for (std::size_t i = 0; i < 5; ++i) dist += std::pow(p.value[i] - target[i], 2);
    EXPECT_LT(std::sqrt(dist), 1e-3);
}

// Scheduler ------------------------------------------------------------------

TEST(Plateau, ConstantLossHalvesAtEpochEleven) {
    PlateauConfig cfg;
    PlateauState st(cfg);
    for (int epoch = 1; epoch <= 10; ++epoch) {
        EXPECT_EQ(plateau_update(st, cfg, 1.0).lr, 1e-3) << epoch;
    }
    const auto r = plateau_update(st, cfg, 1.0);
    EXPECT_EQ(r.lr, 5e-4);
    EXPECT_FALSE(r.stop);
    for (int epoch = 12; epoch <= 20; ++epoch) EXPECT_EQ(plateau_update(st, cfg, 1.0).lr, 5e-4);
    EXPECT_EQ(plateau_update(st, cfg, 1.0).lr, 2.5e-4);
}

TEST(Plateau, ReductionBelowMinimumStops) {
    PlateauConfig cfg;
    cfg.lr_init = 1.5e-6;
    cfg.patience = 1;
    PlateauState st(cfg);
    EXPECT_FALSE(plateau_update(st, cfg, 1.0).stop);
    const auto r = plateau_update(st, cfg, 1.0);
    EXPECT_DOUBLE_EQ(r.lr, 7.5e-7);
    EXPECT_TRUE(r.stop);
}

TEST(Plateau, DecreasingLossNeverChangesRate) {
    PlateauConfig cfg;
    cfg.patience = 1;
    PlateauState st(cfg);
    for (int epoch = 0; epoch < 500; ++epoch) {
        const auto r = plateau_update(st, cfg, 10.0 - 0.01 * epoch);
        EXPECT_EQ(r.lr, 1e-3);
        EXPECT_FALSE(r.stop);
    }
}

TEST(Plateau, ImprovementBelowThresholdCountsAsPlateau) {
    PlateauConfig cfg;
    cfg.patience = 2;
    PlateauState st(cfg);
    plateau_update(st, cfg, 1.0);
    plateau_update(st, cfg, 1.0 - 5e-7);
    EXPECT_EQ(plateau_update(st, cfg, 1.0 - 9e-7).lr, 5e-4);
}

TEST(Plateau, NonFiniteLossRejected) {
    PlateauConfig cfg;
    PlateauState st(cfg);
    EXPECT_THROW(plateau_update(st, cfg, std::nan("")), ContractError);
}

// Losses and metrics ---------------------------------------------------------

TEST(Loss, UniformLogitsGiveLogK) {
    ad::Tape tape;
    auto out = tape.constant(Tensor({4, 5}));
    const std::vector<std::size_t> y{0, 1, 2, 4};
    EXPECT_NEAR(task_loss(graphnet::Task::GraphClass, out, y, {}, 5).value().item(), std::log(5.0), 1e-12);
    EXPECT_NEAR(task_loss(graphnet::Task::NodeClass, out, y, {}, 5).value().item(), std::log(5.0), 1e-12);
}

TEST(Loss, MaeZeroAtTargets) {
    ad::Tape tape;
    auto out = tape.constant(Tensor({3, 1}, {0.5, -1.0, 2.0}));
    const std::vector<double> t{0.5, -1.0, 2.0};
    EXPECT_EQ(task_loss(graphnet::Task::GraphRegress, out, {}, t, 1).value().item(), 0.0);
    const std::vector<double> off{1.5, -1.0, 1.0};
    EXPECT_DOUBLE_EQ(task_loss(graphnet::Task::GraphRegress, out, {}, off, 1).value().item(), 2.0 / 3.0);
}

TEST(Loss, TargetOutOfRangeIsContractError) {
    ad::Tape tape;
    auto out = tape.constant(Tensor({2, 3}));
    const std::vector<std::size_t> y{0, 3};
    EXPECT_THROW(task_loss(graphnet::Task::GraphClass, out, y, {}, 3), ContractError);
}

TEST(Loss, ClassWeightsFormula) {
    std::vector<std::size_t> labels(10, 0);
    labels.insert(labels.end(), 30, 1);
    const auto w = class_weights(labels, 2);
    EXPECT_DOUBLE_EQ(w[0], 2.0);
    EXPECT_DOUBLE_EQ(w[1], 40.0 / 60.0);
}

TEST(Loss, WeightedCrossEntropyMatchesHandComputation) {
    ad::Tape tape;
    auto out = tape.constant(Tensor({3, 2}, {1.0, 0.0, 0.0, 2.0, 0.5, 0.5}));
    const std::vector<std::size_t> y{0, 1, 1};
    // Weights: class 0 -> 3/2, class 1 -> 3/4.
    auto nll = [](double a, double b, std::size_t k) {
        const double lse = std::log(std::exp(a) + std::exp(b));
        return lse - (k == 0 ? a : b);
    };
    const double num = 1.5 * nll(1, 0, 0) + 0.75 * nll(0, 2, 1) + 0.75 * nll(0.5, 0.5, 1);
    const double den = 1.5 + 0.75 + 0.75;
    EXPECT_NEAR(task_loss(graphnet::Task::NodeClass, out, y, {}, 2).value().item(), num / den, 1e-12);
}

TEST(Metric, WeightedAccuracyExamples) {
    const std::vector<std::size_t> labels{0, 0, 1, 1};
    EXPECT_EQ(weighted_accuracy(labels, labels, 2), 1.0);
    const std::vector<std::size_t> half{0, 0, 1, 0};
    EXPECT_DOUBLE_EQ(weighted_accuracy(half, labels, 2), 0.75);
    const std::vector<std::size_t> one_class{1, 1, 1, 1};
    EXPECT_DOUBLE_EQ(weighted_accuracy(one_class, labels, 2), 0.5);
    // Class 2 is absent from labels and excluded.
    EXPECT_DOUBLE_EQ(weighted_accuracy(half, labels, 3), 0.75);
    EXPECT_THROW(weighted_accuracy({}, {}, 2), ContractError);
}

TEST(Metric, AccuracyAndMae) {
    const std::vector<std::size_t> p{0, 1, 1}, y{0, 1, 0};
    EXPECT_DOUBLE_EQ(accuracy(p, y), 2.0 / 3.0);
    const std::vector<double> a{1.0, 2.0}, b{0.0, 4.0};
    EXPECT_DOUBLE_EQ(mean_absolute_error(a, b), 1.5);
}

TEST(Metric, MeanSdIsPopulation) {
    const std::vector<double> xs{1.0, 3.0};
    const auto r = mean_sd(xs);
    EXPECT_DOUBLE_EQ(r.mean, 2.0);
    EXPECT_DOUBLE_EQ(r.sd, 1.0);
}

// Config -----------------------------------------------------------------------

TEST(Config, ValidationRejectsBadValues) {
    ExperimentConfig c;
    c.lr_min = c.lr_init;
    EXPECT_THROW(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.patience = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.layers = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.ssfg.alpha = -1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_NO_THROW(ExperimentConfig{}.validate());
}

TEST(Config, JsonRoundTrip) {
    ExperimentConfig c;
    c.dataset = "d.json";
    c.architecture = graphnet::LayerKind::Gat;
    c.heads = 4;
    c.ssfg.alpha = 4.0;
    c.ssfg.mode = ssfg::Mode::BackwardOnly;
    c.dropout = ssfg::DropoutConfig{0.2};
    c.seeds = {5, 6};
    const auto j = to_json(c);
    EXPECT_EQ(canonical_dump(to_json(config_from_json(j))), canonical_dump(j));
    const auto inf = to_json(ExperimentConfig{});
    EXPECT_EQ(config_from_json(inf).ssfg.alpha, ssfg::kInfinity);
}

TEST(Config, UnknownKeysRejected) {
    auto j = to_json(ExperimentConfig{});
    j["learning_rate"] = 0.1;
    EXPECT_THROW(config_from_json(j), ConfigError);
    j = to_json(ExperimentConfig{});
    j["ssfg"]["beta"] = 1;
    EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(Config, Overrides) {
    auto j = to_json(ExperimentConfig{});
    apply_override(j, "ssfg.alpha=8");
    apply_override(j, "ssfg.mode=forward_only");
    apply_override(j, "layers=16");
    apply_override(j, "seeds=[9]");
    const auto c = config_from_json(j);
    EXPECT_EQ(c.ssfg.alpha, 8.0);
    EXPECT_EQ(c.ssfg.mode, ssfg::Mode::ForwardOnly);
    EXPECT_EQ(c.layers, 16u);
    EXPECT_EQ(c.seeds, std::vector<std::uint64_t>{9});
    EXPECT_THROW(apply_override(j, "no_equals_sign"), ConfigError);
}

// Experiments --------------------------------------------------------------------

data::DatasetFile small_node_task() {
    data::SbmSpec s;
    s.num_graphs = 8;
    s.nodes_min = 10;
    s.nodes_max = 14;
    s.communities = 3;
    s.seed = 4;
    return data::gen_sbm_node_task(s);
}

data::DatasetFile small_regression_task() {
    data::RegressionSpec r;
    r.num_graphs = 24;
    r.nodes_min = 8;
    r.nodes_max = 12;
    r.seed = 2;
    return data::gen_regression_task(r);
}

ExperimentConfig quick_config(graphnet::LayerKind arch) {
    ExperimentConfig c;
    c.architecture = arch;
    c.layers = 2;
    c.hidden_dim = 8;
    c.heads = arch == graphnet::LayerKind::Gat ? 2 : 1;
    c.max_epochs = 4;
    c.seeds = {1};
    c.batch_size = 8;
    c.diag_every = 2;
    c.record_wall_clock = false;
    return c;
}

std::string stream_of(const SeedResult& r) {
    std::string s;
    for (const auto& rec : r.records) s += canonical_dump(to_json(rec)) + "\n";
    return s;
}

TEST(Experiment, InfiniteAlphaMatchesOffBitForBit) {
    for (auto arch : {graphnet::LayerKind::Sage, graphnet::LayerKind::Gat, graphnet::LayerKind::GatedGcn}) {
        const auto d = arch == graphnet::LayerKind::GatedGcn ? small_regression_task() : small_node_task();
        auto a = quick_config(arch);
        a.ssfg.alpha = ssfg::kInfinity;
        auto b = a;
        b.ssfg.alpha = 4.0;
        b.ssfg.mode = ssfg::Mode::Off;
        EXPECT_EQ(stream_of(run_seed(a, d, 1)), stream_of(run_seed(b, d, 1)));
    }
}

TEST(Experiment, ModeAlgebraIncludingZeroDropout) {
    const auto d = small_node_task();
    auto off = quick_config(graphnet::LayerKind::Sage);
    off.ssfg.mode = ssfg::Mode::Off;
    auto drop0 = off;
    drop0.dropout = ssfg::DropoutConfig{0.0};
    auto full = off;
    full.ssfg.mode = ssfg::Mode::Full;
    full.ssfg.alpha = 4.0;
    const auto base = stream_of(run_seed(off, d, 3));
    EXPECT_EQ(base, stream_of(run_seed(drop0, d, 3)));
    EXPECT_NE(base, stream_of(run_seed(full, d, 3)));
}

TEST(Experiment, DeterministicStreams) {
    const auto d = small_regression_task();
    auto c = quick_config(graphnet::LayerKind::GatedGcn);
    c.ssfg.alpha = 2.0;
    c.dropout = ssfg::DropoutConfig{0.1};
    c.seeds = {0, 1};
    std::string first, second;
    run_experiment(c, d, [&](const MetricsRecord& r) { first += canonical_dump(to_json(r)) + "\n"; });
    run_experiment(c, d, [&](const MetricsRecord& r) { second += canonical_dump(to_json(r)) + "\n"; });
    EXPECT_EQ(first, second);
    EXPECT_FALSE(first.empty());
}

TEST(Experiment, ZeroEpochsReportsUntrainedModel) {
    const auto d = small_node_task();
    auto c = quick_config(graphnet::LayerKind::Gat);
    c.max_epochs = 0;
    const auto r = run_seed(c, d, 1);
    EXPECT_EQ(r.epochs_run, 0u);
    EXPECT_EQ(r.best_epoch, 0u);
    ASSERT_EQ(r.records.size(), 3u);
    EXPECT_EQ(r.records[2].split, "test");
    EXPECT_EQ(r.test_metric, r.records[2].metric);
    const auto fresh = build_model(model_config_for(c, d), 1)->snapshot();
    ASSERT_EQ(fresh.values.size(), r.best_state.values.size());
    for (std::size_t i = 0; i < fresh.values.size(); ++i) {
        const auto a = fresh.values[i].data();
        const auto b = r.best_state.values[i].data();
        EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end())) << i;
    }
}

TEST(Experiment, OneAdamStepLowersLossOnSeparableToy) {
    // Two copies of one graph whose features reveal the labels; training on
    // the first and validating on the second measures the step directly.
    data::SbmSpec s;
    s.num_graphs = 1;
    s.nodes_min = 12;
    s.nodes_max = 12;
    s.communities = 2;
    s.labeled_fraction = 1.0;
    s.p_intra = 1.0;
    s.q_inter = 0.0;
    auto d = data::gen_sbm_node_task(s);
    d.graphs.push_back(d.graphs[0]);
    d.splits = {{0}, {1}, {}};
    auto c = quick_config(graphnet::LayerKind::Sage);
    c.max_epochs = 1;
    c.batchnorm = false;
    c.lr_init = 1e-2;
    const auto r = run_seed(c, d, 0);
    ASSERT_EQ(r.epochs_run, 1u);
    const auto& before = r.records[1];
    const auto& after = r.records[4];
    ASSERT_EQ(before.split, "val");
    ASSERT_EQ(after.split, "val");
    EXPECT_LT(after.loss, before.loss);
}

TEST(Experiment, BestValidationSnapshotAndLrLattice) {
    const auto d = small_regression_task();
    auto c = quick_config(graphnet::LayerKind::GatedGcn);
    c.max_epochs = 12;
    c.patience = 1;
    c.lr_init = 5e-2;
    const auto r = run_seed(c, d, 2);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    double test_at_best = 0.0;
    for (const auto& rec : r.records) {
        const double ratio = std::log2(c.lr_init / rec.lr);
        EXPECT_EQ(ratio, std::round(ratio));
        EXPECT_GE(ratio, 0.0);
        if (rec.split == "val" && rec.loss < best) {
            best = rec.loss;
            best_epoch = rec.epoch;
        }
    }
    for (const auto& rec : r.records) {
        if (rec.split == "test" && rec.epoch == best_epoch) test_at_best = rec.metric;
    }
    EXPECT_EQ(r.best_epoch, best_epoch);
    EXPECT_EQ(r.best_val_loss, best);
    EXPECT_EQ(r.test_metric, test_at_best);
}

TEST(Experiment, SmoothnessReportCadence) {
    const auto d = small_node_task();
    auto c = quick_config(graphnet::LayerKind::Sage);
    const auto r = run_seed(c, d, 1);
    for (const auto& rec : r.records) {
        const bool expected = rec.split == "val" && rec.epoch % c.diag_every == 0;
        EXPECT_EQ(rec.smoothness.has_value(), expected) << rec.epoch << " " << rec.split;
        if (rec.smoothness) EXPECT_EQ(rec.smoothness->size(), c.layers);
    }
}

TEST(Experiment, DimensionMismatchIsConfigErrorBeforeTraining) {
    auto d = small_node_task();
    auto c = quick_config(graphnet::LayerKind::Gat);
    c.hidden_dim = 7;
    c.heads = 2;
    EXPECT_THROW(run_seed(c, d, 0), ConfigError);
}

TEST(Experiment, SummaryAggregatesSeeds) {
    const auto d = small_node_task();
    auto c = quick_config(graphnet::LayerKind::Sage);
    c.max_epochs = 1;
    c.seeds = {0, 1, 2};
    const auto r = run_experiment(c, d);
    ASSERT_EQ(r.runs.size(), 3u);
    std::vector<double> tests;
    for (const auto& run : r.runs) tests.push_back(run.test_metric);
    const auto ms = mean_sd(tests);
    EXPECT_EQ(r.summary.test.mean, ms.mean);
    EXPECT_EQ(r.summary.test.sd, ms.sd);
    EXPECT_EQ(r.summary.metric_name, "weighted_accuracy");
    const auto j = to_json(r.summary);
    EXPECT_TRUE(j.at("summary").at("test").contains("mean"));
    EXPECT_TRUE(j.at("summary").at("test").contains("sd"));
}

// Test-time scale --------------------------------------------------------------

TEST(ScaleSweep, UnitScaleEqualsPlainEvaluation) {
    const auto d = small_node_task();
    auto c = quick_config(graphnet::LayerKind::Sage);
    c.ssfg.alpha = 4.0;
    auto model = build_model(model_config_for(c, d), 0);
    const std::vector<double> one{1.0};
    const auto rows = eval_with_scale(*model, d, one, c.batch_size);
    const auto plain = evaluate(*model, DatasetView(d), d.splits.test, c.batch_size);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].loss, plain.loss);
    EXPECT_EQ(rows[0].metric, plain.metric);
}

TEST(ScaleSweep, FiveRowsInOrderAndScaleMatters) {
    const auto d = small_regression_task();
    auto c = quick_config(graphnet::LayerKind::GatedGcn);
    auto model = build_model(model_config_for(c, d), 0);
    const std::vector<double> scales{0.8, 0.9, 1.0, 1.1, 1.2};
    const auto rows = eval_with_scale(*model, d, scales, c.batch_size);
    ASSERT_EQ(rows.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(rows[i].scale, scales[i]);
    EXPECT_NE(rows[0].loss, rows[4].loss);
    // The model's own test_scale is restored afterwards.
    EXPECT_EQ(model->config().reg.ssfg.test_scale, 1.0);
}

TEST(ScaleSweep, ZeroWeightsMakeMetricScaleFree) {
    const auto d = small_node_task();
    auto c = quick_config(graphnet::LayerKind::Gat);
    auto model = build_model(model_config_for(c, d), 0);
    for (auto* p : model->parameters()) p->value.fill(0.0);
    const std::vector<double> scales{0.5, 0.8, 1.0, 1.5, 2.0};
    const auto rows = eval_with_scale(*model, d, scales, c.batch_size);
    for (const auto& row : rows) {
        EXPECT_EQ(row.metric, rows[0].metric);
        EXPECT_EQ(row.loss, rows[0].loss);
    }
}

// Checkpoints ------------------------------------------------------------------

TEST(Checkpoint, RoundTripReproducesEvaluation) {
    const auto d = small_regression_task();
    auto c = quick_config(graphnet::LayerKind::GatedGcn);
    c.dataset = "unused.json";
    const auto dir = (std::filesystem::temp_directory_path() / "ssfgnet_test_ckpt").string();
    std::filesystem::remove_all(dir);
    c.checkpoint_dir = dir;
    const auto r = run_seed(c, d, 1);
    const auto loaded = load_checkpoint(dir + "/seed_1");
    EXPECT_EQ(loaded.seed, 1u);
    EXPECT_EQ(canonical_dump(to_json(loaded.config)), canonical_dump(to_json(c)));
    const auto e = evaluate(*loaded.model, DatasetView(d), d.splits.test, c.batch_size);
    EXPECT_EQ(e.metric, r.test_metric);
    std::filesystem::remove_all(dir);
}

TEST(Checkpoint, CorruptManifestRejected) {
    const auto dir = (std::filesystem::temp_directory_path() / "ssfgnet_test_ckpt_bad").string();
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    std::ofstream(dir + "/manifest.json") << "{\"format\": 1, ";
    EXPECT_THROW(load_checkpoint(dir), ParseError);
    std::filesystem::remove_all(dir);
}

// Null case --------------------------------------------------------------------

TEST(NullCase, IdenticalRegimesGiveChanceAccuracy) {
    data::SbmGraphSpec s;
    s.num_graphs = 1200;
    s.nodes_min = 10;
    s.nodes_max = 14;
    s.regime_a = {0.4, 0.1};
    s.regime_b = {0.4, 0.1};
    s.splits = {0.125, 0.0625, 0.8125};
    s.seed = 21;
    const auto d = data::gen_sbm_graph_task(s);
    auto c = quick_config(graphnet::LayerKind::Sage);
    c.max_epochs = 5;
    c.diag_every = 0;
    c.lr_init = 1e-2;
    c.seeds = {0, 1, 2, 3};
    c.batch_size = 32;
    const auto r = run_experiment(c, d);
    EXPECT_GE(r.summary.test.mean, 0.45);
    EXPECT_LE(r.summary.test.mean, 0.55);
}

} // namespace
