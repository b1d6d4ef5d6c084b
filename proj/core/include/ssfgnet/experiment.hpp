#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssfgnet/data.hpp"
#include "ssfgnet/diagnostics.hpp"
#include "ssfgnet/model.hpp"
#include "ssfgnet/optim.hpp"

namespace ssfgnet::harness {

/// Field names match the JSON config keys one to one.
struct ExperimentConfig {
    std::string dataset;
    graphnet::LayerKind architecture = graphnet::LayerKind::GatedGcn;
    std::size_t layers = 4;
    std::size_t hidden_dim = 16;
    std::size_t heads = 1;
    ssfg::SsfgConfig ssfg;
    std::optional<ssfg::DropoutConfig> dropout;
    double lr_init = 1e-3;
    double lr_reduce_factor = 2.0;
    std::size_t patience = 10;
    double lr_min = 1e-6;
    std::size_t max_epochs = 1000;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3};
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    /// Graphs per mini-batch for graph-level tasks; node tasks use one graph.
    std::size_t batch_size = 32;
    /// Emit a smoothness report every this many epochs (0 disables).
    std::size_t diag_every = 10;
    graphnet::Aggregator aggregator = graphnet::Aggregator::Mean;
    bool residual = true;
    bool batchnorm = true;
    bool bias = true;
    bool gate_normalization = true;
    graphnet::SsfgPlacement ssfg_placement = graphnet::SsfgPlacement::Default;
    /// When false, every record's "seconds" is 0 so streams are reproducible byte for byte.
    bool record_wall_clock = true;
    /// Per-seed best-model checkpoints are written here when non-empty.
    std::string checkpoint_dir;

    void validate() const;
    PlateauConfig plateau() const;
    AdamConfig adam() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
/// Apply "a.b.c=value"; the value is parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

struct MetricsRecord {
    std::uint64_t seed = 0;
    std::size_t epoch = 0;
    std::string split;
    double loss = 0.0;
    double metric = 0.0;
    std::string metric_name;
    double lr = 0.0;
    double seconds = 0.0;
    std::optional<diagnostics::SmoothnessReport> smoothness;
};

nlohmann::json to_json(const MetricsRecord& r);
nlohmann::json to_json(const diagnostics::SmoothnessReport& r);

using MetricsSink = std::function<void(const MetricsRecord&)>;

struct SplitEval {
    double loss = 0.0;
    double metric = 0.0;
    /// Mean over batches of the last graph layer's mean pairwise distance.
    double last_layer_distance = 0.0;
};

struct SeedResult {
    std::uint64_t seed = 0;
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    bool stopped_by_lr = false;
    double final_lr = 0.0;
    double best_val_loss = 0.0;
    double train_metric = 0.0;
    double val_metric = 0.0;
    double test_metric = 0.0;
    double test_last_layer_distance = 0.0;
    std::vector<MetricsRecord> records;
    graphnet::ModelState best_state;
};

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

struct Summary {
    std::string metric_name;
    MeanSd train;
    MeanSd val;
    MeanSd test;
    std::size_t seeds = 0;
};

nlohmann::json to_json(const Summary& s);

struct ExperimentResult {
    std::vector<SeedResult> runs;
    Summary summary;
};

/// Population mean and standard deviation.
MeanSd mean_sd(std::span<const double> xs);

std::string metric_name(graphnet::Task task);
graphnet::ModelConfig model_config_for(const ExperimentConfig& cfg, const data::DatasetFile& d);

/// Fresh model for one seed: weights from the seed's "init" stream, SSFG and
/// dropout streams rooted at the seed's "streams" key.
std::unique_ptr<graphnet::Model> build_model(const graphnet::ModelConfig& mc, std::uint64_t seed);

/// Dataset graphs converted once, with the split batching the harness uses.
class DatasetView {
public:
    explicit DatasetView(const data::DatasetFile& d);

    const data::DatasetFile& file() const { return *file_; }
    graphnet::Task task() const { return task_; }
    std::size_t num_outputs() const { return outputs_; }

    struct Batch {
        graph::GraphBatch batch;
        std::vector<std::size_t> class_targets;
        std::vector<double> regression_targets;
    };

    /// Graphs `indices` grouped `batch_size` at a time (one per batch for
    /// node tasks), in the given order.
    std::vector<Batch> batches(std::span<const std::size_t> indices, std::size_t batch_size) const;

private:
    const data::DatasetFile* file_;
    graphnet::Task task_;
    std::size_t outputs_;
    std::vector<graph::Graph> graphs_;
};

/// Eval-phase loss and metric over one split.
SplitEval evaluate(graphnet::Model& model, const DatasetView& view, std::span<const std::size_t> indices,
                   std::size_t batch_size);

SeedResult run_seed(const ExperimentConfig& cfg, const data::DatasetFile& d, std::uint64_t seed,
                    const MetricsSink& sink = {});
ExperimentResult run_experiment(const ExperimentConfig& cfg, const data::DatasetFile& d, const MetricsSink& sink = {});

struct ScaleRow {
    double scale = 1.0;
    double loss = 0.0;
    double metric = 0.0;
};

/// Evaluate the test split once per constant test-time scale.
std::vector<ScaleRow> eval_with_scale(graphnet::Model& model, const data::DatasetFile& d, std::span<const double> scales,
                                      std::size_t batch_size);

// Checkpoints: <dir>/manifest.json plus one raw file per tensor holding it
// as little-endian float64, listed in manifest order.

void save_checkpoint(const std::string& dir, const ExperimentConfig& cfg, std::uint64_t seed, graphnet::Model& model);

struct LoadedCheckpoint {
    ExperimentConfig config;
    std::uint64_t seed = 0;
    std::unique_ptr<graphnet::Model> model;
};

LoadedCheckpoint load_checkpoint(const std::string& dir);

} // namespace ssfgnet::harness
