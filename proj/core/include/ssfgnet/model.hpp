#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ssfgnet/layers.hpp"

namespace ssfgnet::graphnet {

struct ModelConfig {
    LayerKind arch = LayerKind::GatedGcn;
    Task task = Task::NodeClass;
    std::size_t in_dim = 0;
    /// Width of input edge features; 0 means a constant 1 per edge.
    std::size_t edge_in_dim = 0;
    std::size_t hidden = 16;
    std::size_t layers = 4;
    std::size_t heads = 1;
    /// Classes for classification, 1 for regression.
    std::size_t outputs = 2;
    Aggregator aggregator = Aggregator::Mean;
    bool residual = true;
    bool batchnorm = true;
    bool bias = true;
    bool gate_normalization = true;
    SsfgPlacement ssfg_placement = SsfgPlacement::Default;
    Regularizer reg;

    LayerConfig layer_config(std::size_t index) const;
    void validate() const;
};

/// A snapshot of every trainable value and running statistic.
struct ModelState {
    std::vector<Tensor> values;
};

/// Input embedding, L graph layers, and a task readout.
class Model {
public:
    /// `init_rng` draws the initial weights; `stream_seed` roots the SSFG and
    /// dropout streams.
    Model(ModelConfig cfg, Rng& init_rng, std::uint64_t stream_seed);

    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

    struct Output {
        ad::Var out;
        /// Node features after each graph layer (values only).
        std::vector<Tensor> layer_outputs;
    };

    /// Graph as seen by the layers: self-loops removed for Sage, added for
    /// GAT and GatedGCN.
    graph::GraphBatch prepare(const graph::GraphBatch& batch) const;

    /// Forward a prepared batch.
    Output forward(ad::Tape& tape, const graph::GraphBatch& prepared, ad::Phase phase);

    const ModelConfig& config() const { return cfg_; }
    void set_regularizer(const Regularizer& reg) { cfg_.reg = reg; }

    /// Trainable parameters in a fixed order.
    std::vector<ad::Parameter*> parameters();
    /// Running batch-norm statistics in a fixed order, with names.
    std::vector<std::pair<std::string, Tensor*>> buffers();

    ModelState snapshot();
    void restore(const ModelState& state);

    void zero_grad();

    LayerStreams& streams(std::size_t layer) { return streams_.at(layer); }
    LayerParams& layer(std::size_t i) { return layers_.at(i); }
    std::vector<ad::Parameter>& embedding() { return embed_; }
    ReadoutParams& readout_params() { return readout_; }

private:
    ModelConfig cfg_;
    std::vector<ad::Parameter> embed_;
    std::vector<LayerParams> layers_;
    std::vector<LayerStreams> streams_;
    ReadoutParams readout_;
};

} // namespace ssfgnet::graphnet
