#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ssfgnet/autodiff.hpp"
#include "ssfgnet/graph.hpp"
#include "ssfgnet/rng.hpp"
#include "ssfgnet/ssfg.hpp"

namespace ssfgnet::graphnet {

enum class LayerKind { Sage, Gat, GatedGcn };
enum class Aggregator { Mean, Sum };

/// Where a layer applies stochastic scaling. `Default` is per kind: after
/// the activation for Sage, on each head's output for GAT, on both output
/// node and edge features for GatedGCN.
enum class SsfgPlacement { Default, Input, None };

std::string to_string(LayerKind k);
LayerKind parse_layer_kind(const std::string& s);

inline constexpr double kGatLeakySlope = 0.2;
inline constexpr double kGateEps = 1e-6;

struct LayerConfig {
    LayerKind kind = LayerKind::Sage;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::size_t heads = 1;
    /// GAT: concatenate heads (hidden layers) or average them (final layer).
    bool concat_heads = true;
    Aggregator aggregator = Aggregator::Mean;
    bool residual = true;
    bool batchnorm = true;
    bool bias = true;
    /// GatedGCN: divide gated messages by the gate sum.
    bool gate_normalization = true;
    SsfgPlacement ssfg_placement = SsfgPlacement::Default;

    /// Per-head output width for GAT.
    std::size_t head_dim() const { return concat_heads ? out_dim / heads : out_dim; }
    void validate() const;
};

/// Named parameters of one layer. The containers are sized once at
/// construction so Parameter addresses stay stable.
class LayerParams {
public:
    LayerParams() = default;
    LayerParams(const LayerConfig& cfg, const std::string& prefix, Rng& init_rng);

    ad::Parameter& param(const std::string& local_name);
    const ad::Parameter& param(const std::string& local_name) const;
    bool has(const std::string& local_name) const;

    std::vector<ad::Parameter>& params() { return params_; }
    std::vector<ad::BatchNormState>& norms() { return norms_; }
    const std::vector<ad::Parameter>& params() const { return params_; }
    const std::vector<ad::BatchNormState>& norms() const { return norms_; }

private:
    std::string prefix_;
    std::vector<ad::Parameter> params_;
    std::vector<ad::BatchNormState> norms_;
};

/// Random streams one layer consumes: one SSFG site per scaled tensor plus a
/// dropout stream.
struct LayerStreams {
    LayerStreams(std::uint64_t seed, std::size_t layer_index, std::size_t sites);
    std::vector<ssfg::SiteStreams> sites;
    Rng dropout;
};

/// Everything a layer needs besides its inputs and parameters.
struct Regularizer {
    ssfg::SsfgConfig ssfg;
    std::optional<ssfg::DropoutConfig> dropout;
};

/// Apply SSFG then (optionally) dropout at one site.
ad::Var regularize(ad::Var x, const Regularizer& reg, ad::Phase phase, LayerStreams& streams, std::size_t site);

/// h_i' = relu(W [h_i || agg_{j in N(i)} h_j] + b). The neighborhood is the
/// edge list as given; pass a graph without self-loops.
ad::Var sage_layer(const graph::Graph& g, ad::Var h, LayerParams& params, const LayerConfig& cfg, const Regularizer& reg,
                   ad::Phase phase, LayerStreams& streams);

/// Multi-head attention over incoming edges; requires every node to have
/// at least one incoming edge (add self-loops first).
ad::Var gat_layer(const graph::Graph& g, ad::Var h, LayerParams& params, const LayerConfig& cfg, const Regularizer& reg,
                  ad::Phase phase, LayerStreams& streams);

/// Attention weights of one head, [E x 1], for inspection and tests.
Tensor gat_attention(const graph::Graph& g, const Tensor& h, const LayerParams& params, std::size_t head);

struct NodeEdge {
    ad::Var h;
    ad::Var e;
};

/// Gated edge update followed by gated node aggregation, with residuals.
NodeEdge gatedgcn_layer(const graph::Graph& g, ad::Var h, ad::Var e, LayerParams& params, const LayerConfig& cfg,
                        const Regularizer& reg, ad::Phase phase, LayerStreams& streams);

/// Number of SSFG sites a layer of this configuration uses.
std::size_t site_count(const LayerConfig& cfg);

// Readout ----------------------------------------------------------------

enum class Task { NodeClass, GraphClass, GraphRegress };

std::string to_string(Task t);
Task parse_task(const std::string& s);

/// Mean of node rows per graph.
ad::Var mean_readout(ad::Var h, const std::vector<std::size_t>& graph_of_node, std::size_t num_graphs);

class ReadoutParams {
public:
    ReadoutParams() = default;
    ReadoutParams(Task task, std::size_t in_dim, std::size_t outputs, bool bias, Rng& init_rng);

    Task task() const { return task_; }
    std::vector<ad::Parameter>& params() { return params_; }
    const std::vector<ad::Parameter>& params() const { return params_; }

private:
    Task task_ = Task::NodeClass;
    bool bias_ = true;
    std::vector<ad::Parameter> params_;

    friend ad::Var readout(Task, ad::Var, const std::vector<std::size_t>&, std::size_t, ReadoutParams&);
};

/// Node task: per-node linear map to logits. Graph tasks: mean over each
/// graph's nodes, then a two-layer MLP to logits or a scalar.
ad::Var readout(Task task, ad::Var h, const std::vector<std::size_t>& graph_of_node, std::size_t num_graphs,
                ReadoutParams& params);

} // namespace ssfgnet::graphnet
