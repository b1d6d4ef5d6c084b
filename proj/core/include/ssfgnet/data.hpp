#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssfgnet/graph.hpp"
#include "ssfgnet/rng.hpp"

namespace ssfgnet::data {

struct SplitFractions {
    double train = 0.75;
    double val = 0.125;
    double test = 0.125;
    void validate() const;
};

/// Community-classification task: each node's label is its block.
struct SbmSpec {
    std::size_t num_graphs = 400;
    std::size_t nodes_min = 40;
    std::size_t nodes_max = 60;
    std::size_t communities = 6;
    double p_intra = 0.5;
    double q_inter = 0.05;
    double labeled_fraction = 0.2;
    std::uint64_t seed = 0;
    SplitFractions splits;
    void validate() const;
};

struct Regime {
    double p_intra = 0.5;
    double q_inter = 0.05;
};

/// Binary graph classification: label = which regime generated the graph.
struct SbmGraphSpec {
    std::size_t num_graphs = 400;
    std::size_t nodes_min = 40;
    std::size_t nodes_max = 60;
    std::size_t communities = 2;
    Regime regime_a{0.5, 0.05};
    Regime regime_b{0.3, 0.1};
    std::size_t degree_buckets = 8;
    std::uint64_t seed = 0;
    SplitFractions splits;
    void validate() const;
};

using TypePair = std::pair<std::size_t, std::size_t>;

/// Graph regression: y = (#edges joining a reactive type pair) / n + noise.
struct RegressionSpec {
    std::size_t num_graphs = 400;
    std::size_t nodes_min = 20;
    std::size_t nodes_max = 30;
    std::size_t node_types = 4;
    double edge_prob = 0.15;
    std::vector<TypePair> reactive_pairs{{0, 1}};
    double noise_sd = 0.0;
    std::uint64_t seed = 0;
    SplitFractions splits;
    void validate() const;
};

using NodeLabels = std::vector<std::size_t>;
using Target = std::variant<NodeLabels, std::size_t, double>;

/// One graph as stored: undirected edges listed once.
struct GraphRecord {
    std::size_t n = 0;
    std::vector<graph::Edge> edges;
    Tensor x;
    Target y;

    /// Graph with both directions of every edge.
    graph::Graph to_graph() const;
};

struct Splits {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

struct DatasetFile {
    std::string task;
    std::size_t feature_dim = 0;
    std::vector<GraphRecord> graphs;
    Splits splits;
    /// Generator metadata (ground-truth rule, class count, spec echo).
    nlohmann::json meta = nlohmann::json::object();

    /// Classes for classification tasks, 1 for regression.
    std::size_t num_outputs() const;
};

/// A single SBM graph before features: block of each node, undirected
/// edges, and the number of bridging edges added to connect it.
struct SbmSample {
    std::vector<std::size_t> block;
    std::vector<graph::Edge> edges;
    std::size_t bridges = 0;
};

SbmSample sample_sbm(std::size_t n, std::size_t k, double p_intra, double q_inter, Rng& rng);

DatasetFile gen_sbm_node_task(const SbmSpec& spec);
DatasetFile gen_sbm_graph_task(const SbmGraphSpec& spec);
DatasetFile gen_regression_task(const RegressionSpec& spec);

/// Noise-free target for a regression record: reactive edge count / n.
double regression_rule(const GraphRecord& g, const std::vector<TypePair>& reactive_pairs);

/// Dispatch on spec["kind"] in {"sbm-node", "sbm-graph", "regression"};
/// remaining keys mirror the spec struct fields.
DatasetFile generate_from_spec(const nlohmann::json& spec);

Splits make_splits(std::size_t count, const SplitFractions& f, Rng& rng);

nlohmann::json to_json(const DatasetFile& d);
std::string serialize(const DatasetFile& d);
/// Parse and validate; throws ParseError or ValidationError.
DatasetFile parse(std::string_view text);

void save_dataset(const DatasetFile& d, const std::string& path);
DatasetFile load_dataset(const std::string& path);

/// Check every invariant; throws ValidationError naming the graph/edge.
void validate(const DatasetFile& d);

} // namespace ssfgnet::data
