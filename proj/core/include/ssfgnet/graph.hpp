#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ssfgnet/tensor.hpp"

namespace ssfgnet::graph {

/// Directed edge; messages flow from `src` to `dst`.
struct Edge {
    std::size_t src = 0;
    std::size_t dst = 0;
    bool operator==(const Edge&) const = default;
};

/// Node count, directed edge list and features. Undirected data stores both
/// directions. Validated on construction.
class Graph {
public:
    Graph() = default;
    Graph(std::size_t n, std::vector<Edge> edges, Tensor node_features, std::optional<Tensor> edge_features = {});

    /// Build from undirected pairs, storing each pair in both directions
    /// ((u, u) pairs are stored once).
    static Graph from_undirected(std::size_t n, std::span<const Edge> pairs, Tensor node_features);

    std::size_t num_nodes() const noexcept { return n_; }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Tensor& node_features() const noexcept { return x_; }
    const std::optional<Tensor>& edge_features() const noexcept { return e_; }

    /// In-degree: number of edges with dst = i.
    const std::vector<std::size_t>& degrees() const noexcept { return degrees_; }
    const std::vector<std::size_t>& src_index() const noexcept { return src_; }
    const std::vector<std::size_t>& dst_index() const noexcept { return dst_; }

    std::size_t self_loop_count(std::size_t node) const;

private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    Tensor x_;
    std::optional<Tensor> e_;
    std::vector<std::size_t> degrees_;
    std::vector<std::size_t> src_;
    std::vector<std::size_t> dst_;
};

/// Append (i, i) for every node that lacks one. Idempotent. New loops get
/// zero edge-feature rows.
Graph add_self_loops(const Graph& g);

/// Dense D^{-1/2} A D^{-1/2} built from the edge list as given (call
/// add_self_loops first for the usual A + I form).
Tensor normalized_adjacency(const Graph& g);

/// Component id per node, treating edges as undirected.
std::vector<std::size_t> connected_components(const Graph& g);
std::size_t component_count(const Graph& g);

/// Relabel nodes: node i of `g` becomes node perm[i].
Graph permute(const Graph& g, std::span<const std::size_t> perm);

/// Disjoint union of several graphs.
struct GraphBatch {
    Graph graph;
    std::vector<std::size_t> graph_of_node;
    std::size_t num_graphs = 0;
};

GraphBatch make_batch(std::span<const Graph* const> graphs);

} // namespace ssfgnet::graph
