#include "ssfgnet/graph.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "ssfgnet/error.hpp"

namespace ssfgnet::graph {

Graph::Graph(std::size_t n, std::vector<Edge> edges, Tensor node_features, std::optional<Tensor> edge_features)
    : n_(n), edges_(std::move(edges)), x_(std::move(node_features)), e_(std::move(edge_features)), degrees_(n, 0) {
    if (x_.rank() != 2 || x_.shape()[0] != n_) {
        throw DimensionError("graph: node features " + shape_str(x_.shape()) + " for " + std::to_string(n_) + " nodes");
    }
    if (e_ && (e_->rank() != 2 || e_->shape()[0] != edges_.size())) {
        throw DimensionError("graph: edge features " + shape_str(e_->shape()) + " for " + std::to_string(edges_.size()) +
                             " edges");
    }
    src_.reserve(edges_.size());
    dst_.reserve(edges_.size());
    for (std::size_t k = 0; k < edges_.size(); ++k) {
        const auto& e = edges_[k];
        if (e.src >= n_ || e.dst >= n_) {
            throw IndexError("graph: edge " + std::to_string(k) + " (" + std::to_string(e.src) + ", " +
                             std::to_string(e.dst) + ") out of range for " + std::to_string(n_) + " nodes");
        }
        ++degrees_[e.dst];
        src_.push_back(e.src);
        dst_.push_back(e.dst);
    }
}

Graph Graph::from_undirected(std::size_t n, std::span<const Edge> pairs, Tensor node_features) {
    std::vector<Edge> edges;
    edges.reserve(2 * pairs.size());
    for (const auto& p : pairs) {
        edges.push_back(p);
        if (p.src != p.dst) edges.push_back({p.dst, p.src});
    }
    return Graph(n, std::move(edges), std::move(node_features));
}

std::size_t Graph::self_loop_count(std::size_t node) const {
    std::size_t c = 0;
    for (const auto& e : edges_) c += (e.src == node && e.dst == node) ? 1 : 0;
    return c;
}

Graph add_self_loops(const Graph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<bool> has(n, false);
    for (const auto& e : g.edges()) {
        if (e.src == e.dst) has[e.src] = true;
    }
    std::vector<Edge> edges = g.edges();
    std::size_t added = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!has[i]) {
            edges.push_back({i, i});
            ++added;
        }
    }
    std::optional<Tensor> ef;
    if (g.edge_features()) {
        const Tensor& old = *g.edge_features();
        const std::size_t c = old.shape()[1];
        std::vector<double> data = old.storage();
        data.resize(data.size() + added * c, 0.0);
        ef = Tensor({edges.size(), c}, std::move(data));
    }
    return Graph(n, std::move(edges), g.node_features(), std::move(ef));
}

Tensor normalized_adjacency(const Graph& g) {
    const std::size_t n = g.num_nodes();
    const auto& deg = g.degrees();
    for (std::size_t i = 0; i < n; ++i) {
        if (deg[i] == 0) {
            throw DegenerateError("normalized_adjacency: node " + std::to_string(i) +
                                  " has zero degree (add self-loops first)");
        }
    }
    Tensor m({n, n});
    for (const auto& e : g.edges()) {
        m.at(e.dst, e.src) += 1.0 / std::sqrt(static_cast<double>(deg[e.dst]) * static_cast<double>(deg[e.src]));
    }
    return m;
}

std::vector<std::size_t> connected_components(const Graph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& e : g.edges()) {
        const auto a = find(e.src), b = find(e.dst);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    // Relabel roots densely in order of first appearance.
    std::vector<std::size_t> label(n, n), comp(n);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = find(i);
        if (label[r] == n) label[r] = next++;
        comp[i] = label[r];
    }
    return comp;
}

std::size_t component_count(const Graph& g) {
    const auto comp = connected_components(g);
    std::size_t m = 0;
    for (auto c : comp) m = std::max(m, c + 1);
    return m;
}

Graph permute(const Graph& g, std::span<const std::size_t> perm) {
    const std::size_t n = g.num_nodes();
    if (perm.size() != n) throw DimensionError("permute: permutation length differs from node count");
    std::vector<Edge> edges;
    edges.reserve(g.num_edges());
    for (const auto& e : g.edges()) edges.push_back({perm[e.src], perm[e.dst]});
    const Tensor& x = g.node_features();
    Tensor px(x.shape());
    const std::size_t c = x.shape()[1];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < c; ++k) px.at(perm[i], k) = x.at(i, k);
    }
    return Graph(n, std::move(edges), std::move(px), g.edge_features());
}

GraphBatch make_batch(std::span<const Graph* const> graphs) {
    if (graphs.empty()) throw ContractError("make_batch: no graphs");
    const std::size_t c = graphs.front()->node_features().shape()[1];
    const bool with_edges = graphs.front()->edge_features().has_value();
    std::size_t ce = with_edges ? graphs.front()->edge_features()->shape()[1] : 0;

    GraphBatch b;
    b.num_graphs = graphs.size();
    std::vector<Edge> edges;
    std::vector<double> x, ef;
    std::size_t offset = 0;
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        const Graph& g = *graphs[gi];
        if (g.node_features().shape()[1] != c) throw DimensionError("make_batch: feature widths differ");
        if (g.edge_features().has_value() != with_edges) throw DimensionError("make_batch: mixed edge features");
        for (const auto& e : g.edges()) edges.push_back({e.src + offset, e.dst + offset});
        x.insert(x.end(), g.node_features().storage().begin(), g.node_features().storage().end());
        if (with_edges) {
            if (g.edge_features()->shape()[1] != ce) throw DimensionError("make_batch: edge feature widths differ");
            ef.insert(ef.end(), g.edge_features()->storage().begin(), g.edge_features()->storage().end());
        }
        b.graph_of_node.insert(b.graph_of_node.end(), g.num_nodes(), gi);
        offset += g.num_nodes();
    }
    std::optional<Tensor> eft;
    if (with_edges) eft = Tensor({edges.size(), ce}, std::move(ef));
    b.graph = Graph(offset, std::move(edges), Tensor({offset, c}, std::move(x)), std::move(eft));
    return b;
}

} // namespace ssfgnet::graph
