#pragma once

#include <cstddef>
#include <vector>

#include "ssfgnet/graph.hpp"
#include "ssfgnet/tensor.hpp"

namespace ssfgnet::diagnostics {

/// pi_i = sqrt(deg_i) / sum_j sqrt(deg_j), the direction repeated smoothing
/// with the normalized adjacency converges to. Throws DegenerateError for a
/// disconnected graph or a zero-degree node.
std::vector<double> stationary_pi(const graph::Graph& g);

/// Apply the normalized adjacency to X exactly k times (edge-list products).
Tensor power_smooth(const graph::Graph& g, const Tensor& x, std::size_t k);

/// Mean over unordered pairs i < j of |h_i - h_j|^2, via column variances.
double mean_pairwise_sq_distance(const Tensor& h);
/// Same quantity by the explicit double loop.
double mean_pairwise_sq_distance_exact(const Tensor& h);

/// Mean Euclidean distance over unordered pairs i < j (explicit pair loop).
/// Bounded above by sqrt(mean_pairwise_sq_distance).
double mean_pairwise_distance(const Tensor& h);

struct MadResult {
    double value = 0.0;
    std::size_t skipped_rows = 0;
    std::size_t pairs = 0;
};

/// Mean cosine distance over the graph's edges (self-loops ignored). Rows
/// with norm below 1e-12 are skipped and counted.
MadResult mad_detail(const Tensor& h, const graph::Graph& g);
double mad(const Tensor& h, const graph::Graph& g);

/// |H - v v^T H|_F / |H|_F with v = sqrt(deg) normalized: how far H is
/// from the span the smoothing limit collapses onto. 0 for H = 0.
double distance_to_stationary(const Tensor& h, const graph::Graph& g);

struct SmoothnessEntry {
    std::size_t layer = 0;
    double mean_pairwise_distance = 0.0;
    double mad = 0.0;
    double distance_to_stationary = 0.0;
};

using SmoothnessReport = std::vector<SmoothnessEntry>;

/// One entry per tensor in `layer_outputs`, all measured on `g` (which
/// should carry self-loops).
SmoothnessReport smoothness_report(const graph::Graph& g, const std::vector<Tensor>& layer_outputs);

} // namespace ssfgnet::diagnostics
