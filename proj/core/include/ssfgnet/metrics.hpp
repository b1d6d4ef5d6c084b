#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ssfgnet/autodiff.hpp"
#include "ssfgnet/layers.hpp"

namespace ssfgnet::harness {

/// w_k = n_total / (K * n_k); classes with no samples get weight 0.
std::vector<double> class_weights(std::span<const std::size_t> labels, std::size_t num_classes);

/// Class-weighted cross-entropy for node classification, plain
/// cross-entropy for graph classification, L1 for regression.
/// `class_targets` feeds the classification tasks and `regression_targets`
/// the regression task.
ad::Var task_loss(graphnet::Task task, ad::Var out, std::span<const std::size_t> class_targets,
                  std::span<const double> regression_targets, std::size_t num_classes);

/// Row-wise argmax.
std::vector<std::size_t> argmax_rows(const Tensor& logits);

/// Mean over classes present in `labels` of per-class recall.
double weighted_accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> labels, std::size_t num_classes);

double accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> labels);
double mean_absolute_error(std::span<const double> preds, std::span<const double> targets);

} // namespace ssfgnet::harness
