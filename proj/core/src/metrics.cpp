#include "ssfgnet/metrics.hpp"

#include <cmath>
#include <string>

#include "ssfgnet/error.hpp"

namespace ssfgnet::harness {

std::vector<double> class_weights(std::span<const std::size_t> labels, std::size_t num_classes) {
    std::vector<std::size_t> counts(num_classes, 0);
    for (auto l : labels) {
        if (l >= num_classes) throw ContractError("class_weights: label " + std::to_string(l) + " out of range");
        ++counts[l];
    }
    std::vector<double> w(num_classes, 0.0);
    const double total = static_cast<double>(labels.size());
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (counts[k]) w[k] = total / (static_cast<double>(num_classes) * static_cast<double>(counts[k]));
    }
    return w;
}

ad::Var task_loss(graphnet::Task task, ad::Var out, std::span<const std::size_t> class_targets,
                  std::span<const double> regression_targets, std::size_t num_classes) {
    switch (task) {
    case graphnet::Task::NodeClass: {
        const auto w = class_weights(class_targets, num_classes);
        return ad::cross_entropy(out, class_targets, w);
    }
    case graphnet::Task::GraphClass: return ad::cross_entropy(out, class_targets);
    case graphnet::Task::GraphRegress:
        return ad::l1_loss(out, Tensor({regression_targets.size(), 1},
                                       std::vector<double>(regression_targets.begin(), regression_targets.end())));
    }
    throw ContractError("task_loss: unknown task");
}

std::vector<std::size_t> argmax_rows(const Tensor& logits) {
    std::vector<std::size_t> out(logits.rows());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        const auto row = logits.row(r);
        std::size_t best = 0;
        for (std::size_t c = 1; c < row.size(); ++c) {
            if (row[c] > row[best]) best = c;
        }
        out[r] = best;
    }
    return out;
}

double weighted_accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> labels, std::size_t num_classes) {
    if (labels.empty()) throw ContractError("weighted_accuracy: empty input");
    if (preds.size() != labels.size()) throw DimensionError("weighted_accuracy: prediction/label length mismatch");
    std::vector<std::size_t> total(num_classes, 0), hit(num_classes, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= num_classes) throw ContractError("weighted_accuracy: label out of range");
        ++total[labels[i]];
        hit[labels[i]] += preds[i] == labels[i] ? 1 : 0;
    }
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (!total[k]) continue;
        sum += static_cast<double>(hit[k]) / static_cast<double>(total[k]);
        ++present;
    }
    return sum / static_cast<double>(present);
}

double accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> labels) {
    if (labels.empty()) throw ContractError("accuracy: empty input");
    if (preds.size() != labels.size()) throw DimensionError("accuracy: prediction/label length mismatch");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hit += preds[i] == labels[i] ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(labels.size());
}

double mean_absolute_error(std::span<const double> preds, std::span<const double> targets) {
    if (targets.empty()) throw ContractError("mean_absolute_error: empty input");
    if (preds.size() != targets.size()) throw DimensionError("mean_absolute_error: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) s += std::abs(preds[i] - targets[i]);
    return s / static_cast<double>(targets.size());
}

} // namespace ssfgnet::harness
