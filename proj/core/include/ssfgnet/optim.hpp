#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ssfgnet/autodiff.hpp"

namespace ssfgnet::harness {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::size_t step = 0;
};

/// One bias-corrected Adam update from the gradients stored in `params`.
/// Moments are allocated as zeros on the first call.
void adam_step(std::span<ad::Parameter* const> params, AdamState& state, const AdamConfig& cfg, double lr);

struct PlateauConfig {
    double lr_init = 1e-3;
    double factor = 2.0;
    std::size_t patience = 10;
    double lr_min = 1e-6;
    /// A loss counts as an improvement when it beats the best by at least this much.
    double threshold = 1e-6;
};

struct PlateauState {
    explicit PlateauState(const PlateauConfig& cfg) : lr(cfg.lr_init) {}
    double lr;
    double best = std::numeric_limits<double>::infinity();
    std::size_t bad_epochs = 0;
    std::size_t reductions = 0;
};

struct PlateauResult {
    double lr = 0.0;
    bool stop = false;
};

/// Divide the rate by `factor` once `patience` consecutive epochs pass
/// without improvement; request a stop once the rate falls below lr_min.
PlateauResult plateau_update(PlateauState& state, const PlateauConfig& cfg, double val_loss);

} // namespace ssfgnet::harness
