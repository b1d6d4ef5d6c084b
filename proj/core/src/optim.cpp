#include "ssfgnet/optim.hpp"

#include <cmath>

#include "ssfgnet/error.hpp"

namespace ssfgnet::harness {

void adam_step(std::span<ad::Parameter* const> params, AdamState& state, const AdamConfig& cfg, double lr) {
    if (state.m.empty()) {
        for (const auto* p : params) {
            state.m.emplace_back(p->value.shape());
            state.v.emplace_back(p->value.shape());
        }
    }
    if (state.m.size() != params.size()) throw ContractError("adam_step: state built for a different parameter list");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = *params[k];
        if (p.grad.shape() != p.value.shape()) throw DimensionError("adam_step: gradient shape of '" + p.name + "'");
        auto& m = state.m[k];
        auto& v = state.v[k];
        for (std::size_t i = 0; i < p.value.numel(); ++i) {
            const double g = p.grad[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            p.value[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

PlateauResult plateau_update(PlateauState& state, const PlateauConfig& cfg, double val_loss) {
    if (!std::isfinite(val_loss)) throw ContractError("plateau_update: validation loss is not finite");
    if (state.best - val_loss >= cfg.threshold) {
        state.best = val_loss;
        state.bad_epochs = 0;
    } else if (++state.bad_epochs >= cfg.patience) {
        state.lr /= cfg.factor;
        state.bad_epochs = 0;
        ++state.reductions;
    }
    return {state.lr, state.lr < cfg.lr_min};
}

} // namespace ssfgnet::harness
