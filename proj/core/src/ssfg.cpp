#include "ssfgnet/ssfg.hpp"

#include <cmath>

#include "ssfgnet/error.hpp"

namespace ssfgnet::ssfg {

std::string to_string(Mode m) {
    switch (m) {
    case Mode::Full: return "full";
    case Mode::ForwardOnly: return "forward_only";
    case Mode::BackwardOnly: return "backward_only";
    case Mode::Off: return "off";
    }
    return "?";
}

Mode parse_mode(const std::string& s) {
    if (s == "full") return Mode::Full;
    if (s == "forward_only") return Mode::ForwardOnly;
    if (s == "backward_only") return Mode::BackwardOnly;
    if (s == "off") return Mode::Off;
    throw ConfigError("unknown ssfg mode '" + s + "' (expected full, forward_only, backward_only or off)");
}

void SsfgConfig::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("ssfg alpha must be positive or infinity, got " + std::to_string(alpha));
    if (!(test_scale > 0.0) || !std::isfinite(test_scale)) {
        throw ConfigError("ssfg test_scale must be positive and finite, got " + std::to_string(test_scale));
    }
}

void DropoutConfig::validate() const {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout p must lie in [0, 1), got " + std::to_string(p));
}

double gamma_sample(double shape, Rng& rng) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw ConfigError("gamma shape must be positive and finite, got " + std::to_string(shape));
    }
    if (shape < 1.0) {
        const double g = gamma_sample(shape + 1.0, rng);
        double u = rng.uniform();
        while (u == 0.0) u = rng.uniform();
        return g * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double beta_sample(double alpha, Rng& rng) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw ConfigError("beta alpha must be positive and finite, got " + std::to_string(alpha));
    }
    const double g1 = gamma_sample(alpha, rng);
    const double g2 = gamma_sample(alpha, rng);
    const double s = g1 + g2;
    // Both gammas underflow only for tiny alpha, where Beta(a, a) is nearly
    // a fair coin on {0, 1}.
    if (s == 0.0) return rng.uniform() < 0.5 ? 0.0 : 1.0;
    return g1 / s;
}

double fold_factor(double shifted) { return shifted <= 1.0 ? shifted : 1.0 / (2.0 - shifted); }

FactorSample sample_lambda(double alpha, std::size_t count, Rng& rng) {
    if (!(alpha > 0.0)) throw ConfigError("ssfg alpha must be positive or infinity, got " + std::to_string(alpha));
    FactorSample out;
    if (alpha == kInfinity) {
        out.factors.assign(count, 1.0);
        return out;
    }
    out.factors.resize(count);
    for (auto& f : out.factors) f = fold_factor(beta_sample(alpha, rng) + 0.5);
    return out;
}

double cumulated_factor(std::size_t layers, double alpha, Rng& rng) {
    double prod = 1.0;
    for (std::size_t l = 0; l < layers; ++l) prod *= sample_lambda(alpha, 1, rng).factors[0];
    return prod;
}

ad::Var scale_rows(ad::Var x, std::vector<double> forward_factors,
                   std::function<std::vector<double>(std::size_t)> backward_factors) {
    ad::Tape& t = *x.tape;
    const Tensor& v = t.value(x.id);
    const std::size_t n = v.rows();
    const std::size_t d = v.cols();
    if (forward_factors.size() != n) {
        throw DimensionError("scale_rows: " + std::to_string(forward_factors.size()) + " factors for " +
                             std::to_string(n) + " rows");
    }
    Tensor out(v.shape());
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) out[r * d + c] = forward_factors[r] * v[r * d + c];
    }
    return t.record(ad::OpKind::Custom, {x.id}, std::move(out),
                    [a = x.id, n, d, backward_factors = std::move(backward_factors)](ad::Tape& tp, const Tensor& g) {
                        const std::vector<double> lam = backward_factors(n);
                        Tensor& ga = tp.grad_slot(a);
                        for (std::size_t r = 0; r < n; ++r) {
                            for (std::size_t c = 0; c < d; ++c) ga[r * d + c] += lam[r] * g[r * d + c];
                        }
                    });
}

ad::Var ssfg_apply(ad::Var x, const SsfgConfig& cfg, ad::Phase phase, SiteStreams& site) {
    if (phase == ad::Phase::Eval) {
        if (cfg.test_scale == 1.0) return x;
        return ad::scale(x, cfg.test_scale);
    }
    const bool fwd = cfg.scales_forward();
    const bool bwd = cfg.scales_backward();
    if (!fwd && !bwd) return x;

    const std::size_t n = x.value().rows();
    site.last_forward = fwd ? sample_lambda(cfg.alpha, n, site.forward).factors : std::vector<double>(n, 1.0);
    SiteStreams* s = &site;
    const double alpha = cfg.alpha;
    std::function<std::vector<double>(std::size_t)> backward_factors;
    if (bwd) {
        backward_factors = [s, alpha](std::size_t rows) {
            s->last_backward = sample_lambda(alpha, rows, s->backward).factors;
            return s->last_backward;
        };
    } else {
        backward_factors = [s](std::size_t rows) {
            s->last_backward.assign(rows, 1.0);
            return s->last_backward;
        };
    }
    return scale_rows(x, site.last_forward, std::move(backward_factors));
}

ad::Var dropout_apply(ad::Var x, const DropoutConfig& cfg, ad::Phase phase, Rng& rng) {
    cfg.validate();
    if (phase == ad::Phase::Eval || cfg.p == 0.0) return x;
    ad::Tape& t = *x.tape;
    const Tensor& v = t.value(x.id);
    const double keep_scale = 1.0 / (1.0 - cfg.p);
    std::vector<double> mask(v.numel());
    Tensor out(v.shape());
    for (std::size_t i = 0; i < v.numel(); ++i) {
        mask[i] = rng.uniform() >= cfg.p ? keep_scale : 0.0;
        out[i] = mask[i] * v[i];
    }
    return t.record(ad::OpKind::Custom, {x.id}, std::move(out), [a = x.id, mask = std::move(mask)](ad::Tape& tp, const Tensor& g) {
        Tensor& ga = tp.grad_slot(a);
        for (std::size_t i = 0; i < mask.size(); ++i) ga[i] += mask[i] * g[i];
    });
}

} // namespace ssfgnet::ssfg
