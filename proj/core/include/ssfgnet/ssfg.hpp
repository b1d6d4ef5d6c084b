#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ssfgnet/autodiff.hpp"
#include "ssfgnet/rng.hpp"

namespace ssfgnet::ssfg {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Mode { Full, ForwardOnly, BackwardOnly, Off };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

/// Stochastic scaling of features (forward) and gradients (backward).
///
/// `alpha` parameterizes Beta(alpha, alpha); larger values concentrate the
/// factors around 1 and `alpha = kInfinity` disables scaling entirely.
/// `test_scale` is the constant applied in the eval phase.
struct SsfgConfig {
    double alpha = kInfinity;
    Mode mode = Mode::Full;
    double test_scale = 1.0;

    void validate() const;
    bool scales_forward() const { return alpha != kInfinity && (mode == Mode::Full || mode == Mode::ForwardOnly); }
    bool scales_backward() const { return alpha != kInfinity && (mode == Mode::Full || mode == Mode::BackwardOnly); }
};

struct FactorSample {
    std::vector<double> factors;
};

/// Inverted dropout; `p` is the drop probability.
struct DropoutConfig {
    double p = 0.0;
    void validate() const;
};

/// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 uses the u^(1/shape) boost.
double gamma_sample(double shape, Rng& rng);

/// One draw from Beta(alpha, alpha) as G1 / (G1 + G2).
double beta_sample(double alpha, Rng& rng);

/// Map a shifted draw in [0.5, 1.5] onto [0.5, 2]: values above 1 become
/// 1 / (2 - v), mirroring the lower half in the log domain.
double fold_factor(double shifted);

/// `count` factors, each fold_factor(Beta(alpha, alpha) + 0.5).
/// alpha = kInfinity returns ones and consumes no randomness.
FactorSample sample_lambda(double alpha, std::size_t count, Rng& rng);

/// Product of `layers` independent single factors.
double cumulated_factor(std::size_t layers, double alpha, Rng& rng);

/// Per-site random streams plus the factors most recently drawn from each.
struct SiteStreams {
    explicit SiteStreams(Rng forward_stream, Rng backward_stream)
        : forward(std::move(forward_stream)), backward(std::move(backward_stream)) {}

    Rng forward;
    Rng backward;
    std::vector<double> last_forward;
    std::vector<double> last_backward;
};

/// Multiply row i of `x` by forward_factors[i]; the reverse sweep multiplies
/// row i of the upstream gradient by the i-th value returned from
/// `backward_factors(rows)`, called once per backward pass.
ad::Var scale_rows(ad::Var x, std::vector<double> forward_factors,
                   std::function<std::vector<double>(std::size_t)> backward_factors);

/// Train phase: forward rows scaled by fresh factors from `site.forward`,
/// gradient rows by independent fresh factors from `site.backward` drawn
/// during the reverse sweep. Eval phase: `x * cfg.test_scale`, no draws.
ad::Var ssfg_apply(ad::Var x, const SsfgConfig& cfg, ad::Phase phase, SiteStreams& site);

/// Identity in eval phase or when p = 0 (no draws consumed).
ad::Var dropout_apply(ad::Var x, const DropoutConfig& cfg, ad::Phase phase, Rng& rng);

} // namespace ssfgnet::ssfg
