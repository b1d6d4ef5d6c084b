#include "ssfgnet/layers.hpp"

#include <cmath>

#include "ssfgnet/error.hpp"

namespace ssfgnet::graphnet {

std::string to_string(LayerKind k) {
    switch (k) {
    case LayerKind::Sage: return "sage";
    case LayerKind::Gat: return "gat";
    case LayerKind::GatedGcn: return "gatedgcn";
    }
    return "?";
}

LayerKind parse_layer_kind(const std::string& s) {
    if (s == "sage") return LayerKind::Sage;
    if (s == "gat") return LayerKind::Gat;
    if (s == "gatedgcn") return LayerKind::GatedGcn;
    throw ConfigError("unknown architecture '" + s + "' (expected sage, gat or gatedgcn)");
}

std::string to_string(Task t) {
    switch (t) {
    case Task::NodeClass: return "node-class";
    case Task::GraphClass: return "graph-class";
    case Task::GraphRegress: return "graph-regress";
    }
    return "?";
}

Task parse_task(const std::string& s) {
    if (s == "node-class") return Task::NodeClass;
    if (s == "graph-class") return Task::GraphClass;
    if (s == "graph-regress") return Task::GraphRegress;
    throw ConfigError("unknown task '" + s + "'");
}

void LayerConfig::validate() const {
    if (in_dim == 0 || out_dim == 0) throw ConfigError("layer dimensions must be positive");
    if (kind == LayerKind::Gat) {
        if (heads == 0) throw ConfigError("GAT needs at least one head");
        if (concat_heads && out_dim % heads != 0) {
            throw ConfigError("GAT out_dim " + std::to_string(out_dim) + " not divisible by " + std::to_string(heads) +
                              " heads");
        }
    }
    if (residual && in_dim != out_dim) {
        throw ConfigError("residual connection needs in_dim == out_dim, got " + std::to_string(in_dim) + " and " +
                          std::to_string(out_dim));
    }
}

namespace {

ad::Parameter uniform_param(const std::string& name, std::size_t rows, std::size_t cols, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    Tensor t({rows, cols});
    for (auto& v : t.storage()) v = (2.0 * rng.uniform() - 1.0) * bound;
    return ad::Parameter(name, std::move(t));
}

ad::Var linear(ad::Tape& t, ad::Var x, LayerParams& p, const std::string& w, bool bias) {
    ad::Var y = ad::matmul(x, t.param(p.param(w)));
    if (bias) y = ad::add(y, t.param(p.param(w + ".bias")));
    return y;
}

} // namespace

LayerParams::LayerParams(const LayerConfig& cfg, const std::string& prefix, Rng& rng) : prefix_(prefix) {
    cfg.validate();
    auto add_linear = [&](const std::string& local, std::size_t rows, std::size_t cols) {
        params_.push_back(uniform_param(prefix + "." + local, rows, cols, rng));
        if (cfg.bias) params_.emplace_back(prefix + "." + local + ".bias", Tensor({1, cols}, 0.0));
    };
    switch (cfg.kind) {
    case LayerKind::Sage:
        add_linear("W", 2 * cfg.in_dim, cfg.out_dim);
        if (cfg.batchnorm) norms_.emplace_back(prefix + ".bn", cfg.out_dim);
        break;
    case LayerKind::Gat: {
        const std::size_t hd = cfg.head_dim();
        for (std::size_t h = 0; h < cfg.heads; ++h) {
            const auto tag = std::to_string(h);
            add_linear("W" + tag, cfg.in_dim, hd);
            params_.push_back(uniform_param(prefix + ".attn_src" + tag, hd, 1, rng));
            params_.push_back(uniform_param(prefix + ".attn_dst" + tag, hd, 1, rng));
            if (cfg.batchnorm) norms_.emplace_back(prefix + ".bn" + tag, hd);
        }
        break;
    }
    case LayerKind::GatedGcn:
        for (const char* m : {"U", "V", "A", "B", "C"}) add_linear(m, cfg.in_dim, cfg.out_dim);
        if (cfg.batchnorm) {
            norms_.emplace_back(prefix + ".bn_h", cfg.out_dim);
            norms_.emplace_back(prefix + ".bn_e", cfg.out_dim);
        }
        break;
    }
}

ad::Parameter& LayerParams::param(const std::string& local_name) {
    const std::string full = prefix_ + "." + local_name;
    for (auto& p : params_) {
        if (p.name == full) return p;
    }
    throw ContractError("layer has no parameter '" + full + "'");
}

const ad::Parameter& LayerParams::param(const std::string& local_name) const {
    return const_cast<LayerParams*>(this)->param(local_name);
}

bool LayerParams::has(const std::string& local_name) const {
    const std::string full = prefix_ + "." + local_name;
    for (const auto& p : params_) {
        if (p.name == full) return true;
    }
    return false;
}

LayerStreams::LayerStreams(std::uint64_t seed, std::size_t layer_index, std::size_t n_sites)
    : dropout(Rng(seed).split("dropout", layer_index)) {
    const Rng root(seed);
    sites.reserve(n_sites);
    for (std::size_t s = 0; s < n_sites; ++s) {
        const std::uint64_t key = layer_index * 64 + s;
        sites.emplace_back(root.split("ssfg.forward", key), root.split("ssfg.backward", key));
    }
}

std::size_t site_count(const LayerConfig& cfg) {
    switch (cfg.kind) {
    case LayerKind::Sage: return 1;
    case LayerKind::Gat: return cfg.ssfg_placement == SsfgPlacement::Input ? 1 : cfg.heads;
    case LayerKind::GatedGcn: return 2;
    }
    return 1;
}

ad::Var regularize(ad::Var x, const Regularizer& reg, ad::Phase phase, LayerStreams& streams, std::size_t site) {
    ad::Var y = ssfg::ssfg_apply(x, reg.ssfg, phase, streams.sites.at(site));
    if (reg.dropout) y = ssfg::dropout_apply(y, *reg.dropout, phase, streams.dropout);
    return y;
}

ad::Var sage_layer(const graph::Graph& g, ad::Var h, LayerParams& params, const LayerConfig& cfg, const Regularizer& reg,
                   ad::Phase phase, LayerStreams& streams) {
    ad::Tape& t = *h.tape;
    if (h.value().rank() != 2 || h.value().cols() != cfg.in_dim || h.value().rows() != g.num_nodes()) {
        throw DimensionError("sage_layer: input " + shape_str(h.shape()) + " for " + std::to_string(g.num_nodes()) +
                             " nodes of width " + std::to_string(cfg.in_dim));
    }
    ad::Var x = cfg.ssfg_placement == SsfgPlacement::Input ? regularize(h, reg, phase, streams, 0) : h;
    const auto kind = cfg.aggregator == Aggregator::Mean ? ad::Reduce::Mean : ad::Reduce::Sum;
    ad::Var agg = ad::segment_reduce(kind, ad::gather_rows(x, g.src_index()), g.dst_index(), g.num_nodes());
    ad::Var z = linear(t, ad::concat_cols(x, agg), params, "W", cfg.bias);
    if (cfg.batchnorm) z = ad::batch_norm(z, params.norms().at(0), phase);
    z = ad::relu(z);
    if (cfg.ssfg_placement == SsfgPlacement::Default) z = regularize(z, reg, phase, streams, 0);
    if (cfg.residual) z = ad::add(h, z);
    return z;
}

namespace {

void require_in_edges(const graph::Graph& g, const char* op) {
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        if (g.degrees()[i] == 0) {
            throw DegenerateError(std::string(op) + ": node " + std::to_string(i) +
                                  " has no incoming edges (add self-loops)");
        }
    }
}

struct HeadScores {
    ad::Var z;
    ad::Var attention;
};

HeadScores head_attention(const graph::Graph& g, ad::Var x, LayerParams& params, std::size_t h, bool bias) {
    ad::Tape& t = *x.tape;
    const auto tag = std::to_string(h);
    ad::Var z = linear(t, x, params, "W" + tag, bias);
    // a^T [W h_i || W h_j] splits into a destination and a source term.
    ad::Var s_src = ad::matmul(z, t.param(params.param("attn_src" + tag)));
    ad::Var s_dst = ad::matmul(z, t.param(params.param("attn_dst" + tag)));
    ad::Var score = ad::add(ad::gather_rows(s_dst, g.dst_index()), ad::gather_rows(s_src, g.src_index()));
    score = ad::leaky_relu(score, kGatLeakySlope);
    return {z, ad::segment_softmax(score, g.dst_index(), g.num_nodes())};
}

} // namespace

ad::Var gat_layer(const graph::Graph& g, ad::Var h, LayerParams& params, const LayerConfig& cfg, const Regularizer& reg,
                  ad::Phase phase, LayerStreams& streams) {
    if (h.value().rank() != 2 || h.value().cols() != cfg.in_dim || h.value().rows() != g.num_nodes()) {
        throw DimensionError("gat_layer: input " + shape_str(h.shape()) + " for " + std::to_string(g.num_nodes()) +
                             " nodes of width " + std::to_string(cfg.in_dim));
    }
    require_in_edges(g, "gat_layer");
    ad::Var x = cfg.ssfg_placement == SsfgPlacement::Input ? regularize(h, reg, phase, streams, 0) : h;
    std::vector<ad::Var> heads;
    heads.reserve(cfg.heads);
    for (std::size_t k = 0; k < cfg.heads; ++k) {
        auto [z, att] = head_attention(g, x, params, k, cfg.bias);
        ad::Var msg = ad::mul(ad::gather_rows(z, g.src_index()), att);
        ad::Var out = ad::segment_reduce(ad::Reduce::Sum, msg, g.dst_index(), g.num_nodes());
        if (cfg.batchnorm) out = ad::batch_norm(out, params.norms().at(k), phase);
        if (cfg.concat_heads) out = ad::elu(out);
        if (cfg.ssfg_placement == SsfgPlacement::Default) out = regularize(out, reg, phase, streams, k);
        heads.push_back(out);
    }
    ad::Var y;
    if (cfg.concat_heads) {
        y = heads.size() == 1 ? heads.front() : ad::concat_cols(heads);
    } else {
        y = heads.front();
        for (std::size_t k = 1; k < heads.size(); ++k) y = ad::add(y, heads[k]);
        if (heads.size() > 1) y = ad::scale(y, 1.0 / static_cast<double>(heads.size()));
    }
    if (cfg.residual) y = ad::add(h, y);
    return y;
}

Tensor gat_attention(const graph::Graph& g, const Tensor& h, const LayerParams& params, std::size_t head) {
    ad::Tape t;
    auto& p = const_cast<LayerParams&>(params);
    const bool bias = params.has("W" + std::to_string(head) + ".bias");
    return head_attention(g, t.constant(h), p, head, bias).attention.value();
}

NodeEdge gatedgcn_layer(const graph::Graph& g, ad::Var h, ad::Var e, LayerParams& params, const LayerConfig& cfg,
                        const Regularizer& reg, ad::Phase phase, LayerStreams& streams) {
    ad::Tape& t = *h.tape;
    if (h.value().rank() != 2 || h.value().cols() != cfg.in_dim || h.value().rows() != g.num_nodes()) {
        throw DimensionError("gatedgcn_layer: node input " + shape_str(h.shape()) + " for " +
                             std::to_string(g.num_nodes()) + " nodes of width " + std::to_string(cfg.in_dim));
    }
    if (e.value().rank() != 2 || e.value().cols() != cfg.in_dim || e.value().rows() != g.num_edges()) {
        throw DimensionError("gatedgcn_layer: edge input " + shape_str(e.shape()) + " for " +
                             std::to_string(g.num_edges()) + " edges of width " + std::to_string(cfg.in_dim));
    }
    ad::Var hx = h, ex = e;
    if (cfg.ssfg_placement == SsfgPlacement::Input) {
        hx = regularize(h, reg, phase, streams, 0);
        ex = regularize(e, reg, phase, streams, 1);
    }
    const auto& src = g.src_index();
    const auto& dst = g.dst_index();
    const std::size_t n = g.num_nodes();

    ad::Var uh = linear(t, hx, params, "U", cfg.bias);
    ad::Var vh = linear(t, hx, params, "V", cfg.bias);
    ad::Var ah = linear(t, hx, params, "A", cfg.bias);
    ad::Var bh = linear(t, hx, params, "B", cfg.bias);
    ad::Var ce = linear(t, ex, params, "C", cfg.bias);

    // Edge pre-activation: A h_i + B h_j + C e_ij for edge j -> i.
    ad::Var e_hat = ad::add(ad::add(ad::gather_rows(ah, dst), ad::gather_rows(bh, src)), ce);
    ad::Var gate = ad::sigmoid(e_hat);
    ad::Var agg = ad::segment_reduce(ad::Reduce::Sum, ad::mul(gate, ad::gather_rows(vh, src)), dst, n);
    if (cfg.gate_normalization) {
        ad::Var gate_sum = ad::add_scalar(ad::segment_reduce(ad::Reduce::Sum, gate, dst, n), kGateEps);
        agg = ad::div(agg, gate_sum);
    }
    ad::Var h_new = ad::add(uh, agg);
    ad::Var e_new = e_hat;
    if (cfg.batchnorm) {
        h_new = ad::batch_norm(h_new, params.norms().at(0), phase);
        e_new = ad::batch_norm(e_new, params.norms().at(1), phase);
    }
    h_new = ad::relu(h_new);
    e_new = ad::relu(e_new);
    if (cfg.residual) {
        h_new = ad::add(h, h_new);
        e_new = ad::add(e, e_new);
    }
    if (cfg.ssfg_placement == SsfgPlacement::Default) {
        h_new = regularize(h_new, reg, phase, streams, 0);
        e_new = regularize(e_new, reg, phase, streams, 1);
    }
    return {h_new, e_new};
}

// Readout -------------------------------------------------------------------

ad::Var mean_readout(ad::Var h, const std::vector<std::size_t>& graph_of_node, std::size_t num_graphs) {
    return ad::segment_reduce(ad::Reduce::Mean, h, graph_of_node, num_graphs);
}

ReadoutParams::ReadoutParams(Task task, std::size_t in_dim, std::size_t outputs, bool bias, Rng& rng)
    : task_(task), bias_(bias) {
    if (in_dim == 0 || outputs == 0) throw ConfigError("readout dimensions must be positive");
    auto add_linear = [&](const std::string& name, std::size_t rows, std::size_t cols) {
        params_.push_back(uniform_param(name, rows, cols, rng));
        params_.emplace_back(name + ".bias", Tensor({1, cols}, 0.0));
    };
    if (task == Task::NodeClass) {
        add_linear("readout.W", in_dim, outputs);
    } else {
        const std::size_t mid = std::max<std::size_t>(1, in_dim / 2);
        add_linear("readout.W1", in_dim, mid);
        add_linear("readout.W2", mid, outputs);
    }
}

ad::Var readout(Task task, ad::Var h, const std::vector<std::size_t>& graph_of_node, std::size_t num_graphs,
                ReadoutParams& params) {
    ad::Tape& t = *h.tape;
    if (task != params.task_) throw ContractError("readout: parameters were built for a different task");
    auto& ps = params.params_;
    if (h.value().rank() != 2 || h.value().cols() != ps[0].value.rows()) {
        throw DimensionError("readout: input " + shape_str(h.shape()) + " but head expects width " +
                             std::to_string(ps[0].value.rows()));
    }
    auto lin = [&](ad::Var x, std::size_t i) {
        ad::Var y = ad::matmul(x, t.param(ps[i]));
        return params.bias_ ? ad::add(y, t.param(ps[i + 1])) : y;
    };
    if (task == Task::NodeClass) return lin(h, 0);
    ad::Var pooled = mean_readout(h, graph_of_node, num_graphs);
    return lin(ad::relu(lin(pooled, 0)), 2);
}

} // namespace ssfgnet::graphnet
