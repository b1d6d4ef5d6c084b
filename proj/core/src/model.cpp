#include "ssfgnet/model.hpp"

#include <cmath>

#include "ssfgnet/error.hpp"

namespace ssfgnet::graphnet {

LayerConfig ModelConfig::layer_config(std::size_t index) const {
    LayerConfig lc;
    lc.kind = arch;
    lc.in_dim = hidden;
    lc.out_dim = hidden;
    lc.heads = arch == LayerKind::Gat ? heads : 1;
    lc.concat_heads = !(arch == LayerKind::Gat && index + 1 == layers);
    lc.aggregator = aggregator;
    lc.residual = residual;
    lc.batchnorm = batchnorm;
    lc.bias = bias;
    lc.gate_normalization = gate_normalization;
    lc.ssfg_placement = ssfg_placement;
    return lc;
}

void ModelConfig::validate() const {
    if (in_dim == 0) throw ConfigError("model in_dim must be positive");
    if (hidden == 0) throw ConfigError("model hidden width must be positive");
    if (layers == 0) throw ConfigError("model needs at least one layer");
    if (outputs == 0) throw ConfigError("model needs at least one output");
    if (task == Task::GraphRegress && outputs != 1) throw ConfigError("regression has exactly one output");
    reg.ssfg.validate();
    if (reg.dropout) reg.dropout->validate();
    for (std::size_t l = 0; l < layers; ++l) layer_config(l).validate();
}

Model::Model(ModelConfig cfg, Rng& init_rng, std::uint64_t stream_seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    auto uniform = [&](const std::string& name, std::size_t rows, std::size_t cols) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
        Tensor t({rows, cols});
        for (auto& v : t.storage()) v = (2.0 * init_rng.uniform() - 1.0) * bound;
        return ad::Parameter(name, std::move(t));
    };
    embed_.push_back(uniform("embed.W", cfg_.in_dim, cfg_.hidden));
    if (cfg_.bias) embed_.emplace_back("embed.W.bias", Tensor({1, cfg_.hidden}, 0.0));
    if (cfg_.arch == LayerKind::GatedGcn) {
        const std::size_t ein = cfg_.edge_in_dim == 0 ? 1 : cfg_.edge_in_dim;
        embed_.push_back(uniform("embed.E", ein, cfg_.hidden));
        if (cfg_.bias) embed_.emplace_back("embed.E.bias", Tensor({1, cfg_.hidden}, 0.0));
    }
    layers_.reserve(cfg_.layers);
    streams_.reserve(cfg_.layers);
    for (std::size_t l = 0; l < cfg_.layers; ++l) {
        const auto lc = cfg_.layer_config(l);
        layers_.emplace_back(lc, "layer" + std::to_string(l), init_rng);
        streams_.emplace_back(stream_seed, l, site_count(lc));
    }
    readout_ = ReadoutParams(cfg_.task, cfg_.hidden, cfg_.outputs, cfg_.bias, init_rng);
}

graph::GraphBatch Model::prepare(const graph::GraphBatch& batch) const {
    graph::GraphBatch out;
    out.graph_of_node = batch.graph_of_node;
    out.num_graphs = batch.num_graphs;
    const auto& g = batch.graph;
    if (cfg_.arch == LayerKind::Sage) {
        std::vector<graph::Edge> edges;
        std::vector<double> ef;
        const auto* e = g.edge_features() ? &*g.edge_features() : nullptr;
        for (std::size_t k = 0; k < g.num_edges(); ++k) {
            const auto& ed = g.edges()[k];
            if (ed.src == ed.dst) continue;
            edges.push_back(ed);
            if (e) ef.insert(ef.end(), e->row(k).begin(), e->row(k).end());
        }
        std::optional<Tensor> eft;
        if (e) eft = Tensor({edges.size(), e->cols()}, std::move(ef));
        out.graph = graph::Graph(g.num_nodes(), std::move(edges), g.node_features(), std::move(eft));
    } else {
        out.graph = graph::add_self_loops(g);
    }
    return out;
}

Model::Output Model::forward(ad::Tape& t, const graph::GraphBatch& prepared, ad::Phase phase) {
    const auto& g = prepared.graph;
    Output result;
    // embed_ holds [W, W.bias?, E, E.bias?]; biases only when cfg_.bias.
    const std::size_t per = cfg_.bias ? 2 : 1;
    auto embed = [&](Tensor input, std::size_t first) {
        ad::Var out = ad::matmul(t.constant(std::move(input)), t.param(embed_[first]));
        return cfg_.bias ? ad::add(out, t.param(embed_[first + 1])) : out;
    };
    ad::Var h = embed(g.node_features(), 0);
    ad::Var e;
    if (cfg_.arch == LayerKind::GatedGcn) {
        Tensor ein = g.edge_features() ? *g.edge_features() : Tensor({g.num_edges(), 1}, 1.0);
        if (ein.cols() != embed_[per].value.rows()) {
            throw DimensionError("model: edge features of width " + std::to_string(ein.cols()) + ", expected " +
                                 std::to_string(embed_[per].value.rows()));
        }
        e = embed(std::move(ein), per);
    }
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto lc = cfg_.layer_config(l);
        switch (cfg_.arch) {
        case LayerKind::Sage: h = sage_layer(g, h, layers_[l], lc, cfg_.reg, phase, streams_[l]); break;
        case LayerKind::Gat: h = gat_layer(g, h, layers_[l], lc, cfg_.reg, phase, streams_[l]); break;
        case LayerKind::GatedGcn: {
            auto ne = gatedgcn_layer(g, h, e, layers_[l], lc, cfg_.reg, phase, streams_[l]);
            h = ne.h;
            e = ne.e;
            break;
        }
        }
        result.layer_outputs.push_back(h.value());
    }
    result.out = readout(cfg_.task, h, prepared.graph_of_node, prepared.num_graphs, readout_);
    return result;
}

std::vector<ad::Parameter*> Model::parameters() {
    std::vector<ad::Parameter*> out;
    for (auto& p : embed_) out.push_back(&p);
    for (auto& l : layers_) {
        for (auto& p : l.params()) out.push_back(&p);
        for (auto& bn : l.norms()) {
            out.push_back(&bn.gamma);
            out.push_back(&bn.beta);
        }
    }
    for (auto& p : readout_.params()) out.push_back(&p);
    return out;
}

std::vector<std::pair<std::string, Tensor*>> Model::buffers() {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (auto& l : layers_) {
        for (auto& bn : l.norms()) {
            const std::string base = bn.gamma.name.substr(0, bn.gamma.name.size() - std::string(".gamma").size());
            out.emplace_back(base + ".running_mean", &bn.running_mean);
            out.emplace_back(base + ".running_var", &bn.running_var);
        }
    }
    return out;
}

ModelState Model::snapshot() {
    ModelState s;
    for (auto* p : parameters()) s.values.push_back(p->value);
    for (auto& [name, t] : buffers()) s.values.push_back(*t);
    return s;
}

void Model::restore(const ModelState& s) {
    std::size_t i = 0;
    auto params = parameters();
    auto bufs = buffers();
    if (s.values.size() != params.size() + bufs.size()) throw ContractError("restore: snapshot does not match model");
    for (auto* p : params) p->value = s.values[i++];
    for (auto& [name, t] : bufs) *t = s.values[i++];
}

void Model::zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
}

} // namespace ssfgnet::graphnet
