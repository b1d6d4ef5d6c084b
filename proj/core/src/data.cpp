#include "ssfgnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "ssfgnet/canonical_json.hpp"
#include "ssfgnet/error.hpp"

namespace ssfgnet::data {

using nlohmann::json;

void SplitFractions::validate() const {
    if (train < 0 || val < 0 || test < 0) throw ConfigError("split fractions must be non-negative");
    if (std::abs(train + val + test - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
}

namespace {

void validate_size_range(std::size_t num_graphs, std::size_t lo, std::size_t hi) {
    if (num_graphs == 0) throw ConfigError("num_graphs must be positive");
    if (lo < 2) throw ConfigError("nodes_min must be at least 2");
    if (hi < lo) throw ConfigError("nodes_max must be >= nodes_min");
}

void validate_probs(double p, double q) {
    if (!(q >= 0.0 && q < p && p <= 1.0)) {
        throw ConfigError("need 0 <= q_inter < p_intra <= 1, got p_intra=" + std::to_string(p) +
                          " q_inter=" + std::to_string(q));
    }
}

std::size_t draw_size(std::size_t lo, std::size_t hi, Rng& rng) { return lo + rng.below(hi - lo + 1); }

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

/// Join components with one edge between consecutive components.
std::size_t connect_components(std::size_t n, std::vector<graph::Edge>& edges, Rng& rng) {
    const graph::Graph g = graph::Graph::from_undirected(n, edges, Tensor({n, 0}));
    const auto comp = graph::connected_components(g);
    std::size_t m = 0;
    for (auto c : comp) m = std::max(m, c + 1);
    if (m <= 1) return 0;
    std::vector<std::vector<std::size_t>> members(m);
    for (std::size_t i = 0; i < n; ++i) members[comp[i]].push_back(i);
    for (std::size_t c = 1; c < m; ++c) {
        const auto& a = members[c - 1];
        const auto& b = members[c];
        const std::size_t u = a[rng.below(a.size())];
        const std::size_t v = b[rng.below(b.size())];
        edges.push_back({std::min(u, v), std::max(u, v)});
    }
    return m - 1;
}

std::vector<graph::Edge> bernoulli_edges(std::size_t n, Rng& rng, const std::function<double(std::size_t, std::size_t)>& prob) {
    std::vector<graph::Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (rng.uniform() < prob(i, j)) edges.push_back({i, j});
        }
    }
    return edges;
}

json splits_json(const SplitFractions& f) { return json{{"train", f.train}, {"val", f.val}, {"test", f.test}}; }

SplitFractions splits_from(const json& j) {
    SplitFractions f;
    if (j.contains("splits")) {
        const auto& s = j.at("splits");
        f.train = s.value("train", f.train);
        f.val = s.value("val", f.val);
        f.test = s.value("test", f.test);
    }
    return f;
}

} // namespace

void SbmSpec::validate() const {
    validate_size_range(num_graphs, nodes_min, nodes_max);
    if (communities < 2) throw ConfigError("SBM needs at least 2 communities");
    if (nodes_min < communities) throw ConfigError("nodes_min must be at least the community count");
    validate_probs(p_intra, q_inter);
    if (!(labeled_fraction >= 0.0 && labeled_fraction <= 1.0)) throw ConfigError("labeled_fraction must lie in [0, 1]");
    splits.validate();
}

void SbmGraphSpec::validate() const {
    validate_size_range(num_graphs, nodes_min, nodes_max);
    if (communities < 1) throw ConfigError("need at least one community");
    if (nodes_min < communities) throw ConfigError("nodes_min must be at least the community count");
    for (const auto& r : {regime_a, regime_b}) {
        if (!(r.q_inter >= 0.0 && r.q_inter <= r.p_intra && r.p_intra <= 1.0)) {
            throw ConfigError("regime needs 0 <= q_inter <= p_intra <= 1");
        }
    }
    if (degree_buckets < 2) throw ConfigError("degree_buckets must be at least 2");
    splits.validate();
}

void RegressionSpec::validate() const {
    validate_size_range(num_graphs, nodes_min, nodes_max);
    if (node_types < 2) throw ConfigError("node_types must be at least 2");
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw ConfigError("edge_prob must lie in [0, 1]");
    if (!(noise_sd >= 0.0)) throw ConfigError("noise_sd must be non-negative");
    for (const auto& [a, b] : reactive_pairs) {
        if (a >= node_types || b >= node_types) throw ConfigError("reactive pair names an unknown node type");
    }
    splits.validate();
}

graph::Graph GraphRecord::to_graph() const { return graph::Graph::from_undirected(n, edges, x); }

std::size_t DatasetFile::num_outputs() const {
    if (task == "graph-regress") return 1;
    if (meta.contains("num_classes")) return meta.at("num_classes").get<std::size_t>();
    std::size_t k = 0;
    for (const auto& g : graphs) {
        if (const auto* labels = std::get_if<NodeLabels>(&g.y)) {
            for (auto l : *labels) k = std::max(k, l + 1);
        } else if (const auto* c = std::get_if<std::size_t>(&g.y)) {
            k = std::max(k, *c + 1);
        }
    }
    return k;
}

SbmSample sample_sbm(std::size_t n, std::size_t k, double p_intra, double q_inter, Rng& rng) {
    SbmSample s;
    s.block.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.block[i] = i % k;
    shuffle(s.block, rng);
    s.edges = bernoulli_edges(n, rng, [&](std::size_t i, std::size_t j) {
        return s.block[i] == s.block[j] ? p_intra : q_inter;
    });
    s.bridges = connect_components(n, s.edges, rng);
    return s;
}

Splits make_splits(std::size_t count, const SplitFractions& f, Rng& rng) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), 0);
    shuffle(idx, rng);
    const auto n_train = static_cast<std::size_t>(std::llround(f.train * static_cast<double>(count)));
    const auto n_val = std::min(count - n_train, static_cast<std::size_t>(std::llround(f.val * static_cast<double>(count))));
    Splits s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
    for (auto* v : {&s.train, &s.val, &s.test}) std::sort(v->begin(), v->end());
    return s;
}

DatasetFile gen_sbm_node_task(const SbmSpec& spec) {
    spec.validate();
    const Rng root(spec.seed);
    DatasetFile d;
    d.task = "node-class";
    d.feature_dim = spec.communities;
    for (std::size_t gi = 0; gi < spec.num_graphs; ++gi) {
        Rng rng = root.split("graph", gi);
        const std::size_t n = draw_size(spec.nodes_min, spec.nodes_max, rng);
        auto s = sample_sbm(n, spec.communities, spec.p_intra, spec.q_inter, rng);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        shuffle(order, rng);
        const auto revealed = static_cast<std::size_t>(std::llround(spec.labeled_fraction * static_cast<double>(n)));
        Tensor x({n, spec.communities});
        for (std::size_t r = 0; r < revealed; ++r) x.at(order[r], s.block[order[r]]) = 1.0;
        d.graphs.push_back({n, std::move(s.edges), std::move(x), NodeLabels(s.block)});
    }
    Rng split_rng = root.split("splits");
    d.splits = make_splits(spec.num_graphs, spec.splits, split_rng);
    d.meta = json{{"kind", "sbm-node"},
                  {"num_classes", spec.communities},
                  {"spec",
                   {{"num_graphs", spec.num_graphs},
                    {"nodes_min", spec.nodes_min},
                    {"nodes_max", spec.nodes_max},
                    {"communities", spec.communities},
                    {"p_intra", spec.p_intra},
                    {"q_inter", spec.q_inter},
                    {"labeled_fraction", spec.labeled_fraction},
                    {"seed", spec.seed},
                    {"splits", splits_json(spec.splits)}}}};
    return d;
}

DatasetFile gen_sbm_graph_task(const SbmGraphSpec& spec) {
    spec.validate();
    const Rng root(spec.seed);
    DatasetFile d;
    d.task = "graph-class";
    d.feature_dim = spec.degree_buckets;
    for (std::size_t gi = 0; gi < spec.num_graphs; ++gi) {
        Rng rng = root.split("graph", gi);
        const std::size_t label = gi % 2;
        const Regime& r = label == 0 ? spec.regime_a : spec.regime_b;
        const std::size_t n = draw_size(spec.nodes_min, spec.nodes_max, rng);
        auto s = sample_sbm(n, spec.communities, r.p_intra, r.q_inter, rng);
        std::vector<std::size_t> deg(n, 0);
        for (const auto& e : s.edges) {
            ++deg[e.src];
            ++deg[e.dst];
        }
        Tensor x({n, spec.degree_buckets});
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t b = std::min(spec.degree_buckets - 1, deg[i] * spec.degree_buckets / spec.nodes_max);
            x.at(i, b) = 1.0;
        }
        d.graphs.push_back({n, std::move(s.edges), std::move(x), label});
    }
    Rng split_rng = root.split("splits");
    d.splits = make_splits(spec.num_graphs, spec.splits, split_rng);
    d.meta = json{{"kind", "sbm-graph"},
                  {"num_classes", 2},
                  {"spec",
                   {{"num_graphs", spec.num_graphs},
                    {"nodes_min", spec.nodes_min},
                    {"nodes_max", spec.nodes_max},
                    {"communities", spec.communities},
                    {"regime_a", {{"p_intra", spec.regime_a.p_intra}, {"q_inter", spec.regime_a.q_inter}}},
                    {"regime_b", {{"p_intra", spec.regime_b.p_intra}, {"q_inter", spec.regime_b.q_inter}}},
                    {"degree_buckets", spec.degree_buckets},
                    {"seed", spec.seed},
                    {"splits", splits_json(spec.splits)}}}};
    return d;
}

double regression_rule(const GraphRecord& g, const std::vector<TypePair>& reactive_pairs) {
    std::vector<std::size_t> type(g.n, 0);
    for (std::size_t i = 0; i < g.n; ++i) {
        const auto row = g.x.row(i);
        type[i] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    std::size_t hits = 0;
    for (const auto& e : g.edges) {
        const auto a = std::min(type[e.src], type[e.dst]);
        const auto b = std::max(type[e.src], type[e.dst]);
        for (const auto& [p, q] : reactive_pairs) {
            if (a == std::min(p, q) && b == std::max(p, q)) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(g.n);
}

DatasetFile gen_regression_task(const RegressionSpec& spec) {
    spec.validate();
    const Rng root(spec.seed);
    DatasetFile d;
    d.task = "graph-regress";
    d.feature_dim = spec.node_types;
    for (std::size_t gi = 0; gi < spec.num_graphs; ++gi) {
        Rng rng = root.split("graph", gi);
        const std::size_t n = draw_size(spec.nodes_min, spec.nodes_max, rng);
        Tensor x({n, spec.node_types});
        for (std::size_t i = 0; i < n; ++i) x.at(i, rng.below(spec.node_types)) = 1.0;
        auto edges = bernoulli_edges(n, rng, [&](std::size_t, std::size_t) { return spec.edge_prob; });
        connect_components(n, edges, rng);
        GraphRecord rec{n, std::move(edges), std::move(x), 0.0};
        double y = regression_rule(rec, spec.reactive_pairs);
        if (spec.noise_sd > 0.0) y += spec.noise_sd * rng.normal();
        rec.y = y;
        d.graphs.push_back(std::move(rec));
    }
    Rng split_rng = root.split("splits");
    d.splits = make_splits(spec.num_graphs, spec.splits, split_rng);
    json pairs = json::array();
    for (const auto& [a, b] : spec.reactive_pairs) pairs.push_back({a, b});
    d.meta = json{{"kind", "regression"},
                  {"rule", {{"reactive_pairs", pairs}, {"normalizer", "nodes"}}},
                  {"spec",
                   {{"num_graphs", spec.num_graphs},
                    {"nodes_min", spec.nodes_min},
                    {"nodes_max", spec.nodes_max},
                    {"node_types", spec.node_types},
                    {"edge_prob", spec.edge_prob},
                    {"noise_sd", spec.noise_sd},
                    {"seed", spec.seed},
                    {"splits", splits_json(spec.splits)}}}};
    return d;
}

DatasetFile generate_from_spec(const json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "sbm-node") {
            SbmSpec s;
            s.num_graphs = j.value("num_graphs", s.num_graphs);
            s.nodes_min = j.value("nodes_min", s.nodes_min);
            s.nodes_max = j.value("nodes_max", s.nodes_max);
            s.communities = j.value("communities", s.communities);
            s.p_intra = j.value("p_intra", s.p_intra);
            s.q_inter = j.value("q_inter", s.q_inter);
            s.labeled_fraction = j.value("labeled_fraction", s.labeled_fraction);
            s.seed = j.value("seed", s.seed);
            s.splits = splits_from(j);
            return gen_sbm_node_task(s);
        }
        if (kind == "sbm-graph") {
            SbmGraphSpec s;
            s.num_graphs = j.value("num_graphs", s.num_graphs);
            s.nodes_min = j.value("nodes_min", s.nodes_min);
            s.nodes_max = j.value("nodes_max", s.nodes_max);
            s.communities = j.value("communities", s.communities);
            for (auto [key, regime] : {std::pair{"regime_a", &s.regime_a}, std::pair{"regime_b", &s.regime_b}}) {
                if (j.contains(key)) {
                    regime->p_intra = j.at(key).value("p_intra", regime->p_intra);
                    regime->q_inter = j.at(key).value("q_inter", regime->q_inter);
                }
            }
            s.degree_buckets = j.value("degree_buckets", s.degree_buckets);
            s.seed = j.value("seed", s.seed);
            s.splits = splits_from(j);
            return gen_sbm_graph_task(s);
        }
        if (kind == "regression") {
            RegressionSpec s;
            s.num_graphs = j.value("num_graphs", s.num_graphs);
            s.nodes_min = j.value("nodes_min", s.nodes_min);
            s.nodes_max = j.value("nodes_max", s.nodes_max);
            s.node_types = j.value("node_types", s.node_types);
            s.edge_prob = j.value("edge_prob", s.edge_prob);
            s.noise_sd = j.value("noise_sd", s.noise_sd);
            s.seed = j.value("seed", s.seed);
            if (j.contains("reactive_pairs")) {
                s.reactive_pairs.clear();
                for (const auto& p : j.at("reactive_pairs")) {
                    s.reactive_pairs.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
                }
            }
            s.splits = splits_from(j);
            return gen_regression_task(s);
        }
        throw ConfigError("unknown dataset kind '" + kind + "' (expected sbm-node, sbm-graph or regression)");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("dataset spec: ") + e.what());
    }
}

// Serialization -------------------------------------------------------------

json to_json(const DatasetFile& d) {
    json graphs = json::array();
    for (const auto& g : d.graphs) {
        json edges = json::array();
        for (const auto& e : g.edges) edges.push_back({e.src, e.dst});
        json x = json::array();
        for (std::size_t i = 0; i < g.n; ++i) {
            const auto row = g.x.row(i);
            x.push_back(std::vector<double>(row.begin(), row.end()));
        }
        json y;
        std::visit([&](const auto& v) { y = v; }, g.y);
        graphs.push_back({{"n", g.n}, {"edges", std::move(edges)}, {"x", std::move(x)}, {"y", std::move(y)}});
    }
    json j{{"task", d.task},
           {"feature_dim", d.feature_dim},
           {"graphs", std::move(graphs)},
           {"splits", {{"train", d.splits.train}, {"val", d.splits.val}, {"test", d.splits.test}}}};
    if (!d.meta.empty()) j["meta"] = d.meta;
    return j;
}

std::string serialize(const DatasetFile& d) { return canonical_dump(to_json(d)) + "\n"; }

namespace {

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
    return obj.at(key);
}

std::size_t as_index(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ParseError(where + ": expected a non-negative integer, got " + v.dump());
    }
    return v.get<std::size_t>();
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError(where + ": expected a number, got " + v.dump());
    return v.get<double>();
}

} // namespace

DatasetFile parse(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("dataset: malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    DatasetFile d;
    const std::string top = "dataset";
    const auto& task = field(j, "task", top);
    if (!task.is_string()) throw ParseError("dataset: 'task' must be a string");
    d.task = task.get<std::string>();
    d.feature_dim = as_index(field(j, "feature_dim", top), "dataset: feature_dim");
    if (j.contains("meta")) d.meta = j.at("meta");

    const auto& graphs = field(j, "graphs", top);
    if (!graphs.is_array()) throw ParseError("dataset: 'graphs' must be an array");
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        const std::string where = "graph " + std::to_string(gi);
        const auto& gj = graphs[gi];
        GraphRecord rec;
        rec.n = as_index(field(gj, "n", where), where + ": n");
        const auto& edges = field(gj, "edges", where);
        if (!edges.is_array()) throw ParseError(where + ": 'edges' must be an array");
        for (std::size_t k = 0; k < edges.size(); ++k) {
            const std::string ew = where + ": edge " + std::to_string(k);
            if (!edges[k].is_array() || edges[k].size() != 2) throw ParseError(ew + ": expected [src, dst]");
            rec.edges.push_back({as_index(edges[k][0], ew), as_index(edges[k][1], ew)});
        }
        const auto& x = field(gj, "x", where);
        if (!x.is_array()) throw ParseError(where + ": 'x' must be an array");
        std::vector<double> xs;
        for (std::size_t r = 0; r < x.size(); ++r) {
            const std::string rw = where + ": x row " + std::to_string(r);
            if (!x[r].is_array()) throw ParseError(rw + ": expected an array");
            if (x[r].size() != d.feature_dim) {
                throw ValidationError(rw + ": width " + std::to_string(x[r].size()) + " != feature_dim " +
                                      std::to_string(d.feature_dim));
            }
            for (const auto& v : x[r]) xs.push_back(as_number(v, rw));
        }
        if (x.size() != rec.n) {
            throw ValidationError(where + ": " + std::to_string(x.size()) + " feature rows for n = " + std::to_string(rec.n));
        }
        rec.x = Tensor({rec.n, d.feature_dim}, std::move(xs));
        const auto& y = field(gj, "y", where);
        if (d.task == "node-class") {
            if (!y.is_array()) throw ParseError(where + ": node-class 'y' must be an array");
            NodeLabels labels;
            for (const auto& v : y) labels.push_back(as_index(v, where + ": y"));
            rec.y = std::move(labels);
        } else if (d.task == "graph-class") {
            rec.y = as_index(y, where + ": y");
        } else {
            rec.y = as_number(y, where + ": y");
        }
        d.graphs.push_back(std::move(rec));
    }
    const auto& splits = field(j, "splits", top);
    auto read_split = [&](const char* name) {
        std::vector<std::size_t> out;
        const auto& s = field(splits, name, "dataset: splits");
        if (!s.is_array()) throw ParseError(std::string("dataset: split '") + name + "' must be an array");
        for (const auto& v : s) out.push_back(as_index(v, std::string("dataset: split ") + name));
        return out;
    };
    d.splits.train = read_split("train");
    d.splits.val = read_split("val");
    d.splits.test = read_split("test");
    validate(d);
    return d;
}

void validate(const DatasetFile& d) {
    if (d.task != "node-class" && d.task != "graph-class" && d.task != "graph-regress") {
        throw ValidationError("dataset: unknown task '" + d.task + "'");
    }
    if (d.feature_dim == 0) throw ValidationError("dataset: feature_dim must be positive");
    std::size_t classes = 0;
    if (d.meta.contains("num_classes")) classes = d.meta.at("num_classes").get<std::size_t>();
    for (std::size_t gi = 0; gi < d.graphs.size(); ++gi) {
        const auto& g = d.graphs[gi];
        const std::string where = "graph " + std::to_string(gi);
        if (g.n == 0) throw ValidationError(where + ": no nodes");
        for (std::size_t k = 0; k < g.edges.size(); ++k) {
            const auto& e = g.edges[k];
            if (e.src >= g.n || e.dst >= g.n) {
                throw ValidationError(where + ": edge " + std::to_string(k) + " (" + std::to_string(e.src) + ", " +
                                      std::to_string(e.dst) + ") out of range for " + std::to_string(g.n) + " nodes");
            }
        }
        if (g.x.shape() != Shape{g.n, d.feature_dim}) {
            throw ValidationError(where + ": features " + shape_str(g.x.shape()) + " do not match n x feature_dim");
        }
        for (double v : g.x.data()) {
            if (!std::isfinite(v)) throw ValidationError(where + ": non-finite feature");
        }
        if (d.task == "node-class") {
            const auto* labels = std::get_if<NodeLabels>(&g.y);
            if (!labels || labels->size() != g.n) throw ValidationError(where + ": need one label per node");
            if (classes) {
                for (auto l : *labels) {
                    if (l >= classes) throw ValidationError(where + ": label " + std::to_string(l) + " >= num_classes");
                }
            }
        } else if (d.task == "graph-class") {
            const auto* c = std::get_if<std::size_t>(&g.y);
            if (!c) throw ValidationError(where + ": graph-class target must be an integer");
            if (classes && *c >= classes) throw ValidationError(where + ": label >= num_classes");
        } else {
            const auto* y = std::get_if<double>(&g.y);
            if (!y || !std::isfinite(*y)) throw ValidationError(where + ": regression target must be a finite number");
        }
    }
    std::vector<int> seen(d.graphs.size(), 0);
    for (const auto* s : {&d.splits.train, &d.splits.val, &d.splits.test}) {
        for (auto i : *s) {
            if (i >= d.graphs.size()) throw ValidationError("dataset: split index " + std::to_string(i) + " out of range");
            if (seen[i]++) throw ValidationError("dataset: graph " + std::to_string(i) + " appears in more than one split");
        }
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) throw ValidationError("dataset: graph " + std::to_string(i) + " is in no split");
    }
}

void save_dataset(const DatasetFile& d, const std::string& path) {
    validate(d);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << serialize(d);
    if (!out) throw Error("write to '" + path + "' failed");
}

DatasetFile load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

} // namespace ssfgnet::data
