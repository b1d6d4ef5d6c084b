#include "ssfgnet/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "ssfgnet/error.hpp"
#include "ssfgnet/metrics.hpp"

namespace ssfgnet::harness {

using nlohmann::json;

// Config --------------------------------------------------------------------

void ExperimentConfig::validate() const {
    if (!(lr_min > 0.0)) throw ConfigError("lr_min must be positive");
    if (!(lr_init > lr_min)) throw ConfigError("lr_init must exceed lr_min");
    if (!(lr_reduce_factor > 1.0)) throw ConfigError("lr_reduce_factor must exceed 1");
    if (patience < 1) throw ConfigError("patience must be at least 1");
    if (layers < 1) throw ConfigError("layers must be at least 1");
    if (hidden_dim < 1) throw ConfigError("hidden_dim must be at least 1");
    if (heads < 1) throw ConfigError("heads must be at least 1");
    if (seeds.empty()) throw ConfigError("seeds must not be empty");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        throw ConfigError("adam betas must lie in [0, 1)");
    }
    if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
    ssfg.validate();
    if (dropout) dropout->validate();
}

PlateauConfig ExperimentConfig::plateau() const {
    PlateauConfig p;
    p.lr_init = lr_init;
    p.factor = lr_reduce_factor;
    p.patience = patience;
    p.lr_min = lr_min;
    return p;
}

AdamConfig ExperimentConfig::adam() const { return {adam_beta1, adam_beta2, adam_eps}; }

namespace {

json alpha_json(double a) { return std::isinf(a) ? json("inf") : json(a); }

double alpha_from(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "Infinity" || s == "infinity") return ssfg::kInfinity;
        throw ConfigError("ssfg.alpha: expected a number or \"inf\", got \"" + s + "\"");
    }
    return j.get<double>();
}

std::string to_string(graphnet::Aggregator a) { return a == graphnet::Aggregator::Mean ? "mean" : "sum"; }

graphnet::Aggregator parse_aggregator(const std::string& s) {
    if (s == "mean") return graphnet::Aggregator::Mean;
    if (s == "sum") return graphnet::Aggregator::Sum;
    throw ConfigError("unknown aggregator '" + s + "'");
}

std::string to_string(graphnet::SsfgPlacement p) {
    switch (p) {
    case graphnet::SsfgPlacement::Default: return "default";
    case graphnet::SsfgPlacement::Input: return "input";
    case graphnet::SsfgPlacement::None: return "none";
    }
    return "?";
}

graphnet::SsfgPlacement parse_placement(const std::string& s) {
    if (s == "default") return graphnet::SsfgPlacement::Default;
    if (s == "input") return graphnet::SsfgPlacement::Input;
    if (s == "none") return graphnet::SsfgPlacement::None;
    throw ConfigError("unknown ssfg_placement '" + s + "'");
}

} // namespace

json to_json(const ExperimentConfig& c) {
    return json{{"dataset", c.dataset},
                {"architecture", graphnet::to_string(c.architecture)},
                {"layers", c.layers},
                {"hidden_dim", c.hidden_dim},
                {"heads", c.heads},
                {"ssfg", {{"alpha", alpha_json(c.ssfg.alpha)}, {"mode", ssfg::to_string(c.ssfg.mode)}, {"test_scale", c.ssfg.test_scale}}},
                {"dropout", c.dropout ? json{{"p", c.dropout->p}} : json(nullptr)},
                {"lr_init", c.lr_init},
                {"lr_reduce_factor", c.lr_reduce_factor},
                {"patience", c.patience},
                {"lr_min", c.lr_min},
                {"max_epochs", c.max_epochs},
                {"seeds", c.seeds},
                {"adam_beta1", c.adam_beta1},
                {"adam_beta2", c.adam_beta2},
                {"adam_eps", c.adam_eps},
                {"batch_size", c.batch_size},
                {"diag_every", c.diag_every},
                {"aggregator", to_string(c.aggregator)},
                {"residual", c.residual},
                {"batchnorm", c.batchnorm},
                {"bias", c.bias},
                {"gate_normalization", c.gate_normalization},
                {"ssfg_placement", to_string(c.ssfg_placement)},
                {"record_wall_clock", c.record_wall_clock},
                {"checkpoint_dir", c.checkpoint_dir}};
}

ExperimentConfig config_from_json(const json& j) {
    static const std::set<std::string> known = {
        "dataset",     "architecture", "layers",     "hidden_dim",  "heads",         "ssfg",
        "dropout",     "lr_init",      "lr_reduce_factor", "patience", "lr_min",     "max_epochs",
        "seeds",       "adam_beta1",   "adam_beta2", "adam_eps",    "batch_size",    "diag_every",
        "aggregator",  "residual",     "batchnorm",  "bias",        "gate_normalization", "ssfg_placement",
        "record_wall_clock", "checkpoint_dir"};
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
    }
    ExperimentConfig c;
    try {
        c.dataset = j.value("dataset", c.dataset);
        if (j.contains("architecture")) c.architecture = graphnet::parse_layer_kind(j.at("architecture").get<std::string>());
        c.layers = j.value("layers", c.layers);
        c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
        c.heads = j.value("heads", c.heads);
        if (j.contains("ssfg")) {
            const auto& s = j.at("ssfg");
            for (const auto& [k, v] : s.items()) {
                if (k != "alpha" && k != "mode" && k != "test_scale") throw ConfigError("unknown config key 'ssfg." + k + "'");
            }
            if (s.contains("alpha")) c.ssfg.alpha = alpha_from(s.at("alpha"));
            if (s.contains("mode")) c.ssfg.mode = ssfg::parse_mode(s.at("mode").get<std::string>());
            c.ssfg.test_scale = s.value("test_scale", c.ssfg.test_scale);
        }
        if (j.contains("dropout") && !j.at("dropout").is_null()) c.dropout = ssfg::DropoutConfig{j.at("dropout").at("p").get<double>()};
        c.lr_init = j.value("lr_init", c.lr_init);
        c.lr_reduce_factor = j.value("lr_reduce_factor", c.lr_reduce_factor);
        c.patience = j.value("patience", c.patience);
        c.lr_min = j.value("lr_min", c.lr_min);
        c.max_epochs = j.value("max_epochs", c.max_epochs);
        if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
        c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
        c.adam_eps = j.value("adam_eps", c.adam_eps);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.diag_every = j.value("diag_every", c.diag_every);
        if (j.contains("aggregator")) c.aggregator = parse_aggregator(j.at("aggregator").get<std::string>());
        c.residual = j.value("residual", c.residual);
        c.batchnorm = j.value("batchnorm", c.batchnorm);
        c.bias = j.value("bias", c.bias);
        c.gate_normalization = j.value("gate_normalization", c.gate_normalization);
        if (j.contains("ssfg_placement")) c.ssfg_placement = parse_placement(j.at("ssfg_placement").get<std::string>());
        c.record_wall_clock = j.value("record_wall_clock", c.record_wall_clock);
        c.checkpoint_dir = j.value("checkpoint_dir", c.checkpoint_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path + "'");
    try {
        return config_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ParseError("config '" + path + "': " + e.what());
    }
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &j;
    std::size_t start = 0;
    for (;;) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
        node = &(*node)[part];
        start = dot + 1;
    }
}

// Records ---------------------------------------------------------------------

json to_json(const diagnostics::SmoothnessReport& r) {
    json arr = json::array();
    for (const auto& e : r) {
        arr.push_back({{"layer", e.layer},
                       {"mean_pairwise_distance", e.mean_pairwise_distance},
                       {"mad", e.mad},
                       {"distance_to_stationary", e.distance_to_stationary}});
    }
    return arr;
}

json to_json(const MetricsRecord& r) {
    json j{{"seed", r.seed},   {"epoch", r.epoch}, {"split", r.split},     {"loss", r.loss},
           {"metric", r.metric}, {"metric_name", r.metric_name}, {"lr", r.lr}, {"seconds", r.seconds}};
    if (r.smoothness) j["smoothness"] = to_json(*r.smoothness);
    return j;
}

json to_json(const Summary& s) {
    auto ms = [](const MeanSd& m) { return json{{"mean", m.mean}, {"sd", m.sd}}; };
    return json{{"summary", {{"metric_name", s.metric_name}, {"seeds", s.seeds}, {"train", ms(s.train)}, {"val", ms(s.val)}, {"test", ms(s.test)}}}};
}

MeanSd mean_sd(std::span<const double> xs) {
    if (xs.empty()) return {};
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

std::string metric_name(graphnet::Task task) {
    switch (task) {
    case graphnet::Task::NodeClass: return "weighted_accuracy";
    case graphnet::Task::GraphClass: return "accuracy";
    case graphnet::Task::GraphRegress: return "mae";
    }
    return "?";
}

// Model construction ----------------------------------------------------------

graphnet::ModelConfig model_config_for(const ExperimentConfig& cfg, const data::DatasetFile& d) {
    graphnet::ModelConfig mc;
    mc.arch = cfg.architecture;
    mc.task = graphnet::parse_task(d.task);
    mc.in_dim = d.feature_dim;
    mc.edge_in_dim = 0;
    mc.hidden = cfg.hidden_dim;
    mc.layers = cfg.layers;
    mc.heads = cfg.heads;
    mc.outputs = d.num_outputs();
    mc.aggregator = cfg.aggregator;
    mc.residual = cfg.residual;
    mc.batchnorm = cfg.batchnorm;
    mc.bias = cfg.bias;
    mc.gate_normalization = cfg.gate_normalization;
    mc.ssfg_placement = cfg.ssfg_placement;
    mc.reg.ssfg = cfg.ssfg;
    mc.reg.dropout = cfg.dropout;
    return mc;
}

std::unique_ptr<graphnet::Model> build_model(const graphnet::ModelConfig& mc, std::uint64_t seed) {
    Rng init = Rng(seed).split("init");
    return std::make_unique<graphnet::Model>(mc, init, mix_seed(seed, "streams", 0));
}

// Dataset view ------------------------------------------------------------------

DatasetView::DatasetView(const data::DatasetFile& d)
    : file_(&d), task_(graphnet::parse_task(d.task)), outputs_(d.num_outputs()) {
    graphs_.reserve(d.graphs.size());
    for (const auto& rec : d.graphs) graphs_.push_back(rec.to_graph());
}

std::vector<DatasetView::Batch> DatasetView::batches(std::span<const std::size_t> indices, std::size_t batch_size) const {
    const std::size_t per = task_ == graphnet::Task::NodeClass ? 1 : std::max<std::size_t>(1, batch_size);
    std::vector<Batch> out;
    for (std::size_t start = 0; start < indices.size(); start += per) {
        const std::size_t end = std::min(indices.size(), start + per);
        std::vector<const graph::Graph*> members;
        Batch b;
        for (std::size_t k = start; k < end; ++k) {
            const auto gi = indices[k];
            members.push_back(&graphs_.at(gi));
            const auto& y = file_->graphs[gi].y;
            if (const auto* labels = std::get_if<data::NodeLabels>(&y)) {
                b.class_targets.insert(b.class_targets.end(), labels->begin(), labels->end());
            } else if (const auto* c = std::get_if<std::size_t>(&y)) {
                b.class_targets.push_back(*c);
            } else {
                b.regression_targets.push_back(std::get<double>(y));
            }
        }
        b.batch = graph::make_batch(members);
        out.push_back(std::move(b));
    }
    return out;
}

namespace {

/// Accumulates loss and predictions over the batches of one split.
class SplitAccumulator {
public:
    SplitAccumulator(graphnet::Task task, std::size_t classes) : task_(task), classes_(classes) {}

    void add(const Tensor& out, double loss, const DatasetView::Batch& b) {
        if (task_ == graphnet::Task::NodeClass) {
            // Equal weight per graph.
            loss_sum_ += loss;
            weight_ += 1.0;
        } else {
            const double w = static_cast<double>(b.batch.num_graphs);
            loss_sum_ += loss * w;
            weight_ += w;
        }
        if (task_ == graphnet::Task::GraphRegress) {
            preds_r_.insert(preds_r_.end(), out.data().begin(), out.data().end());
            targets_r_.insert(targets_r_.end(), b.regression_targets.begin(), b.regression_targets.end());
        } else {
            const auto p = argmax_rows(out);
            preds_c_.insert(preds_c_.end(), p.begin(), p.end());
            targets_c_.insert(targets_c_.end(), b.class_targets.begin(), b.class_targets.end());
        }
    }

    double loss() const { return weight_ > 0 ? loss_sum_ / weight_ : 0.0; }

    double metric() const {
        switch (task_) {
        case graphnet::Task::NodeClass: return targets_c_.empty() ? 0.0 : weighted_accuracy(preds_c_, targets_c_, classes_);
        case graphnet::Task::GraphClass: return targets_c_.empty() ? 0.0 : accuracy(preds_c_, targets_c_);
        case graphnet::Task::GraphRegress: return targets_r_.empty() ? 0.0 : mean_absolute_error(preds_r_, targets_r_);
        }
        return 0.0;
    }

private:
    graphnet::Task task_;
    std::size_t classes_;
    double loss_sum_ = 0.0;
    double weight_ = 0.0;
    std::vector<std::size_t> preds_c_, targets_c_;
    std::vector<double> preds_r_, targets_r_;
};

struct PreparedBatch {
    graph::GraphBatch prepared;
    const DatasetView::Batch* source;
};

std::vector<PreparedBatch> prepare_all(const graphnet::Model& model, const std::vector<DatasetView::Batch>& batches) {
    std::vector<PreparedBatch> out;
    out.reserve(batches.size());
    for (const auto& b : batches) out.push_back({model.prepare(b.batch), &b});
    return out;
}

SplitEval evaluate_prepared(graphnet::Model& model, const DatasetView& view, const std::vector<PreparedBatch>& batches) {
    SplitAccumulator acc(view.task(), view.num_outputs());
    double dist = 0.0;
    for (const auto& pb : batches) {
        ad::Tape tape;
        auto out = model.forward(tape, pb.prepared, ad::Phase::Eval);
        auto loss = task_loss(view.task(), out.out, pb.source->class_targets, pb.source->regression_targets,
                              view.num_outputs());
        acc.add(out.out.value(), loss.value().item(), *pb.source);
        const auto& last = out.layer_outputs.back();
        if (last.rows() >= 2) dist += diagnostics::mean_pairwise_distance(last);
    }
    SplitEval e;
    e.loss = acc.loss();
    e.metric = acc.metric();
    e.last_layer_distance = batches.empty() ? 0.0 : dist / static_cast<double>(batches.size());
    return e;
}

} // namespace

SplitEval evaluate(graphnet::Model& model, const DatasetView& view, std::span<const std::size_t> indices,
                   std::size_t batch_size) {
    const auto batches = view.batches(indices, batch_size);
    return evaluate_prepared(model, view, prepare_all(model, batches));
}

// Training --------------------------------------------------------------------

SeedResult run_seed(const ExperimentConfig& cfg, const data::DatasetFile& d, std::uint64_t seed, const MetricsSink& sink) {
    cfg.validate();
    const auto start_time = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        if (!cfg.record_wall_clock) return 0.0;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    };
    const DatasetView view(d);
    const auto mc = model_config_for(cfg, d);
    auto model = build_model(mc, seed);
    const std::string mname = metric_name(view.task());

    const auto val_batches = view.batches(d.splits.val, cfg.batch_size);
    const auto test_batches = view.batches(d.splits.test, cfg.batch_size);
    const auto val_prepared = prepare_all(*model, val_batches);
    const auto test_prepared = prepare_all(*model, test_batches);

    // Node tasks batch single graphs, so the prepared training graphs can be
    // built once and only their order shuffled.
    const bool fixed_batches = view.task() == graphnet::Task::NodeClass;
    std::vector<DatasetView::Batch> train_fixed;
    std::vector<PreparedBatch> train_fixed_prepared;
    if (fixed_batches) {
        train_fixed = view.batches(d.splits.train, 1);
        train_fixed_prepared = prepare_all(*model, train_fixed);
    }

    std::optional<graph::Graph> diag_graph;
    std::optional<graph::GraphBatch> diag_batch;
    if (cfg.diag_every > 0 && !d.splits.val.empty()) {
        const std::size_t gi = d.splits.val.front();
        diag_batch = model->prepare(view.batches(std::span(&gi, 1), 1).front().batch);
        diag_graph = graph::add_self_loops(diag_batch->graph);
    }
    auto smoothness = [&]() -> std::optional<diagnostics::SmoothnessReport> {
        if (!diag_batch) return std::nullopt;
        ad::Tape tape;
        auto out = model->forward(tape, *diag_batch, ad::Phase::Eval);
        return diagnostics::smoothness_report(*diag_graph, out.layer_outputs);
    };

    SeedResult res;
    res.seed = seed;
    auto emit = [&](MetricsRecord r) {
        if (sink) sink(r);
        res.records.push_back(std::move(r));
    };

    const auto plateau_cfg = cfg.plateau();
    PlateauState sched(plateau_cfg);
    AdamState adam_state;
    const auto adam_cfg = cfg.adam();
    auto params = model->parameters();
    Rng shuffle_rng = Rng(seed).split("shuffle");

    // Epoch 0: the untrained model.
    {
        const auto tr = evaluate(*model, view, d.splits.train, cfg.batch_size);
        const auto va = evaluate_prepared(*model, view, val_prepared);
        const auto te = evaluate_prepared(*model, view, test_prepared);
        emit({seed, 0, "train", tr.loss, tr.metric, mname, sched.lr, elapsed(), std::nullopt});
        emit({seed, 0, "val", va.loss, va.metric, mname, sched.lr, elapsed(), cfg.diag_every ? smoothness() : std::nullopt});
        emit({seed, 0, "test", te.loss, te.metric, mname, sched.lr, elapsed(), std::nullopt});
        res.best_epoch = 0;
        res.best_val_loss = va.loss;
        res.train_metric = tr.metric;
        res.val_metric = va.metric;
        res.test_metric = te.metric;
        res.best_state = model->snapshot();
    }

    res.final_lr = sched.lr;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const double lr = sched.lr;
        std::vector<std::size_t> order(d.splits.train.size());
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        SplitAccumulator train_acc(view.task(), view.num_outputs());
        auto step = [&](const graph::GraphBatch& prepared, const DatasetView::Batch& src) {
            ad::Tape tape;
            model->zero_grad();
            auto out = model->forward(tape, prepared, ad::Phase::Train);
            auto loss = task_loss(view.task(), out.out, src.class_targets, src.regression_targets, view.num_outputs());
            tape.backward(loss);
            adam_step(params, adam_state, adam_cfg, lr);
            train_acc.add(out.out.value(), loss.value().item(), src);
        };
        if (fixed_batches) {
            for (auto k : order) step(train_fixed_prepared[k].prepared, train_fixed[k]);
        } else {
            std::vector<std::size_t> shuffled(order.size());
            for (std::size_t k = 0; k < order.size(); ++k) shuffled[k] = d.splits.train[order[k]];
            const auto batches = view.batches(shuffled, cfg.batch_size);
            for (const auto& b : batches) {
                const auto prepared = model->prepare(b.batch);
                step(prepared, b);
            }
        }

        const auto va = evaluate_prepared(*model, view, val_prepared);
        const auto te = evaluate_prepared(*model, view, test_prepared);
        const bool diag = cfg.diag_every > 0 && epoch % cfg.diag_every == 0;
        emit({seed, epoch, "train", train_acc.loss(), train_acc.metric(), mname, lr, elapsed(), std::nullopt});
        emit({seed, epoch, "val", va.loss, va.metric, mname, lr, elapsed(), diag ? smoothness() : std::nullopt});
        emit({seed, epoch, "test", te.loss, te.metric, mname, lr, elapsed(), std::nullopt});
        res.epochs_run = epoch;

        if (va.loss < res.best_val_loss) {
            res.best_val_loss = va.loss;
            res.best_epoch = epoch;
            res.train_metric = train_acc.metric();
            res.val_metric = va.metric;
            res.test_metric = te.metric;
            res.best_state = model->snapshot();
        }
        const auto upd = plateau_update(sched, plateau_cfg, va.loss);
        res.final_lr = upd.lr;
        if (upd.stop) {
            res.stopped_by_lr = true;
            break;
        }
    }

    model->restore(res.best_state);
    res.test_last_layer_distance = evaluate_prepared(*model, view, test_prepared).last_layer_distance;
    if (!cfg.checkpoint_dir.empty()) {
        save_checkpoint(cfg.checkpoint_dir + "/seed_" + std::to_string(seed), cfg, seed, *model);
    }
    return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const data::DatasetFile& d, const MetricsSink& sink) {
    cfg.validate();
    ExperimentResult r;
    std::vector<double> tr, va, te;
    for (auto seed : cfg.seeds) {
        r.runs.push_back(run_seed(cfg, d, seed, sink));
        tr.push_back(r.runs.back().train_metric);
        va.push_back(r.runs.back().val_metric);
        te.push_back(r.runs.back().test_metric);
    }
    r.summary.metric_name = metric_name(graphnet::parse_task(d.task));
    r.summary.seeds = cfg.seeds.size();
    r.summary.train = mean_sd(tr);
    r.summary.val = mean_sd(va);
    r.summary.test = mean_sd(te);
    return r;
}

std::vector<ScaleRow> eval_with_scale(graphnet::Model& model, const data::DatasetFile& d, std::span<const double> scales,
                                      std::size_t batch_size) {
    const DatasetView view(d);
    const auto batches = view.batches(d.splits.test, batch_size);
    const auto prepared = prepare_all(model, batches);
    const auto original = model.config().reg;
    std::vector<ScaleRow> rows;
    try {
        for (double s : scales) {
            auto reg = original;
            reg.ssfg.test_scale = s;
            reg.ssfg.validate();
            model.set_regularizer(reg);
            const auto e = evaluate_prepared(model, view, prepared);
            rows.push_back({s, e.loss, e.metric});
        }
    } catch (...) {
        model.set_regularizer(original);
        throw;
    }
    model.set_regularizer(original);
    return rows;
}

} // namespace ssfgnet::harness
