// Acceptance checks, one PASS/FAIL line per criterion.
//
//   acceptance [--only N ...] [--e2e-epochs E]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssfgnet/canonical_json.hpp"
#include "ssfgnet/data.hpp"
#include "ssfgnet/diagnostics.hpp"
#include "ssfgnet/error.hpp"
#include "ssfgnet/experiment.hpp"
#include "ssfgnet/metrics.hpp"
#include "ssfgnet/optim.hpp"
#include "ssfgnet/ssfg.hpp"
#include "test_support.hpp"

namespace {

using namespace ssfgnet;
using testing_support::fd_max_rel_error;
using testing_support::random_graph;
using testing_support::random_tensor;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string stream_of(const harness::SeedResult& r) {
    std::string s;
    for (const auto& rec : r.records) s += canonical_dump(harness::to_json(rec)) + "\n";
    return s;
}

// 1 ----------------------------------------------------------------------------

Outcome sampler_suite() {
    const std::size_t n = 1'000'000;
    std::vector<double> variances;
    std::ostringstream detail;
    bool ok = true;
    for (double alpha : {1.0, 4.0, 8.0, 100.0}) {
        Rng rng = Rng(2024).split("sampler", static_cast<std::uint64_t>(alpha));
        auto xs = ssfg::sample_lambda(alpha, n, rng).factors;
        double lo = xs[0], hi = xs[0], log_sum = 0.0, sum = 0.0, sq = 0.0;
        std::size_t below = 0;
        for (double x : xs) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
            log_sum += std::log(x);
            sum += x;
            sq += x * x;
            below += x < 1.0;
        }
        const double mean = sum / n;
        const double var = (sq - n * mean * mean) / (n - 1);
        auto mid = xs.begin() + static_cast<std::ptrdiff_t>(n / 2);
        std::nth_element(xs.begin(), mid, xs.end());
        const double med = *mid;
        const double mlog = log_sum / n;
        const double frac = static_cast<double>(below) / n;
        const bool this_ok = lo >= 0.5 && hi <= 2.0 && std::abs(med - 1.0) <= 0.01 && std::abs(mlog) <= 0.005 &&
                             std::abs(frac - 0.5) <= 0.003;
        ok = ok && this_ok;
        variances.push_back(var);
        detail << "a=" << alpha << " med=" << fmt("%.4f", med) << " Eln=" << fmt("%+.5f", mlog)
               << " P(<1)=" << fmt("%.4f", frac) << " var=" << fmt("%.5f", var) << "; ";
    }
    for (std::size_t i = 1; i < variances.size(); ++i) ok = ok && variances[i] < variances[i - 1];
    return {ok, detail.str()};
}

// 2 ----------------------------------------------------------------------------

Outcome identity_degeneracy() {
    data::SbmSpec s;
    s.num_graphs = 24;
    s.nodes_min = 20;
    s.nodes_max = 30;
    s.seed = 5;
    const auto node = data::gen_sbm_node_task(s);
    data::RegressionSpec r;
    r.num_graphs = 48;
    r.seed = 5;
    const auto reg = data::gen_regression_task(r);
    bool ok = true;
    std::ostringstream detail;
    for (auto arch : {graphnet::LayerKind::Sage, graphnet::LayerKind::Gat, graphnet::LayerKind::GatedGcn}) {
        harness::ExperimentConfig c;
        c.architecture = arch;
        c.layers = 4;
        c.hidden_dim = 16;
        c.heads = arch == graphnet::LayerKind::Gat ? 4 : 1;
        c.max_epochs = 8;
        c.batch_size = 16;
        c.diag_every = 4;
        c.record_wall_clock = false;
        c.ssfg.alpha = ssfg::kInfinity;
        c.ssfg.mode = ssfg::Mode::Full;
        auto off = c;
        off.ssfg.alpha = 4.0;
        off.ssfg.mode = ssfg::Mode::Off;
        const auto& d = arch == graphnet::LayerKind::GatedGcn ? reg : node;
        const auto a = harness::run_seed(c, d, 11);
        const auto b = harness::run_seed(off, d, 11);
        bool same = stream_of(a) == stream_of(b) && a.best_state.values.size() == b.best_state.values.size();
        for (std::size_t i = 0; same && i < a.best_state.values.size(); ++i) {
            same = a.best_state.values[i] == b.best_state.values[i];
        }
        ok = ok && same;
        detail << graphnet::to_string(arch) << (same ? " identical" : " DIFFERENT") << " over " << a.records.size()
               << " records; ";
    }
    return {ok, detail.str()};
}

// 3 ----------------------------------------------------------------------------

Outcome gradient_suite() {
    Rng rng(99);
    struct Check {
        std::string name;
        double tol;
        std::function<double()> run;
    };
    std::vector<Check> checks;
    auto param = [&](const std::string& name, ssfgnet::Shape shape) { return ad::Parameter(name, random_tensor(std::move(shape), rng)); };

    // Each check keeps its parameters alive inside the closure.
    auto unary = [&](std::string name, double tol, std::function<ad::Var(ad::Var)> op, ssfgnet::Shape shape = {4, 3}) {
        auto p = std::make_shared<ad::Parameter>(param("x", shape));
        ad::Tape probe;
        auto w = std::make_shared<Tensor>(random_tensor(op(probe.constant(p->value)).value().shape(), rng));
        checks.push_back({std::move(name), tol, [p, w, op] {
                              return fd_max_rel_error({p.get()}, [&](ad::Tape& t) {
                                  return ad::sum(ad::mul(op(t.param(*p)), t.constant(*w)));
                              });
                          }});
    };
    auto binary = [&](std::string name, double tol, std::function<ad::Var(ad::Var, ad::Var)> op, ssfgnet::Shape sa,
                      ssfgnet::Shape sb) {
        auto a = std::make_shared<ad::Parameter>(param("a", sa));
        auto b = std::make_shared<ad::Parameter>(param("b", sb));
        if (name.rfind("div", 0) == 0) {
            for (auto& v : b->value.data()) v = (v < 0 ? -1.0 : 1.0) * (0.5 + std::abs(v));
        }
        ad::Tape probe;
        auto w = std::make_shared<Tensor>(random_tensor(op(probe.constant(a->value), probe.constant(b->value)).value().shape(), rng));
        checks.push_back({std::move(name), tol, [a, b, w, op] {
                              return fd_max_rel_error({a.get(), b.get()}, [&](ad::Tape& t) {
                                  return ad::sum(ad::mul(op(t.param(*a), t.param(*b)), t.constant(*w)));
                              });
                          }});
    };

    binary("matmul", 1e-6, ad::matmul, {3, 3}, {3, 3});
    binary("add", 1e-6, ad::add, {4, 3}, {4, 3});
    binary("add(row broadcast)", 1e-6, ad::add, {4, 3}, {3});
    binary("sub(column broadcast)", 1e-6, ad::sub, {4, 3}, {4, 1});
    binary("mul", 1e-6, ad::mul, {4, 4}, {4, 4});
    binary("div", 1e-4, ad::div, {4, 3}, {4, 3});
    binary("concat_cols", 1e-6, [](ad::Var a, ad::Var b) { return ad::concat_cols(a, b); }, {4, 2}, {4, 3});
    unary("relu", 1e-4, ad::relu);
    unary("sigmoid", 1e-4, ad::sigmoid);
    unary("tanh", 1e-4, ad::tanh);
    unary("elu", 1e-4, [](ad::Var x) { return ad::elu(x); });
    unary("leaky_relu", 1e-4, [](ad::Var x) { return ad::leaky_relu(x, 0.2); });
    unary("scale", 1e-6, [](ad::Var x) { return ad::scale(x, -1.7); });
    unary("add_scalar", 1e-6, [](ad::Var x) { return ad::add_scalar(x, 0.3); });
    unary("slice_cols", 1e-6, [](ad::Var x) { return ad::slice_cols(x, 1, 2); });
    unary("gather_rows", 1e-6, [](ad::Var x) { return ad::gather_rows(x, {3, 0, 0, 2, 1, 3}); });
    unary("sum", 1e-6, [](ad::Var x) { return ad::sum(x); });
    unary("mean", 1e-6, [](ad::Var x) { return ad::mean(x); });
    unary("segment_reduce(sum)", 1e-6, [](ad::Var x) { return ad::segment_reduce(ad::Reduce::Sum, x, {0, 2, 2, 0, 1, 2}, 4); }, {6, 3});
    unary("segment_reduce(mean)", 1e-6, [](ad::Var x) { return ad::segment_reduce(ad::Reduce::Mean, x, {0, 2, 2, 0, 1, 2}, 4); }, {6, 3});
    unary("segment_softmax", 1e-4, [](ad::Var x) { return ad::segment_softmax(x, {0, 2, 2, 0, 1, 2}, 3); }, {6, 2});
    {
        auto x = std::make_shared<ad::Parameter>(param("x", {6, 3}));
        auto bn = std::make_shared<ad::BatchNormState>("bn", 3);
        bn->gamma.value = random_tensor({3}, rng, 0.5, 1.5);
        bn->beta.value = random_tensor({3}, rng);
        auto w = std::make_shared<Tensor>(random_tensor({6, 3}, rng));
        checks.push_back({"batch_norm(train)", 1e-5, [x, bn, w] {
                              auto saved_mean = bn->running_mean;
                              auto saved_var = bn->running_var;
                              const double e = fd_max_rel_error({x.get(), &bn->gamma, &bn->beta}, [&](ad::Tape& t) {
                                  return ad::sum(ad::mul(ad::batch_norm(t.param(*x), *bn, ad::Phase::Train), t.constant(*w)));
                              });
                              bn->running_mean = saved_mean;
                              bn->running_var = saved_var;
                              return e;
                          }});
    }
    {
        auto x = std::make_shared<ad::Parameter>(param("logits", {5, 3}));
        checks.push_back({"cross_entropy(weighted)", 1e-4, [x] {
                              const std::vector<std::size_t> y{0, 2, 1, 2, 2};
                              const std::vector<double> cw{1.5, 0.5, 1.0};
                              return fd_max_rel_error({x.get()}, [&](ad::Tape& t) { return ad::cross_entropy(t.param(*x), y, cw); });
                          }});
        auto p = std::make_shared<ad::Parameter>(param("pred", {5, 1}));
        auto target = std::make_shared<Tensor>(random_tensor({5, 1}, rng));
        checks.push_back({"l1_loss", 1e-4, [p, target] {
                              return fd_max_rel_error({p.get()}, [&](ad::Tape& t) { return ad::l1_loss(t.param(*p), *target); });
                          }});
    }
    {
        auto x = std::make_shared<ad::Parameter>(param("x", {5, 2}));
        checks.push_back({"ssfg scale_rows (fixed factors)", 1e-6, [x] {
                              const std::vector<double> f{0.6, 1.9, 1.0, 0.75, 1.3};
                              return fd_max_rel_error({x.get()}, [&](ad::Tape& t) {
                                  auto y = ssfg::scale_rows(t.param(*x), f, [&](std::size_t) { return f; });
                                  return ad::sum(ad::mul(y, y));
                              });
                          }});
    }

    // Each layer kind at depth 2 with its readout, node and graph tasks.
    for (auto arch : {graphnet::LayerKind::Sage, graphnet::LayerKind::Gat, graphnet::LayerKind::GatedGcn}) {
        for (auto task : {graphnet::Task::NodeClass, graphnet::Task::GraphRegress}) {
            graphnet::ModelConfig mc;
            mc.arch = arch;
            mc.task = task;
            mc.in_dim = 3;
            mc.hidden = 4;
            mc.layers = 2;
            mc.heads = 2;
            mc.outputs = task == graphnet::Task::NodeClass ? 3 : 1;
            mc.reg = graphnet::Regularizer{ssfg::SsfgConfig{ssfg::kInfinity, ssfg::Mode::Off}, std::nullopt};
            Rng init(3);
            auto model = std::make_shared<graphnet::Model>(mc, init, 7);
            for (auto* p : model->parameters()) p->value = random_tensor(p->value.shape(), rng);
            auto g1 = std::make_shared<graph::Graph>(random_graph(10, 3, 0.3, rng));
            auto g2 = std::make_shared<graph::Graph>(random_graph(6, 3, 0.4, rng));
            auto g3 = std::make_shared<graph::Graph>(random_graph(7, 3, 0.3, rng));
            std::vector<const graph::Graph*> gs{g1.get()};
            // An odd graph count keeps the L1 bias gradient (a mean of signs) away from an exact zero.
            if (task == graphnet::Task::GraphRegress) gs.insert(gs.end(), {g2.get(), g3.get()});
            auto prepared = std::make_shared<graph::GraphBatch>(model->prepare(graph::make_batch(gs)));
            std::vector<std::size_t> labels(10);
            for (auto& l : labels) l = rng.below(3);
            const std::vector<double> targets{0.3, -0.2, 0.1};
            checks.push_back({graphnet::to_string(arch) + (task == graphnet::Task::NodeClass ? " node" : " graph") + " depth 2",
                              1e-4, [model, prepared, labels, targets, task, g1, g2, g3] {
                                  return fd_max_rel_error(model->parameters(), [&](ad::Tape& t) {
                                      auto out = model->forward(t, *prepared, ad::Phase::Eval).out;
                                      return harness::task_loss(task, out, labels, targets, task == graphnet::Task::NodeClass ? 3 : 1);
                                  });
                              }});
        }
    }

    bool ok = true;
    std::ostringstream detail;
    double worst_composite = 0.0;
    for (const auto& c : checks) {
        const double e = c.run();
        if (!(e < c.tol)) {
            ok = false;
            detail << c.name << " err=" << fmt("%.2e", e) << " tol=" << fmt("%.0e", c.tol) << "; ";
        }
        if (c.tol == 1e-4) worst_composite = std::max(worst_composite, e);
    }
    detail << checks.size() << " checks, worst nonlinear rel err " << fmt("%.2e", worst_composite);
    return {ok, detail.str()};
}

// 4 ----------------------------------------------------------------------------

Outcome algorithm_contract() {
    const std::uint64_t seed = 77;
    ssfg::SiteStreams site(Rng(seed).split("ssfg.forward"), Rng(seed).split("ssfg.backward"));
    Rng replay_f = site.forward;
    Rng replay_b = site.backward;
    const ssfg::SsfgConfig cfg{4.0, ssfg::Mode::Full};
    Rng data_rng(3);
    bool exact = true;
    std::vector<double> fs, bs;
    const int steps = 10'000;
    for (int step = 0; step < steps; ++step) {
        const std::size_t rows = step == 0 ? 32 : 1;
        ad::Parameter x("x", random_tensor({rows, 8}, data_rng));
        const Tensor g = random_tensor({rows, 8}, data_rng);
        ad::Tape t;
        auto y = ssfg::ssfg_apply(t.param(x), cfg, ad::Phase::Train, site);
        t.backward(ad::sum(ad::mul(y, t.constant(g))));
        const auto lf = ssfg::sample_lambda(cfg.alpha, rows, replay_f).factors;
        const auto lb = ssfg::sample_lambda(cfg.alpha, rows, replay_b).factors;
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < 8; ++c) {
                exact = exact && y.value().at(r, c) == lf[r] * x.value.at(r, c);
                exact = exact && x.grad.at(r, c) == lb[r] * g.at(r, c);
            }
        }
        fs.push_back(lf[0]);
        bs.push_back(lb[0]);
    }
    const double mf = std::accumulate(fs.begin(), fs.end(), 0.0) / steps;
    const double mb = std::accumulate(bs.begin(), bs.end(), 0.0) / steps;
    double cov = 0.0, vf = 0.0, vb = 0.0;
    for (int i = 0; i < steps; ++i) {
        cov += (fs[i] - mf) * (bs[i] - mb);
        vf += (fs[i] - mf) * (fs[i] - mf);
        vb += (bs[i] - mb) * (bs[i] - mb);
    }
    const double r = cov / std::sqrt(vf * vb);
    return {exact && std::abs(r) < 0.02,
            std::string(exact ? "forward and backward bitwise exact" : "MISMATCH") + ", Pearson r=" + fmt("%+.4f", r)};
}

// 5 ----------------------------------------------------------------------------

Outcome oversmoothing_oracle() {
    Rng rng(505);
    const auto g = graph::add_self_loops(random_graph(20, 5, 0.15, rng));
    const auto pi = diagnostics::stationary_pi(g);
    // Independent pi from the degree vector (self-loops counted).
    std::vector<double> deg(20, 0.0);
    for (const auto& e : g.edges()) deg[e.dst] += 1.0;
    double norm = 0.0;
    for (double d : deg) norm += std::sqrt(d);
    double pi_err = 0.0;
    for (std::size_t i = 0; i < 20; ++i) pi_err = std::max(pi_err, std::abs(pi[i] - std::sqrt(deg[i]) / norm));

    const Tensor x = random_tensor({20, 5}, rng);
    const Tensor s = diagnostics::power_smooth(g, x, 200);
    double col_err = 0.0;
    for (std::size_t c = 0; c < 5; ++c) {
        double l1 = 0.0;
        for (std::size_t i = 0; i < 20; ++i) l1 += std::abs(s.at(i, c));
        for (std::size_t i = 0; i < 20; ++i) col_err = std::max(col_err, std::abs(std::abs(s.at(i, c)) / l1 - pi[i]));
    }
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    std::ostringstream dists;
    for (std::size_t k : {0, 1, 2, 4, 8, 16}) {
        const double d = diagnostics::mean_pairwise_distance(diagnostics::power_smooth(g, x, k));
        monotone = monotone && d <= prev;
        prev = d;
        dists << fmt("%.4f", d) << " ";
    }
    return {pi_err <= 1e-12 && col_err <= 1e-6 && monotone,
            "pi err=" + fmt("%.1e", pi_err) + ", k=200 column err=" + fmt("%.1e", col_err) + ", distances " + dists.str()};
}

// 6 ----------------------------------------------------------------------------

Outcome log_invariant() {
    Rng rng = Rng(6).split("cumulated");
    const std::size_t trials = 1'000'000;
    double sum = 0.0;
    for (std::size_t i = 0; i < trials; ++i) sum += std::log(ssfg::cumulated_factor(16, 4.0, rng));
    const double m = sum / static_cast<double>(trials);
    return {std::abs(m) <= 0.01, "E[ln Lambda] over 1e6 trials at alpha=4, L=16: " + fmt("%+.5f", m)};
}

// 7 ----------------------------------------------------------------------------

Outcome scheduler_termination() {
    // Zero input features with bias and batch-norm off keep every activation
    // and weight gradient at zero, so the validation loss is exactly constant.
    data::SbmSpec s;
    s.num_graphs = 8;
    s.nodes_min = 10;
    s.nodes_max = 12;
    s.labeled_fraction = 0.0;
    s.seed = 7;
    const auto d = data::gen_sbm_node_task(s);
    harness::ExperimentConfig c;
    c.architecture = graphnet::LayerKind::Sage;
    c.layers = 2;
    c.hidden_dim = 8;
    c.bias = false;
    c.batchnorm = false;
    c.max_epochs = 1000;
    c.diag_every = 0;
    c.record_wall_clock = false;
    const auto r = harness::run_seed(c, d, 0);

    // Expected: the first epoch improves on +inf, then the rate halves after
    // every `patience` further epochs; the run ends at the first rate < lr_min.
    std::string violation;
    auto require = [&](bool cond, const std::string& what) {
        if (!cond && violation.empty()) violation = what;
    };
    require(r.stopped_by_lr, "run did not stop on the rate");
    double val0 = 0.0;
    std::size_t halvings_seen = 0;
    double prev_lr = c.lr_init;
    std::size_t last_halving_epoch = 2;
    for (const auto& rec : r.records) {
        if (rec.split != "val") continue;
        const std::string at = " at epoch " + std::to_string(rec.epoch);
        if (rec.epoch == 0) val0 = rec.loss;
        require(rec.loss == val0, "validation loss changed" + at);
        const double expected = rec.epoch <= 1 ? c.lr_init
                                               : c.lr_init / std::pow(2.0, static_cast<double>((rec.epoch - 2) / c.patience));
        require(rec.lr == expected, "lr " + fmt("%.6e", rec.lr) + " != " + fmt("%.6e", expected) + at);
        require(rec.lr >= c.lr_min, "trained below lr_min" + at);
        if (rec.lr != prev_lr) {
            require(rec.epoch - last_halving_epoch == c.patience, "halving spacing" + at);
            last_halving_epoch = rec.epoch;
            ++halvings_seen;
            prev_lr = rec.lr;
        }
    }
    // lr_init / 2^k < 1e-6 first at k = 10; reductions after epochs 11, 21, ..., 101.
    const std::size_t expected_epochs = 1 + 10 * c.patience;
    require(r.epochs_run == expected_epochs, "epoch count");
    require(r.final_lr < c.lr_min && r.final_lr * 2.0 >= c.lr_min, "final lr");
    const bool ok = violation.empty();
    std::ostringstream detail;
    detail << "stopped after epoch " << r.epochs_run << " (expected " << expected_epochs << "), " << halvings_seen + 1
           << " halvings, final lr=" << fmt("%.3e", r.final_lr);
    if (!ok) detail << "; " << violation;
    return {ok, detail.str()};
}

// 8 ----------------------------------------------------------------------------

Outcome end_to_end(std::size_t epochs) {
    data::SbmSpec s;  // desk-scale defaults
    const auto d = data::gen_sbm_node_task(s);
    harness::ExperimentConfig base;
    base.architecture = graphnet::LayerKind::Gat;
    base.layers = 16;
    base.hidden_dim = 16;
    base.heads = 4;
    base.max_epochs = epochs;
    base.diag_every = 0;
    base.seeds = {0, 1, 2, 3};
    base.ssfg.alpha = ssfg::kInfinity;
    auto reg = base;
    reg.ssfg.alpha = 4.0;
    reg.ssfg.mode = ssfg::Mode::Full;
    const auto b = harness::run_experiment(base, d);
    const auto r = harness::run_experiment(reg, d);
    std::size_t wider = 0;
    std::ostringstream detail;
    detail << "acc base=" << fmt("%.4f", b.summary.test.mean) << "+-" << fmt("%.4f", b.summary.test.sd)
           << " ssfg=" << fmt("%.4f", r.summary.test.mean) << "+-" << fmt("%.4f", r.summary.test.sd) << "; distance";
    for (std::size_t i = 0; i < base.seeds.size(); ++i) {
        const double db = b.runs[i].test_last_layer_distance;
        const double dr = r.runs[i].test_last_layer_distance;
        wider += dr > db;
        detail << " s" << base.seeds[i] << ":" << fmt("%.3f", db) << "->" << fmt("%.3f", dr);
    }
    detail << "; " << wider << "/4 seeds wider; " << epochs << " epochs";
    const bool a_ok = r.summary.test.mean >= b.summary.test.mean - 0.005;
    return {a_ok && wider >= 3, detail.str()};
}

// 9 ----------------------------------------------------------------------------

Outcome ablation_mechanics() {
    data::RegressionSpec rs;
    rs.num_graphs = 200;
    rs.noise_sd = 0.02;
    rs.seed = 9;
    const auto d = data::gen_regression_task(rs);
    harness::ExperimentConfig base;
    base.architecture = graphnet::LayerKind::GatedGcn;
    base.layers = 4;
    base.hidden_dim = 16;
    base.max_epochs = 20;
    base.diag_every = 5;
    base.record_wall_clock = false;
    base.ssfg.alpha = ssfg::kInfinity;
    const auto none = harness::run_seed(base, d, 3);

    std::map<std::string, harness::SeedResult> runs;
    for (auto mode : {ssfg::Mode::ForwardOnly, ssfg::Mode::BackwardOnly, ssfg::Mode::Full, ssfg::Mode::Off}) {
        auto c = base;
        c.ssfg.alpha = 4.0;
        c.ssfg.mode = mode;
        runs.emplace(ssfg::to_string(mode), harness::run_seed(c, d, 3));
    }
    auto early_train = [](const harness::SeedResult& r) {
        std::vector<double> xs;
        for (const auto& rec : r.records)
            if (rec.split == "train" && rec.epoch >= 1 && rec.epoch <= 5) xs.push_back(rec.loss);
        return xs;
    };
    bool ok = true;
    std::ostringstream detail;
    for (const auto& [name, r] : runs) {
        const bool finite = std::all_of(r.records.begin(), r.records.end(), [](const auto& rec) { return std::isfinite(rec.loss); });
        ok = ok && finite && (r.epochs_run == base.max_epochs || r.stopped_by_lr);
        detail << name << " test MAE " << fmt("%.4f", r.test_metric) << "; ";
    }
    const std::vector<std::string> active{"forward_only", "backward_only", "full"};
    for (std::size_t i = 0; i < active.size(); ++i) {
        for (std::size_t j = i + 1; j < active.size(); ++j) {
            const bool distinct = early_train(runs.at(active[i])) != early_train(runs.at(active[j]));
            ok = ok && distinct;
            if (!distinct) detail << active[i] << "==" << active[j] << " in epochs 1-5; ";
        }
        ok = ok && early_train(runs.at(active[i])) != early_train(none);
    }
    const bool off_matches = stream_of(runs.at("off")) == stream_of(none);
    ok = ok && off_matches;
    detail << (off_matches ? "off matches no-regularizer run" : "off DIFFERS from no-regularizer run");
    return {ok, detail.str()};
}

// 10 ---------------------------------------------------------------------------

Outcome scale_sweep() {
    data::SbmSpec s;
    s.num_graphs = 40;
    s.seed = 10;
    const auto d = data::gen_sbm_node_task(s);
    harness::ExperimentConfig c;
    c.architecture = graphnet::LayerKind::Gat;
    c.layers = 4;
    c.hidden_dim = 16;
    c.heads = 4;
    c.ssfg.alpha = 4.0;
    c.max_epochs = 5;
    c.diag_every = 0;
    const auto dir = (std::filesystem::temp_directory_path() / "ssfgnet_acceptance_ckpt").string();
    std::filesystem::remove_all(dir);
    c.checkpoint_dir = dir;
    const auto run = harness::run_seed(c, d, 0);
    auto loaded = harness::load_checkpoint(dir + "/seed_0");
    const std::vector<double> scales{0.8, 0.9, 1.0, 1.1, 1.2};
    const auto rows = harness::eval_with_scale(*loaded.model, d, scales, c.batch_size);
    const auto plain = harness::evaluate(*loaded.model, harness::DatasetView(d), d.splits.test, c.batch_size);
    std::filesystem::remove_all(dir);
    bool ok = rows.size() == 5;
    for (std::size_t i = 0; ok && i < 5; ++i) ok = rows[i].scale == scales[i];
    ok = ok && rows[2].loss == plain.loss && rows[2].metric == plain.metric && rows[2].metric == run.test_metric;
    std::ostringstream detail;
    for (const auto& r : rows) detail << r.scale << ":" << fmt("%.4f", r.metric) << " ";
    detail << "(plain " << fmt("%.4f", plain.metric) << ")";
    return {ok, detail.str()};
}

// 11 ---------------------------------------------------------------------------

Outcome dataset_format() {
    bool ok = true;
    std::ostringstream detail;
    const auto dir = std::filesystem::temp_directory_path();
    const auto path = (dir / "ssfgnet_acceptance_data.json").string();
    auto read = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::vector<nlohmann::json> specs{
        {{"kind", "sbm-node"}, {"num_graphs", 30}, {"seed", 1}},
        {{"kind", "sbm-graph"}, {"num_graphs", 30}, {"seed", 2}},
        {{"kind", "regression"}, {"num_graphs", 30}, {"noise_sd", 0.1}, {"seed", 3}},
    };
    std::string sample;
    for (const auto& spec : specs) {
        const auto a = data::serialize(data::generate_from_spec(spec));
        const auto b = data::serialize(data::generate_from_spec(spec));
        data::save_dataset(data::generate_from_spec(spec), path);
        const auto first = read(path);
        data::save_dataset(data::load_dataset(path), path);
        const bool stable = a == b && first == a && read(path) == first;
        ok = ok && stable;
        detail << spec.at("kind").get<std::string>() << (stable ? " stable; " : " UNSTABLE; ");
        sample = a;
    }
    // Truncation at several offsets, and a corrupted byte.
    std::size_t positional = 0, attempts = 0;
    for (double frac : {0.1, 0.5, 0.9, 0.999}) {
        ++attempts;
        try {
            data::parse(std::string_view(sample).substr(0, static_cast<std::size_t>(frac * sample.size())));
        } catch (const ParseError& e) {
            positional += std::string(e.what()).find("at byte") != std::string::npos;
        } catch (...) {
        }
    }
    {
        ++attempts;
        auto bad = sample;
        bad[bad.size() / 3] = '#';
        try {
            data::parse(bad);
        } catch (const ParseError& e) {
            positional += std::string(e.what()).find("at byte") != std::string::npos;
        } catch (...) {
        }
    }
    bool edge_named = false;
    {
        auto j = nlohmann::json::parse(sample);
        j["graphs"][4]["edges"][2] = {0, 1000};
        try {
            data::parse(j.dump());
        } catch (const ValidationError& e) {
            const std::string m = e.what();
            edge_named = m.find("graph 4") != std::string::npos && m.find("edge 2") != std::string::npos;
        } catch (...) {
        }
    }
    ok = ok && positional == attempts && edge_named;
    detail << positional << "/" << attempts << " corrupt inputs rejected with byte position; out-of-range edge "
           << (edge_named ? "names graph and edge" : "NOT named");
    std::filesystem::remove(path);
    return {ok, detail.str()};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::vector<int> only;
    std::size_t e2e_epochs = 15;
    app.add_option("--only", only, "Run only these criteria");
    app.add_option("--e2e-epochs", e2e_epochs, "Epoch cap for the end-to-end comparison");
    CLI11_PARSE(app, argc, argv);

    struct Criterion {
        int id;
        std::string name;
        double time_limit;  // seconds, 0 = none
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "sampler suite", 10.0, sampler_suite},
        {2, "identity degeneracy", 60.0, identity_degeneracy},
        {3, "gradient suite", 60.0, gradient_suite},
        {4, "forward/backward scaling contract", 0.0, algorithm_contract},
        {5, "oversmoothing oracle", 5.0, oversmoothing_oracle},
        {6, "cumulated log invariant", 0.0, log_invariant},
        {7, "scheduler termination", 0.0, scheduler_termination},
        {8, "end-to-end directional", 900.0, [&] { return end_to_end(e2e_epochs); }},
        {9, "ablation mechanics", 0.0, ablation_mechanics},
        {10, "test-scale sweep", 0.0, scale_sweep},
        {11, "dataset determinism and format", 0.0, dataset_format},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = seconds_since(t0);
        if (c.time_limit > 0.0 && secs >= c.time_limit) {
            o.pass = false;
            o.detail += "; over time limit " + fmt("%.0f", c.time_limit) + " s";
        }
        failures += !o.pass;
        std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
