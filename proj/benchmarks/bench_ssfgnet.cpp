#include <benchmark/benchmark.h>

#include "ssfgnet/autodiff.hpp"
#include "ssfgnet/data.hpp"
#include "ssfgnet/diagnostics.hpp"
#include "ssfgnet/experiment.hpp"
#include "ssfgnet/ssfg.hpp"

namespace {

using namespace ssfgnet;

Tensor filled(Shape shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = 2.0 * rng.uniform() - 1.0;
    return t;
}

void BM_SampleLambda(benchmark::State& state) {
    const double alpha = static_cast<double>(state.range(0));
    Rng rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(ssfg::sample_lambda(alpha, 1024, rng));
    state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_SampleLambda)->Arg(1)->Arg(4)->Arg(100);

void BM_MatmulForwardBackward(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(2);
    ad::Parameter a("a", filled({n, 16}, rng));
    ad::Parameter b("b", filled({16, 16}, rng));
    for (auto _ : state) {
        ad::Tape t;
        t.backward(ad::sum(ad::matmul(t.param(a), t.param(b))));
    }
}
BENCHMARK(BM_MatmulForwardBackward)->Arg(64)->Arg(1024);

void BM_SsfgApplyTrain(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    ad::Parameter x("x", filled({n, 16}, rng));
    ssfg::SiteStreams site(Rng(4).split("f"), Rng(4).split("b"));
    const ssfg::SsfgConfig cfg{4.0, ssfg::Mode::Full};
    for (auto _ : state) {
        ad::Tape t;
        t.backward(ad::sum(ssfg::ssfg_apply(t.param(x), cfg, ad::Phase::Train, site)));
    }
}
BENCHMARK(BM_SsfgApplyTrain)->Arg(64)->Arg(1024);

void BM_PowerSmooth(benchmark::State& state) {
    data::SbmSpec s;
    s.num_graphs = 1;
    const auto d = data::gen_sbm_node_task(s);
    const auto g = graph::add_self_loops(d.graphs[0].to_graph());
    Rng rng(5);
    const auto x = filled({g.num_nodes(), 16}, rng);
    const auto k = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(diagnostics::power_smooth(g, x, k));
}
BENCHMARK(BM_PowerSmooth)->Arg(1)->Arg(16);

void BM_TrainEpoch(benchmark::State& state) {
    const auto arch = static_cast<graphnet::LayerKind>(state.range(0));
    data::SbmSpec s;
    s.num_graphs = 16;
    const auto d = data::gen_sbm_node_task(s);
    harness::ExperimentConfig c;
    c.architecture = arch;
    c.layers = 4;
    c.hidden_dim = 16;
    c.heads = arch == graphnet::LayerKind::Gat ? 4 : 1;
    c.max_epochs = 1;
    c.diag_every = 0;
    c.ssfg.alpha = 4.0;
    for (auto _ : state) benchmark::DoNotOptimize(harness::run_seed(c, d, 0));
    state.SetLabel(graphnet::to_string(arch));
}
BENCHMARK(BM_TrainEpoch)
    ->Arg(static_cast<int>(graphnet::LayerKind::Sage))
    ->Arg(static_cast<int>(graphnet::LayerKind::Gat))
    ->Arg(static_cast<int>(graphnet::LayerKind::GatedGcn))
    ->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
