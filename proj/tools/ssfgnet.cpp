#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ssfgnet/canonical_json.hpp"
#include "ssfgnet/data.hpp"
#include "ssfgnet/diagnostics.hpp"
#include "ssfgnet/error.hpp"
#include "ssfgnet/experiment.hpp"

using nlohmann::json;
using namespace ssfgnet;

namespace {

template <typename T>
std::vector<T> parse_list(const std::string& text) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !is.eof()) throw ConfigError("cannot parse list element '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty list '" + text + "'");
    return out;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("'" + path + "': " + e.what());
    }
}

class LineWriter {
public:
    explicit LineWriter(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw Error("cannot write '" + path + "'");
        }
    }
    void operator()(const json& j) {
        std::ostream& os = file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout;
        os << canonical_dump(j) << '\n';
        os.flush();
    }

private:
    std::ofstream file_;
};

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides, const std::string& out_path) {
    json j = read_json(config_path);
    for (const auto& o : overrides) harness::apply_override(j, o);
    const auto cfg = harness::config_from_json(j);
    const auto d = data::load_dataset(cfg.dataset);
    LineWriter write(out_path);
    const auto result = harness::run_experiment(cfg, d, [&](const harness::MetricsRecord& r) { write(harness::to_json(r)); });
    write(harness::to_json(result.summary));
    return 0;
}

int cmd_gen_data(const std::string& spec_path, const std::string& out_path) {
    const auto d = data::generate_from_spec(read_json(spec_path));
    data::save_dataset(d, out_path);
    std::cerr << "wrote " << d.graphs.size() << " graphs to " << out_path << "\n";
    return 0;
}

int cmd_sweep(const std::string& model_dir, const std::string& data_path, const std::string& scales_text) {
    const auto scales = parse_list<double>(scales_text);
    auto ckpt = harness::load_checkpoint(model_dir);
    const auto d = data::load_dataset(data_path);
    const auto rows = harness::eval_with_scale(*ckpt.model, d, scales, ckpt.config.batch_size);
    const auto name = harness::metric_name(graphnet::parse_task(d.task));
    LineWriter write("");
    for (const auto& r : rows) write({{"scale", r.scale}, {"loss", r.loss}, {"metric", r.metric}, {"metric_name", name}});
    return 0;
}

int cmd_diagnose(const std::string& data_path, const std::string& ks_text, std::size_t max_graphs) {
    const auto ks = parse_list<std::size_t>(ks_text);
    const auto d = data::load_dataset(data_path);
    const std::size_t count = max_graphs == 0 ? d.graphs.size() : std::min(max_graphs, d.graphs.size());
    std::vector<graph::Graph> graphs;
    for (std::size_t i = 0; i < count; ++i) graphs.push_back(graph::add_self_loops(d.graphs[i].to_graph()));
    LineWriter write("");
    for (auto k : ks) {
        double dist = 0.0, mad = 0.0, stat = 0.0;
        for (const auto& g : graphs) {
            const auto h = diagnostics::power_smooth(g, g.node_features(), k);
            dist += diagnostics::mean_pairwise_distance(h);
            mad += diagnostics::mad(h, g);
            stat += diagnostics::distance_to_stationary(h, g);
        }
        const double n = graphs.empty() ? 1.0 : static_cast<double>(graphs.size());
        write({{"k", k},
               {"graphs", graphs.size()},
               {"mean_pairwise_distance", dist / n},
               {"mad", mad / n},
               {"distance_to_stationary", stat / n}});
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph networks with stochastic feature and gradient scaling"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    std::vector<std::string> overrides;
    auto* train = app.add_subcommand("train", "Train per a JSON config and emit JSON-lines metrics");
    train->add_option("--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
    train->add_option("--override", overrides, "key=value, dotted keys for nested fields");
    train->add_option("--out", out_path, "Write metrics here instead of stdout");

    std::string spec_path, data_out;
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset from a JSON spec");
    gen->add_option("--spec", spec_path, "Dataset spec")->required()->check(CLI::ExistingFile);
    gen->add_option("--out", data_out, "Output dataset file")->required();

    std::string model_dir, data_path, scales = "0.8,0.9,1.0,1.1,1.2";
    auto* sweep = app.add_subcommand("sweep-test-scale", "Evaluate a checkpoint under constant test-time scales");
    sweep->add_option("--model", model_dir, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
    sweep->add_option("--data", data_path, "Dataset file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--scales", scales, "Comma-separated scales");

    std::string diag_data, ks = "0,1,2,4,8,16";
    std::size_t max_graphs = 0;
    auto* diag = app.add_subcommand("diagnose", "Smoothness metrics of input features under repeated propagation");
    diag->add_option("--data", diag_data, "Dataset file")->required()->check(CLI::ExistingFile);
    diag->add_option("--k", ks, "Comma-separated propagation depths");
    diag->add_option("--graphs", max_graphs, "Use only the first N graphs (0 = all)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) return cmd_train(config_path, overrides, out_path);
        if (*gen) return cmd_gen_data(spec_path, data_out);
        if (*sweep) return cmd_sweep(model_dir, data_path, scales);
        if (*diag) return cmd_diagnose(diag_data, ks, max_graphs);
    } catch (const ssfgnet::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
