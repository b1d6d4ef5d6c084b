#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ssfgnet/canonical_json.hpp"
#include "ssfgnet/error.hpp"
#include "ssfgnet/experiment.hpp"

namespace ssfgnet::harness {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

namespace {

struct Entry {
    std::string name;
    Tensor* tensor;
};

std::vector<Entry> entries(graphnet::Model& model) {
    std::vector<Entry> out;
    for (auto* p : model.parameters()) out.push_back({p->name, &p->value});
    for (auto& [name, t] : model.buffers()) out.push_back({name, t});
    return out;
}

std::string tensor_file(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "t%04zu.bin", i);
    return buf;
}

std::vector<double> read_values(const std::string& path, std::size_t count) {
    std::ifstream bin(path, std::ios::binary | std::ios::ate);
    if (!bin) throw Error("cannot open '" + path + "'");
    const auto size = static_cast<std::size_t>(bin.tellg());
    if (size != count * sizeof(double)) {
        throw ParseError("checkpoint: '" + path + "' holds " + std::to_string(size) + " bytes, expected " +
                         std::to_string(count * sizeof(double)));
    }
    bin.seekg(0);
    std::vector<double> values(count);
    bin.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(size));
    return values;
}

} // namespace

void save_checkpoint(const std::string& dir, const ExperimentConfig& cfg, std::uint64_t seed, graphnet::Model& model) {
    std::filesystem::create_directories(dir);
    const auto& mc = model.config();
    json tensors = json::array();
    const auto list = entries(model);
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& e = list[i];
        const std::string file = tensor_file(i);
        tensors.push_back({{"name", e.name}, {"shape", e.tensor->shape()}, {"file", file}});
        std::ofstream bin(dir + "/" + file, std::ios::binary);
        const auto data = e.tensor->data();
        bin.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
        if (!bin) throw Error("failed writing '" + dir + "/" + file + "'");
    }
    json manifest{{"format", 1},
                  {"seed", seed},
                  {"config", to_json(cfg)},
                  {"model", {{"task", graphnet::to_string(mc.task)}, {"in_dim", mc.in_dim}, {"outputs", mc.outputs}}},
                  {"tensors", tensors}};
    std::ofstream out(dir + "/manifest.json");
    if (!out) throw Error("cannot write '" + dir + "/manifest.json'");
    out << canonical_dump(manifest) << '\n';
}

LoadedCheckpoint load_checkpoint(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) throw Error("cannot open '" + dir + "/manifest.json'");
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("checkpoint manifest: " + std::string(e.what()));
    }
    LoadedCheckpoint lc;
    try {
        if (manifest.at("format").get<int>() != 1) throw ParseError("checkpoint: unsupported format");
        lc.config = config_from_json(manifest.at("config"));
        lc.seed = manifest.at("seed").get<std::uint64_t>();
        const auto& m = manifest.at("model");
        data::DatasetFile shape_only;
        shape_only.task = m.at("task").get<std::string>();
        shape_only.feature_dim = m.at("in_dim").get<std::size_t>();
        auto mc = model_config_for(lc.config, shape_only);
        mc.outputs = m.at("outputs").get<std::size_t>();
        lc.model = build_model(mc, lc.seed);

        const auto& tensors = manifest.at("tensors");
        auto targets = entries(*lc.model);
        if (tensors.size() != targets.size()) {
            throw ParseError("checkpoint: manifest lists " + std::to_string(tensors.size()) + " tensors, model has " +
                             std::to_string(targets.size()));
        }
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const auto& t = tensors[i];
            const auto name = t.at("name").get<std::string>();
            if (name != targets[i].name) throw ParseError("checkpoint: expected tensor '" + targets[i].name + "', found '" + name + "'");
            const auto shape = t.at("shape").get<Shape>();
            if (shape != targets[i].tensor->shape()) throw ParseError("checkpoint: shape mismatch for '" + name + "'");
            const auto file = t.at("file").get<std::string>();
            if (file.find('/') != std::string::npos) throw ParseError("checkpoint: bad tensor file name '" + file + "'");
            auto values = read_values(dir + "/" + file, shape_numel(shape));
            *targets[i].tensor = Tensor(shape, std::move(values));
        }
    } catch (const json::exception& e) {
        throw ParseError("checkpoint manifest: " + std::string(e.what()));
    }
    return lc;
}

} // namespace ssfgnet::harness
