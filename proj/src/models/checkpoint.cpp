#include "msd/models/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "msd/models/factory.hpp"
#include "msd/util/json_util.hpp"

namespace msd::models {

void save_checkpoint(const TrainableModel& model, const CoderGeometry& geom, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const auto& params = model.params();

    nlohmann::json jp = nlohmann::json::array();
    std::vector<float> blob;
    for (const auto& name : params.names()) {
        const auto& t = params.get(name);
        jp.push_back({{"name", name}, {"shape", t.shape()}, {"offset", blob.size()}});
        blob.insert(blob.end(), t.data(), t.data() + t.numel());
    }

    nlohmann::json j;
    j["format_version"] = 1;
    j["model"] = model.kind();
    j["geometry"] = {{"t", geom.t}, {"step_shape", geom.step_shape}};
    j["config"] = model.config_json();
    j["params"] = jp;
    j["extra"] = model.extra_state();

    std::ofstream out(dir + "/params.bin", std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + dir + "/params.bin");
    out.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size() * sizeof(float)));
    if (!out) throw DataError("write failed for " + dir + "/params.bin");
    util::write_file(dir + "/manifest.json", j.dump(2) + "\n");
}

LoadedCheckpoint load_checkpoint(const std::string& dir) {
    const auto j = util::load_json_file(dir + "/manifest.json");
    if (j.value("format_version", 0) != 1) {
        throw DataError(dir + ": unknown checkpoint format_version");
    }
    LoadedCheckpoint out;
    out.geometry.t = j.at("geometry").at("t").get<int>();
    out.geometry.step_shape = j.at("geometry").at("step_shape").get<std::vector<std::int64_t>>();
    out.model = build_model(j.at("model").get<std::string>(), j.at("config"), out.geometry);
    out.model->init_params(0); // registers parameters; values overwritten below

    std::ifstream in(dir + "/params.bin", std::ios::binary | std::ios::ate);
    if (!in) throw DataError("cannot open " + dir + "/params.bin");
    const auto bytes = static_cast<std::size_t>(in.tellg());
    std::vector<float> blob(bytes / sizeof(float));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw DataError("read failed for " + dir + "/params.bin");

    auto& params = out.model->params();
    for (const auto& jp : j.at("params")) {
        const auto name = jp.at("name").get<std::string>();
        const auto shape = jp.at("shape").get<std::vector<std::int64_t>>();
        const auto offset = jp.at("offset").get<std::size_t>();
        const auto n = static_cast<std::size_t>(core::Tensor::numel_from(shape));
        if (offset + n > blob.size()) throw DataError(dir + ": params.bin truncated");
        if (!params.has(name)) throw DataError(dir + ": unexpected parameter " + name);
        params.set(name, core::Tensor(shape, std::vector<float>(blob.begin() + static_cast<std::ptrdiff_t>(offset),
                                                                blob.begin() + static_cast<std::ptrdiff_t>(offset + n))));
    }
    out.model->load_extra_state(j.at("extra"));
    return out;
}

} // namespace msd::models
