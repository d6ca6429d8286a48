#include "msd/models/factory.hpp"

#include <set>

#include "msd/models/koopman_models.hpp"

namespace msd::models {

namespace {

struct Field {
    const char* name;
    enum Kind { Int, Float, IntList, Str } kind;
    nlohmann::json def;
};

const std::map<std::string, std::vector<Field>>& schemas() {
    static const std::map<std::string, std::vector<Field>> s = {
        {"ae",
         {{"latent_dim", Field::Int, 12}, {"hidden_dims", Field::IntList, {64}}}},
        {"vae",
         {{"latent_dim", Field::Int, 12}, {"hidden_dims", Field::IntList, {64}}}},
        {"beta_vae",
         {{"latent_dim", Field::Int, 12}, {"hidden_dims", Field::IntList, {64}}, {"beta", Field::Float, 4.0}}},
        {"sparse_ae",
         {{"latent_dim", Field::Int, 24},
          {"hidden_dims", Field::IntList, {64}},
          {"sparsity_weight", Field::Float, 0.1}}},
        {"skd",
         {{"k_dim", Field::Int, 12},
          {"hidden_dim", Field::Int, 64},
          {"static_size", Field::Int, 6},
          {"static_mode", Field::Str, "ball"},
          {"dynamic_thresh", Field::Float, 0.25},
          {"w_rec", Field::Float, 10.0},
          {"w_pred", Field::Float, 1.0},
          {"w_eigs", Field::Float, 0.5}}},
        {"ssm_skd",
         {{"k_dim", Field::Int, 12},
          {"hidden_dim", Field::Int, 64},
          {"static_mode", Field::Str, "ball"},
          {"dynamic_thresh", Field::Float, 0.25},
          {"w_rec", Field::Float, 10.0},
          {"w_pred", Field::Float, 1.0},
          {"w_eigs", Field::Float, 0.5}}},
    };
    return s;
}

void check_type(const std::string& model, const Field& f, const nlohmann::json& v) {
    const std::string where = model + "." + f.name;
    switch (f.kind) {
        case Field::Int:
            if (!v.is_number_integer()) throw ConfigError(where + ": expected integer, got " + v.dump());
            break;
        case Field::Float:
            if (!v.is_number()) throw ConfigError(where + ": expected number, got " + v.dump());
            break;
        case Field::IntList:
            if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected non-empty integer list");
            for (const auto& e : v)
                if (!e.is_number_integer() || e.get<int>() < 1) throw ConfigError(where + ": bad layer size " + e.dump());
            break;
        case Field::Str:
            if (!v.is_string()) throw ConfigError(where + ": expected string, got " + v.dump());
            break;
    }
}

void check_ranges(const std::string& kind, const nlohmann::json& p) {
    auto positive_int = [&](const char* key, int lo = 1) {
        if (p.contains(key) && p.at(key).get<int>() < lo) {
            throw ConfigError(kind + "." + key + ": must be >= " + std::to_string(lo));
        }
    };
    auto nonneg = [&](const char* key) {
        if (p.contains(key) && p.at(key).get<double>() < 0.0) {
            throw ConfigError(kind + "." + key + ": must be >= 0");
        }
    };
    positive_int("latent_dim");
    positive_int("k_dim", 2);
    positive_int("hidden_dim");
    nonneg("beta");
    nonneg("sparsity_weight");
    nonneg("w_rec");
    nonneg("w_pred");
    nonneg("w_eigs");
    if (p.contains("dynamic_thresh")) {
        const double v = p.at("dynamic_thresh").get<double>();
        if (!(v > 0.0 && v < 1.0)) {
            throw ConfigError(kind + ".dynamic_thresh: must lie in (0,1), got " + std::to_string(v));
        }
    }
    if (p.contains("static_mode")) {
        const auto v = p.at("static_mode").get<std::string>();
        if (v != "ball" && v != "norm") throw ConfigError(kind + ".static_mode: must be \"ball\" or \"norm\"");
    }
    if (p.contains("static_size") && p.contains("k_dim")) {
        const int ss = p.at("static_size").get<int>();
        const int k = p.at("k_dim").get<int>();
        if (ss < 1 || ss >= k) throw ConfigError(kind + ".static_size: need 1 <= static_size < k_dim");
    }
}

} // namespace

bool is_known_model(const std::string& kind) { return schemas().count(kind) != 0; }

nlohmann::json normalize_model_params(const std::string& kind, const nlohmann::json& params) {
    const auto it = schemas().find(kind);
    if (it == schemas().end()) throw ConfigError("unknown model kind: " + kind);
    if (!params.is_null() && !params.is_object()) throw ConfigError("model_params must be an object");
    std::set<std::string> known;
    for (const auto& f : it->second) known.insert(f.name);
    nlohmann::json out = nlohmann::json::object();
    if (!params.is_null()) {
        for (const auto& [key, value] : params.items()) {
            if (!known.count(key)) throw ConfigError(kind + ": unknown hyperparameter \"" + key + "\"");
            out[key] = value;
        }
    }
    for (const auto& f : it->second) {
        if (!out.contains(f.name)) out[f.name] = f.def;
        check_type(kind, f, out.at(f.name));
    }
    check_ranges(kind, out);
    return out;
}

std::unique_ptr<TrainableModel> build_model(const std::string& kind, const nlohmann::json& params,
                                            const CoderGeometry& geom) {
    const nlohmann::json p = normalize_model_params(kind, params);
    if (kind == "ae") {
        return std::make_unique<SeqAe>(geom, p.at("latent_dim").get<int>(),
                                       p.at("hidden_dims").get<std::vector<int>>(), 0.0f, "ae");
    }
    if (kind == "sparse_ae") {
        return std::make_unique<SeqAe>(geom, p.at("latent_dim").get<int>(),
                                       p.at("hidden_dims").get<std::vector<int>>(),
                                       p.at("sparsity_weight").get<float>(), "sparse_ae");
    }
    if (kind == "vae") {
        return std::make_unique<SeqVae>(geom, p.at("latent_dim").get<int>(),
                                        p.at("hidden_dims").get<std::vector<int>>(), 1.0f, "vae");
    }
    if (kind == "beta_vae") {
        return std::make_unique<SeqVae>(geom, p.at("latent_dim").get<int>(),
                                        p.at("hidden_dims").get<std::vector<int>>(),
                                        p.at("beta").get<float>(), "beta_vae");
    }
    linalg::SpectralConfig cfg;
    cfg.k_dim = p.at("k_dim").get<int>();
    cfg.static_mode = p.at("static_mode").get<std::string>() == "ball" ? linalg::StaticMode::Ball
                                                                       : linalg::StaticMode::Norm;
    cfg.dynamic_thresh = p.at("dynamic_thresh").get<double>();
    cfg.w_rec = p.at("w_rec").get<double>();
    cfg.w_pred = p.at("w_pred").get<double>();
    cfg.w_eigs = p.at("w_eigs").get<double>();
    const std::vector<int> hidden{p.at("hidden_dim").get<int>()};
    if (kind == "skd") {
        cfg.static_size = p.at("static_size").get<int>();
        return std::make_unique<Skd>(geom, cfg, hidden);
    }
    if (kind == "ssm_skd") {
        cfg.static_size = 1;
        return std::make_unique<SsmSkd>(geom, cfg, hidden);
    }
    throw ConfigError("unknown model kind: " + kind);
}

} // namespace msd::models
