#include <algorithm>
#include <set>

#include "msd/data/dataset.hpp"
#include "msd/data/factors.hpp"

namespace msd::data {

std::vector<Config> build_state_space(const std::vector<FactorSpec>& factors) {
    if (factors.empty()) throw DataError("build_state_space: empty factor list");
    std::size_t total = 1;
    for (const auto& f : factors) {
        if (f.labels.empty()) throw DataError("build_state_space: factor " + f.name + " has no values");
        total *= f.labels.size();
    }
    std::vector<Config> space;
    space.reserve(total);
    Config cur(factors.size(), 0);
    while (true) {
        space.push_back(cur);
        // Odometer increment, last factor fastest.
        std::size_t pos = factors.size();
        while (pos > 0) {
            --pos;
            if (++cur[pos] < factors[pos].cardinality()) break;
            cur[pos] = 0;
            if (pos == 0) return space;
        }
    }
}

std::size_t state_index(const std::vector<FactorSpec>& factors, const Config& config) {
    if (config.size() != factors.size()) throw DataError("state_index: wrong factor count");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (config[i] >= factors[i].cardinality()) throw DataError("state_index: label out of range");
        idx = idx * factors[i].cardinality() + config[i];
    }
    return idx;
}

nlohmann::json DatasetManifest::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["name"] = name;
    j["n"] = n;
    j["t"] = t;
    j["step_shape"] = step_shape;
    j["dtype"] = dtype;
    j["checksum"] = checksum;
    j["generator"] = generator;
    auto& jf = j["factors"] = nlohmann::json::array();
    for (const auto& f : factors) {
        jf.push_back({{"name", f.name}, {"kind", to_string(f.kind)}, {"labels", f.labels}});
    }
    j["splits"] = {{"train", splits.train}, {"val", splits.val}, {"test", splits.test}};
    return j;
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") || !j.at("format_version").is_number_integer()) {
        throw DataError("manifest: missing format_version");
    }
    if (j.at("format_version").get<int>() != 1) {
        throw DataError("manifest: unknown format_version " + j.at("format_version").dump());
    }
    DatasetManifest m;
    m.name = j.at("name").get<std::string>();
    m.n = j.at("n").get<std::uint32_t>();
    m.t = j.at("t").get<std::uint32_t>();
    m.step_shape = j.at("step_shape").get<std::vector<std::int64_t>>();
    m.dtype = j.at("dtype").get<std::string>();
    if (m.dtype != "f32") throw DataError("manifest: unsupported dtype " + m.dtype);
    m.checksum = j.at("checksum").get<std::string>();
    if (j.contains("generator")) m.generator = j.at("generator");
    for (const auto& jf : j.at("factors")) {
        FactorSpec f;
        f.name = jf.at("name").get<std::string>();
        f.kind = factor_kind_from_string(jf.at("kind").get<std::string>());
        f.labels = jf.at("labels").get<std::vector<std::string>>();
        m.factors.push_back(std::move(f));
    }
    const auto& js = j.at("splits");
    m.splits.train = js.at("train").get<std::vector<std::uint32_t>>();
    m.splits.val = js.at("val").get<std::vector<std::uint32_t>>();
    m.splits.test = js.at("test").get<std::vector<std::uint32_t>>();
    m.validate();
    return m;
}

void DatasetManifest::validate() const {
    if (factors.empty()) throw DataError("manifest: no factors");
    std::set<std::string> names;
    for (const auto& f : factors) {
        if (!names.insert(f.name).second) throw DataError("manifest: duplicate factor name " + f.name);
        if (f.cardinality() < 2) throw DataError("manifest: factor " + f.name + " needs >= 2 values");
    }
    std::set<std::uint32_t> seen;
    for (const auto* split : {&splits.train, &splits.val, &splits.test}) {
        for (const auto idx : *split) {
            if (idx >= n) throw DataError("manifest: split index out of range");
            if (!seen.insert(idx).second) throw DataError("manifest: splits overlap");
        }
    }
}

core::Tensor Dataset::sample(std::uint32_t i) const {
    const std::int64_t per = static_cast<std::int64_t>(manifest.t) * manifest.step_elems();
    std::vector<float> buf(static_cast<std::size_t>(per));
    const float* src = data.data() + static_cast<std::int64_t>(i) * per;
    std::copy(src, src + per, buf.begin());
    std::vector<std::int64_t> shape{static_cast<std::int64_t>(manifest.t)};
    shape.insert(shape.end(), manifest.step_shape.begin(), manifest.step_shape.end());
    return core::Tensor(std::move(shape), std::move(buf));
}

void Dataset::validate() const {
    manifest.validate();
    const std::int64_t expect = static_cast<std::int64_t>(manifest.n) * manifest.t * manifest.step_elems();
    if (data.numel() != expect) throw DataError("dataset: data size does not match manifest");
    if (labels.size() != static_cast<std::size_t>(manifest.n) * manifest.factor_count()) {
        throw DataError("dataset: label table does not match manifest factor count");
    }
    for (std::uint32_t i = 0; i < manifest.n; ++i) {
        for (std::size_t f = 0; f < manifest.factor_count(); ++f) {
            if (label(i, f) >= manifest.factors[f].cardinality()) {
                throw DataError("dataset: label index out of range");
            }
        }
    }
}

} // namespace msd::data
