#include "msd/data/container.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "msd/util/json_util.hpp"
#include "msd/util/rng.hpp"

static_assert(std::endian::native == std::endian::little, "container layout assumes little-endian");

namespace msd::data {

namespace {

std::uint64_t fnv1a64_bytes(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return s;
}

void write_blob(const std::string& path, const void* data, std::size_t len) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!out) throw DataError("write failed for " + path);
}

std::vector<char> read_blob(const std::string& path, std::size_t expect) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw DataError("cannot open " + path);
    const auto size = static_cast<std::size_t>(in.tellg());
    if (size != expect) {
        throw DataError(path + ": size " + std::to_string(size) + " does not match manifest (" +
                        std::to_string(expect) + "); truncated or foreign file");
    }
    in.seekg(0);
    std::vector<char> buf(size);
    in.read(buf.data(), static_cast<std::streamsize>(size));
    if (!in) throw DataError("read failed for " + path);
    return buf;
}

std::string checksum_of(const void* data, std::size_t data_len, const void* labels, std::size_t labels_len) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    h = fnv1a64_bytes(h, data, data_len);
    h = fnv1a64_bytes(h, labels, labels_len);
    return "fnv1a64:" + hex64(h);
}

} // namespace

void write_container(const Dataset& dataset, const std::string& dir) {
    dataset.validate();
    std::filesystem::create_directories(dir);
    const std::size_t data_bytes = static_cast<std::size_t>(dataset.data.numel()) * sizeof(float);
    const std::size_t label_bytes = dataset.labels.size() * sizeof(std::uint32_t);

    DatasetManifest manifest = dataset.manifest;
    manifest.checksum = checksum_of(dataset.data.data(), data_bytes, dataset.labels.data(), label_bytes);

    write_blob(dir + "/data.bin", dataset.data.data(), data_bytes);
    write_blob(dir + "/labels.bin", dataset.labels.data(), label_bytes);
    util::write_file(dir + "/manifest.json", manifest.to_json().dump(2) + "\n");
}

Dataset read_container(const std::string& dir) {
    Dataset ds;
    ds.manifest = DatasetManifest::from_json(util::load_json_file(dir + "/manifest.json"));
    const std::int64_t elems =
        static_cast<std::int64_t>(ds.manifest.n) * ds.manifest.t * ds.manifest.step_elems();
    const std::size_t label_count = static_cast<std::size_t>(ds.manifest.n) * ds.manifest.factor_count();

    const auto data_raw = read_blob(dir + "/data.bin", static_cast<std::size_t>(elems) * sizeof(float));
    const auto label_raw = read_blob(dir + "/labels.bin", label_count * sizeof(std::uint32_t));

    const std::string sum = checksum_of(data_raw.data(), data_raw.size(), label_raw.data(), label_raw.size());
    if (sum != ds.manifest.checksum) {
        throw DataError(dir + ": checksum mismatch (" + sum + " != " + ds.manifest.checksum + ")");
    }

    std::vector<float> data(static_cast<std::size_t>(elems));
    std::memcpy(data.data(), data_raw.data(), data_raw.size());
    std::vector<std::int64_t> shape{static_cast<std::int64_t>(ds.manifest.n),
                                    static_cast<std::int64_t>(ds.manifest.t)};
    shape.insert(shape.end(), ds.manifest.step_shape.begin(), ds.manifest.step_shape.end());
    ds.data = core::Tensor(std::move(shape), std::move(data));

    ds.labels.resize(label_count);
    std::memcpy(ds.labels.data(), label_raw.data(), label_raw.size());
    ds.validate();
    return ds;
}

} // namespace msd::data
