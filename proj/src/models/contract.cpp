#include "msd/models/contract.hpp"

#include <set>

#include "msd/util/rng.hpp"

namespace msd::models {

std::vector<float> Model::latent_vector(const core::Tensor& x) const {
    const core::Tensor z = encode(x);
    const std::int64_t t = z.dim(0), c = z.dim(1);
    if (flatten_latent_vector) {
        return std::vector<float>(z.data(), z.data() + t * c);
    }
    std::vector<float> out(static_cast<std::size_t>(c), 0.0f);
    for (std::int64_t r = 0; r < t; ++r)
        for (std::int64_t j = 0; j < c; ++j) out[static_cast<std::size_t>(j)] += z.data()[r * c + j];
    for (auto& v : out) v /= static_cast<float>(t);
    return out;
}

namespace {

void check_channels(const core::Tensor& z, const std::vector<int>& idx) {
    if (z.ndim() != 2) throw NumericError("swap_channels: latent must be [rows, channels]");
    std::set<int> seen;
    for (const int i : idx) {
        if (i < 0 || i >= z.dim(1)) throw NumericError("swap_channels: channel index out of range");
        if (!seen.insert(i).second) throw NumericError("swap_channels: duplicate channel index");
    }
}

} // namespace

std::pair<core::Tensor, core::Tensor> swap_channels(const core::Tensor& za, const core::Tensor& zb,
                                                    const std::vector<int>& idx) {
    core::ops::check_same_shape(za, zb, "swap_channels");
    check_channels(za, idx);
    std::vector<float> a(za.vec()), b(zb.vec());
    const std::int64_t rows = za.dim(0), c = za.dim(1);
    for (std::int64_t r = 0; r < rows; ++r)
        for (const int j : idx) std::swap(a[static_cast<std::size_t>(r * c + j)], b[static_cast<std::size_t>(r * c + j)]);
    return {core::Tensor(za.shape(), std::move(a)), core::Tensor(zb.shape(), std::move(b))};
}

core::Tensor set_channels(const core::Tensor& z, const std::vector<int>& channels,
                          const core::Tensor& values) {
    check_channels(z, channels);
    const std::int64_t rows = z.dim(0), c = z.dim(1);
    if (values.ndim() != 2 || values.dim(0) != rows ||
        values.dim(1) != static_cast<std::int64_t>(channels.size())) {
        throw NumericError("set_channels: values shape mismatch");
    }
    std::vector<float> out(z.vec());
    for (std::int64_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < channels.size(); ++j) {
            out[static_cast<std::size_t>(r * c + channels[j])] =
                values.data()[r * static_cast<std::int64_t>(channels.size()) + static_cast<std::int64_t>(j)];
        }
    return core::Tensor(z.shape(), std::move(out));
}

core::Tensor get_channels(const core::Tensor& z, const std::vector<int>& channels) {
    check_channels(z, channels);
    const std::int64_t rows = z.dim(0), c = z.dim(1);
    std::vector<float> out(static_cast<std::size_t>(rows) * channels.size());
    for (std::int64_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < channels.size(); ++j) {
            out[static_cast<std::size_t>(r) * channels.size() + j] =
                z.data()[static_cast<std::size_t>(r * c + channels[j])];
        }
    return core::Tensor({rows, static_cast<std::int64_t>(channels.size())}, std::move(out));
}

core::Tensor sample_latent(const Model& model, const std::vector<int>& channels, std::uint64_t seed) {
    if (channels.empty()) throw NumericError("sample_latent: empty channel set");
    const auto& bank = model.latent_bank();
    msd::rng::Xoshiro256ss rng(seed);
    if (model.is_variational()) {
        // One standard-normal draw per channel, constant across time.
        if (bank.empty()) throw NumericError("sample_latent: empty latent bank (needed for T)");
        const std::int64_t t = bank.front().dim(0);
        std::vector<float> vals(channels.size());
        for (auto& v : vals) v = static_cast<float>(rng.normal());
        std::vector<float> out(static_cast<std::size_t>(t) * channels.size());
        for (std::int64_t r = 0; r < t; ++r)
            for (std::size_t j = 0; j < channels.size(); ++j) out[static_cast<std::size_t>(r) * channels.size() + j] = vals[j];
        return core::Tensor({t, static_cast<std::int64_t>(channels.size())}, std::move(out));
    }
    if (bank.empty()) throw NumericError("sample_latent: empty latent bank");
    const auto pick = static_cast<std::size_t>(rng.below(bank.size()));
    return get_channels(bank[pick], channels);
}

} // namespace msd::models
