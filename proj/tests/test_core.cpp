#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "msd/core/adam.hpp"
#include "msd/core/tape.hpp"
#include "msd/core/tensor.hpp"
#include "msd/util/rng.hpp"

using msd::core::AdamT;
using msd::core::GradMapT;
using msd::core::ParamStoreT;
using msd::core::TapeT;
using msd::core::TensorT;

namespace {

// Central finite differences over every entry of every parameter.
template <typename LossFn>
GradMapT<double> fd_gradients(ParamStoreT<double>& store, LossFn loss, double h = 1e-3) {
    GradMapT<double> out;
    for (const auto& name : store.names()) {
        const TensorT<double> base = store.get(name);
        std::vector<double> g(base.vec().size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto plus = base.vec();
            auto minus = base.vec();
            plus[i] += h;
            minus[i] -= h;
            store.set(name, TensorT<double>(base.shape(), plus));
            const double lp = loss(store);
            store.set(name, TensorT<double>(base.shape(), minus));
            const double lm = loss(store);
            g[i] = (lp - lm) / (2.0 * h);
        }
        store.set(name, base);
        out.emplace(name, TensorT<double>(base.shape(), std::move(g)));
    }
    return out;
}

void check_grads_close(const GradMapT<double>& ad, const GradMapT<double>& fd, double rel_tol) {
    for (const auto& [name, g] : ad) {
        const auto& f = fd.at(name);
        REQUIRE(g.same_shape(f));
        for (std::size_t i = 0; i < g.vec().size(); ++i) {
            const double a = g.at(i), b = f.at(i);
            const double rel = std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
            CHECK_MESSAGE(rel <= rel_tol, name, "[", i, "] ad=", a, " fd=", b);
        }
    }
}

} // namespace

TEST_CASE("tensor basics") {
    auto t = msd::core::Tensor({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.numel() == 6);
    CHECK(t.dim(1) == 3);
    CHECK_THROWS(msd::core::Tensor({2, 2}, {1, 2, 3}));
    auto r = t.reshape({3, 2});
    CHECK(r.dim(0) == 3);
    CHECK(r.at(5) == 6);

    auto mm = msd::core::ops::matmul(msd::core::Tensor({2, 2}, {1, 2, 3, 4}),
                                     msd::core::Tensor({2, 1}, {5, 6}));
    CHECK(mm.at(0) == 17);
    CHECK(mm.at(1) == 39);
}

TEST_CASE("gradient of x*x at x=3 is 6") {
    ParamStoreT<float> store;
    store.add("x", msd::core::Tensor::scalar(3.0f));
    TapeT<float> tape;
    auto x = tape.param(store, "x");
    auto y = tape.mul(x, x);
    auto grads = tape.backward(y, store);
    CHECK(grads.at("x").item() == doctest::Approx(6.0f));
}

TEST_CASE("unreached parameter gets a zero gradient") {
    ParamStoreT<float> store;
    store.add("x", msd::core::Tensor::scalar(3.0f));
    store.add("unused", msd::core::Tensor({2}, {1.0f, 2.0f}));
    TapeT<float> tape;
    auto x = tape.param(store, "x");
    auto y = tape.square(x);
    auto grads = tape.backward(y, store);
    CHECK(grads.at("unused").at(0) == 0.0f);
    CHECK(grads.at("unused").at(1) == 0.0f);
    CHECK(grads.at("x").item() == doctest::Approx(6.0f));
}

TEST_CASE("backward rejects non-scalar loss") {
    ParamStoreT<float> store;
    store.add("x", msd::core::Tensor({2}, {1.0f, 2.0f}));
    TapeT<float> tape;
    auto x = tape.param(store, "x");
    auto y = tape.scale(x, 2.0f);
    CHECK_THROWS_AS(tape.backward(y, store), msd::NumericError);
}

TEST_CASE("two-layer perceptron gradients match finite differences") {
    msd::rng::Xoshiro256ss rng(1234);
    const int in = 5, hid = 7, out = 3, batch = 4;
    ParamStoreT<double> store;
    auto randt = [&](std::vector<std::int64_t> shape) {
        std::vector<double> v(static_cast<std::size_t>(msd::core::TensorT<double>::numel_from(shape)));
        for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
        return TensorT<double>(shape, std::move(v));
    };
    store.add("w1", randt({in, hid}));
    store.add("b1", randt({hid}));
    store.add("w2", randt({hid, out}));
    store.add("b2", randt({out}));
    const auto xin = randt({batch, in});
    const auto target = randt({batch, out});

    auto build = [&](TapeT<double>& tape, ParamStoreT<double>& s) {
        auto x = tape.input(xin);
        auto h = tape.tanh_op(tape.add_rowvec(tape.matmul(x, tape.param(s, "w1")), tape.param(s, "b1")));
        auto y = tape.add_rowvec(tape.matmul(h, tape.param(s, "w2")), tape.param(s, "b2"));
        return tape.mse(y, tape.input(target));
    };

    TapeT<double> tape;
    auto loss = build(tape, store);
    auto ad = tape.backward(loss, store);
    auto fd = fd_gradients(store, [&](ParamStoreT<double>& s) {
        TapeT<double> t2;
        return t2.value(build(t2, s)).item();
    });
    int coords = 0;
    for (const auto& [k, v] : ad) coords += static_cast<int>(v.numel());
    CHECK(coords >= 32);
    check_grads_close(ad, fd, 1e-4);
}

TEST_CASE("op coverage gradcheck: relu/exp/abs/slice/sub") {
    msd::rng::Xoshiro256ss rng(99);
    ParamStoreT<double> store;
    std::vector<double> v(12);
    for (auto& x : v) x = rng.uniform() * 2.0 - 1.0 + 0.103; // keep away from relu/abs kinks
    store.add("w", TensorT<double>({3, 4}, v));
    auto build = [&](TapeT<double>& tape, ParamStoreT<double>& s) {
        auto w = tape.param(s, "w");
        auto a = tape.relu(w);
        auto b = tape.exp_op(tape.scale(w, 0.3));
        auto c = tape.abs_op(tape.sub(a, b));
        auto d = tape.slice_cols(c, 1, 3);
        return tape.mean(tape.square(d));
    };
    TapeT<double> tape;
    auto ad = tape.backward(build(tape, store), store);
    auto fd = fd_gradients(store, [&](ParamStoreT<double>& s) {
        TapeT<double> t2;
        return t2.value(build(t2, s)).item();
    }, 1e-4);
    check_grads_close(ad, fd, 2e-4);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    ParamStoreT<float> store;
    store.add("p", msd::core::Tensor({3}, {1.0f, -2.0f, 0.5f}));
    AdamT<float> adam({0.1f, 0.9f, 0.999f, 1e-8f});
    GradMapT<float> grads;
    grads.emplace("p", msd::core::Tensor::zeros({3}));
    adam.step(store, grads);
    CHECK(store.get("p").at(0) == 1.0f);
    CHECK(store.get("p").at(1) == -2.0f);
    CHECK(store.get("p").at(2) == 0.5f);
    CHECK(adam.step_count() == 1);
}

TEST_CASE("adam: first-step update matches the bias-corrected rule") {
    ParamStoreT<float> store;
    store.add("p", msd::core::Tensor::scalar(3.0f));
    AdamT<float> adam({0.1f, 0.9f, 0.999f, 1e-8f});
    GradMapT<float> grads;
    grads.emplace("p", msd::core::Tensor::scalar(1.0f));
    adam.step(store, grads);
    const double update = static_cast<double>(store.get("p").item()) - 3.0;
    CHECK(std::abs(update - (-0.0999999)) < 1e-6);
}

TEST_CASE("adam: identical gradients and state give identical updates") {
    ParamStoreT<float> store;
    store.add("a", msd::core::Tensor::scalar(1.5f));
    store.add("b", msd::core::Tensor::scalar(1.5f));
    AdamT<float> adam({0.01f, 0.9f, 0.999f, 1e-8f});
    for (int i = 0; i < 5; ++i) {
        GradMapT<float> grads;
        grads.emplace("a", msd::core::Tensor::scalar(0.3f));
        grads.emplace("b", msd::core::Tensor::scalar(0.3f));
        adam.step(store, grads);
    }
    CHECK(store.get("a").item() == store.get("b").item());
}

TEST_CASE("adam rejects shape mismatch") {
    ParamStoreT<float> store;
    store.add("p", msd::core::Tensor({2}, {1.0f, 2.0f}));
    AdamT<float> adam;
    GradMapT<float> grads;
    grads.emplace("p", msd::core::Tensor({3}, {1.0f, 2.0f, 3.0f}));
    CHECK_THROWS_AS(adam.step(store, grads), msd::NumericError);
}

TEST_CASE("prng contract: frozen reference values") {
    msd::rng::SplitMix64 sm(0);
    CHECK(sm.next() == 0xe220a8397b1dcdafULL);
    CHECK(sm.next() == 0x6e789e6aa1b965f4ULL);
    CHECK(sm.next() == 0x06c45d188009454fULL);

    msd::rng::Xoshiro256ss xo(42);
    CHECK(xo.next() == 0x15780b2e0c2ec716ULL);
    CHECK(xo.next() == 0x6104d9866d113a7eULL);
    CHECK(xo.next() == 0xae17533239e499a1ULL);
    CHECK(xo.next() == 0xecb8ad4703b360a1ULL);

    msd::rng::Xoshiro256ss xo2(42);
    CHECK(xo2.uniform() == doctest::Approx(0.08386297105988216).epsilon(1e-15));
    CHECK(xo2.uniform() == doctest::Approx(0.3789802506626686).epsilon(1e-15));

    CHECK(msd::rng::fnv1a64("gen") == 0xd4e26d18faaa8af5ULL);
    CHECK(msd::rng::derive_seed(7, "gen") == 0x03c02485f8eec54aULL);
}

TEST_CASE("prng determinism and normal moments") {
    msd::rng::Xoshiro256ss a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    msd::rng::Xoshiro256ss c(123);
    double mean = 0.0, var = 0.0;
    const int n = 20000;
    std::vector<double> draws(n);
    for (auto& d : draws) d = c.normal();
    for (double d : draws) mean += d;
    mean /= n;
    for (double d : draws) var += (d - mean) * (d - mean);
    var /= n;
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(var - 1.0) < 0.05);
}
