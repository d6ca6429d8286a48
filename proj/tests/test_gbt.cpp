#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "msd/gbt/gbt.hpp"
#include "msd/util/rng.hpp"

using msd::gbt::GbtClassifier;
using msd::gbt::GbtConfig;
using msd::gbt::GbtRegressor;

namespace {

struct Dataset2 {
    std::vector<float> x;
    std::vector<std::uint32_t> y;
    int n, d;
};

// y = 1[x0 > 0] with noisy distractor features.
Dataset2 separable(int n, int d, std::uint64_t seed) {
    msd::rng::Xoshiro256ss rng(seed);
    Dataset2 ds;
    ds.n = n;
    ds.d = d;
    ds.x.resize(static_cast<std::size_t>(n) * d);
    ds.y.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int f = 0; f < d; ++f) ds.x[static_cast<std::size_t>(i) * d + f] = static_cast<float>(rng.uniform() * 2 - 1);
        ds.y[static_cast<std::size_t>(i)] = ds.x[static_cast<std::size_t>(i) * d] > 0.0f ? 1 : 0;
    }
    return ds;
}

} // namespace

TEST_CASE("gbt: separable data reaches >=0.99 accuracy with dominant importance") {
    auto ds = separable(500, 6, 31);
    GbtClassifier model;
    model.fit(ds.x, ds.n, ds.d, ds.y);
    int correct = 0;
    for (int i = 0; i < ds.n; ++i)
        if (model.predict(ds.x.data() + static_cast<std::size_t>(i) * ds.d) == ds.y[static_cast<std::size_t>(i)]) ++correct;
    CHECK(static_cast<double>(correct) / ds.n >= 0.99);
    const auto imp = model.importances();
    CHECK(imp[0] >= 0.95);
    double sum = 0.0;
    for (const double v : imp) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("gbt: pure-noise features stay near the majority-class rate") {
    msd::rng::Xoshiro256ss rng(77);
    const int n = 400, d = 5;
    std::vector<float> x(static_cast<std::size_t>(n) * d);
    std::vector<std::uint32_t> y(static_cast<std::size_t>(n));
    for (auto& v : x) v = static_cast<float>(rng.uniform() * 2 - 1);
    int ones = 0;
    for (auto& v : y) {
        v = rng.below(2) ? 1 : 0;
        ones += static_cast<int>(v);
    }
    // Held-out half.
    const int ntr = n / 2;
    std::vector<float> xtr(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(ntr) * d);
    std::vector<std::uint32_t> ytr(y.begin(), y.begin() + ntr);
    GbtClassifier model;
    GbtConfig cfg;
    cfg.rounds = 40;
    model.fit(xtr, ntr, d, ytr, cfg);
    int correct = 0;
    for (int i = ntr; i < n; ++i)
        if (model.predict(x.data() + static_cast<std::size_t>(i) * d) == y[static_cast<std::size_t>(i)]) ++correct;
    const double acc = static_cast<double>(correct) / (n - ntr);
    const double majority = std::max(ones, n - ones) / static_cast<double>(n);
    CHECK(std::abs(acc - majority) < 0.1 + 0.05); // Monte-Carlo slack
}

TEST_CASE("gbt: duplicated feature column leaves predictions unchanged") {
    auto ds = separable(300, 3, 13);
    GbtClassifier base;
    base.fit(ds.x, ds.n, ds.d, ds.y);

    // Duplicate feature 0 as an extra column.
    const int d2 = ds.d + 1;
    std::vector<float> x2(static_cast<std::size_t>(ds.n) * d2);
    for (int i = 0; i < ds.n; ++i) {
        for (int f = 0; f < ds.d; ++f) x2[static_cast<std::size_t>(i) * d2 + f] = ds.x[static_cast<std::size_t>(i) * ds.d + f];
        x2[static_cast<std::size_t>(i) * d2 + ds.d] = ds.x[static_cast<std::size_t>(i) * ds.d];
    }
    GbtClassifier dup;
    dup.fit(x2, ds.n, d2, ds.y);
    for (int i = 0; i < ds.n; ++i) {
        std::vector<float> row(x2.begin() + static_cast<std::ptrdiff_t>(i) * d2,
                               x2.begin() + static_cast<std::ptrdiff_t>(i + 1) * d2);
        CHECK(dup.predict(row.data()) == base.predict(ds.x.data() + static_cast<std::size_t>(i) * ds.d));
    }
    // The earlier copy wins all ties.
    CHECK(dup.importances()[static_cast<std::size_t>(ds.d)] == 0.0);
}

TEST_CASE("gbt: single-class labels are rejected; unfitted access throws") {
    std::vector<float> x{0, 1, 2, 3};
    std::vector<std::uint32_t> y{1, 1, 1, 1};
    GbtClassifier model;
    CHECK_THROWS_AS(model.fit(x, 4, 1, y), msd::NumericError);
    CHECK_THROWS_AS(model.importances(), msd::NumericError);
    CHECK_THROWS_AS(model.predict(x.data()), msd::NumericError);
}

TEST_CASE("gbt: deterministic refit and monotone training loss") {
    auto ds = separable(300, 4, 7);
    // Add label noise so the loss curve is nontrivial.
    msd::rng::Xoshiro256ss rng(8);
    for (auto& v : ds.y)
        if (rng.uniform() < 0.1) v = 1 - v;
    GbtClassifier a, b;
    a.fit(ds.x, ds.n, ds.d, ds.y);
    b.fit(ds.x, ds.n, ds.d, ds.y);
    for (int i = 0; i < ds.n; ++i) {
        const auto pa = a.predict_proba(ds.x.data() + static_cast<std::size_t>(i) * ds.d);
        const auto pb = b.predict_proba(ds.x.data() + static_cast<std::size_t>(i) * ds.d);
        for (std::size_t k = 0; k < pa.size(); ++k) CHECK(pa[k] == pb[k]);
    }
    const auto& curve = a.train_loss_curve();
    REQUIRE(curve.size() >= 2);
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] <= curve[i - 1] + 1e-12);
}

TEST_CASE("gbt: multiclass and importance normalization") {
    msd::rng::Xoshiro256ss rng(55);
    const int n = 600, d = 4;
    std::vector<float> x(static_cast<std::size_t>(n) * d);
    std::vector<std::uint32_t> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int f = 0; f < d; ++f) x[static_cast<std::size_t>(i) * d + f] = static_cast<float>(rng.uniform() * 2 - 1);
        const float v = x[static_cast<std::size_t>(i) * d + 1];
        y[static_cast<std::size_t>(i)] = v < -0.3f ? 0 : (v < 0.4f ? 1 : 2);
    }
    GbtClassifier model;
    model.fit(x, n, d, y);
    int correct = 0;
    for (int i = 0; i < n; ++i)
        if (model.predict(x.data() + static_cast<std::size_t>(i) * d) == y[static_cast<std::size_t>(i)]) ++correct;
    CHECK(static_cast<double>(correct) / n >= 0.98);
    CHECK(model.importances()[1] >= 0.95);
    CHECK(model.n_classes() == 3);
}

TEST_CASE("gbt regressor: fits a step function") {
    msd::rng::Xoshiro256ss rng(21);
    const int n = 400, d = 3;
    std::vector<float> x(static_cast<std::size_t>(n) * d);
    std::vector<float> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int f = 0; f < d; ++f) x[static_cast<std::size_t>(i) * d + f] = static_cast<float>(rng.uniform() * 2 - 1);
        y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i) * d + 2] > 0.0f ? 2.0f : -1.0f;
    }
    GbtRegressor reg;
    reg.fit(x, n, d, y);
    double mse = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e = reg.predict(x.data() + static_cast<std::size_t>(i) * d) - y[static_cast<std::size_t>(i)];
        mse += e * e;
    }
    CHECK(mse / n < 0.05);
    CHECK(reg.importances()[2] >= 0.95);
}
