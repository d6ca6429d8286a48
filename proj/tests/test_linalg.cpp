#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "msd/linalg/eig.hpp"
#include "msd/linalg/koopman.hpp"
#include "msd/linalg/koopman_tape.hpp"
#include "msd/linalg/svd.hpp"
#include "msd/util/rng.hpp"

using namespace msd::linalg;

namespace {

Mat random_mat(int r, int c, msd::rng::Xoshiro256ss& rng, double lo = -1.0, double hi = 1.0) {
    Mat m(r, c);
    for (auto& v : m.a) v = lo + (hi - lo) * rng.uniform();
    return m;
}

double fit_residual(const Mat& a, const Mat& x, const Mat& b) {
    return (matmul(a, x) - b).frob_norm();
}

} // namespace

TEST_CASE("lstsq: identity system returns B") {
    Mat a = Mat::identity(3);
    msd::rng::Xoshiro256ss rng(5);
    Mat b = random_mat(3, 3, rng);
    Mat x = lstsq(a, b);
    CHECK((x - b).frob_norm() < 1e-12);
}

TEST_CASE("lstsq: scalar sequence normal equations") {
    Mat a(2, 1), b(2, 1);
    a.at(0, 0) = 1;
    a.at(1, 0) = 2;
    b.at(0, 0) = 2;
    b.at(1, 0) = 4;
    Mat x = lstsq(a, b);
    CHECK(x.at(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("lstsq: zero A gives the zero (min-norm) solution") {
    Mat a(4, 3);
    msd::rng::Xoshiro256ss rng(6);
    Mat b = random_mat(4, 2, rng);
    Mat x = lstsq(a, b);
    CHECK(x.frob_norm() == 0.0);
}

TEST_CASE("lstsq: wide/rank-deficient min-norm solution matches row-space") {
    // One observed direction only; solution must stay in its span.
    Mat a(1, 3);
    a.at(0, 0) = 1.0;
    a.at(0, 1) = 2.0;
    a.at(0, 2) = 2.0;
    Mat b(1, 1);
    b.at(0, 0) = 9.0;
    Mat x = lstsq(a, b);
    CHECK(fit_residual(a, x, b) < 1e-12);
    // Min-norm solution is a^T * (b / ||a||^2) = [1,2,2]^T.
    CHECK(x.at(0, 0) == doctest::Approx(1.0));
    CHECK(x.at(1, 0) == doctest::Approx(2.0));
    CHECK(x.at(2, 0) == doctest::Approx(2.0));
}

TEST_CASE("svd reconstructs and orthogonality holds") {
    msd::rng::Xoshiro256ss rng(17);
    for (const auto& [r, c] : std::vector<std::pair<int, int>>{{7, 4}, {4, 7}, {5, 5}}) {
        Mat a = random_mat(r, c, rng);
        Svd s = svd(a);
        const int kmin = std::min(r, c);
        Mat rec(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
                double acc = 0.0;
                for (int t = 0; t < kmin; ++t)
                    acc += s.u.at(i, t) * s.sigma[static_cast<std::size_t>(t)] * s.v.at(j, t);
                rec.at(i, j) = acc;
            }
        CHECK((rec - a).frob_norm() < 1e-10 * std::max(1.0, a.frob_norm()));
        for (std::size_t i = 1; i < s.sigma.size(); ++i) CHECK(s.sigma[i - 1] >= s.sigma[i]);
    }
}

TEST_CASE("least-squares optimality against random perturbations") {
    msd::rng::Xoshiro256ss rng(21);
    Mat a = random_mat(12, 4, rng);
    Mat b = random_mat(12, 4, rng);
    Mat x = lstsq(a, b);
    const double base = fit_residual(a, x, b);
    for (int trial = 0; trial < 100; ++trial) {
        Mat e = random_mat(4, 4, rng);
        const double norm = e.frob_norm();
        Mat xp = x;
        for (std::size_t i = 0; i < xp.a.size(); ++i) xp.a[i] += e.a[i] / norm * 1e-3;
        CHECK(fit_residual(a, xp, b) >= base - 1e-12);
    }
}

TEST_CASE("eig: identity matrix") {
    EigResult e = eig(Mat::identity(4));
    for (const auto& lam : e.values) {
        CHECK(lam.real() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(lam.imag() == doctest::Approx(0.0));
    }
    CHECK(matmul(e.v, e.v_inv).frob_norm() == doctest::Approx(2.0).epsilon(1e-9)); // ||I||_F = 2
}

TEST_CASE("eig: planar rotation has eigenvalues +-i") {
    Mat a(2, 2);
    a.at(0, 1) = -1.0;
    a.at(1, 0) = 1.0;
    EigResult e = eig(a);
    CHECK(e.values[0].real() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.values[0].imag() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.values[1].imag() == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("eig: residual and inverse bounds on random matrices") {
    msd::rng::Xoshiro256ss rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(31));
        Mat a = random_mat(n, n, rng);
        EigResult e = eig(a);
        const double anorm = a.frob_norm();
        for (int j = 0; j < n; ++j) {
            double resid = 0.0;
            for (int r = 0; r < n; ++r) {
                cplx acc = -e.values[static_cast<std::size_t>(j)] * e.v.at(r, j);
                for (int c = 0; c < n; ++c) acc += a.at(r, c) * e.v.at(c, j);
                resid += std::norm(acc);
            }
            CHECK(std::sqrt(resid) <= 1e-8 * anorm);
        }
        CMat prod = matmul(e.v, e.v_inv);
        for (int i = 0; i < n; ++i) prod.at(i, i) -= 1.0;
        CHECK(prod.frob_norm() <= 1e-6);
    }
}

TEST_CASE("eig: eigenvalue ordering is by modulus then real part") {
    Mat a(3, 3);
    a.at(0, 0) = 0.5;
    a.at(1, 1) = -2.0;
    a.at(2, 2) = 2.0;
    EigResult e = eig(a);
    CHECK(e.values[0].real() == doctest::Approx(2.0));
    CHECK(e.values[1].real() == doctest::Approx(-2.0));
    CHECK(e.values[2].real() == doctest::Approx(0.5));
}

TEST_CASE("koopman_fit_instance: scalar and constant sequences") {
    Mat z(3, 1);
    z.at(0, 0) = 1;
    z.at(1, 0) = 2;
    z.at(2, 0) = 4;
    Mat k = koopman_fit_instance(z);
    CHECK(k.at(0, 0) == doctest::Approx(2.0).epsilon(1e-12));

    // Constant nonzero sequence: K acts as identity on span(c), residual 0.
    Mat zc(5, 3);
    for (int t = 0; t < 5; ++t) {
        zc.at(t, 0) = 1.0;
        zc.at(t, 1) = -2.0;
        zc.at(t, 2) = 0.5;
    }
    Mat kc = koopman_fit_instance(zc);
    Mat row(1, 3);
    row.at(0, 0) = 1.0;
    row.at(0, 1) = -2.0;
    row.at(0, 2) = 0.5;
    CHECK((matmul(row, kc) - row).frob_norm() < 1e-10);
}

TEST_CASE("koopman_fit_instance: recovers a rotation on the visited subspace") {
    const double th = 0.7;
    Mat rot(2, 2);
    rot.at(0, 0) = std::cos(th);
    rot.at(0, 1) = -std::sin(th);
    rot.at(1, 0) = std::sin(th);
    rot.at(1, 1) = std::cos(th);
    Mat z(5, 2);
    z.at(0, 0) = 1.0;
    z.at(0, 1) = 0.0;
    for (int t = 1; t < 5; ++t)
        for (int c = 0; c < 2; ++c) z.at(t, c) = z.at(t - 1, 0) * rot.at(0, c) + z.at(t - 1, 1) * rot.at(1, c);
    Mat k = koopman_fit_instance(z);
    CHECK((k - rot).frob_norm() < 1e-8);
}

TEST_CASE("koopman_fit_batch: recovers generator and matches instance fit at N=1") {
    msd::rng::Xoshiro256ss rng(77);
    const int kdim = 4, t = 6, n = 8;
    Mat ktrue = random_mat(kdim, kdim, rng, -0.4, 0.4);
    for (int i = 0; i < kdim; ++i) ktrue.at(i, i) += 0.5;
    std::vector<Mat> batch;
    for (int i = 0; i < n; ++i) {
        Mat z(t, kdim);
        for (int c = 0; c < kdim; ++c) z.at(0, c) = rng.uniform() * 2.0 - 1.0;
        for (int step = 1; step < t; ++step)
            for (int c = 0; c < kdim; ++c) {
                double acc = 0.0;
                for (int p = 0; p < kdim; ++p) acc += z.at(step - 1, p) * ktrue.at(p, c);
                z.at(step, c) = acc;
            }
        batch.push_back(std::move(z));
    }
    Mat k = koopman_fit_batch(batch);
    CHECK((k - ktrue).frob_norm() < 1e-6);

    std::vector<Mat> single{batch[0]};
    CHECK((koopman_fit_batch(single) - koopman_fit_instance(batch[0])).frob_norm() == 0.0);
}

TEST_CASE("koopman_fit_batch: constant sequences act as fixed points") {
    std::vector<Mat> batch;
    for (int i = 0; i < 3; ++i) {
        Mat z(4, 2);
        for (int t = 0; t < 4; ++t) {
            z.at(t, 0) = 1.0 + i;
            z.at(t, 1) = -0.5 * i;
        }
        batch.push_back(std::move(z));
    }
    Mat k = koopman_fit_batch(batch);
    for (const auto& z : batch) {
        Mat row(1, 2);
        row.at(0, 0) = z.at(0, 0);
        row.at(0, 1) = z.at(0, 1);
        CHECK((matmul(row, k) - row).frob_norm() < 1e-9);
    }
}

TEST_CASE("classify_modes examples") {
    SpectralConfig cfg;
    cfg.k_dim = 2;
    cfg.static_size = 1;
    auto labels = classify_modes({cplx(1.0), cplx(0.5)}, cfg);
    CHECK(labels[0] == ModeLabel::Static);
    CHECK(labels[1] == ModeLabel::Dynamic);

    SpectralConfig cfg3;
    cfg3.k_dim = 3;
    cfg3.static_size = 2;
    cfg3.static_mode = StaticMode::Ball;
    auto l3 = classify_modes({cplx(0.99), cplx(0.98), cplx(0.3)}, cfg3);
    CHECK(l3[0] == ModeLabel::Static);
    CHECK(l3[1] == ModeLabel::Static);
    CHECK(l3[2] == ModeLabel::Dynamic);

    // A conjugate pair counts once toward static_size and is labeled jointly.
    SpectralConfig cfgp;
    cfgp.k_dim = 3;
    cfgp.static_size = 1;
    auto lp = classify_modes({cplx(0.99, 0.02), cplx(0.99, -0.02), cplx(0.2)}, cfgp);
    CHECK(lp[0] == ModeLabel::Static);
    CHECK(lp[1] == ModeLabel::Static);
    CHECK(lp[2] == ModeLabel::Dynamic);

    CHECK_THROWS_AS(classify_modes({cplx(1.0)}, cfg), msd::ConfigError);
}

TEST_CASE("classify_modes: norm mode uses ||lambda|-1|") {
    SpectralConfig cfg;
    cfg.k_dim = 2;
    cfg.static_size = 1;
    cfg.static_mode = StaticMode::Norm;
    // |-1| = 1 so d=0 under norm mode even though |lambda-1| = 2.
    auto labels = classify_modes({cplx(-1.0), cplx(0.9)}, cfg);
    CHECK(labels[0] == ModeLabel::Static);
    CHECK(labels[1] == ModeLabel::Dynamic);
}

TEST_CASE("spectral_loss hand values") {
    SpectralConfig cfg;
    cfg.k_dim = 2;
    cfg.static_size = 1;
    cfg.dynamic_thresh = 0.25;
    using L = std::vector<ModeLabel>;
    CHECK(spectral_loss({cplx(1.0), cplx(0.5)}, L{ModeLabel::Static, ModeLabel::Dynamic}, cfg) == 0.0);
    CHECK(spectral_loss({cplx(0.9), cplx(0.5)}, L{ModeLabel::Static, ModeLabel::Dynamic}, cfg) ==
          doctest::Approx(0.01).epsilon(1e-12));
    CHECK(spectral_loss({cplx(1.0), cplx(1.0)}, L{ModeLabel::Static, ModeLabel::Dynamic}, cfg) ==
          doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("project_modes: completeness, partition of unity, diagonal example") {
    Mat k(2, 2);
    k.at(0, 0) = 1.0;
    k.at(1, 1) = 0.5;
    SpectralConfig cfg;
    cfg.k_dim = 2;
    cfg.static_size = 1;
    auto d = decompose(k, cfg);

    Mat z(2, 2);
    z.at(0, 0) = 1;
    z.at(0, 1) = 2;
    z.at(1, 0) = 3;
    z.at(1, 1) = 4;

    auto all = project_modes(z, d.eigenvalues, d.v, d.v_inv, {0, 1});
    CHECK((all - z).frob_norm() < 1e-10);

    auto zs = project_modes(z, d.eigenvalues, d.v, d.v_inv, {0});
    CHECK(zs.at(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(zs.at(0, 1) == doctest::Approx(0.0));
    CHECK(zs.at(1, 0) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(zs.at(1, 1) == doctest::Approx(0.0));

    Mat ps = mode_projector(d.eigenvalues, d.v, d.v_inv, {0});
    Mat pd = mode_projector(d.eigenvalues, d.v, d.v_inv, {1});
    CHECK((ps + pd - Mat::identity(2)).frob_norm() < 1e-8);
    CHECK((matmul(ps, ps) - ps).frob_norm() <= 1e-6);
}

TEST_CASE("project_modes rejects subsets that split conjugate pairs") {
    Mat a(2, 2);
    a.at(0, 1) = -0.5;
    a.at(1, 0) = 0.5;
    SpectralConfig cfg;
    cfg.k_dim = 2;
    cfg.static_size = 1;
    EigResult e = eig(a);
    CHECK_THROWS_AS(mode_projector(e.values, e.v, e.v_inv, {0}), msd::NumericError);
    auto closed = close_mode_subset(e.values, {0});
    CHECK(closed.size() == 2);
}

TEST_CASE("projector idempotence and partition on random spectra") {
    msd::rng::Xoshiro256ss rng(1001);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(6));
        Mat a = random_mat(n, n, rng, -0.8, 0.8);
        for (int i = 0; i < n; ++i) a.at(i, i) += 0.3;
        SpectralConfig cfg;
        cfg.k_dim = n;
        cfg.static_size = 1;
        auto d = decompose(a, cfg);
        if (d.ill_conditioned) continue;
        auto s_modes = close_mode_subset(d.eigenvalues, modes_with_label(d.mode_labels, ModeLabel::Static));
        std::vector<int> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        std::vector<int> d_modes;
        for (int i : all)
            if (std::find(s_modes.begin(), s_modes.end(), i) == s_modes.end()) d_modes.push_back(i);
        if (d_modes.empty()) continue;
        Mat ps = mode_projector(d.eigenvalues, d.v, d.v_inv, s_modes);
        Mat pd = mode_projector(d.eigenvalues, d.v, d.v_inv, d_modes);
        CHECK((ps + pd - Mat::identity(n)).frob_norm() < 1e-8);
        CHECK((matmul(ps, ps) - ps).frob_norm() <= 1e-6);
    }
}

TEST_CASE("eigen perturbation gradient matches finite differences") {
    msd::rng::Xoshiro256ss rng(2024);
    const int n = 5;
    // Well-separated spectrum: distinct moduli, one complex pair.
    Mat a(n, n);
    a.at(0, 0) = 1.02;
    a.at(1, 1) = 0.55;
    a.at(1, 2) = -0.31;
    a.at(2, 1) = 0.31;
    a.at(2, 2) = 0.55;
    a.at(3, 3) = 0.82;
    a.at(4, 4) = -0.15;
    // Random similarity to make it dense but keep conditioning mild.
    Mat p = Mat::identity(n);
    for (auto& v : p.a) v += 0.15 * (rng.uniform() - 0.5);
    CMat pc(n, n), ac(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) pc.at(i, j) = p.at(i, j);
    CMat pinv = inverse(pc);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ac.at(i, j) = a.at(i, j);
    CMat m = matmul(matmul(pc, ac), pinv);
    Mat base(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) base.at(i, j) = m.at(i, j).real();

    SpectralConfig cfg;
    cfg.k_dim = n;
    cfg.static_size = 1;
    cfg.dynamic_thresh = 0.55; // radius 0.45 puts several modes past the hinge

    auto loss_of = [&](const Mat& mm) {
        auto vals = eigenvalues(mm);
        auto labels = classify_modes(vals, cfg);
        return spectral_loss(vals, labels, cfg);
    };

    EigResult e = eig(base);
    auto labels = classify_modes(e.values, cfg);
    auto w = spectral_loss_eig_grad(e.values, labels, cfg);
    Mat g = eigen_perturbation_grad(w, e.v, e.v_inv);

    const double h = 1e-6;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Mat mp = base, mm2 = base;
            mp.at(i, j) += h;
            mm2.at(i, j) -= h;
            const double fd = (loss_of(mp) - loss_of(mm2)) / (2.0 * h);
            CHECK(std::abs(fd - g.at(i, j)) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
}

TEST_CASE("koopman tape ops match finite differences in all fit regimes") {
    auto fd_check = [](int n, int t, int k, bool per_instance, bool spectral, double thresh, int seed) {
        msd::rng::Xoshiro256ss rng(static_cast<std::uint64_t>(seed));
        std::vector<double> zv(static_cast<std::size_t>(n) * t * k);
        for (auto& v : zv) v = rng.uniform() * 2.0 - 1.0;
        msd::core::ParamStoreT<double> store;
        store.add("z", msd::core::TensorT<double>({static_cast<std::int64_t>(n) * t, k}, zv));
        SpectralConfig cfg;
        cfg.k_dim = k;
        cfg.static_size = 1;
        cfg.dynamic_thresh = 0.55;
        auto build = [&](msd::core::TapeT<double>& tape, msd::core::ParamStoreT<double>& s) {
            auto z = tape.param(s, "z");
            return spectral ? koopman_spectral_loss(tape, z, n, t, k, cfg, per_instance)
                            : koopman_pred_loss(tape, z, n, t, k, per_instance);
        };
        msd::core::TapeT<double> tape;
        auto ad = tape.backward(build(tape, store), store);
        const auto& g = ad.at("z");
        const auto base = store.get("z");
        const double h = 1e-6;
        for (std::size_t i = 0; i < zv.size(); i += 2) {
            auto plus = base.vec();
            auto minus = base.vec();
            plus[i] += h;
            minus[i] -= h;
            store.set("z", msd::core::TensorT<double>(base.shape(), plus));
            msd::core::TapeT<double> tp;
            const double lp = tp.value(build(tp, store)).item();
            store.set("z", msd::core::TensorT<double>(base.shape(), minus));
            msd::core::TapeT<double> tm;
            const double lm = tm.value(build(tm, store)).item();
            store.set("z", base);
            const double fd = (lp - lm) / (2 * h);
            const double a = g.at(i);
            const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-8});
            CHECK_MESSAGE(rel < thresh, "i=", i, " ad=", a, " fd=", fd);
        }
    };
    fd_check(4, 6, 3, false, false, 2e-5, 444); // pred, batch, overdetermined
    fd_check(3, 5, 6, true, false, 2e-5, 444);  // pred, per-instance, rank-deficient
    fd_check(4, 6, 3, false, true, 5e-5, 555);  // spectral, batch
    fd_check(3, 6, 4, true, true, 5e-5, 555);   // spectral, per-instance, overdetermined
    fd_check(3, 5, 6, true, true, 5e-5, 555);   // spectral, per-instance, rank-deficient
}
