#include "msd/gbt/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace msd::gbt {

namespace {

// Quantile thresholds per feature; bin(x) = index of first threshold >= x.
struct Binner {
    std::vector<std::vector<double>> thresholds; // per feature, sorted
    std::vector<std::uint8_t> bins;              // n x d
    int n = 0, d = 0;

    void build(const std::vector<float>& x, int n_in, int d_in, int n_bins) {
        n = n_in;
        d = d_in;
        thresholds.assign(static_cast<std::size_t>(d), {});
        bins.assign(static_cast<std::size_t>(n) * d, 0);
        std::vector<double> col(static_cast<std::size_t>(n));
        for (int f = 0; f < d; ++f) {
            for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i) * d + f];
            std::sort(col.begin(), col.end());
            auto& thr = thresholds[static_cast<std::size_t>(f)];
            for (int b = 1; b < n_bins; ++b) {
                const auto pos = static_cast<std::size_t>(static_cast<std::int64_t>(n) * b / n_bins);
                if (pos >= static_cast<std::size_t>(n)) break;
                const double v = col[pos];
                if (thr.empty() || v > thr.back()) thr.push_back(v);
            }
            // Drop a trailing threshold equal to the max: splitting there
            // sends everything left.
            while (!thr.empty() && thr.back() >= col.back()) thr.pop_back();
            for (int i = 0; i < n; ++i) {
                const double v = x[static_cast<std::size_t>(i) * d + f];
                const auto it = std::lower_bound(thr.begin(), thr.end(), v);
                bins[static_cast<std::size_t>(i) * d + f] = static_cast<std::uint8_t>(it - thr.begin());
            }
        }
    }
};

struct SplitResult {
    double gain = 0.0;
    int feature = -1;
    int bin = -1;
    double threshold = 0.0;
};

struct TreeBuilder {
    const Binner& binner;
    const std::vector<double>& grad;
    const std::vector<double>& hess;
    const GbtConfig& cfg;
    std::vector<double>* gain_accum;
    Tree tree;

    TreeBuilder(const Binner& b, const std::vector<double>& g, const std::vector<double>& h,
                const GbtConfig& c, std::vector<double>* ga)
        : binner(b), grad(g), hess(h), cfg(c), gain_accum(ga) {}

    static double leaf_objective(double g, double h, double l2) { return g * g / (h + l2); }

    SplitResult best_split(const std::vector<int>& idx) const {
        SplitResult best;
        double gsum = 0.0, hsum = 0.0;
        for (const int i : idx) {
            gsum += grad[static_cast<std::size_t>(i)];
            hsum += hess[static_cast<std::size_t>(i)];
        }
        const double parent = leaf_objective(gsum, hsum, cfg.l2);
        std::vector<double> hist_g, hist_h;
        std::vector<int> hist_c;
        for (int f = 0; f < binner.d; ++f) {
            const auto& thr = binner.thresholds[static_cast<std::size_t>(f)];
            if (thr.empty()) continue;
            const int nb = static_cast<int>(thr.size()) + 1;
            hist_g.assign(static_cast<std::size_t>(nb), 0.0);
            hist_h.assign(static_cast<std::size_t>(nb), 0.0);
            hist_c.assign(static_cast<std::size_t>(nb), 0);
            for (const int i : idx) {
                const int b = binner.bins[static_cast<std::size_t>(i) * binner.d + f];
                hist_g[static_cast<std::size_t>(b)] += grad[static_cast<std::size_t>(i)];
                hist_h[static_cast<std::size_t>(b)] += hess[static_cast<std::size_t>(i)];
                ++hist_c[static_cast<std::size_t>(b)];
            }
            double gl = 0.0, hl = 0.0;
            int cl = 0;
            for (int b = 0; b + 1 < nb; ++b) { // split at threshold b: left = bins <= b
                gl += hist_g[static_cast<std::size_t>(b)];
                hl += hist_h[static_cast<std::size_t>(b)];
                cl += hist_c[static_cast<std::size_t>(b)];
                const int cr = static_cast<int>(idx.size()) - cl;
                if (cl < cfg.min_samples_leaf || cr < cfg.min_samples_leaf) continue;
                const double gain = 0.5 * (leaf_objective(gl, hl, cfg.l2) +
                                           leaf_objective(gsum - gl, hsum - hl, cfg.l2) - parent);
                if (gain > best.gain) { // strict: ties keep lowest feature/threshold
                    best.gain = gain;
                    best.feature = f;
                    best.bin = b;
                    best.threshold = thr[static_cast<std::size_t>(b)];
                }
            }
        }
        return best;
    }

    int build(std::vector<int> idx, int depth) {
        double gsum = 0.0, hsum = 0.0;
        for (const int i : idx) {
            gsum += grad[static_cast<std::size_t>(i)];
            hsum += hess[static_cast<std::size_t>(i)];
        }
        const int self = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (depth < cfg.max_depth && static_cast<int>(idx.size()) >= 2 * cfg.min_samples_leaf) {
            const SplitResult split = best_split(idx);
            if (split.feature >= 0 && split.gain > cfg.min_gain) {
                std::vector<int> left, right;
                for (const int i : idx) {
                    const int b = binner.bins[static_cast<std::size_t>(i) * binner.d + split.feature];
                    (b <= split.bin ? left : right).push_back(i);
                }
                if (gain_accum) (*gain_accum)[static_cast<std::size_t>(split.feature)] += split.gain;
                idx.clear();
                idx.shrink_to_fit();
                const int l = build(std::move(left), depth + 1);
                const int r = build(std::move(right), depth + 1);
                tree.nodes[static_cast<std::size_t>(self)].feature = split.feature;
                tree.nodes[static_cast<std::size_t>(self)].threshold = split.threshold;
                tree.nodes[static_cast<std::size_t>(self)].left = l;
                tree.nodes[static_cast<std::size_t>(self)].right = r;
                return self;
            }
        }
        tree.nodes[static_cast<std::size_t>(self)].value = -gsum / (hsum + cfg.l2);
        return self;
    }
};

} // namespace

void GbtClassifier::fit(const std::vector<float>& x, int n, int d, const std::vector<std::uint32_t>& y,
                        const GbtConfig& cfg) {
    if (n < 2) throw NumericError("gbt: need at least 2 samples");
    if (static_cast<std::size_t>(n) * d != x.size() || y.size() != static_cast<std::size_t>(n)) {
        throw NumericError("gbt: X/y shape mismatch");
    }
    std::set<std::uint32_t> classes(y.begin(), y.end());
    const std::uint32_t cmax = *classes.rbegin();
    if (classes.size() < 2) throw NumericError("gbt: y has a single class");
    n_classes_ = static_cast<int>(cmax) + 1;
    n_features_ = d;
    learning_rate_ = cfg.learning_rate;
    rounds_.clear();
    loss_curve_.clear();
    gain_per_feature_.assign(static_cast<std::size_t>(d), 0.0);

    Binner binner;
    binner.build(x, n, d, cfg.n_bins);

    const int c = n_classes_;
    std::vector<double> scores(static_cast<std::size_t>(n) * c, 0.0);
    std::vector<double> prob(static_cast<std::size_t>(n) * c, 0.0);
    std::vector<double> grad(static_cast<std::size_t>(n)), hess(static_cast<std::size_t>(n));
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);

    for (int round = 0; round < cfg.rounds; ++round) {
        // Softmax probabilities from current scores.
        double loss = 0.0;
        for (int i = 0; i < n; ++i) {
            const double* s = scores.data() + static_cast<std::size_t>(i) * c;
            double mx = s[0];
            for (int k = 1; k < c; ++k) mx = std::max(mx, s[k]);
            double z = 0.0;
            for (int k = 0; k < c; ++k) z += std::exp(s[k] - mx);
            for (int k = 0; k < c; ++k) prob[static_cast<std::size_t>(i) * c + k] = std::exp(s[k] - mx) / z;
            loss -= std::log(std::max(prob[static_cast<std::size_t>(i) * c + y[static_cast<std::size_t>(i)]], 1e-300));
        }
        loss /= n;
        if (round > 0) loss_curve_.push_back(loss);

        auto& round_trees = rounds_.emplace_back();
        round_trees.reserve(static_cast<std::size_t>(c));
        for (int k = 0; k < c; ++k) {
            for (int i = 0; i < n; ++i) {
                const double p = prob[static_cast<std::size_t>(i) * c + k];
                grad[static_cast<std::size_t>(i)] = p - (y[static_cast<std::size_t>(i)] == static_cast<std::uint32_t>(k) ? 1.0 : 0.0);
                hess[static_cast<std::size_t>(i)] = std::max(p * (1.0 - p), 1e-9);
            }
            TreeBuilder builder(binner, grad, hess, cfg, &gain_per_feature_);
            builder.build(all, 0);
            for (int i = 0; i < n; ++i) {
                const float* xi = x.data() + static_cast<std::size_t>(i) * d;
                scores[static_cast<std::size_t>(i) * c + k] += learning_rate_ * builder.tree.eval(xi);
            }
            round_trees.push_back(std::move(builder.tree));
        }
    }
    // Final loss after the last round.
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* s = scores.data() + static_cast<std::size_t>(i) * c;
        double mx = s[0];
        for (int k = 1; k < c; ++k) mx = std::max(mx, s[k]);
        double z = 0.0;
        for (int k = 0; k < c; ++k) z += std::exp(s[k] - mx);
        loss -= std::log(std::max(std::exp(s[y[static_cast<std::size_t>(i)]] - mx) / z, 1e-300));
    }
    loss_curve_.push_back(loss / n);
}

std::vector<double> GbtClassifier::predict_proba(const float* x) const {
    if (!fitted()) throw NumericError("gbt: model not fitted");
    std::vector<double> s(static_cast<std::size_t>(n_classes_), 0.0);
    for (const auto& round : rounds_)
        for (int k = 0; k < n_classes_; ++k) s[static_cast<std::size_t>(k)] += learning_rate_ * round[static_cast<std::size_t>(k)].eval(x);
    double mx = s[0];
    for (const double v : s) mx = std::max(mx, v);
    double z = 0.0;
    for (auto& v : s) {
        v = std::exp(v - mx);
        z += v;
    }
    for (auto& v : s) v /= z;
    return s;
}

std::uint32_t GbtClassifier::predict(const float* x) const {
    const auto p = predict_proba(x);
    // Ties go to the lowest class index.
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.size(); ++k)
        if (p[k] > p[best]) best = k;
    return static_cast<std::uint32_t>(best);
}

std::vector<double> GbtClassifier::importances() const {
    if (!fitted()) throw NumericError("gbt: model not fitted");
    double total = 0.0;
    for (const double g : gain_per_feature_) total += g;
    std::vector<double> imp(gain_per_feature_.size());
    if (total <= 0.0) {
        std::fill(imp.begin(), imp.end(), 1.0 / static_cast<double>(imp.size()));
        return imp;
    }
    for (std::size_t i = 0; i < imp.size(); ++i) imp[i] = gain_per_feature_[i] / total;
    return imp;
}

void GbtRegressor::fit(const std::vector<float>& x, int n, int d, const std::vector<float>& y,
                       const GbtConfig& cfg) {
    if (n < 2) throw NumericError("gbt: need at least 2 samples");
    if (static_cast<std::size_t>(n) * d != x.size() || y.size() != static_cast<std::size_t>(n)) {
        throw NumericError("gbt: X/y shape mismatch");
    }
    n_features_ = d;
    learning_rate_ = cfg.learning_rate;
    trees_.clear();
    gain_per_feature_.assign(static_cast<std::size_t>(d), 0.0);
    base_ = 0.0;
    for (const float v : y) base_ += v;
    base_ /= n;

    Binner binner;
    binner.build(x, n, d, cfg.n_bins);
    std::vector<double> pred(static_cast<std::size_t>(n), base_);
    std::vector<double> grad(static_cast<std::size_t>(n)), hess(static_cast<std::size_t>(n), 1.0);
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    for (int round = 0; round < cfg.rounds; ++round) {
        for (int i = 0; i < n; ++i) grad[static_cast<std::size_t>(i)] = pred[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)];
        TreeBuilder builder(binner, grad, hess, cfg, &gain_per_feature_);
        builder.build(all, 0);
        for (int i = 0; i < n; ++i) {
            pred[static_cast<std::size_t>(i)] += learning_rate_ * builder.tree.eval(x.data() + static_cast<std::size_t>(i) * d);
        }
        trees_.push_back(std::move(builder.tree));
    }
}

double GbtRegressor::predict(const float* x) const {
    if (!fitted()) throw NumericError("gbt: model not fitted");
    double s = base_;
    for (const auto& t : trees_) s += learning_rate_ * t.eval(x);
    return s;
}

std::vector<double> GbtRegressor::importances() const {
    if (!fitted()) throw NumericError("gbt: model not fitted");
    double total = 0.0;
    for (const double g : gain_per_feature_) total += g;
    std::vector<double> imp(gain_per_feature_.size());
    if (total <= 0.0) {
        std::fill(imp.begin(), imp.end(), 1.0 / static_cast<double>(imp.size()));
        return imp;
    }
    for (std::size_t i = 0; i < imp.size(); ++i) imp[i] = gain_per_feature_[i] / total;
    return imp;
}

} // namespace msd::gbt
