#pragma once

#include <cstdint>
#include <vector>

#include "msd/util/error.hpp"

// Gradient-boosted depth-limited regression trees with a softmax readout
// (one ensemble per class), exact greedy splits over quantile-binned
// features. Everything is deterministic: ties break to the lowest feature
// index, then the lowest threshold.

namespace msd::gbt {

struct GbtConfig {
    int rounds = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    int n_bins = 64;
    int min_samples_leaf = 1;
    double l2 = 1.0;         // ridge term on leaf values
    double min_gain = 1e-12; // splits below this become leaves
};

struct TreeNode {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;  // go left iff x[feature] <= threshold
    int left = -1;
    int right = -1;
    double value = 0.0;      // leaf value
};

struct Tree {
    std::vector<TreeNode> nodes;

    double eval(const float* x) const {
        int cur = 0;
        while (nodes[static_cast<std::size_t>(cur)].feature >= 0) {
            const auto& nd = nodes[static_cast<std::size_t>(cur)];
            cur = (static_cast<double>(x[nd.feature]) <= nd.threshold) ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(cur)].value;
    }
};

class GbtClassifier {
public:
    // X row-major n x d; y labels in [0, n_classes).
    void fit(const std::vector<float>& x, int n, int d, const std::vector<std::uint32_t>& y,
             const GbtConfig& cfg = {});

    std::uint32_t predict(const float* x) const;
    std::vector<double> predict_proba(const float* x) const;

    // Normalized cumulative split gain; uniform when no split exists.
    std::vector<double> importances() const;

    // Training softmax cross-entropy after each boosting round.
    const std::vector<double>& train_loss_curve() const { return loss_curve_; }

    int n_classes() const { return n_classes_; }
    int n_features() const { return n_features_; }
    bool fitted() const { return n_classes_ > 0; }

private:
    int n_classes_ = 0;
    int n_features_ = 0;
    std::vector<std::vector<Tree>> rounds_; // [round][class]
    std::vector<double> gain_per_feature_;
    std::vector<double> loss_curve_;
    double learning_rate_ = 0.1;
};

class GbtRegressor {
public:
    void fit(const std::vector<float>& x, int n, int d, const std::vector<float>& y,
             const GbtConfig& cfg = {});
    double predict(const float* x) const;
    std::vector<double> importances() const;
    bool fitted() const { return n_features_ > 0; }

private:
    int n_features_ = 0;
    double base_ = 0.0;
    std::vector<Tree> trees_;
    std::vector<double> gain_per_feature_;
    double learning_rate_ = 0.1;
};

} // namespace msd::gbt
