#include "spademl/rf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "spademl/errors.hpp"
#include "spademl/rng.hpp"

namespace spademl {

namespace {

struct SortedFeature {
    double value;
    int cls;
};

} // namespace

struct TreeBuilder {
    const Matrix& x;
    const std::vector<int>& y; // dense class ids
    int n_classes;
    int k_features;
    int max_depth;
    Rng rng;
    RandomForest::Tree tree;

    std::vector<std::size_t> indices;   // current working set, partitioned in place
    std::vector<int> feature_pool;
    std::vector<SortedFeature> scratch;

    TreeBuilder(const Matrix& x_, const std::vector<int>& y_, int n_classes_,
                int k_features_, int max_depth_, std::uint64_t seed)
        : x(x_), y(y_), n_classes(n_classes_), k_features(k_features_),
          max_depth(max_depth_), rng(seed) {
        feature_pool.resize(x.cols);
        std::iota(feature_pool.begin(), feature_pool.end(), 0);
    }

    void build() {
        indices.resize(x.rows);
        for (auto& i : indices) i = rng.next_below(x.rows); // bootstrap
        grow(0, indices.size(), 0);
    }

    int majority(std::size_t lo, std::size_t hi) const {
        std::vector<std::size_t> counts(n_classes, 0);
        for (std::size_t i = lo; i < hi; ++i) ++counts[y[indices[i]]];
        return static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                                counts.begin());
    }

    // returns node index
    int grow(std::size_t lo, std::size_t hi, int depth) {
        const std::size_t n = hi - lo;
        std::vector<std::size_t> counts(n_classes, 0);
        for (std::size_t i = lo; i < hi; ++i) ++counts[y[indices[i]]];
        const bool pure =
            *std::max_element(counts.begin(), counts.end()) == n;

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        if (pure || n < 2 || (max_depth >= 0 && depth >= max_depth)) {
            tree.nodes[node_id].leaf_class = static_cast<int>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
            return node_id;
        }

        double parent_gini = 1.0;
        for (std::size_t c : counts) {
            const double f = static_cast<double>(c) / n;
            parent_gini -= f * f;
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 1e-12;

        // sample k features without replacement
        for (int pick = 0; pick < k_features; ++pick) {
            std::size_t j = pick + rng.next_below(feature_pool.size() - pick);
            std::swap(feature_pool[pick], feature_pool[j]);
            const int f = feature_pool[pick];

            scratch.clear();
            for (std::size_t i = lo; i < hi; ++i)
                scratch.push_back({x.at(indices[i], f), y[indices[i]]});
            std::sort(scratch.begin(), scratch.end(),
                      [](const SortedFeature& a, const SortedFeature& b) {
                          return a.value < b.value;
                      });
            if (scratch.front().value == scratch.back().value) continue;

            std::vector<double> left(n_classes, 0.0);
            std::vector<double> right(n_classes, 0.0);
            for (const auto& sf : scratch) right[sf.cls] += 1.0;

            double nl = 0.0, nr = static_cast<double>(n);
            double sum_left_sq = 0.0;
            double sum_right_sq = 0.0;
            for (double c : right) sum_right_sq += c * c;

            for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
                const int c = scratch[i].cls;
                // incremental sum of squared class counts
                sum_left_sq += 2.0 * left[c] + 1.0;
                sum_right_sq += -2.0 * right[c] + 1.0;
                left[c] += 1.0;
                right[c] -= 1.0;
                nl += 1.0;
                nr -= 1.0;
                if (scratch[i].value == scratch[i + 1].value) continue;
                // weighted child Gini: sum_k n_k/n * (1 - sum_c (c/n_k)^2)
                const double child =
                    (nl - sum_left_sq / nl + nr - sum_right_sq / nr) / n;
                const double gain = parent_gini - child;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    // the midpoint of adjacent doubles can round up to the
                    // right value, which would leave the right child empty
                    double thr = 0.5 * (scratch[i].value + scratch[i + 1].value);
                    if (!(thr < scratch[i + 1].value)) thr = scratch[i].value;
                    best_threshold = thr;
                }
            }
        }

        if (best_feature < 0) {
            tree.nodes[node_id].leaf_class = static_cast<int>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
            return node_id;
        }

        const auto mid = std::partition(
            indices.begin() + lo, indices.begin() + hi,
            [&](std::size_t i) { return x.at(i, best_feature) <= best_threshold; });
        const std::size_t split = mid - indices.begin();
        if (split == lo || split == hi) {
            tree.nodes[node_id].leaf_class = static_cast<int>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
            return node_id;
        }

        tree.nodes[node_id].feature = best_feature;
        tree.nodes[node_id].threshold = best_threshold;
        const int l = grow(lo, split, depth + 1);
        const int r = grow(split, hi, depth + 1);
        tree.nodes[node_id].left = l;
        tree.nodes[node_id].right = r;
        return node_id;
    }
};

RandomForest RandomForest::train(const Matrix& features, const std::vector<int>& labels,
                                 const RandomForestSpec& spec) {
    if (features.rows == 0 || features.rows != labels.size())
        throw ConfigError("RandomForest: empty or mismatched training data");
    const int n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
    bool multi = false;
    for (int l : labels)
        if (l != labels.front()) multi = true;
    if (!multi) throw ConfigError("RandomForest: single-class training data");

    RandomForest rf;
    rf.n_features_ = features.cols;
    rf.n_classes_ = n_classes;
    rf.trees_.resize(spec.n_trees);

    const int k = std::min<int>(
        static_cast<int>(features.cols),
        spec.features_per_split > 0
            ? spec.features_per_split
            : static_cast<int>(std::ceil(std::sqrt(
                  static_cast<double>(features.cols)))));

    auto build_range = [&](int begin, int end) {
        for (int t = begin; t < end; ++t) {
            TreeBuilder builder(features, labels, n_classes, k, spec.max_depth,
                                derive_seed(spec.seed, "tree",
                                            static_cast<std::uint64_t>(t)));
            builder.build();
            rf.trees_[t] = std::move(builder.tree);
        }
    };

    const int n_threads = std::max(1, spec.n_threads);
    if (n_threads == 1) {
        build_range(0, spec.n_trees);
    } else {
        // trees are seeded by index, so the partition does not matter
        std::vector<std::thread> pool;
        const int chunk = (spec.n_trees + n_threads - 1) / n_threads;
        for (int w = 0; w < n_threads; ++w) {
            const int b = w * chunk;
            const int e = std::min(spec.n_trees, b + chunk);
            if (b < e) pool.emplace_back(build_range, b, e);
        }
        for (auto& th : pool) th.join();
    }
    return rf;
}

int RandomForest::predict_one(const double* row) const {
    std::vector<int> votes(n_classes_, 0);
    for (const auto& tree : trees_) {
        int node = 0;
        while (tree.nodes[node].feature >= 0) {
            node = row[tree.nodes[node].feature] <= tree.nodes[node].threshold
                       ? tree.nodes[node].left
                       : tree.nodes[node].right;
        }
        ++votes[tree.nodes[node].leaf_class];
    }
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) -
                            votes.begin());
}

std::vector<int> RandomForest::predict(const Matrix& features) const {
    std::vector<int> out(features.rows);
    for (std::size_t r = 0; r < features.rows; ++r)
        out[r] = predict_one(features.row(r));
    return out;
}

} // namespace spademl
