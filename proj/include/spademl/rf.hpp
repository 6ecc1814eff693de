#ifndef SPADEML_RF_HPP
#define SPADEML_RF_HPP

#include <cstdint>
#include <memory>
#include <vector>

namespace spademl {

// Row-major feature matrix plus integer labels.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }
};

struct RandomForestSpec {
    int n_trees = 200;
    int max_depth = -1;             // -1 = unbounded
    int features_per_split = 0;     // 0 = ceil(sqrt(n_features))
    std::uint64_t seed = 0;
    int n_threads = 1;              // deterministic: tree i always uses seed(i)
};

class RandomForest {
public:
    // Bootstrap-resampled CART trees split on Gini impurity reduction.
    // Deterministic for a fixed spec/seed, regardless of n_threads.
    static RandomForest train(const Matrix& features, const std::vector<int>& labels,
                              const RandomForestSpec& spec);

    int predict_one(const double* row) const;
    std::vector<int> predict(const Matrix& features) const;

    int n_classes() const { return n_classes_; }

private:
    struct Node {
        int feature = -1;       // -1 for leaves
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int leaf_class = -1;    // majority class, tie broken to lowest id
    };
    struct Tree {
        std::vector<Node> nodes;
    };

    std::vector<Tree> trees_;
    std::size_t n_features_ = 0;
    int n_classes_ = 0;

    friend struct TreeBuilder;
};

} // namespace spademl

#endif
