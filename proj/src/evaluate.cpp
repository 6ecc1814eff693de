#include "spademl/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "spademl/errors.hpp"
#include "spademl/rng.hpp"

namespace spademl {

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split(const std::vector<int>& labels, double train_fraction,
                 std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> per_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        per_class[labels[i]].push_back(i);

    std::vector<std::size_t> train, test;
    for (auto& [cls, idx] : per_class) {
        Rng rng(derive_seed(seed, "split", static_cast<std::uint64_t>(cls)));
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.next_below(i)]);
        const std::size_t nt =
            static_cast<std::size_t>(std::llround(train_fraction * idx.size()));
        train.insert(train.end(), idx.begin(), idx.begin() + nt);
        test.insert(test.end(), idx.begin() + nt, idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

std::vector<std::vector<std::size_t>> stratified_folds(
    const std::vector<int>& labels, const std::vector<std::size_t>& indices,
    int m, std::uint64_t seed) {
    if (m < 2) throw ConfigError("stratified_folds: m must be >= 2");
    std::map<int, std::vector<std::size_t>> per_class;
    for (std::size_t i : indices) per_class[labels[i]].push_back(i);

    for (const auto& [cls, idx] : per_class)
        if (idx.size() < static_cast<std::size_t>(m))
            throw ConfigError("stratified_folds: class " + std::to_string(cls) +
                              " has fewer samples than folds");

    std::vector<std::vector<std::size_t>> folds(m);
    for (auto& [cls, idx] : per_class) {
        Rng rng(derive_seed(seed, "fold", static_cast<std::uint64_t>(cls)));
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.next_below(i)]);
        for (std::size_t i = 0; i < idx.size(); ++i)
            folds[i % m].push_back(idx[i]);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

namespace {

Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& idx) {
    Matrix out;
    out.rows = idx.size();
    out.cols = x.cols;
    out.data.reserve(idx.size() * x.cols);
    for (std::size_t i : idx)
        out.data.insert(out.data.end(), x.row(i), x.row(i) + x.cols);
    return out;
}

} // namespace

EvaluationReport evaluate(const ModelSpec& spec, const Matrix& features,
                          const std::vector<int>& labels, int m,
                          double train_fraction, std::uint64_t seed) {
    if (features.rows != labels.size())
        throw ConfigError("evaluate: features/labels size mismatch");

    // dense class ids in sorted label order
    std::set<int> classes(labels.begin(), labels.end());
    if (classes.size() < 2) throw ConfigError("evaluate: single-class data");
    std::map<int, int> to_dense;
    EvaluationReport report;
    for (int c : classes) {
        to_dense[c] = static_cast<int>(report.class_ids.size());
        report.class_ids.push_back(c);
    }
    std::vector<int> dense(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) dense[i] = to_dense.at(labels[i]);

    auto [train_idx, test_idx] = stratified_split(labels, train_fraction, seed);
    const Matrix x_train = gather_rows(features, train_idx);
    std::vector<int> y_train;
    for (std::size_t i : train_idx) y_train.push_back(dense[i]);

    std::vector<int> predictions(features.rows, -1);
    const Matrix x_test = gather_rows(features, test_idx);
    std::vector<int> y_pred_test;
    if (std::holds_alternative<RandomForestSpec>(spec)) {
        auto rf_spec = std::get<RandomForestSpec>(spec);
        rf_spec.seed = derive_seed(seed, "model", rf_spec.seed);
        const RandomForest model = RandomForest::train(x_train, y_train, rf_spec);
        y_pred_test = model.predict(x_test);
    } else {
        auto nn_spec = std::get<FcnnSpec>(spec);
        nn_spec.seed = derive_seed(seed, "model", nn_spec.seed);
        nn_spec.multiclass = nn_spec.multiclass || classes.size() > 2;
        const Fcnn model = Fcnn::train(x_train, y_train, nn_spec);
        y_pred_test = model.predict(x_test);
    }
    for (std::size_t i = 0; i < test_idx.size(); ++i)
        predictions[test_idx[i]] = y_pred_test[i];

    const auto folds = stratified_folds(labels, test_idx, m, derive_seed(seed, "folds"));
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& fold : folds) {
        std::size_t correct = 0;
        for (std::size_t i : fold)
            if (predictions[i] == dense[i]) ++correct;
        const double acc = static_cast<double>(correct) / fold.size();
        report.fold_accuracies.push_back(acc);
        sum += acc;
        sum_sq += acc * acc;
    }
    report.accuracy_mean = sum / m;
    report.accuracy_std =
        std::sqrt(std::max(0.0, sum_sq / m - report.accuracy_mean * report.accuracy_mean));

    report.confusion.assign(classes.size(),
                            std::vector<std::uint64_t>(classes.size(), 0));
    std::size_t correct_total = 0;
    for (std::size_t i : test_idx) {
        ++report.confusion[dense[i]][predictions[i]];
        if (predictions[i] == dense[i]) ++correct_total;
    }
    report.pooled_accuracy = static_cast<double>(correct_total) / test_idx.size();
    return report;
}

} // namespace spademl
