#ifndef SPADEML_EVALUATE_HPP
#define SPADEML_EVALUATE_HPP

#include <cstdint>
#include <variant>
#include <vector>

#include "spademl/fcnn.hpp"
#include "spademl/rf.hpp"

namespace spademl {

struct EvaluationReport {
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0;
    double pooled_accuracy = 0.0; // confusion trace / total, exactly
    std::vector<double> fold_accuracies;
    // rows = ground truth class index, cols = predicted, over the pooled
    // test set; class_ids maps matrix indices back to original labels
    std::vector<int> class_ids;
    std::vector<std::vector<std::uint64_t>> confusion;
};

using ModelSpec = std::variant<RandomForestSpec, FcnnSpec>;

// Stratified split of 0..n-1 into a train fraction and its complement.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split(const std::vector<int>& labels, double train_fraction,
                 std::uint64_t seed);

// Stratified partition of the given indices into m folds; fold class
// proportions match the pool within one sample per class.
std::vector<std::vector<std::size_t>> stratified_folds(
    const std::vector<int>& labels, const std::vector<std::size_t>& indices,
    int m, std::uint64_t seed);

// Train on a stratified train_fraction split, then score each of m
// stratified partitions of the held-out set. Accuracy = correct/total
// per fold; the confusion matrix is pooled over the whole held-out set.
EvaluationReport evaluate(const ModelSpec& spec, const Matrix& features,
                          const std::vector<int>& labels, int m = 10,
                          double train_fraction = 0.7, std::uint64_t seed = 0);

} // namespace spademl

#endif
