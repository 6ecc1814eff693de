#ifndef SPADEML_FCNN_HPP
#define SPADEML_FCNN_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "spademl/rf.hpp"

namespace spademl {

struct FcnnSpec {
    std::vector<int> hidden = {256, 128, 32};
    double learning_rate = 1e-3;
    double dropout = 0.2;
    int patience = 10;          // early stopping on validation loss
    int max_epochs = 200;
    int batch_size = 64;
    double validation_fraction = 0.2;
    bool multiclass = false;    // softmax head instead of the logistic unit
    std::uint64_t seed = 0;
};

// Fully connected net: affine+ReLU hidden layers, logistic (binary) or
// softmax (multiclass) head, trained with Adam on mean binary/categorical
// cross entropy. Keeps the parameters of the best validation-loss epoch.
class Fcnn {
public:
    static Fcnn train(const Matrix& features, const std::vector<int>& labels,
                      const FcnnSpec& spec);

    std::vector<int> predict(const Matrix& features) const;
    std::vector<double> predict_proba_binary(const Matrix& features) const;

    // Loss and analytic parameter gradients on a batch, exposed for
    // finite-difference verification.
    double loss_and_gradients(const Eigen::MatrixXd& batch,
                              const std::vector<int>& labels,
                              std::vector<Eigen::MatrixXd>& grad_w,
                              std::vector<Eigen::VectorXd>& grad_b) const;

    std::vector<Eigen::MatrixXd>& weights() { return w_; }
    std::vector<Eigen::VectorXd>& biases() { return b_; }

    static Fcnn make_untrained(int n_inputs, const FcnnSpec& spec, int n_outputs);

    int epochs_trained = 0;
    double best_validation_loss = 0.0;

private:
    std::vector<Eigen::MatrixXd> w_; // layer l: (out x in)
    std::vector<Eigen::VectorXd> b_;
    bool multiclass_ = false;
    int n_outputs_ = 1;

    Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
    double backprop(const Eigen::MatrixXd& batch, const std::vector<int>& labels,
                    const std::vector<Eigen::MatrixXd>* dropout_masks,
                    std::vector<Eigen::MatrixXd>& grad_w,
                    std::vector<Eigen::VectorXd>& grad_b) const;
    double train_step(const Eigen::MatrixXd& batch, const std::vector<int>& labels,
                      double dropout, class Rng& rng,
                      std::vector<Eigen::MatrixXd>& grad_w,
                      std::vector<Eigen::VectorXd>& grad_b) const;
};

} // namespace spademl

#endif
