#include "spademl/fcnn.hpp"

#include <algorithm>
#include <cmath>

#include <numeric>

#include "spademl/errors.hpp"
#include "spademl/rng.hpp"

namespace spademl {

namespace {

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
    return (1.0 + (-z.array()).exp()).inverse().matrix();
}

Eigen::MatrixXd softmax_cols(const Eigen::MatrixXd& z) {
    Eigen::MatrixXd out(z.rows(), z.cols());
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        Eigen::ArrayXd e = (z.col(c).array() - z.col(c).maxCoeff()).exp();
        out.col(c) = (e / e.sum()).matrix();
    }
    return out;
}

} // namespace

double Rng::next_normal() {
    const double u1 = std::max(next_double(), 1e-300);
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Fcnn Fcnn::make_untrained(int n_inputs, const FcnnSpec& spec, int n_outputs) {
    Fcnn net;
    net.multiclass_ = spec.multiclass;
    net.n_outputs_ = n_outputs;
    Rng rng(derive_seed(spec.seed, "init"));
    std::vector<int> dims;
    dims.push_back(n_inputs);
    for (int h : spec.hidden) dims.push_back(h);
    dims.push_back(n_outputs);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const double scale = std::sqrt(2.0 / dims[l]); // He init
        Eigen::MatrixXd w(dims[l + 1], dims[l]);
        for (Eigen::Index i = 0; i < w.size(); ++i)
            w.data()[i] = scale * rng.next_normal();
        net.w_.push_back(std::move(w));
        net.b_.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
    }
    return net;
}

Eigen::MatrixXd Fcnn::forward(const Eigen::MatrixXd& input) const {
    Eigen::MatrixXd a = input;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        Eigen::MatrixXd z = (w_[l] * a).colwise() + b_[l];
        if (l + 1 < w_.size())
            a = relu(z);
        else
            a = multiclass_ ? softmax_cols(z) : sigmoid(z);
    }
    return a;
}

double Fcnn::loss_and_gradients(const Eigen::MatrixXd& batch,
                                const std::vector<int>& labels,
                                std::vector<Eigen::MatrixXd>& grad_w,
                                std::vector<Eigen::VectorXd>& grad_b) const {
    return backprop(batch, labels, nullptr, grad_w, grad_b);
}

double Fcnn::train_step(const Eigen::MatrixXd& batch, const std::vector<int>& labels,
                        double dropout, Rng& rng,
                        std::vector<Eigen::MatrixXd>& grad_w,
                        std::vector<Eigen::VectorXd>& grad_b) const {
    if (dropout <= 0.0) return backprop(batch, labels, nullptr, grad_w, grad_b);
    // inverted dropout masks for each hidden activation
    std::vector<Eigen::MatrixXd> masks(w_.size() - 1);
    const double keep = 1.0 - dropout;
    for (std::size_t l = 0; l + 1 < w_.size(); ++l) {
        masks[l].resize(w_[l].rows(), batch.cols());
        for (Eigen::Index i = 0; i < masks[l].size(); ++i)
            masks[l].data()[i] = rng.next_double() < dropout ? 0.0 : 1.0 / keep;
    }
    return backprop(batch, labels, &masks, grad_w, grad_b);
}

double Fcnn::backprop(const Eigen::MatrixXd& batch, const std::vector<int>& labels,
                      const std::vector<Eigen::MatrixXd>* dropout_masks,
                      std::vector<Eigen::MatrixXd>& grad_w,
                      std::vector<Eigen::VectorXd>& grad_b) const {
    const Eigen::Index n = batch.cols();
    std::vector<Eigen::MatrixXd> acts; // post-activation, acts[0] = input
    acts.push_back(batch);
    for (std::size_t l = 0; l < w_.size(); ++l) {
        Eigen::MatrixXd z = (w_[l] * acts.back()).colwise() + b_[l];
        Eigen::MatrixXd a = l + 1 < w_.size() ? relu(z)
                            : multiclass_     ? softmax_cols(z)
                                              : sigmoid(z);
        if (dropout_masks && l + 1 < w_.size())
            a = a.cwiseProduct((*dropout_masks)[l]);
        acts.push_back(std::move(a));
    }

    const Eigen::MatrixXd& out = acts.back();
    double loss = 0.0;
    Eigen::MatrixXd delta(out.rows(), n); // dL/dz at the head, both heads
    if (multiclass_) {
        for (Eigen::Index c = 0; c < n; ++c) {
            const double p = std::max(out(labels[c], c), 1e-12);
            loss -= std::log(p);
            delta.col(c) = out.col(c);
            delta(labels[c], c) -= 1.0;
        }
    } else {
        for (Eigen::Index c = 0; c < n; ++c) {
            const double p = std::clamp(out(0, c), 1e-12, 1.0 - 1e-12);
            const double y = labels[c];
            loss -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
            delta(0, c) = out(0, c) - y;
        }
    }
    loss /= static_cast<double>(n);
    delta /= static_cast<double>(n);

    grad_w.assign(w_.size(), {});
    grad_b.assign(b_.size(), {});
    for (int l = static_cast<int>(w_.size()) - 1; l >= 0; --l) {
        grad_w[l] = delta * acts[l].transpose();
        grad_b[l] = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = w_[l].transpose() * delta;
            delta = back.cwiseProduct(
                (acts[l].array() > 0.0).cast<double>().matrix());
            if (dropout_masks)
                delta = delta.cwiseProduct((*dropout_masks)[l - 1]);
        }
    }
    return loss;
}

Fcnn Fcnn::train(const Matrix& features, const std::vector<int>& labels,
                 const FcnnSpec& spec) {
    if (features.rows != labels.size() || features.rows < 4)
        throw ConfigError("Fcnn: empty or mismatched training data");
    const int n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
    if (!spec.multiclass && n_classes > 2)
        throw ConfigError("Fcnn: logistic head requires binary labels");

    const int n_outputs = spec.multiclass ? n_classes : 1;
    Fcnn net = make_untrained(static_cast<int>(features.cols), spec, n_outputs);

    Rng rng(derive_seed(spec.seed, "train"));

    // stratified validation split
    std::vector<std::size_t> train_idx, val_idx;
    {
        std::vector<std::vector<std::size_t>> per_class(n_classes);
        for (std::size_t i = 0; i < labels.size(); ++i)
            per_class[labels[i]].push_back(i);
        for (auto& idx : per_class) {
            for (std::size_t i = idx.size(); i > 1; --i)
                std::swap(idx[i - 1], idx[rng.next_below(i)]);
            const std::size_t nv = std::max<std::size_t>(
                1, static_cast<std::size_t>(spec.validation_fraction * idx.size()));
            val_idx.insert(val_idx.end(), idx.begin(), idx.begin() + nv);
            train_idx.insert(train_idx.end(), idx.begin() + nv, idx.end());
        }
        std::sort(train_idx.begin(), train_idx.end());
        std::sort(val_idx.begin(), val_idx.end());
    }

    auto gather = [&](const std::vector<std::size_t>& idx, Eigen::MatrixXd& x,
                      std::vector<int>& y) {
        x.resize(features.cols, idx.size());
        y.resize(idx.size());
        for (std::size_t c = 0; c < idx.size(); ++c) {
            for (std::size_t r = 0; r < features.cols; ++r)
                x(r, c) = features.at(idx[c], r);
            y[c] = labels[idx[c]];
        }
    };
    Eigen::MatrixXd x_val;
    std::vector<int> y_val;
    gather(val_idx, x_val, y_val);

    // Adam state
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;
    for (std::size_t l = 0; l < net.w_.size(); ++l) {
        mw.push_back(Eigen::MatrixXd::Zero(net.w_[l].rows(), net.w_[l].cols()));
        vw.push_back(Eigen::MatrixXd::Zero(net.w_[l].rows(), net.w_[l].cols()));
        mb.push_back(Eigen::VectorXd::Zero(net.b_[l].size()));
        vb.push_back(Eigen::VectorXd::Zero(net.b_[l].size()));
    }
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<Eigen::MatrixXd> best_w = net.w_;
    std::vector<Eigen::VectorXd> best_b = net.b_;
    int since_best = 0;

    std::vector<std::size_t> order = train_idx;
    std::vector<Eigen::MatrixXd> gw;
    std::vector<Eigen::VectorXd> gb;

    for (int epoch = 0; epoch < spec.max_epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.next_below(i)]);

        for (std::size_t start = 0; start < order.size();
             start += spec.batch_size) {
            const std::size_t end =
                std::min(order.size(), start + spec.batch_size);
            std::vector<std::size_t> batch_idx(order.begin() + start,
                                               order.begin() + end);
            Eigen::MatrixXd xb;
            std::vector<int> yb;
            gather(batch_idx, xb, yb);

            const double loss =
                net.train_step(xb, yb, spec.dropout, rng, gw, gb);
            if (!std::isfinite(loss))
                throw NumericalGuardError(
                    "Fcnn: training diverged at epoch " + std::to_string(epoch));

            ++step;
            const double corr =
                std::sqrt(1.0 - std::pow(beta2, step)) / (1.0 - std::pow(beta1, step));
            for (std::size_t l = 0; l < net.w_.size(); ++l) {
                mw[l] = beta1 * mw[l] + (1.0 - beta1) * gw[l];
                vw[l] = beta2 * vw[l].array().matrix() +
                        (1.0 - beta2) * gw[l].cwiseProduct(gw[l]);
                net.w_[l].array() -= spec.learning_rate * corr * mw[l].array() /
                                     (vw[l].array().sqrt() + eps);
                mb[l] = beta1 * mb[l] + (1.0 - beta1) * gb[l];
                vb[l] = beta2 * vb[l] + (1.0 - beta2) * gb[l].cwiseProduct(gb[l]);
                net.b_[l].array() -= spec.learning_rate * corr * mb[l].array() /
                                     (vb[l].array().sqrt() + eps);
            }
        }

        std::vector<Eigen::MatrixXd> dummy_w;
        std::vector<Eigen::VectorXd> dummy_b;
        const double val_loss =
            net.loss_and_gradients(x_val, y_val, dummy_w, dummy_b);
        net.epochs_trained = epoch + 1;
        if (val_loss < best_val) {
            best_val = val_loss;
            best_w = net.w_;
            best_b = net.b_;
            since_best = 0;
        } else if (++since_best >= spec.patience) {
            break;
        }
    }

    net.w_ = std::move(best_w);
    net.b_ = std::move(best_b);
    net.best_validation_loss = best_val;
    return net;
}

std::vector<double> Fcnn::predict_proba_binary(const Matrix& features) const {
    Eigen::MatrixXd x(features.cols, features.rows);
    for (std::size_t c = 0; c < features.rows; ++c)
        for (std::size_t r = 0; r < features.cols; ++r) x(r, c) = features.at(c, r);
    const Eigen::MatrixXd out = forward(x);
    std::vector<double> p(features.rows);
    for (std::size_t c = 0; c < features.rows; ++c) p[c] = out(0, c);
    return p;
}

std::vector<int> Fcnn::predict(const Matrix& features) const {
    Eigen::MatrixXd x(features.cols, features.rows);
    for (std::size_t c = 0; c < features.rows; ++c)
        for (std::size_t r = 0; r < features.cols; ++r) x(r, c) = features.at(c, r);
    const Eigen::MatrixXd out = forward(x);
    std::vector<int> labels(features.rows);
    for (std::size_t c = 0; c < features.rows; ++c) {
        if (multiclass_) {
            Eigen::Index best;
            out.col(c).maxCoeff(&best);
            labels[c] = static_cast<int>(best);
        } else {
            labels[c] = out(0, c) >= 0.5 ? 1 : 0;
        }
    }
    return labels;
}

} // namespace spademl
