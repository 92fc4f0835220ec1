/*
 Copyright 2026 The snapq Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "snapq/qnetwork.hpp"

#include <cmath>
#include <stdexcept>

namespace snapq {

QNetwork::QNetwork(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("QNetwork needs at least input and output sizes");
    for (auto s : sizes_) {
        if (s == 0) throw std::invalid_argument("QNetwork layer sizes must be positive");
    }
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        offsets_.push_back(total);
        total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
    }
    params_.assign(total, 0.0);
}

void QNetwork::init_fan_in_uniform(std::mt19937_64& rng) {
    for (std::size_t l = 0; l < num_layers(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
        std::uniform_real_distribution<double> dist(-bound, bound);
        const std::size_t begin = offsets_[l];
        const std::size_t end = bias_offset(l) + sizes_[l + 1];
        for (std::size_t i = begin; i < end; ++i) params_[i] = dist(rng);
    }
}

kernels::WeightView QNetwork::weights(std::size_t layer) const {
    return {params_.data() + offsets_[layer], static_cast<Eigen::Index>(sizes_[layer + 1]),
            static_cast<Eigen::Index>(sizes_[layer])};
}

kernels::BiasView QNetwork::bias(std::size_t layer) const {
    return {params_.data() + bias_offset(layer), static_cast<Eigen::Index>(sizes_[layer + 1])};
}

Eigen::MatrixXd QNetwork::forward_batch(const Eigen::MatrixXd& inputs, Execution exec) const {
    if (static_cast<std::size_t>(inputs.rows()) != input_size()) {
        throw std::invalid_argument("QNetwork::forward_batch: input size mismatch");
    }
    Eigen::MatrixXd current = inputs, next;
    for (std::size_t l = 0; l < num_layers(); ++l) {
        kernels::dense_forward(weights(l), bias(l), current, next, l + 1 < num_layers(), exec);
        std::swap(current, next);
    }
    return current;
}

Eigen::VectorXd QNetwork::forward(std::span<const double> input, Execution exec) const {
    if (input.size() != input_size()) throw std::invalid_argument("QNetwork::forward: input size mismatch");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(input.size()), 1);
    for (std::size_t i = 0; i < input.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = input[i];
    return forward_batch(x, exec).col(0);
}

namespace {

void check_batch(const QNetwork& net, const Eigen::MatrixXd& inputs, std::span<const std::size_t> actions,
                 const Eigen::VectorXd& targets) {
    if (static_cast<std::size_t>(inputs.rows()) != net.input_size()) throw std::invalid_argument("input size mismatch");
    if (inputs.cols() == 0) throw std::invalid_argument("empty batch");
    if (actions.size() != static_cast<std::size_t>(inputs.cols()) || targets.size() != inputs.cols()) {
        throw std::invalid_argument("batch size mismatch");
    }
    for (auto a : actions) {
        if (a >= net.output_size()) throw std::out_of_range("action index out of range");
    }
}

}  // namespace

double taken_action_loss(const QNetwork& net, const Eigen::MatrixXd& inputs,
                         std::span<const std::size_t> actions, const Eigen::VectorXd& targets, Execution exec) {
    check_batch(net, inputs, actions, targets);
    const Eigen::MatrixXd q = net.forward_batch(inputs, exec);
    double loss = 0.0;
    for (Eigen::Index b = 0; b < inputs.cols(); ++b) {
        const double err = q(static_cast<Eigen::Index>(actions[b]), b) - targets(b);
        loss += err * err;
    }
    return loss / static_cast<double>(inputs.cols());
}

double taken_action_loss_grad(const QNetwork& net, const Eigen::MatrixXd& inputs,
                              std::span<const std::size_t> actions, const Eigen::VectorXd& targets,
                              std::span<double> grad, BackpropWorkspace& ws, Execution exec) {
    check_batch(net, inputs, actions, targets);
    if (grad.size() != net.param_count()) throw std::invalid_argument("gradient size mismatch");

    const std::size_t L = net.num_layers();
    const Eigen::Index batch = inputs.cols();
    ws.activations.resize(L);
    ws.activations[0] = inputs;
    for (std::size_t l = 0; l + 1 < L; ++l) {
        kernels::dense_forward(net.weights(l), net.bias(l), ws.activations[l], ws.activations[l + 1], true, exec);
    }

    // Head restricted to the taken actions.
    const auto W_head = net.weights(L - 1);
    const auto b_head = net.bias(L - 1);
    const Eigen::MatrixXd& h = ws.activations[L - 1];
    Eigen::VectorXd err(batch);
    double loss = 0.0;
    for (Eigen::Index b = 0; b < batch; ++b) {
        const auto a = static_cast<Eigen::Index>(actions[b]);
        const double q = W_head.row(a).dot(h.col(b)) + b_head(a);
        err(b) = q - targets(b);
        loss += err(b) * err(b);
    }
    loss /= static_cast<double>(batch);
    const double scale = 2.0 / static_cast<double>(batch);

    std::fill(grad.begin(), grad.end(), 0.0);
    {
        kernels::MutableWeightView dW(grad.data() + net.weight_offset(L - 1), W_head.rows(), W_head.cols());
        kernels::MutableBiasView db(grad.data() + net.bias_offset(L - 1), b_head.size());
        ws.delta.resize(h.rows(), batch);
        for (Eigen::Index b = 0; b < batch; ++b) {
            const auto a = static_cast<Eigen::Index>(actions[b]);
            const double d = scale * err(b);
            dW.row(a) += d * h.col(b).transpose();
            db(a) += d;
            ws.delta.col(b) = d * W_head.row(a).transpose();
        }
    }

    // ws.delta holds dLoss/d(post-activation of layer l + 1's input) going downwards.
    for (std::size_t l = L - 1; l-- > 0;) {
        kernels::relu_backward(ws.activations[l + 1], ws.delta, exec);
        kernels::MutableWeightView dW(grad.data() + net.weight_offset(l),
                                      static_cast<Eigen::Index>(net.layer_sizes()[l + 1]),
                                      static_cast<Eigen::Index>(net.layer_sizes()[l]));
        kernels::MutableBiasView db(grad.data() + net.bias_offset(l),
                                    static_cast<Eigen::Index>(net.layer_sizes()[l + 1]));
        kernels::dense_grad_params(ws.delta, ws.activations[l], dW, db, exec);
        if (l > 0) {
            kernels::dense_grad_input(net.weights(l), ws.delta, ws.delta_prev, exec);
            std::swap(ws.delta, ws.delta_prev);
        }
    }
    return loss;
}

std::size_t argmax_lowest(const Eigen::VectorXd& q) {
    if (q.size() == 0) throw std::invalid_argument("argmax of empty vector");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < q.size(); ++i) {
        if (q(i) > q(best)) best = i;
    }
    return static_cast<std::size_t>(best);
}

}  // namespace snapq
