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

#ifndef SNAPQ_QNETWORK_HPP
#define SNAPQ_QNETWORK_HPP

#include "snapq/execution.hpp"
#include "snapq/mlp_kernels.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace snapq {

/// Flat double storage at Eigen's maximum alignment.
using AlignedVector = std::vector<double, Eigen::aligned_allocator<double>>;

/**
 * Fully connected Q-network: affine -> ReLU -> ... -> affine (identity head).
 *
 * All parameters live in one flat block, layer-major; within a layer the
 * weights come first (row-major, out x in) followed by the bias.
 */
class QNetwork {
public:
    QNetwork() = default;
    /// layer_sizes = {input, hidden..., output}; parameters start at zero.
    explicit QNetwork(std::vector<std::size_t> layer_sizes);

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
    void init_fan_in_uniform(std::mt19937_64& rng);

    const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
    std::size_t num_layers() const { return sizes_.empty() ? 0 : sizes_.size() - 1; }
    std::size_t input_size() const { return sizes_.front(); }
    std::size_t output_size() const { return sizes_.back(); }
    std::size_t param_count() const { return params_.size(); }

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
    std::size_t bias_offset(std::size_t layer) const { return offsets_[layer] + sizes_[layer + 1] * sizes_[layer]; }

    kernels::WeightView weights(std::size_t layer) const;
    kernels::BiasView bias(std::size_t layer) const;

    /// Q-values for one input.
    Eigen::VectorXd forward(std::span<const double> input, Execution exec = Execution::kSerial) const;
    /// Q-values for a batch, one column per sample.
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs, Execution exec) const;

    friend bool operator==(const QNetwork& a, const QNetwork& b) {
        return a.sizes_ == b.sizes_ && a.params_ == b.params_;
    }

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> offsets_;
    // over-aligned so kernel results do not depend on where the block lands
    AlignedVector params_;
};

/// Cache of per-layer activations for backpropagation; reusable across calls.
struct BackpropWorkspace {
    std::vector<Eigen::MatrixXd> activations;  // activations[0] = input, then post-ReLU hidden layers
    Eigen::MatrixXd delta;
    Eigen::MatrixXd delta_prev;
};

/**
 * Mean squared error between Q(x_b, a_b) and y_b over the batch, and its gradient
 * with respect to every parameter. Only the taken-action outputs enter the loss,
 * so the head is evaluated row-by-row instead of in full. `grad` is overwritten
 * and laid out like QNetwork::params().
 */
double taken_action_loss_grad(const QNetwork& net, const Eigen::MatrixXd& inputs,
                              std::span<const std::size_t> actions, const Eigen::VectorXd& targets,
                              std::span<double> grad, BackpropWorkspace& ws, Execution exec);

/// Loss only (no gradient); full forward pass followed by a gather.
double taken_action_loss(const QNetwork& net, const Eigen::MatrixXd& inputs,
                         std::span<const std::size_t> actions, const Eigen::VectorXd& targets, Execution exec);

/// Lowest index among the maximal entries.
std::size_t argmax_lowest(const Eigen::VectorXd& q);

}  // namespace snapq

#endif  // SNAPQ_QNETWORK_HPP
