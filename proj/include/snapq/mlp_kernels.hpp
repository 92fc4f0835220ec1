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

#ifndef SNAPQ_MLP_KERNELS_HPP
#define SNAPQ_MLP_KERNELS_HPP

#include "snapq/execution.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>

namespace snapq::kernels {

// Weights are row-major (out x in) views into a flat parameter block; activations
// are column-major with one column per sample.
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using WeightView = Eigen::Map<const RowMajorMatrix>;
using MutableWeightView = Eigen::Map<RowMajorMatrix>;
using BiasView = Eigen::Map<const Eigen::VectorXd>;
using MutableBiasView = Eigen::Map<Eigen::VectorXd>;

/// Y = W X + b, then max(Y, 0) elementwise when relu is set. Y is resized.
void dense_forward(const WeightView& W, const BiasView& b, const Eigen::MatrixXd& X, Eigen::MatrixXd& Y,
                   bool relu, Execution exec);

/// dW = D X^T and db = sum over samples of D (overwrites).
void dense_grad_params(const Eigen::MatrixXd& D, const Eigen::MatrixXd& X, MutableWeightView& dW,
                       MutableBiasView& db, Execution exec);

/// dX = W^T D. dX is resized.
void dense_grad_input(const WeightView& W, const Eigen::MatrixXd& D, Eigen::MatrixXd& dX, Execution exec);

/// D(i, j) = 0 wherever the post-activation Y(i, j) is not positive.
void relu_backward(const Eigen::MatrixXd& Y, Eigen::MatrixXd& D, Execution exec);

/// Largest entry of each column.
void column_max(const Eigen::MatrixXd& Q, std::span<double> out, Execution exec);

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam moments below this magnitude are flushed to zero.
inline constexpr double kMomentFloor = 1e-200;

/// One bias-corrected Adam update; `step` is the 1-based update count.
void adam_update(std::span<double> params, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, const AdamHyper& hyper, long step, Execution exec);

}  // namespace snapq::kernels

#endif  // SNAPQ_MLP_KERNELS_HPP
