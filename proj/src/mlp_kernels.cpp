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

#include "snapq/mlp_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace snapq::kernels {

namespace {

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// Splits [0, n) into `parts` contiguous chunks; returns [begin, end) of chunk `i`.
std::pair<Eigen::Index, Eigen::Index> chunk(Eigen::Index n, int parts, int i) {
    const Eigen::Index base = n / parts, extra = n % parts;
    const Eigen::Index begin = i * base + std::min<Eigen::Index>(i, extra);
    return {begin, begin + base + (i < extra ? 1 : 0)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Serial reference: plain loops, no Eigen products.
// ---------------------------------------------------------------------------

namespace serial {

void dense_forward(const WeightView& W, const BiasView& b, const Eigen::MatrixXd& X, Eigen::MatrixXd& Y,
                   bool relu) {
    const Eigen::Index out = W.rows(), in = W.cols(), batch = X.cols();
    Y.resize(out, batch);
    for (Eigen::Index s = 0; s < batch; ++s) {
        for (Eigen::Index o = 0; o < out; ++o) {
            double acc = b(o);
            for (Eigen::Index i = 0; i < in; ++i) acc += W(o, i) * X(i, s);
            Y(o, s) = relu ? std::max(acc, 0.0) : acc;
        }
    }
}

void dense_grad_params(const Eigen::MatrixXd& D, const Eigen::MatrixXd& X, MutableWeightView& dW,
                       MutableBiasView& db) {
    const Eigen::Index out = D.rows(), in = X.rows(), batch = D.cols();
    for (Eigen::Index o = 0; o < out; ++o) {
        double bias_acc = 0.0;
        for (Eigen::Index s = 0; s < batch; ++s) bias_acc += D(o, s);
        db(o) = bias_acc;
        for (Eigen::Index i = 0; i < in; ++i) {
            double acc = 0.0;
            for (Eigen::Index s = 0; s < batch; ++s) acc += D(o, s) * X(i, s);
            dW(o, i) = acc;
        }
    }
}

void dense_grad_input(const WeightView& W, const Eigen::MatrixXd& D, Eigen::MatrixXd& dX) {
    const Eigen::Index out = W.rows(), in = W.cols(), batch = D.cols();
    dX.resize(in, batch);
    for (Eigen::Index s = 0; s < batch; ++s) {
        for (Eigen::Index i = 0; i < in; ++i) {
            double acc = 0.0;
            for (Eigen::Index o = 0; o < out; ++o) acc += W(o, i) * D(o, s);
            dX(i, s) = acc;
        }
    }
}

}  // namespace serial

void dense_forward(const WeightView& W, const BiasView& b, const Eigen::MatrixXd& X, Eigen::MatrixXd& Y,
                   bool relu, Execution exec) {
    if (X.rows() != W.cols() || b.size() != W.rows()) throw std::invalid_argument("dense_forward: shape mismatch");
    if (exec == Execution::kSerial) {
        serial::dense_forward(W, b, X, Y, relu);
        return;
    }
    const Eigen::Index batch = X.cols();
    Y.resize(W.rows(), batch);
    const int parts = std::max(1, std::min<int>(thread_count(), static_cast<int>(batch)));
#pragma omp parallel for schedule(static)
    for (int p = 0; p < parts; ++p) {
        const auto [begin, end] = chunk(batch, parts, p);
        if (end <= begin) continue;
        auto Yc = Y.middleCols(begin, end - begin);
        Yc.noalias() = W * X.middleCols(begin, end - begin);
        Yc.colwise() += b;
        if (relu) Yc = Yc.cwiseMax(0.0);
    }
}

void dense_grad_params(const Eigen::MatrixXd& D, const Eigen::MatrixXd& X, MutableWeightView& dW,
                       MutableBiasView& db, Execution exec) {
    if (D.cols() != X.cols() || dW.rows() != D.rows() || dW.cols() != X.rows() || db.size() != D.rows()) {
        throw std::invalid_argument("dense_grad_params: shape mismatch");
    }
    if (exec == Execution::kSerial) {
        serial::dense_grad_params(D, X, dW, db);
        return;
    }
    const Eigen::Index out = D.rows();
    const int parts = std::max(1, std::min<int>(thread_count(), static_cast<int>(out)));
#pragma omp parallel for schedule(static)
    for (int p = 0; p < parts; ++p) {
        const auto [begin, end] = chunk(out, parts, p);
        if (end <= begin) continue;
        dW.middleRows(begin, end - begin).noalias() = D.middleRows(begin, end - begin) * X.transpose();
        db.segment(begin, end - begin) = D.middleRows(begin, end - begin).rowwise().sum();
    }
}

void dense_grad_input(const WeightView& W, const Eigen::MatrixXd& D, Eigen::MatrixXd& dX, Execution exec) {
    if (D.rows() != W.rows()) throw std::invalid_argument("dense_grad_input: shape mismatch");
    if (exec == Execution::kSerial) {
        serial::dense_grad_input(W, D, dX);
        return;
    }
    const Eigen::Index batch = D.cols();
    dX.resize(W.cols(), batch);
    const int parts = std::max(1, std::min<int>(thread_count(), static_cast<int>(batch)));
#pragma omp parallel for schedule(static)
    for (int p = 0; p < parts; ++p) {
        const auto [begin, end] = chunk(batch, parts, p);
        if (end <= begin) continue;
        dX.middleCols(begin, end - begin).noalias() = W.transpose() * D.middleCols(begin, end - begin);
    }
}

void relu_backward(const Eigen::MatrixXd& Y, Eigen::MatrixXd& D, Execution exec) {
    if (Y.rows() != D.rows() || Y.cols() != D.cols()) throw std::invalid_argument("relu_backward: shape mismatch");
    const Eigen::Index n = Y.size();
    double* d = D.data();
    const double* y = Y.data();
    if (exec == Execution::kSerial) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!(y[i] > 0.0)) d[i] = 0.0;
        }
        return;
    }
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(y[i] > 0.0)) d[i] = 0.0;
    }
}

void column_max(const Eigen::MatrixXd& Q, std::span<double> out, Execution exec) {
    if (static_cast<Eigen::Index>(out.size()) != Q.cols()) throw std::invalid_argument("column_max: size mismatch");
    const Eigen::Index cols = Q.cols(), rows = Q.rows();
    const auto body = [&](Eigen::Index c) {
        double best = Q(0, c);
        for (Eigen::Index r = 1; r < rows; ++r) best = std::max(best, Q(r, c));
        out[static_cast<std::size_t>(c)] = best;
    };
    if (exec == Execution::kSerial) {
        for (Eigen::Index c = 0; c < cols; ++c) body(c);
        return;
    }
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < cols; ++c) body(c);
}

void adam_update(std::span<double> params, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, const AdamHyper& h, long step, Execution exec) {
    if (grad.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
        throw std::invalid_argument("adam_update: size mismatch");
    }
    if (step < 1) throw std::invalid_argument("adam_update: step is 1-based");
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(step));
    const auto n = static_cast<long>(params.size());
    const auto body = [&](long i) {
        const double g = grad[i];
        m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g;
        v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
        // flush moments of idle outputs before they decay into subnormals
        if (std::abs(m[i]) < kMomentFloor) m[i] = 0.0;
        if (v[i] < kMomentFloor) v[i] = 0.0;
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        params[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.eps);
    };
    if (exec == Execution::kSerial) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) body(i);
}

}  // namespace snapq::kernels
