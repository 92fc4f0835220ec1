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
#include "snapq/qnetwork.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

namespace snapq {
namespace {

using kernels::RowMajorMatrix;

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(rng);
    return m;
}

double max_rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

class KernelTest : public ::testing::Test {
protected:
    std::mt19937_64 rng{21};
    RowMajorMatrix W_store = random_matrix(37, 29, rng);
    Eigen::VectorXd b_store = random_matrix(37, 1, rng);
    Eigen::MatrixXd X = random_matrix(29, 53, rng);
    kernels::WeightView W{W_store.data(), 37, 29};
    kernels::BiasView b{b_store.data(), 37};
};

TEST_F(KernelTest, ForwardSerialMatchesParallel) {
    for (bool relu : {false, true}) {
        Eigen::MatrixXd ys, yp;
        kernels::dense_forward(W, b, X, ys, relu, Execution::kSerial);
        kernels::dense_forward(W, b, X, yp, relu, Execution::kParallel);
        EXPECT_LT(max_rel_diff(ys, yp), 1e-13);
        Eigen::MatrixXd expected = (W_store * X).colwise() + b_store;
        if (relu) expected = expected.cwiseMax(0.0);
        EXPECT_LT(max_rel_diff(ys, expected), 1e-13);
    }
}

TEST_F(KernelTest, GradParamsSerialMatchesParallel) {
    const Eigen::MatrixXd D = random_matrix(37, 53, rng);
    RowMajorMatrix dWs(37, 29), dWp(37, 29);
    Eigen::VectorXd dbs(37), dbp(37);
    kernels::MutableWeightView vs(dWs.data(), 37, 29), vp(dWp.data(), 37, 29);
    kernels::MutableBiasView bs(dbs.data(), 37), bp(dbp.data(), 37);
    kernels::dense_grad_params(D, X, vs, bs, Execution::kSerial);
    kernels::dense_grad_params(D, X, vp, bp, Execution::kParallel);
    EXPECT_LT(max_rel_diff(dWs, dWp), 1e-13);
    EXPECT_LT(max_rel_diff(dbs, dbp), 1e-13);
    EXPECT_LT(max_rel_diff(dWs, D * X.transpose()), 1e-13);
    EXPECT_LT(max_rel_diff(dbs, D.rowwise().sum()), 1e-13);
}

TEST_F(KernelTest, GradInputSerialMatchesParallel) {
    const Eigen::MatrixXd D = random_matrix(37, 53, rng);
    Eigen::MatrixXd s, p;
    kernels::dense_grad_input(W, D, s, Execution::kSerial);
    kernels::dense_grad_input(W, D, p, Execution::kParallel);
    EXPECT_LT(max_rel_diff(s, p), 1e-13);
    EXPECT_LT(max_rel_diff(s, W_store.transpose() * D), 1e-13);
}

TEST_F(KernelTest, ReluBackwardAndColumnMax) {
    Eigen::MatrixXd Y = random_matrix(37, 53, rng).cwiseMax(0.0);
    Eigen::MatrixXd Ds = random_matrix(37, 53, rng), Dp = Ds;
    kernels::relu_backward(Y, Ds, Execution::kSerial);
    kernels::relu_backward(Y, Dp, Execution::kParallel);
    EXPECT_EQ(Ds, Dp);
    for (Eigen::Index j = 0; j < Y.cols(); ++j)
        for (Eigen::Index i = 0; i < Y.rows(); ++i)
            if (Y(i, j) <= 0.0) EXPECT_EQ(Ds(i, j), 0.0);

    std::vector<double> ms(53), mp(53);
    kernels::column_max(X, ms, Execution::kSerial);
    kernels::column_max(X, mp, Execution::kParallel);
    EXPECT_EQ(ms, mp);
    for (Eigen::Index j = 0; j < X.cols(); ++j) EXPECT_EQ(ms[static_cast<std::size_t>(j)], X.col(j).maxCoeff());
}

TEST(Adam, SerialAndParallelAreBitwiseEqual) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    const std::size_t N = 10007;
    std::vector<double> p1(N), g(N), m1(N, 0.0), v1(N, 0.0);
    for (auto& x : p1) x = n(rng);
    std::vector<double> p2 = p1, m2 = m1, v2 = v1;
    for (long step = 1; step <= 5; ++step) {
        for (auto& x : g) x = n(rng);
        kernels::adam_update(p1, g, m1, v1, {}, step, Execution::kSerial);
        kernels::adam_update(p2, g, m2, v2, {}, step, Execution::kParallel);
    }
    EXPECT_EQ(p1, p2);
    EXPECT_EQ(m1, m2);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    std::vector<double> p{1.0, -2.0}, g{0.5, -3.0}, m(2, 0.0), v(2, 0.0);
    kernels::adam_update(p, g, m, v, {}, 1, Execution::kSerial);
    EXPECT_NEAR(p[0], 1.0 - 1e-3, 1e-10);
    EXPECT_NEAR(p[1], -2.0 + 1e-3, 1e-10);
}

TEST(Adam, ZeroGradientLeavesParametersAlone) {
    std::vector<double> p{1.0, 2.0}, g{0.0, 0.0}, m(2, 0.0), v(2, 0.0);
    kernels::adam_update(p, g, m, v, {}, 1, Execution::kParallel);
    EXPECT_EQ(p, (std::vector<double>{1.0, 2.0}));
}

TEST(Adam, DecayedMomentsFlushToZero) {
    std::vector<double> p{1.0}, g{0.0}, m{2.0 * kernels::kMomentFloor}, v{2.0 * kernels::kMomentFloor};
    kernels::adam_update(p, g, m, v, {}, 10, Execution::kSerial);
    EXPECT_GT(v[0], kernels::kMomentFloor);
    // 0.999^800 < 0.5
    for (long s = 11; s < 810; ++s) kernels::adam_update(p, g, m, v, {}, s, Execution::kSerial);
    EXPECT_EQ(m[0], 0.0);
    EXPECT_EQ(v[0], 0.0);
}

TEST(QNetwork, ZeroNetworkGivesZeroQ) {
    QNetwork net({15, 8, 8, 5});
    const std::vector<double> obs(15, 0.7);
    EXPECT_TRUE(net.forward(obs).isZero(0.0));
}

TEST(QNetwork, ConstantHead) {
    QNetwork net({15, 8, 8, 5});
    for (Eigen::Index i = 0; i < 5; ++i) net.params()[net.bias_offset(2) + static_cast<std::size_t>(i)] = 0.5 * i;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    for (int t = 0; t < 5; ++t) {
        std::vector<double> obs(15);
        for (auto& x : obs) x = n(rng);
        const Eigen::VectorXd q = net.forward(obs);
        for (Eigen::Index i = 0; i < 5; ++i) EXPECT_EQ(q(i), 0.5 * i);
    }
}

// Hand-evaluated 2-2-2 network.
TEST(QNetwork, ToyForwardPass) {
    QNetwork net({2, 2, 2});
    // layer 0: W = [[1, -2], [0.5, 3]], b = [0.1, -4]
    // layer 1: W = [[2, 1], [-1, 0.25]], b = [0.5, -0.5]
    const std::vector<double> p{1, -2, 0.5, 3, 0.1, -4, 2, 1, -1, 0.25, 0.5, -0.5};
    std::copy(p.begin(), p.end(), net.params().begin());
    const std::vector<double> x{1.5, 0.25};
    // h = relu([1.5 - 0.5 + 0.1, 0.75 + 0.75 - 4]) = [1.1, 0]
    // q = [2.2 + 0.5, -1.1 - 0.5]
    const Eigen::VectorXd q = net.forward(x);
    EXPECT_NEAR(q(0), 2.7, 1e-12);
    EXPECT_NEAR(q(1), -1.6, 1e-12);
    EXPECT_NEAR(net.forward(x, Execution::kParallel)(0), 2.7, 1e-12);
}

TEST(QNetwork, LayoutOffsets) {
    QNetwork net({15, 256, 256, 625});
    EXPECT_EQ(net.param_count(), 15u * 256 + 256 + 256u * 256 + 256 + 256u * 625 + 625);
    EXPECT_EQ(net.bias_offset(0), 15u * 256);
    EXPECT_EQ(net.weight_offset(1), 15u * 256 + 256);
}

TEST(QNetwork, FanInInitialisationBounds) {
    QNetwork net({15, 64, 64, 10});
    std::mt19937_64 rng(2);
    net.init_fan_in_uniform(rng);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(net.layer_sizes()[l]));
        EXPECT_LE(net.weights(l).cwiseAbs().maxCoeff(), bound);
        EXPECT_LE(net.bias(l).cwiseAbs().maxCoeff(), bound);
        EXPECT_GT(net.weights(l).cwiseAbs().maxCoeff(), 0.5 * bound);
    }
}

TEST(QNetwork, BatchMatchesSingleForward) {
    QNetwork net({15, 32, 32, 7});
    std::mt19937_64 rng(3);
    net.init_fan_in_uniform(rng);
    const Eigen::MatrixXd X = random_matrix(15, 9, rng);
    const Eigen::MatrixXd Q = net.forward_batch(X, Execution::kParallel);
    for (Eigen::Index j = 0; j < 9; ++j) {
        const std::vector<double> x(X.col(j).data(), X.col(j).data() + 15);
        EXPECT_LT((net.forward(x) - Q.col(j)).cwiseAbs().maxCoeff(), 1e-13);
    }
}

double gradient_check(const std::vector<std::size_t>& sizes, std::uint64_t seed, Execution exec) {
    QNetwork net(sizes);
    std::mt19937_64 rng(seed);
    net.init_fan_in_uniform(rng);
    const Eigen::Index B = 6;
    const Eigen::MatrixXd X = random_matrix(static_cast<Eigen::Index>(sizes.front()), B, rng);
    std::uniform_int_distribution<std::size_t> pick(0, sizes.back() - 1);
    std::vector<std::size_t> actions(B);
    for (auto& a : actions) a = pick(rng);
    const Eigen::VectorXd y = random_matrix(B, 1, rng);

    std::vector<double> grad(net.param_count());
    BackpropWorkspace ws;
    taken_action_loss_grad(net, X, actions, y, grad, ws, exec);

    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < net.param_count(); ++i) {
        const double orig = net.params()[i];
        net.params()[i] = orig + h;
        const double lp = taken_action_loss(net, X, actions, y, Execution::kSerial);
        net.params()[i] = orig - h;
        const double lm = taken_action_loss(net, X, actions, y, Execution::kSerial);
        net.params()[i] = orig;
        const double fd = (lp - lm) / (2 * h);
        const double rel = std::abs(fd - grad[i]) / std::max(1e-6, std::abs(fd) + std::abs(grad[i]));
        worst = std::max(worst, rel);
    }
    return worst;
}

TEST(Backprop, MatchesFiniteDifferences) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        EXPECT_LT(gradient_check({15, 8, 8, 5}, seed, Execution::kSerial), 1e-4);
        EXPECT_LT(gradient_check({15, 8, 8, 5}, seed, Execution::kParallel), 1e-4);
    }
    EXPECT_LT(gradient_check({2, 2, 2}, 9, Execution::kSerial), 1e-4);
    EXPECT_LT(gradient_check({3, 4, 5, 4, 2}, 10, Execution::kSerial), 1e-4);
}

TEST(Backprop, SerialAndParallelGradientsAgree) {
    QNetwork net({15, 64, 64, 40});
    std::mt19937_64 rng(4);
    net.init_fan_in_uniform(rng);
    const Eigen::MatrixXd X = random_matrix(15, 32, rng);
    std::vector<std::size_t> actions(32);
    for (std::size_t i = 0; i < actions.size(); ++i) actions[i] = (7 * i) % 40;
    const Eigen::VectorXd y = random_matrix(32, 1, rng);
    std::vector<double> gs(net.param_count()), gp(net.param_count());
    BackpropWorkspace ws;
    const double ls = taken_action_loss_grad(net, X, actions, y, gs, ws, Execution::kSerial);
    const double lp = taken_action_loss_grad(net, X, actions, y, gp, ws, Execution::kParallel);
    EXPECT_NEAR(ls, lp, 1e-12 * ls);
    double worst = 0.0;
    for (std::size_t i = 0; i < gs.size(); ++i) worst = std::max(worst, std::abs(gs[i] - gp[i]));
    EXPECT_LT(worst, 1e-12);
}

TEST(Argmax, LowestIndexWinsTies) {
    EXPECT_EQ(argmax_lowest(Eigen::VectorXd::Zero(5)), 0u);
    Eigen::VectorXd q(4);
    q << 1.0, 3.0, 3.0, 2.0;
    EXPECT_EQ(argmax_lowest(q), 1u);
}

}  // namespace
}  // namespace snapq
