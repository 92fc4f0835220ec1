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

#include "snapq/dqn.hpp"
#include "snapq/gain_library.hpp"
#include "snapq/mlp_kernels.hpp"
#include "snapq/qnetwork.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

using namespace snapq;

Execution mode(const benchmark::State& state) {
    return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel;
}

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(rng);
    return m;
}

void BM_DenseForward(benchmark::State& state) {
    const kernels::RowMajorMatrix Ws = random_matrix(625, 256, 1);
    const Eigen::VectorXd bs = random_matrix(625, 1, 2);
    const Eigen::MatrixXd X = random_matrix(256, 128, 3);
    const kernels::WeightView W(Ws.data(), 625, 256);
    const kernels::BiasView b(bs.data(), 625);
    Eigen::MatrixXd Y;
    for (auto _ : state) {
        kernels::dense_forward(W, b, X, Y, true, mode(state));
        benchmark::DoNotOptimize(Y.data());
    }
    state.counters["GFLOPS"] =
        benchmark::Counter(2.0 * 625 * 256 * 128 * state.iterations(), benchmark::Counter::kIsRate, benchmark::Counter::kIs1000);
}

void BM_DenseGradParams(benchmark::State& state) {
    const Eigen::MatrixXd D = random_matrix(256, 128, 4);
    const Eigen::MatrixXd X = random_matrix(256, 128, 5);
    kernels::RowMajorMatrix dWs(256, 256);
    Eigen::VectorXd dbs(256);
    kernels::MutableWeightView dW(dWs.data(), 256, 256);
    kernels::MutableBiasView db(dbs.data(), 256);
    for (auto _ : state) {
        kernels::dense_grad_params(D, X, dW, db, mode(state));
        benchmark::DoNotOptimize(dWs.data());
    }
}

void BM_Adam(benchmark::State& state) {
    const std::size_t n = 15 * 256 + 256 + 256 * 256 + 256 + 256 * 625 + 625;
    std::vector<double> p(n, 0.1), g(n, 0.01), m(n, 0.0), v(n, 0.0);
    long step = 0;
    for (auto _ : state) {
        kernels::adam_update(p, g, m, v, {}, ++step, mode(state));
        benchmark::DoNotOptimize(p.data());
    }
}

void BM_TrainStep(benchmark::State& state) {
    QNetwork net({15, 256, 256, 625});
    std::mt19937_64 rng(6);
    net.init_fan_in_uniform(rng);
    const QNetwork target = net;
    std::vector<Transition> store(128);
    std::normal_distribution<double> n;
    std::uniform_int_distribution<std::size_t> pick(0, 624);
    for (auto& t : store) {
        for (auto& x : t.obs) x = n(rng);
        for (auto& x : t.next_obs) x = n(rng);
        t.action = pick(rng);
        t.reward = -std::abs(n(rng));
    }
    std::vector<const Transition*> batch;
    for (const auto& t : store) batch.push_back(&t);
    TrainConfig cfg;
    AdamState adam(net.param_count());
    BackpropWorkspace ws;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_step(net, target, batch, cfg, adam, ws, mode(state)));
    }
}

void BM_BuildActionTable(benchmark::State& state) {
    for (auto _ : state) {
        const ActionTable t = build_action_table(GainLibrarySpec{}, mode(state));
        benchmark::DoNotOptimize(t.entries.data());
    }
}

BENCHMARK(BM_DenseForward)->Arg(0)->Arg(1)->ArgName("parallel");
BENCHMARK(BM_DenseGradParams)->Arg(0)->Arg(1)->ArgName("parallel");
BENCHMARK(BM_Adam)->Arg(0)->Arg(1)->ArgName("parallel");
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildActionTable)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
