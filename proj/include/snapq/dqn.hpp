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

#ifndef SNAPQ_DQN_HPP
#define SNAPQ_DQN_HPP

#include "snapq/env.hpp"
#include "snapq/execution.hpp"
#include "snapq/mlp_kernels.hpp"
#include "snapq/qnetwork.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace snapq {

struct TrainConfig {
    double gamma = 0.99;
    std::size_t batch_size = 128;
    double learning_rate = 1e-3;
    double reward_scale = 1.0;          // rewards are multiplied by this inside TD targets only
    long target_update_period = 1000;   // trainer steps
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    long epsilon_decay_steps = 50000;   // environment steps
    std::size_t replay_capacity = 100000;
    long warmup_steps = 2000;
    long total_episodes = 300;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden_sizes{256, 256};
    bool log_wall_time = false;         // wall-clock column in the curve breaks byte-identical reruns

    void validate() const;
};

/// Fixed-capacity ring of transitions sampled uniformly with replacement.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(const Transition& t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return items_[i]; }

    /// Indices into the buffer, uniform over stored items.
    std::vector<std::size_t> sample_indices(std::size_t batch, std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> items_;
};

/// Linear decay from start to end over decay_steps environment steps, then constant.
double epsilon_at(const TrainConfig& cfg, long env_step);

/// y = c r for failure terminations, c r + gamma * max_a' Q_target(next_obs) otherwise (time limits bootstrap).
Eigen::VectorXd td_targets(std::span<const Transition* const> batch, const QNetwork& target, double gamma,
                           Execution exec, double reward_scale = 1.0);

struct AdamState {
    AlignedVector m;
    AlignedVector v;
    long step = 0;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One Adam update on the mean squared TD error; returns the loss before the update.
double train_step(QNetwork& net, const QNetwork& target, std::span<const Transition* const> batch,
                  const TrainConfig& cfg, AdamState& adam, BackpropWorkspace& ws, Execution exec);

/// Epsilon-greedy: uniform over all actions with probability epsilon, else argmax (lowest index on ties).
std::size_t act(const QNetwork& net, const Observation& obs, double epsilon, std::mt19937_64& rng);

/// Hard copy when step is a multiple of period; returns whether a copy happened.
bool sync_target(const QNetwork& net, QNetwork& target, long period, long step);

struct CurveRow {
    long episode = 0;
    double episode_return = 0.0;
    double mean_loss = 0.0;   // NaN when no trainer step ran during the episode
    double epsilon = 0.0;     // at the end of the episode
    double wall_seconds = 0.0;
};

struct TrainResult {
    QNetwork net;
    std::vector<CurveRow> curve;
    std::vector<Termination> terminations;   // per episode
    long env_steps = 0;
    long train_steps = 0;
    long dwell_violations = 0;               // episodes whose executed gains switched faster than N_d
    long min_observed_dwell = -1;            // smallest change-to-change interval seen, -1 if none
    double wall_seconds = 0.0;
};

using EnvFactory = std::function<QuadEnv()>;
using EpisodeCallback = std::function<void(const CurveRow&)>;

/// Seed for the environment reset of a given episode.
std::uint64_t episode_seed(std::uint64_t seed, long episode);

TrainResult train(const EnvFactory& make_env, const TrainConfig& cfg, Execution exec = Execution::kParallel,
                  const EpisodeCallback& on_episode = {});

void write_curve_csv(const std::filesystem::path& path, std::span<const CurveRow> curve);
std::vector<CurveRow> read_curve_csv(const std::filesystem::path& path);

struct Checkpoint {
    QNetwork net;
    nlohmann::json header;
};

/**
 * One line of JSON (layer sizes, config echo, seed, trainer steps) terminated by
 * '\n', then param_count little-endian float64 values in QNetwork::params() order.
 */
void save_checkpoint(const std::filesystem::path& path, const QNetwork& net, const nlohmann::json& extra);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace snapq

#endif  // SNAPQ_DQN_HPP
