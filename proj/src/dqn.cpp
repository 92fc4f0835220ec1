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

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace snapq {

void TrainConfig::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
    if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (!(reward_scale > 0.0 && std::isfinite(reward_scale))) throw std::invalid_argument("reward scale must be positive");
    if (target_update_period < 1) throw std::invalid_argument("target update period must be >= 1");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
        throw std::invalid_argument("epsilon schedule must stay within [0, 1]");
    }
    if (epsilon_decay_steps < 0) throw std::invalid_argument("epsilon decay steps must be >= 0");
    if (replay_capacity < batch_size) throw std::invalid_argument("replay capacity must be >= batch size");
    if (warmup_steps < 0) throw std::invalid_argument("warmup steps must be >= 0");
    if (total_episodes < 0) throw std::invalid_argument("total episodes must be >= 0");
    for (auto h : hidden_sizes) {
        if (h == 0) throw std::invalid_argument("hidden sizes must be positive");
    }
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    items_.reserve(capacity);
}

void ReplayBuffer::push(const Transition& t) {
    if (items_.size() < capacity_) {
        items_.push_back(t);
    } else {
        items_[cursor_] = t;
    }
    cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, std::mt19937_64& rng) const {
    if (items_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<std::size_t> out(batch);
    for (auto& i : out) i = pick(rng);
    return out;
}

double epsilon_at(const TrainConfig& cfg, long env_step) {
    if (cfg.epsilon_decay_steps <= 0 || env_step >= cfg.epsilon_decay_steps) return cfg.epsilon_end;
    const double frac = static_cast<double>(env_step) / static_cast<double>(cfg.epsilon_decay_steps);
    return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start);
}

namespace {

Eigen::MatrixXd stack_observations(std::span<const Transition* const> batch, bool next) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(kObservationSize), static_cast<Eigen::Index>(batch.size()));
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const Observation& o = next ? batch[b]->next_obs : batch[b]->obs;
        for (std::size_t i = 0; i < kObservationSize; ++i) {
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = o[i];
        }
    }
    return X;
}

}  // namespace

Eigen::VectorXd td_targets(std::span<const Transition* const> batch, const QNetwork& target, double gamma,
                           Execution exec, double reward_scale) {
    if (batch.empty()) throw std::invalid_argument("td_targets: empty batch");
    const Eigen::MatrixXd q_next = target.forward_batch(stack_observations(batch, true), exec);
    std::vector<double> best(batch.size());
    kernels::column_max(q_next, best, exec);
    Eigen::VectorXd y(static_cast<Eigen::Index>(batch.size()));
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const bool terminal = batch[b]->termination == Termination::kFailure;
        y(static_cast<Eigen::Index>(b)) = reward_scale * batch[b]->reward + (terminal ? 0.0 : gamma * best[b]);
    }
    return y;
}

double train_step(QNetwork& net, const QNetwork& target, std::span<const Transition* const> batch,
                  const TrainConfig& cfg, AdamState& adam, BackpropWorkspace& ws, Execution exec) {
    const Eigen::VectorXd y = td_targets(batch, target, cfg.gamma, exec, cfg.reward_scale);
    const Eigen::MatrixXd X = stack_observations(batch, false);
    std::vector<std::size_t> actions(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) actions[b] = batch[b]->action;

    if (adam.m.size() != net.param_count()) adam = AdamState(net.param_count());
    AlignedVector grad(net.param_count());
    const double loss = taken_action_loss_grad(net, X, actions, y, grad, ws, exec);

    kernels::AdamHyper hyper;
    hyper.lr = cfg.learning_rate;
    ++adam.step;
    kernels::adam_update(net.params(), grad, adam.m, adam.v, hyper, adam.step, exec);
    return loss;
}

std::size_t act(const QNetwork& net, const Observation& obs, double epsilon, std::mt19937_64& rng) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
        std::uniform_int_distribution<std::size_t> pick(0, net.output_size() - 1);
        return pick(rng);
    }
    return argmax_lowest(net.forward(obs, Execution::kParallel));
}

bool sync_target(const QNetwork& net, QNetwork& target, long period, long step) {
    if (period < 1) throw std::invalid_argument("target period must be >= 1");
    if (step % period != 0) return false;
    target = net;
    return true;
}

std::uint64_t episode_seed(std::uint64_t seed, long episode) {
    // splitmix64 of (seed, episode)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(episode) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

TrainResult train(const EnvFactory& make_env, const TrainConfig& cfg, Execution exec,
                  const EpisodeCallback& on_episode) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    QuadEnv env = make_env();

    std::vector<std::size_t> sizes{kObservationSize};
    sizes.insert(sizes.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
    sizes.push_back(env.table().size());

    TrainResult result;
    std::mt19937_64 init_rng(cfg.seed);
    result.net = QNetwork(sizes);
    result.net.init_fan_in_uniform(init_rng);
    QNetwork target = result.net;

    std::mt19937_64 agent_rng(episode_seed(cfg.seed, -1));
    std::mt19937_64 replay_rng(episode_seed(cfg.seed, -2));
    ReplayBuffer replay(cfg.replay_capacity);
    AdamState adam(result.net.param_count());
    BackpropWorkspace ws;
    std::vector<const Transition*> batch(cfg.batch_size);
    std::vector<std::size_t> executed;

    for (long ep = 0; ep < cfg.total_episodes; ++ep) {
        Observation obs = env.reset(episode_seed(cfg.seed, ep));
        double ret = 0.0, loss_sum = 0.0;
        long loss_count = 0;
        executed.clear();
        Termination term = Termination::kNone;
        while (true) {
            const double eps = epsilon_at(cfg, result.env_steps);
            const std::size_t a = act(result.net, obs, eps, agent_rng);
            const Transition tr = env.step(a);
            executed.push_back(tr.action);
            replay.push(tr);
            ret += tr.reward;
            ++result.env_steps;

            if (result.env_steps >= cfg.warmup_steps && replay.size() >= cfg.batch_size) {
                const auto idx = replay.sample_indices(cfg.batch_size, replay_rng);
                for (std::size_t b = 0; b < idx.size(); ++b) batch[b] = &replay[idx[b]];
                loss_sum += train_step(result.net, target, batch, cfg, adam, ws, exec);
                ++loss_count;
                ++result.train_steps;
                sync_target(result.net, target, cfg.target_update_period, result.train_steps);
            }
            obs = tr.next_obs;
            if (tr.done) {
                term = tr.termination;
                break;
            }
        }

        const long interval = min_change_interval(executed);
        if (interval >= 0) {
            if (interval < env.dwell_steps()) ++result.dwell_violations;
            result.min_observed_dwell =
                result.min_observed_dwell < 0 ? interval : std::min(result.min_observed_dwell, interval);
        }

        CurveRow row;
        row.episode = ep;
        row.episode_return = ret;
        row.mean_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count)
                                       : std::numeric_limits<double>::quiet_NaN();
        row.epsilon = epsilon_at(cfg, result.env_steps);
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        row.wall_seconds = cfg.log_wall_time ? elapsed : 0.0;
        result.curve.push_back(row);
        result.terminations.push_back(term);
        if (on_episode) on_episode(row);
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_curve_csv(const std::filesystem::path& path, std::span<const CurveRow> curve) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "episode,return,mean_loss,epsilon,wall_seconds\n";
    for (const auto& r : curve) {
        os << r.episode << ',' << fmt_double(r.episode_return) << ',' << fmt_double(r.mean_loss) << ','
           << fmt_double(r.epsilon) << ',' << fmt_double(r.wall_seconds) << '\n';
    }
}

std::vector<CurveRow> read_curve_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(is, line);
    if (line != "episode,return,mean_loss,epsilon,wall_seconds") {
        throw std::runtime_error("unexpected curve header in " + path.string());
    }
    std::vector<CurveRow> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5) throw std::runtime_error("malformed curve row: " + line);
        CurveRow r;
        r.episode = std::stol(cells[0]);
        r.episode_return = std::strtod(cells[1].c_str(), nullptr);
        r.mean_loss = std::strtod(cells[2].c_str(), nullptr);
        r.epsilon = std::strtod(cells[3].c_str(), nullptr);
        r.wall_seconds = std::strtod(cells[4].c_str(), nullptr);
        out.push_back(r);
    }
    return out;
}

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFFULL) << (8 * (7 - i));
        return r;
    }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const QNetwork& net, const nlohmann::json& extra) {
    nlohmann::json header = extra.is_object() ? extra : nlohmann::json::object();
    header["format"] = "snapq-qnetwork";
    header["version"] = 1;
    header["layer_sizes"] = net.layer_sizes();
    header["param_count"] = net.param_count();
    header["dtype"] = "float64";
    header["byte_order"] = "little";
    header["layout"] = "layer-major; weights row-major (out x in), then bias";

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << header.dump() << '\n';
    for (double v : net.params()) {
        const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
        char bytes[8];
        std::memcpy(bytes, &bits, 8);
        os.write(bytes, 8);
    }
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty checkpoint " + path.string());

    Checkpoint ck;
    try {
        ck.header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("checkpoint header is not JSON: " + std::string(e.what()));
    }
    if (ck.header.value("format", "") != "snapq-qnetwork") throw std::runtime_error("not a snapq checkpoint");
    const auto sizes = ck.header.at("layer_sizes").get<std::vector<std::size_t>>();
    ck.net = QNetwork(sizes);
    if (ck.header.at("param_count").get<std::size_t>() != ck.net.param_count()) {
        throw std::runtime_error("checkpoint param_count does not match layer sizes");
    }
    auto params = ck.net.params();
    for (double& v : params) {
        char bytes[8];
        if (!is.read(bytes, 8)) throw std::runtime_error("truncated checkpoint " + path.string());
        std::uint64_t bits = 0;
        std::memcpy(&bits, bytes, 8);
        v = std::bit_cast<double>(to_little_endian(bits));
    }
    if (is.peek() != std::char_traits<char>::eof()) throw std::runtime_error("trailing bytes in checkpoint");
    return ck;
}

}  // namespace snapq
