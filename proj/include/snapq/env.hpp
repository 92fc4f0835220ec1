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

#ifndef SNAPQ_ENV_HPP
#define SNAPQ_ENV_HPP

#include "snapq/dynamics.hpp"
#include "snapq/flat_controller.hpp"
#include "snapq/gain_library.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>

namespace snapq {

inline constexpr std::size_t kObservationSize = 15;

/// Flattened State14 followed by the phase min(t / T_f, 1).
using Observation = std::array<double, kObservationSize>;

struct RewardWeights {
    double w_r = 4.0;
    double w_v = 1.0;
    double w_eta = 1.0;
    double w_omega = 0.1;
    double w_u = 1e-4;
    double w_s = 0.01;

    void validate() const;
};

struct InitialStateSpec {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double position_half_width = 1.0;    // m, uniform cube
    double attitude_half_width_deg = 5.0;  // uniform on each Euler angle
};

struct AbortLimits {
    double max_tilt_deg = 80.0;
    double max_position_error = 20.0;  // m, distance to r_star
    double abort_reward = -100.0;
};

struct EpisodeConfig {
    double dt = 0.01;
    double episode_length = 10.0;
    double T_f = 5.0;
    InitialStateSpec initial;
    Eigen::Vector3d r_star{1.0, 1.0, 1.5};
    AbortLimits abort;
    bool snap_feedforward = false;
    bool penalize_physical_input = false;  // reward uses (u_T, tau) instead of (u_T, u_eta)

    void validate() const;
    long steps() const;
};

enum class Termination { kNone, kTimeLimit, kFailure };

const char* termination_name(Termination t);

struct Transition {
    Observation obs{};
    std::size_t action = 0;   // effective (post-dwell) action
    double reward = 0.0;
    Observation next_obs{};
    bool done = false;
    Termination termination = Termination::kNone;
};

/// Everything a rollout log row needs about one step.
struct StepRecord {
    double t = 0.0;
    State14 state;                 // state at the start of the step
    std::size_t proposed_action = 0;
    std::size_t action = 0;
    GainVector gains;
    double reward = 0.0;
    PhysicalInput input;
    Eigen::Vector4d virtual_u = Eigen::Vector4d::Zero();
    ReferenceSample ref;
    ExternalErrorState errors;
    Termination termination = Termination::kNone;
    std::string failure_reason;
};

/// Flat penalty terms; reward = -(w_r|e_r|^2 + w_v|e_v|^2 + w_eta|eta|^2 + w_omega|omega|^2) - w_u|u|^2 - w_s [switch].
double reward_fn(const Eigen::Vector3d& e_r, const Eigen::Vector3d& e_v, const Eigen::Vector3d& eta,
                 const Eigen::Vector3d& omega, const Eigen::Vector4d& u, bool switched,
                 const RewardWeights& weights);

Observation make_observation(const State14& x, double t, double T_f);

/**
 * Gain-scheduling MDP: one step = dwell filter -> table lookup -> snap controller
 * -> zero-order-hold RK4 step -> reward. Single-threaded mutable state.
 */
class QuadEnv {
public:
    struct Snapshot {
        State14 state;
        long step = 0;
        bool done = true;
        std::optional<std::size_t> prev_action;
        DwellGuard guard{0};
        Reference reference{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), 1.0};
    };

    QuadEnv(VehicleParams params, EpisodeConfig config, RewardWeights weights,
            std::shared_ptr<const ActionTable> table, long dwell_steps);

    Observation reset(std::uint64_t seed);
    /// Deterministic start from a given position and attitude (zero rates, zero thrust deviation).
    Observation reset_to(const Eigen::Vector3d& r_0, const Eigen::Vector3d& eta_0);
    /// Start from an arbitrary state; the reference departs from state.r.
    Observation reset_to_state(const State14& state);

    /// Throws std::logic_error when called on a finished episode.
    Transition step(std::size_t action);

    const StepRecord& last_record() const { return record_; }
    const State14& state() const { return snap_.state; }
    double time() const { return static_cast<double>(snap_.step) * config_.dt; }
    long step_index() const { return snap_.step; }
    bool done() const { return snap_.done; }
    const EpisodeConfig& config() const { return config_; }
    long dwell_steps() const { return dwell_steps_; }
    const ActionTable& table() const { return *table_; }
    const Reference& reference() const { return snap_.reference; }
    Observation observation() const;

    Snapshot snapshot() const { return snap_; }
    void restore(const Snapshot& s) { snap_ = s; }

private:
    VehicleParams params_;
    EpisodeConfig config_;
    RewardWeights weights_;
    std::shared_ptr<const ActionTable> table_;
    long dwell_steps_;
    Snapshot snap_;
    StepRecord record_;
};

}  // namespace snapq

#endif  // SNAPQ_ENV_HPP
