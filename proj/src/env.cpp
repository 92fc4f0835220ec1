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

#include "snapq/env.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace snapq {

void RewardWeights::validate() const {
    for (double w : {w_r, w_v, w_eta, w_omega, w_u, w_s}) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("reward weights must be >= 0");
    }
}

void EpisodeConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(T_f > 0.0)) throw std::invalid_argument("T_f must be positive");
    if (!(episode_length >= T_f)) throw std::invalid_argument("episode_length must be >= T_f");
    if (!(initial.position_half_width >= 0.0) || !(initial.attitude_half_width_deg >= 0.0)) {
        throw std::invalid_argument("initial-state half widths must be >= 0");
    }
    if (!(abort.max_tilt_deg > 0.0) || !(abort.max_position_error > 0.0)) {
        throw std::invalid_argument("abort limits must be positive");
    }
}

long EpisodeConfig::steps() const {
    return std::lround(episode_length / dt);
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::kNone: return "none";
        case Termination::kTimeLimit: return "time_limit";
        case Termination::kFailure: return "failure";
    }
    return "unknown";
}

double reward_fn(const Eigen::Vector3d& e_r, const Eigen::Vector3d& e_v, const Eigen::Vector3d& eta,
                 const Eigen::Vector3d& omega, const Eigen::Vector4d& u, bool switched,
                 const RewardWeights& w) {
    return -(w.w_r * e_r.squaredNorm() + w.w_v * e_v.squaredNorm() + w.w_eta * eta.squaredNorm() +
             w.w_omega * omega.squaredNorm()) -
           w.w_u * u.squaredNorm() - (switched ? w.w_s : 0.0);
}

Observation make_observation(const State14& x, double t, double T_f) {
    Observation o{};
    const Vector14 v = x.to_vector();
    for (Eigen::Index i = 0; i < 14; ++i) o[static_cast<std::size_t>(i)] = v(i);
    o[14] = std::min(t / T_f, 1.0);
    return o;
}

QuadEnv::QuadEnv(VehicleParams params, EpisodeConfig config, RewardWeights weights,
                 std::shared_ptr<const ActionTable> table, long dwell_steps)
    : params_(std::move(params)),
      config_(std::move(config)),
      weights_(weights),
      table_(std::move(table)),
      dwell_steps_(dwell_steps) {
    params_.validate();
    config_.validate();
    weights_.validate();
    if (!table_ || table_->size() == 0) throw std::invalid_argument("environment needs a non-empty action table");
    snap_.guard = DwellGuard(dwell_steps_);
}

Observation QuadEnv::observation() const {
    return make_observation(snap_.state, time(), config_.T_f);
}

Observation QuadEnv::reset(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double half = config_.initial.position_half_width;
    const double att = config_.initial.attitude_half_width_deg * std::numbers::pi / 180.0;
    Eigen::Vector3d r_0 = config_.initial.center;
    for (int i = 0; i < 3; ++i) r_0(i) += half * unit(rng);
    Eigen::Vector3d eta_0;
    for (int i = 0; i < 3; ++i) eta_0(i) = att * unit(rng);
    return reset_to(r_0, eta_0);
}

Observation QuadEnv::reset_to(const Eigen::Vector3d& r_0, const Eigen::Vector3d& eta_0) {
    State14 x;
    x.r = r_0;
    x.eta = eta_0;
    return reset_to_state(x);
}

Observation QuadEnv::reset_to_state(const State14& state) {
    if (!state.finite()) throw std::invalid_argument("initial state must be finite");
    snap_.state = state;
    snap_.step = 0;
    snap_.done = false;
    snap_.prev_action.reset();
    snap_.guard = DwellGuard(dwell_steps_);
    snap_.reference = Reference(state.r, config_.r_star, config_.T_f);
    record_ = StepRecord{};
    return observation();
}

Transition QuadEnv::step(std::size_t action) {
    if (snap_.done) throw std::logic_error("step() called on a finished episode; call reset()");
    if (action >= table_->size()) throw std::out_of_range("action index out of range");

    Transition tr;
    tr.obs = observation();

    const long n = snap_.step;
    const double t = time();
    const std::size_t effective = snap_.guard.filter(action, n);
    const bool switched = snap_.prev_action.has_value() && *snap_.prev_action != effective;
    const GainVector& gains = table_->at(effective);

    record_ = StepRecord{};
    record_.t = t;
    record_.state = snap_.state;
    record_.proposed_action = action;
    record_.action = effective;
    record_.gains = gains;

    tr.action = effective;
    snap_.prev_action = effective;

    const auto fail = [&](const std::string& reason) {
        snap_.done = true;
        snap_.step = n + 1;
        tr.reward = config_.abort.abort_reward;
        tr.done = true;
        tr.termination = Termination::kFailure;
        tr.next_obs = observation();
        record_.reward = tr.reward;
        record_.termination = Termination::kFailure;
        record_.failure_reason = reason;
        return tr;
    };

    const SnapController controller(params_, snap_.reference, config_.snap_feedforward);
    SnapController::Output out;
    try {
        out = controller.compute(snap_.state, t, gains);
    } catch (const InversionSingular& e) {
        record_.ref = snap_.reference.sample(t);
        return fail(std::string("inversion: ") + e.what());
    } catch (const SingularConfiguration& e) {
        record_.ref = snap_.reference.sample(t);
        return fail(std::string("kinematics: ") + e.what());
    }
    record_.ref = out.ref;
    record_.errors = out.errors;
    record_.virtual_u = out.virtual_u;
    record_.input = out.input;

    Eigen::Vector4d effort = out.virtual_u;
    if (config_.penalize_physical_input) {
        effort << out.input.thrust_accel, out.input.torque;
    }
    const double reward = reward_fn(out.errors.e_r, out.errors.e_v, snap_.state.eta, snap_.state.omega,
                                    effort, switched, weights_);

    State14 next;
    try {
        next = rk4_step(snap_.state, out.input, params_, config_.dt);
    } catch (const SingularConfiguration& e) {
        return fail(std::string("kinematics: ") + e.what());
    }
    if (!next.finite()) return fail("non-finite state");

    snap_.state = next;
    const double tilt_limit = config_.abort.max_tilt_deg * std::numbers::pi / 180.0;
    if (std::abs(next.eta.x()) > tilt_limit || std::abs(next.eta.y()) > tilt_limit) {
        return fail("attitude limit");
    }
    if ((next.r - config_.r_star).norm() > config_.abort.max_position_error) {
        return fail("position limit");
    }

    snap_.step = n + 1;
    tr.reward = reward;
    tr.next_obs = observation();
    if (snap_.step >= config_.steps()) {
        snap_.done = true;
        tr.done = true;
        tr.termination = Termination::kTimeLimit;
    }
    record_.reward = tr.reward;
    record_.termination = tr.termination;
    return tr;
}

}  // namespace snapq
