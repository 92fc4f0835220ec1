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

#ifndef SNAPQ_FLAT_CONTROLLER_HPP
#define SNAPQ_FLAT_CONTROLLER_HPP

#include "snapq/dynamics.hpp"
#include "snapq/gain_vector.hpp"

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>

namespace snapq {

/// Thrown when the snap-to-virtual-input map cannot be inverted safely.
class InversionSingular : public std::runtime_error {
public:
    explicit InversionSingular(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kMinInversionDet = 1e-8;
inline constexpr double kMinThrustFraction = 0.05;  // f must stay above this fraction of g

/**
 * Quintic time scaling on [0, T_f] with beta(0) = 0, beta(T_f) = 1 and the first
 * four derivatives vanishing at T_f. Coefficients come from the 6x6 endpoint system.
 */
class QuinticBlend {
public:
    explicit QuinticBlend(double T_f);

    /// {beta, beta', beta'', beta''', beta''''}; exactly {1, 0, 0, 0, 0} for t >= T_f.
    std::array<double, 5> evaluate(double t) const;

    double final_time() const { return T_f_; }
    /// Coefficients of beta in the normalized time tau = t / T_f, lowest order first.
    const std::array<double, 6>& coefficients() const { return c_; }

private:
    double T_f_;
    std::array<double, 6> c_{};
};

struct ReferenceSample {
    Eigen::Vector3d pos = Eigen::Vector3d::Zero();
    Eigen::Vector3d vel = Eigen::Vector3d::Zero();
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    Eigen::Vector3d jerk = Eigen::Vector3d::Zero();
    Eigen::Vector3d snap = Eigen::Vector3d::Zero();
};

/// Point-to-point segment r_d(t) = (1 - beta) r_0 + beta r_star, held at r_star after T_f.
class Reference {
public:
    Reference(const Eigen::Vector3d& r_0, const Eigen::Vector3d& r_star, double T_f);

    ReferenceSample sample(double t) const;

    const Eigen::Vector3d& start() const { return r_0_; }
    const Eigen::Vector3d& target() const { return r_star_; }
    double final_time() const { return blend_.final_time(); }

private:
    Eigen::Vector3d r_0_;
    Eigen::Vector3d r_star_;
    QuinticBlend blend_;
};

/// z = [e_r, e_v, e_a, e_j, psi, psi_dot]; e_a and e_j come from the model, not differencing.
struct ExternalErrorState {
    Eigen::Vector3d e_r = Eigen::Vector3d::Zero();
    Eigen::Vector3d e_v = Eigen::Vector3d::Zero();
    Eigen::Vector3d e_a = Eigen::Vector3d::Zero();
    Eigen::Vector3d e_j = Eigen::Vector3d::Zero();
    double psi = 0.0;
    double psi_dot = 0.0;

    Vector14 to_vector() const;
    static ExternalErrorState from_vector(const Vector14& z);
};

struct ExternalInput {
    Eigen::Vector3d snap = Eigen::Vector3d::Zero();  // s_r
    double yaw_accel = 0.0;                          // s_psi

    Eigen::Vector4d to_vector() const;
};

/// s = M u + n with u = (u_T, u_phi, u_theta, u_psi).
struct AffineInversionMaps {
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    Eigen::Vector4d n = Eigen::Vector4d::Zero();
    double det = 0.0;
};

/// Model acceleration a = -g e3 + f k_b.
Eigen::Vector3d model_acceleration(const State14& x, const VehicleParams& params);

/// Model jerk j = (T_dot / m) k_b + f (omega_I x k_b), omega_I the inertial-frame angular velocity.
Eigen::Vector3d model_jerk(const State14& x, const VehicleParams& params);

ExternalErrorState derive_errors(const State14& x, const ReferenceSample& ref, const VehicleParams& params);

/// s_r = -Kj e_j - Ka e_a - Kv e_v - Kp e_r,  s_psi = -k13 psi_dot - k14 psi.
ExternalInput external_input(const ExternalErrorState& z, const GainVector& k);

/**
 * Affine map from the virtual input to translational snap and yaw acceleration.
 *
 * The cross-product terms are evaluated with the inertial angular velocity
 * omega_I = R omega_body and the inertial rate map W = R E^{-1}, so that
 * d(k_b)/dt = omega_I x k_b holds exactly. Throws InversionSingular when
 * |det M| < kMinInversionDet or f < kMinThrustFraction * g, and
 * SingularConfiguration near gimbal lock.
 */
AffineInversionMaps inversion_maps(const State14& x, const VehicleParams& params);

/// u = M^{-1} (s - n).
Eigen::Vector4d virtual_input(const AffineInversionMaps& maps, const ExternalInput& s);

/// tau = I E^{-1} u_eta - I E^{-1} Edot omega + omega x (I omega); u_T passes through.
PhysicalInput physical_input(const State14& x, const Eigen::Vector4d& u, const VehicleParams& params);

/// Reference + vehicle bundle evaluating the full control chain at one instant.
class SnapController {
public:
    struct Output {
        ReferenceSample ref;
        ExternalErrorState errors;
        ExternalInput external;
        Eigen::Vector4d virtual_u = Eigen::Vector4d::Zero();
        PhysicalInput input;
    };

    /// snap_feedforward adds +r_d'''' to s_r. Off by default (control law as published).
    SnapController(const VehicleParams& params, const Reference& reference, bool snap_feedforward = false);

    Output compute(const State14& x, double t, const GainVector& k) const;

    const Reference& reference() const { return reference_; }
    const VehicleParams& params() const { return params_; }

private:
    VehicleParams params_;
    Reference reference_;
    bool snap_feedforward_;
};

}  // namespace snapq

#endif  // SNAPQ_FLAT_CONTROLLER_HPP
