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

#ifndef SNAPQ_DYNAMICS_HPP
#define SNAPQ_DYNAMICS_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace snapq {

using Vector14 = Eigen::Matrix<double, 14, 1>;

/// Thrown when the Euler kinematic matrix cannot be inverted (|cos(theta)| too small).
class SingularConfiguration : public std::runtime_error {
public:
    explicit SingularConfiguration(const std::string& what) : std::runtime_error(what) {}
};

/// Rigid-body constants. Inertia is diagonal (principal axes).
struct VehicleParams {
    double mass = 1.5;
    double gravity = 9.81;
    Eigen::Vector3d inertia{0.02, 0.02, 0.04};

    /// Throws std::invalid_argument if any constant is non-positive or non-finite.
    void validate() const;
};

/**
 * Full physical state of the vehicle.
 *
 * Flattened order (used by observations and logs):
 *   [x y z | vx vy vz | phi theta psi | p q r | T_dev | T_dev_rate]
 *
 * eta holds 3-2-1 Euler angles (roll, pitch, yaw); omega holds body rates.
 * T_dev is the thrust deviation from hover thrust m*g.
 */
struct State14 {
    Eigen::Vector3d r = Eigen::Vector3d::Zero();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    Eigen::Vector3d eta = Eigen::Vector3d::Zero();
    Eigen::Vector3d omega = Eigen::Vector3d::Zero();
    double thrust_dev = 0.0;
    double thrust_dev_rate = 0.0;

    Vector14 to_vector() const;
    static State14 from_vector(const Vector14& x);
    bool finite() const;
};

struct PhysicalInput {
    double thrust_accel = 0.0;                           // u_T = d^2 T_dev / dt^2, N/s^2
    Eigen::Vector3d torque = Eigen::Vector3d::Zero();    // body torques, N m
};

inline constexpr double kMinCosPitch = 1e-6;

/// ZYX rotation R = Rz(psi) Ry(theta) Rx(phi), body -> inertial.
Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& eta);

/// E(phi, theta) with eta_dot = E * omega_body. Throws SingularConfiguration near gimbal lock.
Eigen::Matrix3d euler_kinematic_matrix(double phi, double theta);

/// Closed-form inverse of E; total (no singularity).
Eigen::Matrix3d euler_kinematic_matrix_inverse(double phi, double theta);

/// dE/dt through (phi_dot, theta_dot) = eta_dot.head<2>().
Eigen::Matrix3d euler_kinematic_matrix_dot(double phi, double theta, const Eigen::Vector3d& eta_dot);

/// Continuous-time rate of the 14-dim state under a constant input.
Vector14 dynamics_rhs(const State14& x, const PhysicalInput& input, const VehicleParams& params);

/// Classical fourth-order Runge-Kutta step with the input held over [t, t + dt].
State14 rk4_step(const State14& x, const PhysicalInput& input, const VehicleParams& params, double dt);

}  // namespace snapq

#endif  // SNAPQ_DYNAMICS_HPP
