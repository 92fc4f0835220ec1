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

#include "snapq/dynamics.hpp"

#include <cmath>

namespace snapq {

void VehicleParams::validate() const {
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw std::invalid_argument("vehicle mass must be positive");
    }
    if (!(gravity > 0.0) || !std::isfinite(gravity)) {
        throw std::invalid_argument("gravity must be positive");
    }
    if (!(inertia.array() > 0.0).all() || !inertia.allFinite()) {
        throw std::invalid_argument("inertia components must be positive");
    }
}

Vector14 State14::to_vector() const {
    Vector14 x;
    x << r, v, eta, omega, thrust_dev, thrust_dev_rate;
    return x;
}

State14 State14::from_vector(const Vector14& x) {
    State14 s;
    s.r = x.segment<3>(0);
    s.v = x.segment<3>(3);
    s.eta = x.segment<3>(6);
    s.omega = x.segment<3>(9);
    s.thrust_dev = x(12);
    s.thrust_dev_rate = x(13);
    return s;
}

bool State14::finite() const {
    return to_vector().allFinite();
}

Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& eta) {
    const double cphi = std::cos(eta.x()), sphi = std::sin(eta.x());
    const double cth = std::cos(eta.y()), sth = std::sin(eta.y());
    const double cpsi = std::cos(eta.z()), spsi = std::sin(eta.z());

    Eigen::Matrix3d R;
    R << cpsi * cth, cpsi * sth * sphi - spsi * cphi, cpsi * sth * cphi + spsi * sphi,
         spsi * cth, spsi * sth * sphi + cpsi * cphi, spsi * sth * cphi - cpsi * sphi,
         -sth,       cth * sphi,                      cth * cphi;
    return R;
}

namespace {

void check_pitch(double theta) {
    if (std::abs(std::cos(theta)) < kMinCosPitch) {
        throw SingularConfiguration("Euler kinematics singular at theta = " + std::to_string(theta));
    }
}

}  // namespace

Eigen::Matrix3d euler_kinematic_matrix(double phi, double theta) {
    check_pitch(theta);
    const double cphi = std::cos(phi), sphi = std::sin(phi);
    const double cth = std::cos(theta), tth = std::tan(theta);

    Eigen::Matrix3d E;
    E << 1.0, sphi * tth,  cphi * tth,
         0.0, cphi,        -sphi,
         0.0, sphi / cth,  cphi / cth;
    return E;
}

Eigen::Matrix3d euler_kinematic_matrix_inverse(double phi, double theta) {
    const double cphi = std::cos(phi), sphi = std::sin(phi);
    const double cth = std::cos(theta), sth = std::sin(theta);

    Eigen::Matrix3d Einv;
    Einv << 1.0, 0.0,   -sth,
            0.0, cphi,  sphi * cth,
            0.0, -sphi, cphi * cth;
    return Einv;
}

Eigen::Matrix3d euler_kinematic_matrix_dot(double phi, double theta, const Eigen::Vector3d& eta_dot) {
    check_pitch(theta);
    const double cphi = std::cos(phi), sphi = std::sin(phi);
    const double cth = std::cos(theta), tth = std::tan(theta);
    const double sec = 1.0 / cth;

    Eigen::Matrix3d dE_dphi;
    dE_dphi << 0.0, cphi * tth,  -sphi * tth,
               0.0, -sphi,       -cphi,
               0.0, cphi * sec,  -sphi * sec;

    Eigen::Matrix3d dE_dtheta;
    dE_dtheta << 0.0, sphi * sec * sec,  cphi * sec * sec,
                 0.0, 0.0,               0.0,
                 0.0, sphi * tth * sec,  cphi * tth * sec;

    return eta_dot.x() * dE_dphi + eta_dot.y() * dE_dtheta;
}

Vector14 dynamics_rhs(const State14& x, const PhysicalInput& input, const VehicleParams& params) {
    const Eigen::Vector3d e3 = Eigen::Vector3d::UnitZ();
    const double specific_thrust = (params.mass * params.gravity + x.thrust_dev) / params.mass;
    const Eigen::Matrix3d E = euler_kinematic_matrix(x.eta.x(), x.eta.y());

    const Eigen::Vector3d I_omega = params.inertia.cwiseProduct(x.omega);
    const Eigen::Vector3d omega_dot =
        (input.torque - x.omega.cross(I_omega)).cwiseQuotient(params.inertia);

    Vector14 dx;
    dx.segment<3>(0) = x.v;
    dx.segment<3>(3) = -params.gravity * e3 + specific_thrust * (rotation_matrix(x.eta) * e3);
    dx.segment<3>(6) = E * x.omega;
    dx.segment<3>(9) = omega_dot;
    dx(12) = x.thrust_dev_rate;
    dx(13) = input.thrust_accel;
    return dx;
}

State14 rk4_step(const State14& x, const PhysicalInput& input, const VehicleParams& params, double dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("rk4_step requires dt > 0");
    }
    const Vector14 x0 = x.to_vector();
    const auto f = [&](const Vector14& xi) {
        return dynamics_rhs(State14::from_vector(xi), input, params);
    };
    const Vector14 k1 = f(x0);
    const Vector14 k2 = f(x0 + 0.5 * dt * k1);
    const Vector14 k3 = f(x0 + 0.5 * dt * k2);
    const Vector14 k4 = f(x0 + dt * k3);
    return State14::from_vector(x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace snapq
