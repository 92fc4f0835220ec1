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

#include "snapq/flat_controller.hpp"

#include <cmath>

namespace snapq {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
    Eigen::Matrix3d S;
    S << 0.0, -w.z(), w.y(),
         w.z(), 0.0, -w.x(),
         -w.y(), w.x(), 0.0;
    return S;
}

double specific_thrust(const State14& x, const VehicleParams& params) {
    return (params.mass * params.gravity + x.thrust_dev) / params.mass;
}

}  // namespace

QuinticBlend::QuinticBlend(double T_f) : T_f_(T_f) {
    if (!(T_f > 0.0) || !std::isfinite(T_f)) {
        throw std::invalid_argument("quintic blend requires T_f > 0");
    }
    // Rows: beta(0) = 0, beta(1) = 1, beta^(n)(1) = 0 for n = 1..4, in tau = t / T_f.
    Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
    A(0, 0) = 1.0;
    for (int n = 0; n <= 4; ++n) {
        for (int i = n; i <= 5; ++i) {
            double falling = 1.0;
            for (int j = 0; j < n; ++j) falling *= static_cast<double>(i - j);
            A(n + 1, i) = falling;
        }
    }
    b(1) = 1.0;
    const Eigen::Matrix<double, 6, 1> c = A.fullPivLu().solve(b);
    for (int i = 0; i < 6; ++i) c_[i] = c(i);
}

std::array<double, 5> QuinticBlend::evaluate(double t) const {
    if (t >= T_f_) return {1.0, 0.0, 0.0, 0.0, 0.0};
    const double tau = t / T_f_;
    std::array<double, 5> out{};
    double time_scale = 1.0;
    for (int n = 0; n <= 4; ++n) {
        // Horner on the n-th derivative polynomial in tau.
        double acc = 0.0;
        for (int i = 5; i >= n; --i) {
            double falling = 1.0;
            for (int j = 0; j < n; ++j) falling *= static_cast<double>(i - j);
            acc = acc * tau + falling * c_[i];
        }
        out[n] = acc * time_scale;
        time_scale /= T_f_;
    }
    return out;
}

Reference::Reference(const Eigen::Vector3d& r_0, const Eigen::Vector3d& r_star, double T_f)
    : r_0_(r_0), r_star_(r_star), blend_(T_f) {}

ReferenceSample Reference::sample(double t) const {
    ReferenceSample ref;
    if (t >= blend_.final_time()) {
        ref.pos = r_star_;
        return ref;
    }
    const auto beta = blend_.evaluate(t);
    const Eigen::Vector3d delta = r_star_ - r_0_;
    ref.pos = (1.0 - beta[0]) * r_0_ + beta[0] * r_star_;
    ref.vel = beta[1] * delta;
    ref.acc = beta[2] * delta;
    ref.jerk = beta[3] * delta;
    ref.snap = beta[4] * delta;
    return ref;
}

Vector14 ExternalErrorState::to_vector() const {
    Vector14 z;
    z << e_r, e_v, e_a, e_j, psi, psi_dot;
    return z;
}

ExternalErrorState ExternalErrorState::from_vector(const Vector14& z) {
    ExternalErrorState s;
    s.e_r = z.segment<3>(0);
    s.e_v = z.segment<3>(3);
    s.e_a = z.segment<3>(6);
    s.e_j = z.segment<3>(9);
    s.psi = z(12);
    s.psi_dot = z(13);
    return s;
}

Eigen::Vector4d ExternalInput::to_vector() const {
    return {snap.x(), snap.y(), snap.z(), yaw_accel};
}

Eigen::Vector3d model_acceleration(const State14& x, const VehicleParams& params) {
    const Eigen::Vector3d k_b = rotation_matrix(x.eta).col(2);
    return -params.gravity * Eigen::Vector3d::UnitZ() + specific_thrust(x, params) * k_b;
}

Eigen::Vector3d model_jerk(const State14& x, const VehicleParams& params) {
    const Eigen::Matrix3d R = rotation_matrix(x.eta);
    const Eigen::Vector3d k_b = R.col(2);
    const Eigen::Vector3d omega_inertial = R * x.omega;
    return (x.thrust_dev_rate / params.mass) * k_b +
           specific_thrust(x, params) * omega_inertial.cross(k_b);
}

ExternalErrorState derive_errors(const State14& x, const ReferenceSample& ref, const VehicleParams& params) {
    const Eigen::Matrix3d E = euler_kinematic_matrix(x.eta.x(), x.eta.y());
    ExternalErrorState z;
    z.e_r = x.r - ref.pos;
    z.e_v = x.v - ref.vel;
    z.e_a = model_acceleration(x, params) - ref.acc;
    z.e_j = model_jerk(x, params) - ref.jerk;
    z.psi = x.eta.z();
    z.psi_dot = (E * x.omega).z();
    return z;
}

ExternalInput external_input(const ExternalErrorState& z, const GainVector& k) {
    ExternalInput s;
    for (std::size_t axis = 0; axis < 3; ++axis) {
        const auto i = static_cast<Eigen::Index>(axis);
        s.snap(i) = -k.level(GainVector::kJerk, axis) * z.e_j(i)
                    - k.level(GainVector::kAccel, axis) * z.e_a(i)
                    - k.level(GainVector::kVel, axis) * z.e_v(i)
                    - k.level(GainVector::kPos, axis) * z.e_r(i);
    }
    s.yaw_accel = -k.yaw_rate_gain() * z.psi_dot - k.yaw_gain() * z.psi;
    return s;
}

AffineInversionMaps inversion_maps(const State14& x, const VehicleParams& params) {
    const double phi = x.eta.x(), theta = x.eta.y();
    const Eigen::Matrix3d E = euler_kinematic_matrix(phi, theta);
    const Eigen::Matrix3d E_inv = euler_kinematic_matrix_inverse(phi, theta);
    const Eigen::Matrix3d R = rotation_matrix(x.eta);
    const Eigen::Vector3d k_b = R.col(2);

    const double f = specific_thrust(x, params);
    if (f < kMinThrustFraction * params.gravity) {
        throw InversionSingular("thrust collapse: specific thrust " + std::to_string(f));
    }

    const Eigen::Vector3d eta_dot = E * x.omega;
    const Eigen::Matrix3d E_dot = euler_kinematic_matrix_dot(phi, theta, eta_dot);
    const Eigen::Matrix3d W = R * E_inv;
    const Eigen::Vector3d omega_inertial = R * x.omega;
    const Eigen::Vector3d drift_rate = W * (E_dot * x.omega);
    const Eigen::Matrix3d Omega = skew(omega_inertial);

    AffineInversionMaps maps;
    maps.M.block<3, 1>(0, 0) = k_b / params.mass;
    for (int i = 0; i < 3; ++i) {
        maps.M.block<3, 1>(0, i + 1) = f * W.col(i).cross(k_b);
    }
    maps.M(3, 3) = 1.0;

    maps.n.head<3>() = -f * drift_rate.cross(k_b)
                       + 2.0 * (x.thrust_dev_rate / params.mass) * (Omega * k_b)
                       + f * (Omega * (Omega * k_b));
    maps.n(3) = 0.0;

    maps.det = maps.M.determinant();
    if (!(std::abs(maps.det) >= kMinInversionDet)) {
        throw InversionSingular("inversion map near singular: |det M| = " + std::to_string(std::abs(maps.det)));
    }
    return maps;
}

Eigen::Vector4d virtual_input(const AffineInversionMaps& maps, const ExternalInput& s) {
    if (!(std::abs(maps.det) >= kMinInversionDet)) {
        throw InversionSingular("virtual_input called with singular M");
    }
    return maps.M.partialPivLu().solve(s.to_vector() - maps.n);
}

PhysicalInput physical_input(const State14& x, const Eigen::Vector4d& u, const VehicleParams& params) {
    const double phi = x.eta.x(), theta = x.eta.y();
    const Eigen::Matrix3d E = euler_kinematic_matrix(phi, theta);
    const Eigen::Matrix3d E_inv = euler_kinematic_matrix_inverse(phi, theta);
    const Eigen::Matrix3d E_dot = euler_kinematic_matrix_dot(phi, theta, E * x.omega);
    const Eigen::Vector3d u_eta = u.tail<3>();

    PhysicalInput input;
    input.thrust_accel = u(0);
    input.torque = params.inertia.cwiseProduct(E_inv * u_eta)
                   - params.inertia.cwiseProduct(E_inv * (E_dot * x.omega))
                   + x.omega.cross(params.inertia.cwiseProduct(x.omega));
    return input;
}

SnapController::SnapController(const VehicleParams& params, const Reference& reference, bool snap_feedforward)
    : params_(params), reference_(reference), snap_feedforward_(snap_feedforward) {
    params_.validate();
}

SnapController::Output SnapController::compute(const State14& x, double t, const GainVector& k) const {
    Output out;
    out.ref = reference_.sample(t);
    out.errors = derive_errors(x, out.ref, params_);
    out.external = external_input(out.errors, k);
    if (snap_feedforward_) out.external.snap += out.ref.snap;
    const AffineInversionMaps maps = inversion_maps(x, params_);
    out.virtual_u = virtual_input(maps, out.external);
    out.input = physical_input(x, out.virtual_u, params_);
    return out;
}

}  // namespace snapq
