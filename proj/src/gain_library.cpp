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

#include "snapq/gain_library.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace snapq {

GainVector GainVector::shared(double jerk, double accel, double vel, double pos,
                              double yaw_rate, double yaw) {
    GainVector g;
    const double level[4] = {jerk, accel, vel, pos};
    for (std::size_t l = 0; l < 4; ++l) {
        for (std::size_t axis = 0; axis < 3; ++axis) g.k[3 * l + axis] = level[l];
    }
    g.k[12] = yaw_rate;
    g.k[13] = yaw;
    return g;
}

bool GainVector::all_positive() const {
    return std::all_of(k.begin(), k.end(), [](double v) { return v > 0.0 && std::isfinite(v); });
}

bool GainVector::axis_shared() const {
    for (std::size_t l = 0; l < 4; ++l) {
        if (k[3 * l] != k[3 * l + 1] || k[3 * l] != k[3 * l + 2]) return false;
    }
    return true;
}

LevelGains poles_to_gains(const std::array<double, 4>& poles) {
    for (double p : poles) {
        if (!(p < 0.0) || !std::isfinite(p)) {
            throw std::invalid_argument("poles must be strictly negative and finite");
        }
    }
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            const double scale = std::max(std::abs(poles[i]), std::abs(poles[j]));
            if (std::abs(poles[i] - poles[j]) <= 1e-9 * scale) {
                throw std::invalid_argument("poles must be distinct");
            }
        }
    }
    // Expand prod (s - p_i); coeffs[n] multiplies s^n.
    std::array<double, 5> coeffs{1.0, 0.0, 0.0, 0.0, 0.0};
    std::size_t degree = 0;
    for (double p : poles) {
        for (std::size_t n = degree + 1; n > 0; --n) {
            coeffs[n] = coeffs[n - 1] - p * coeffs[n];
        }
        coeffs[0] = -p * coeffs[0];
        ++degree;
    }
    return LevelGains{coeffs[3], coeffs[2], coeffs[1], coeffs[0]};
}

ExternalErrorSystem ExternalErrorSystem::make() {
    ExternalErrorSystem sys;
    sys.A.setZero();
    sys.B.setZero();
    sys.E.setZero();
    const Eigen::Matrix3d I3 = Eigen::Matrix3d::Identity();
    sys.A.block<3, 3>(0, 3) = I3;
    sys.A.block<3, 3>(3, 6) = I3;
    sys.A.block<3, 3>(6, 9) = I3;
    sys.A(12, 13) = 1.0;
    sys.B.block<3, 3>(9, 0) = I3;
    sys.B(13, 3) = 1.0;
    sys.E.block<3, 3>(9, 0) = -I3;
    return sys;
}

Eigen::Matrix<double, 4, 14> feedback_matrix(const GainVector& k) {
    Eigen::Matrix<double, 4, 14> K = Eigen::Matrix<double, 4, 14>::Zero();
    for (std::size_t axis = 0; axis < 3; ++axis) {
        const auto row = static_cast<Eigen::Index>(axis);
        K(row, row + 0) = k.level(GainVector::kPos, axis);
        K(row, row + 3) = k.level(GainVector::kVel, axis);
        K(row, row + 6) = k.level(GainVector::kAccel, axis);
        K(row, row + 9) = k.level(GainVector::kJerk, axis);
    }
    K(3, 12) = k.yaw_gain();
    K(3, 13) = k.yaw_rate_gain();
    return K;
}

namespace {

using Complex = std::complex<double>;

std::vector<Complex> eigenvalues(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(A, false);
    std::vector<Complex> out;
    if (solver.info() != Eigen::Success) return out;
    const auto& ev = solver.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) out.push_back(ev(i));
    return out;
}

std::vector<Complex> axis_spectrum(double kj, double ka, double kv, double kp) {
    Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
    C(0, 1) = C(1, 2) = C(2, 3) = 1.0;
    C.row(3) << -kp, -kv, -ka, -kj;
    return eigenvalues(C);
}

std::vector<Complex> yaw_spectrum(double k13, double k14) {
    Eigen::Matrix2d C;
    C << 0.0, 1.0, -k14, -k13;
    return eigenvalues(C);
}

}  // namespace

GainCertificate certify_gains(const GainVector& k) {
    GainCertificate cert;
    const auto sys = ExternalErrorSystem::make();
    const Eigen::Matrix<double, 14, 14> closed = sys.A - sys.B * feedback_matrix(k);
    cert.spectrum = eigenvalues(closed);

    std::vector<Complex> factored;   // all 14, three per-axis blocks plus yaw
    std::vector<Complex> distinct;   // identical per-axis blocks counted once
    std::vector<std::array<double, 4>> seen_axes;
    for (std::size_t axis = 0; axis < 3; ++axis) {
        const std::array<double, 4> g{k.level(GainVector::kJerk, axis), k.level(GainVector::kAccel, axis),
                                      k.level(GainVector::kVel, axis), k.level(GainVector::kPos, axis)};
        const auto spec = axis_spectrum(g[0], g[1], g[2], g[3]);
        factored.insert(factored.end(), spec.begin(), spec.end());
        if (std::find(seen_axes.begin(), seen_axes.end(), g) == seen_axes.end()) {
            seen_axes.push_back(g);
            distinct.insert(distinct.end(), spec.begin(), spec.end());
        }
    }
    const auto yaw = yaw_spectrum(k.yaw_rate_gain(), k.yaw_gain());
    factored.insert(factored.end(), yaw.begin(), yaw.end());
    distinct.insert(distinct.end(), yaw.begin(), yaw.end());

    if (cert.spectrum.size() != 14 || factored.size() != 14) {
        cert.max_real_part = std::numeric_limits<double>::quiet_NaN();
        cert.certified = false;
        return cert;
    }

    cert.max_real_part = -std::numeric_limits<double>::infinity();
    for (const auto& ev : cert.spectrum) cert.max_real_part = std::max(cert.max_real_part, ev.real());

    cert.min_eigen_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < distinct.size(); ++i) {
        for (std::size_t j = i + 1; j < distinct.size(); ++j) {
            cert.min_eigen_gap = std::min(cert.min_eigen_gap, std::abs(distinct[i] - distinct[j]));
        }
    }

    // Greedy nearest matching of the factored spectrum onto the full spectrum.
    std::vector<bool> used(cert.spectrum.size(), false);
    cert.decoupling_residual = 0.0;
    for (const auto& target : factored) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        for (std::size_t i = 0; i < cert.spectrum.size(); ++i) {
            if (used[i]) continue;
            const double d = std::abs(cert.spectrum[i] - target);
            if (d < best) {
                best = d;
                best_idx = i;
            }
        }
        used[best_idx] = true;
        cert.decoupling_residual = std::max(cert.decoupling_residual, best);
    }

    cert.certified = std::isfinite(cert.max_real_part) && cert.max_real_part < kCertifyMaxRealPart &&
                     cert.min_eigen_gap > kCertifyMinGap &&
                     cert.decoupling_residual < kCertifyDecouplingTol;
    return cert;
}

ActionTable::LevelIndex ActionTable::decode(std::size_t index) {
    if (index >= kSize) throw std::out_of_range("action index out of range");
    LevelIndex levels{};
    for (std::size_t l = kLevels; l > 0; --l) {
        levels[l - 1] = index % kValuesPerLevel;
        index /= kValuesPerLevel;
    }
    return levels;
}

std::size_t ActionTable::encode(const LevelIndex& levels) {
    std::size_t index = 0;
    for (std::size_t l = 0; l < kLevels; ++l) {
        if (levels[l] >= kValuesPerLevel) throw std::out_of_range("level index out of range");
        index = index * kValuesPerLevel + levels[l];
    }
    return index;
}

namespace {

std::string describe_entry(std::size_t index, const GainVector& g, const GainCertificate& c) {
    const auto lv = ActionTable::decode(index);
    std::ostringstream os;
    os << "action " << index << " (levels jerk=" << lv[0] << " accel=" << lv[1] << " vel=" << lv[2]
       << " pos=" << lv[3] << "; k_j=" << g.k[0] << " k_a=" << g.k[3] << " k_v=" << g.k[6]
       << " k_p=" << g.k[9] << ") failed certification: max real part " << c.max_real_part
       << ", min eigenvalue gap " << c.min_eigen_gap << ", decoupling residual " << c.decoupling_residual;
    return os.str();
}

}  // namespace

ActionTable build_action_table(const GainLibrarySpec& spec, Execution exec) {
    for (std::size_t i = 0; i < spec.scale_grid.size(); ++i) {
        if (!(spec.scale_grid[i] > 0.0)) throw std::invalid_argument("scale grid values must be positive");
        if (i > 0 && !(spec.scale_grid[i] > spec.scale_grid[i - 1])) {
            throw std::invalid_argument("scale grid must be strictly increasing");
        }
    }

    ActionTable table;
    table.yaw_gains = spec.yaw_gains;
    for (std::size_t i = 0; i < ActionTable::kValuesPerLevel; ++i) {
        std::array<double, 4> scaled{};
        for (std::size_t p = 0; p < 4; ++p) scaled[p] = spec.scale_grid[i] * spec.nominal_poles[p];
        const LevelGains g = poles_to_gains(scaled);
        table.level_values[GainVector::kJerk][i] = g.jerk;
        table.level_values[GainVector::kAccel][i] = g.accel;
        table.level_values[GainVector::kVel][i] = g.vel;
        table.level_values[GainVector::kPos][i] = g.pos;
    }

    table.entries.resize(ActionTable::kSize);
    table.certificates.resize(ActionTable::kSize);
    for (std::size_t idx = 0; idx < ActionTable::kSize; ++idx) {
        const auto lv = ActionTable::decode(idx);
        table.entries[idx] = GainVector::shared(
            table.level_values[GainVector::kJerk][lv[0]], table.level_values[GainVector::kAccel][lv[1]],
            table.level_values[GainVector::kVel][lv[2]], table.level_values[GainVector::kPos][lv[3]],
            spec.yaw_gains.first, spec.yaw_gains.second);
    }

    const auto n = static_cast<long>(ActionTable::kSize);
    if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 8)
        for (long idx = 0; idx < n; ++idx) {
            table.certificates[idx] = certify_gains(table.entries[idx]);
        }
    } else {
        for (long idx = 0; idx < n; ++idx) {
            table.certificates[idx] = certify_gains(table.entries[idx]);
        }
    }

    for (std::size_t idx = 0; idx < ActionTable::kSize; ++idx) {
        if (!table.certificates[idx].certified) {
            throw CertificationFailure(idx, describe_entry(idx, table.entries[idx], table.certificates[idx]));
        }
    }
    return table;
}

void write_action_table(std::ostream& os, const ActionTable& table) {
    os << "index";
    for (int i = 1; i <= 14; ++i) os << "\tk" << i;
    os << "\tmax_real\tmin_gap\tcertified\n";
    os << std::setprecision(17);
    for (std::size_t idx = 0; idx < table.size(); ++idx) {
        os << idx;
        for (double v : table.entries[idx].k) os << '\t' << v;
        const auto& c = table.certificates[idx];
        os << '\t' << c.max_real_part << '\t' << c.min_eigen_gap << '\t' << (c.certified ? 1 : 0) << '\n';
    }
}

GainBounds GainBounds::table_one() {
    GainBounds b;
    b.range = {{{9.8304, 49.7664}, {24.1920, 122.4720}, {49.1520, 248.8320},
                {25.6000, 86.4000}, {47.6160, 160.7040}, {78.8480, 266.1120},
                {22.4000, 50.4000}, {32.9600, 74.1600}, {45.4400, 102.2400},
                {8.0000, 12.0000}, {9.6000, 14.4000}, {11.2000, 16.8000},
                {12.0000, 32.0000}, {8.0000, 12.0000}}};
    return b;
}

bool BoundsReport::all_within() const {
    return std::all_of(rows.begin(), rows.end(), [](const BoundsRow& r) { return r.within(); });
}

std::vector<std::size_t> BoundsReport::deviations() const {
    std::vector<std::size_t> out;
    for (const auto& r : rows) {
        if (!r.within()) out.push_back(r.component);
    }
    return out;
}

std::string BoundsReport::to_text() const {
    std::ostringstream os;
    os << "gain\tconfigured_min\tconfigured_max\tobserved_min\tobserved_max\tstatus\n";
    os << std::fixed << std::setprecision(4);
    for (const auto& r : rows) {
        os << 'k' << (r.component + 1) << '\t' << r.configured_min << '\t' << r.configured_max << '\t'
           << r.observed_min << '\t' << r.observed_max << '\t';
        if (r.within()) {
            os << "ok";
        } else {
            os << "DEVIATION";
            if (!r.min_ok) os << " min(" << std::showpos << (r.observed_min - r.configured_min) << std::noshowpos << ")";
            if (!r.max_ok) os << " max(" << std::showpos << (r.observed_max - r.configured_max) << std::noshowpos << ")";
        }
        os << '\n';
    }
    const auto dev = deviations();
    os << "summary: " << (14 - dev.size()) << "/14 components within " << std::scientific
       << std::setprecision(1) << tolerance << ", " << dev.size() << " deviation(s)\n";
    return os.str();
}

BoundsReport validate_bounds(std::span<const GainVector> entries, const GainBounds& bounds, double tol) {
    BoundsReport report;
    report.tolerance = tol;
    for (std::size_t c = 0; c < 14; ++c) {
        BoundsRow& row = report.rows[c];
        row.component = c;
        row.configured_min = bounds.range[c].first;
        row.configured_max = bounds.range[c].second;
        if (entries.empty()) {
            row.observed_min = row.observed_max = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        row.observed_min = std::numeric_limits<double>::infinity();
        row.observed_max = -std::numeric_limits<double>::infinity();
        for (const auto& g : entries) {
            row.observed_min = std::min(row.observed_min, g.k[c]);
            row.observed_max = std::max(row.observed_max, g.k[c]);
        }
        row.min_ok = std::abs(row.observed_min - row.configured_min) <= tol;
        row.max_ok = std::abs(row.observed_max - row.configured_max) <= tol;
    }
    return report;
}

DwellGuard::DwellGuard(long dwell_steps) : dwell_steps_(dwell_steps) {
    if (dwell_steps < 0) throw std::invalid_argument("dwell steps must be non-negative");
}

std::size_t DwellGuard::filter(std::size_t proposed, long step) {
    if (!engaged_) {
        engaged_ = true;
        current_ = proposed;
        last_change_ = step;
        return current_;
    }
    if (proposed == current_) return current_;
    if (step - last_change_ >= dwell_steps_) {
        current_ = proposed;
        last_change_ = step;
    }
    return current_;
}

void DwellGuard::reset() {
    engaged_ = false;
    current_ = 0;
    last_change_ = 0;
}

long min_change_interval(std::span<const std::size_t> actions) {
    long last = 0;
    long best = -1;
    for (std::size_t i = 1; i < actions.size(); ++i) {
        if (actions[i] != actions[i - 1]) {
            const long gap = static_cast<long>(i) - last;
            best = best < 0 ? gap : std::min(best, gap);
            last = static_cast<long>(i);
        }
    }
    return best;
}

}  // namespace snapq
