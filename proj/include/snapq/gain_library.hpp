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

#ifndef SNAPQ_GAIN_LIBRARY_HPP
#define SNAPQ_GAIN_LIBRARY_HPP

#include "snapq/execution.hpp"
#include "snapq/gain_vector.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace snapq {

/// Per-axis characteristic coefficients of s^4 + k_j s^3 + k_a s^2 + k_v s + k_p.
struct LevelGains {
    double jerk = 0.0;
    double accel = 0.0;
    double vel = 0.0;
    double pos = 0.0;
};

/// Throws std::invalid_argument unless all poles are strictly negative and pairwise distinct.
LevelGains poles_to_gains(const std::array<double, 4>& poles);

/// Open-loop external error system z' = A z + B s + E r_d''''.
struct ExternalErrorSystem {
    Eigen::Matrix<double, 14, 14> A;
    Eigen::Matrix<double, 14, 4> B;
    Eigen::Matrix<double, 14, 3> E;

    static ExternalErrorSystem make();
};

/// Gain matrix K with s = -K z, z ordered as ExternalErrorState::to_vector().
Eigen::Matrix<double, 4, 14> feedback_matrix(const GainVector& k);

struct GainCertificate {
    double max_real_part = 0.0;
    double min_eigen_gap = 0.0;         // over the per-axis quartic and yaw quadratic roots
    double decoupling_residual = 0.0;   // full 14x14 spectrum vs. factorized spectrum
    bool certified = false;
    std::vector<std::complex<double>> spectrum;  // full 14x14 closed-loop eigenvalues
};

inline constexpr double kCertifyMaxRealPart = -1e-6;
inline constexpr double kCertifyMinGap = 1e-6;
inline constexpr double kCertifyDecouplingTol = 1e-8;

GainCertificate certify_gains(const GainVector& k);

class CertificationFailure : public std::runtime_error {
public:
    CertificationFailure(std::size_t index, const std::string& what)
        : std::runtime_error(what), index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

struct GainLibrarySpec {
    std::array<double, 4> nominal_poles{-2.0, -3.0, -4.0, -5.0};
    std::array<double, 5> scale_grid{0.9, 0.95, 1.0, 1.05, 1.1};
    std::pair<double, double> yaw_gains{12.0, 8.0};  // (k13, k14)
};

/**
 * The discrete action set: every combination of five admissible values at each
 * of the four derivative levels, shared across axes, with fixed yaw gains.
 * Index layout is mixed radix with the position level varying fastest:
 *   index = ((jerk * 5 + accel) * 5 + vel) * 5 + pos.
 */
struct ActionTable {
    static constexpr std::size_t kLevels = 4;
    static constexpr std::size_t kValuesPerLevel = 5;
    static constexpr std::size_t kSize = 625;

    using LevelIndex = std::array<std::size_t, kLevels>;  // {jerk, accel, vel, pos}

    std::array<std::array<double, kValuesPerLevel>, kLevels> level_values{};
    std::pair<double, double> yaw_gains{0.0, 0.0};
    std::vector<GainVector> entries;
    std::vector<GainCertificate> certificates;

    std::size_t size() const { return entries.size(); }
    const GainVector& at(std::size_t index) const { return entries.at(index); }

    static LevelIndex decode(std::size_t index);
    static std::size_t encode(const LevelIndex& levels);
};

/// Builds and certifies all 625 entries. Throws CertificationFailure naming the first bad entry.
ActionTable build_action_table(const GainLibrarySpec& spec, Execution exec = Execution::kParallel);

/// Tab-separated audit table: index, k1..k14, max_real, min_gap, certified.
void write_action_table(std::ostream& os, const ActionTable& table);

struct GainBounds {
    std::array<std::pair<double, double>, 14> range{};

    /// Published componentwise envelope of the stabilizing gain table.
    static GainBounds table_one();
};

struct BoundsRow {
    std::size_t component = 0;  // zero-based; printed as k{component+1}
    double configured_min = 0.0;
    double configured_max = 0.0;
    double observed_min = 0.0;
    double observed_max = 0.0;
    bool min_ok = false;
    bool max_ok = false;
    bool within() const { return min_ok && max_ok; }
};

struct BoundsReport {
    std::array<BoundsRow, 14> rows{};
    double tolerance = 0.0;

    bool all_within() const;
    std::vector<std::size_t> deviations() const;
    std::string to_text() const;
};

/// Componentwise min/max of the entries compared with the configured envelope (match within tol).
BoundsReport validate_bounds(std::span<const GainVector> entries, const GainBounds& bounds, double tol = 1e-4);

/// Minimum-dwell switching filter.
class DwellGuard {
public:
    explicit DwellGuard(long dwell_steps);

    /// Returns the action in force at `step`. The first call always accepts.
    std::size_t filter(std::size_t proposed, long step);
    void reset();

    long dwell_steps() const { return dwell_steps_; }
    bool engaged() const { return engaged_; }
    std::size_t current() const { return current_; }
    long last_change_step() const { return last_change_; }

private:
    long dwell_steps_;
    bool engaged_ = false;
    std::size_t current_ = 0;
    long last_change_ = 0;
};

/// Smallest number of steps between consecutive action changes; -1 if fewer than two changes.
long min_change_interval(std::span<const std::size_t> actions);

}  // namespace snapq

#endif  // SNAPQ_GAIN_LIBRARY_HPP
