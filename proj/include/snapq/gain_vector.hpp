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

#ifndef SNAPQ_GAIN_VECTOR_HPP
#define SNAPQ_GAIN_VECTOR_HPP

#include <array>
#include <cstddef>

namespace snapq {

/**
 * Fourteen feedback gains of the snap controller.
 *
 * Layout (zero-based storage index -> gain):
 *   0..2   k1..k3    jerk gains (x, y, z)
 *   3..5   k4..k6    acceleration gains
 *   6..8   k7..k9    velocity gains
 *   9..11  k10..k12  position gains
 *   12     k13       yaw-rate gain
 *   13     k14       yaw gain
 */
struct GainVector {
    std::array<double, 14> k{};

    enum Level : std::size_t { kJerk = 0, kAccel = 1, kVel = 2, kPos = 3 };

    /// Same gain on all three axes at each derivative level.
    static GainVector shared(double jerk, double accel, double vel, double pos,
                             double yaw_rate, double yaw);

    double level(Level l, std::size_t axis) const { return k[3 * l + axis]; }
    double yaw_rate_gain() const { return k[12]; }
    double yaw_gain() const { return k[13]; }

    bool all_positive() const;
    bool axis_shared() const;

    friend bool operator==(const GainVector&, const GainVector&) = default;
};

}  // namespace snapq

#endif  // SNAPQ_GAIN_VECTOR_HPP
