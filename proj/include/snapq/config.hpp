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

#ifndef SNAPQ_CONFIG_HPP
#define SNAPQ_CONFIG_HPP

#include "snapq/dqn.hpp"
#include "snapq/dynamics.hpp"
#include "snapq/env.hpp"
#include "snapq/gain_library.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace snapq {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Initial condition of the greedy/fixed-gain evaluation episode.
struct EvalConfig {
    Eigen::Vector3d r_0 = Eigen::Vector3d::Zero();
    Eigen::Vector3d eta_0_deg = Eigen::Vector3d::Zero();
};

struct RunConfig {
    VehicleParams vehicle;
    EpisodeConfig episode;
    RewardWeights reward;
    GainLibrarySpec gains;
    long dwell_steps = 10;
    GainBounds bounds = GainBounds::table_one();
    TrainConfig train;
    EvalConfig eval;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;

    /// Throws ConfigError describing the first invalid field.
    void validate() const;
    /// Train settings with the run seed applied.
    TrainConfig train_config() const;
};

/// Every key is optional; missing keys keep their defaults, unknown keys are rejected.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& cfg);

}  // namespace snapq

#endif  // SNAPQ_CONFIG_HPP
