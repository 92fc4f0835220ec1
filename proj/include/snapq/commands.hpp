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

#ifndef SNAPQ_COMMANDS_HPP
#define SNAPQ_COMMANDS_HPP

#include "snapq/config.hpp"
#include "snapq/dqn.hpp"
#include "snapq/env.hpp"
#include "snapq/gain_library.hpp"
#include "snapq/qnetwork.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace snapq {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitConfig = 2,
    kExitCertification = 3,
    kExitDivergence = 4,
};

/// Builds the environment factory shared by training and evaluation.
EnvFactory make_env_factory(const RunConfig& cfg, std::shared_ptr<const ActionTable> table);

/// Greedy rollout of one episode. The policy sees the observation and returns a proposed action.
using Policy = std::function<std::size_t(const Observation&)>;

struct Rollout {
    std::vector<StepRecord> steps;
    State14 final_state;
    double final_time = 0.0;
    double T_f = 0.0;
    Termination termination = Termination::kNone;
};

Rollout run_rollout(QuadEnv& env, const Eigen::Vector3d& r_0, const Eigen::Vector3d& eta_0, const Policy& policy);
Rollout run_eval(const RunConfig& cfg, std::shared_ptr<const ActionTable> table, const Policy& policy);

Policy greedy_policy(const QNetwork& net);
Policy fixed_policy(std::size_t action);

/// Fraction of failure terminations among the last `window` episodes (all of them if fewer).
double recent_failure_fraction(const std::vector<Termination>& terms, std::size_t window = 50);
inline constexpr double kDivergenceFailureFraction = 0.9;

/// Mean return over the first / last n curve rows (fewer if the curve is short).
double mean_return_head(const std::vector<CurveRow>& curve, std::size_t n);
double mean_return_tail(const std::vector<CurveRow>& curve, std::size_t n);

// CSV writers. Header rows are documented in the README and fixed.
void write_rollout_csv(const std::filesystem::path& path, const Rollout& r);
void write_figure_csvs(const std::filesystem::path& dir, const Rollout& r);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;  // throws std::out_of_range
    double number(std::size_t row, const std::string& name) const;
};

/// Strict reader: every row must have as many cells as the header.
CsvTable read_csv(const std::filesystem::path& path);

// Subcommands. Each writes into cfg.output_dir and returns an ExitCode.
int cmd_certify(const RunConfig& cfg, std::ostream& log);
int cmd_train(const RunConfig& cfg, std::ostream& log);
int cmd_eval(const RunConfig& cfg, const std::optional<std::filesystem::path>& checkpoint,
             std::optional<std::size_t> fixed_gain, std::ostream& log);

}  // namespace snapq

#endif  // SNAPQ_COMMANDS_HPP
