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

#include "snapq/commands.hpp"
#include "snapq/config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

int main(int argc, char** argv) {
    CLI::App app{"Learned gain scheduling for a snap-controlled quadcopter"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> checkpoint;
    std::optional<std::size_t> fixed_gain;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration (defaults apply when omitted)");
        sub->add_option("--seed", seed, "Override the run seed");
        sub->add_option("--out", out, "Override the output directory");
    };
    auto* certify = app.add_subcommand("certify", "Build and certify the gain table, write the audit files");
    auto* train = app.add_subcommand("train", "Train the Q-network, write checkpoint and training curve");
    auto* eval = app.add_subcommand("eval", "Run one greedy or fixed-gain episode and export figure data");
    for (auto* sub : {certify, train, eval}) add_common(sub);
    eval->add_option("--checkpoint", checkpoint, "Checkpoint written by train");
    eval->add_option("--fixed-gain", fixed_gain, "Hold one table entry for the whole episode");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : snapq::kExitConfig;
    }

    snapq::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = snapq::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (out) cfg.output_dir = *out;
        cfg.validate();
    } catch (const snapq::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return snapq::kExitConfig;
    }

    try {
        if (*certify) return snapq::cmd_certify(cfg, std::cout);
        if (*train) return snapq::cmd_train(cfg, std::cout);
        std::optional<std::filesystem::path> ck;
        if (checkpoint) ck = *checkpoint;
        return snapq::cmd_eval(cfg, ck, fixed_gain, std::cout);
    } catch (const snapq::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return snapq::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return snapq::kExitInternal;
    }
}
