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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

namespace snapq {

namespace fs = std::filesystem;

EnvFactory make_env_factory(const RunConfig& cfg, std::shared_ptr<const ActionTable> table) {
    return [cfg, table] { return QuadEnv(cfg.vehicle, cfg.episode, cfg.reward, table, cfg.dwell_steps); };
}

Rollout run_rollout(QuadEnv& env, const Eigen::Vector3d& r_0, const Eigen::Vector3d& eta_0, const Policy& policy) {
    Rollout out;
    out.T_f = env.config().T_f;
    Observation obs = env.reset_to(r_0, eta_0);
    out.steps.reserve(static_cast<std::size_t>(env.config().steps()));
    while (!env.done()) {
        const Transition tr = env.step(policy(obs));
        out.steps.push_back(env.last_record());
        out.termination = tr.termination;
        obs = tr.next_obs;
    }
    out.final_state = env.state();
    out.final_time = env.time();
    return out;
}

Rollout run_eval(const RunConfig& cfg, std::shared_ptr<const ActionTable> table, const Policy& policy) {
    QuadEnv env = make_env_factory(cfg, std::move(table))();
    return run_rollout(env, cfg.eval.r_0, cfg.eval.eta_0_deg * (std::numbers::pi / 180.0), policy);
}

Policy greedy_policy(const QNetwork& net) {
    return [&net](const Observation& o) { return argmax_lowest(net.forward(o, Execution::kParallel)); };
}

Policy fixed_policy(std::size_t action) {
    return [action](const Observation&) { return action; };
}

double recent_failure_fraction(const std::vector<Termination>& terms, std::size_t window) {
    if (terms.empty()) return 0.0;
    const std::size_t n = std::min(window, terms.size());
    const auto fails = std::count(terms.end() - static_cast<long>(n), terms.end(), Termination::kFailure);
    return static_cast<double>(fails) / static_cast<double>(n);
}

double mean_return_head(const std::vector<CurveRow>& curve, std::size_t n) {
    n = std::min(n, curve.size());
    if (n == 0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += curve[i].episode_return;
    return s / static_cast<double>(n);
}

double mean_return_tail(const std::vector<CurveRow>& curve, std::size_t n) {
    n = std::min(n, curve.size());
    if (n == 0) return 0.0;
    double s = 0.0;
    for (std::size_t i = curve.size() - n; i < curve.size(); ++i) s += curve[i].episode_return;
    return s / static_cast<double>(n);
}

namespace {

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : os_(path, std::ios::binary) {
        if (!os_) throw std::runtime_error("cannot write " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
        os_ << '\n';
        os_ << std::setprecision(17);
    }
    CsvWriter& operator<<(double v) {
        sep();
        os_ << v;
        return *this;
    }
    CsvWriter& operator<<(std::size_t v) {
        sep();
        os_ << v;
        return *this;
    }
    CsvWriter& operator<<(const char* s) {
        sep();
        os_ << s;
        return *this;
    }
    CsvWriter& operator<<(const Eigen::Vector3d& v) { return *this << v.x() << v.y() << v.z(); }
    void end() {
        os_ << '\n';
        first_ = true;
    }

private:
    void sep() {
        if (!first_) os_ << ',';
        first_ = false;
    }
    std::ofstream os_;
    bool first_ = true;
};

std::vector<std::string> xyz(const std::string& p) { return {p + "_x", p + "_y", p + "_z"}; }

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
    std::vector<std::string> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

}  // namespace

void write_rollout_csv(const fs::path& path, const Rollout& r) {
    std::vector<std::string> gains;
    for (int i = 1; i <= 14; ++i) gains.push_back("k" + std::to_string(i));
    CsvWriter w(path, concat({{"t", "x", "y", "z", "vx", "vy", "vz", "phi", "theta", "psi", "p", "q", "r", "T_dev",
                               "T_dev_rate", "action"},
                              gains,
                              {"reward", "u_T", "tau_x", "tau_y", "tau_z", "rd_x", "rd_y", "rd_z", "termination"}}));
    for (const auto& s : r.steps) {
        w << s.t;
        const Vector14 x = s.state.to_vector();
        for (int i = 0; i < 14; ++i) w << x[i];
        w << s.action;
        for (double k : s.gains.k) w << k;
        w << s.reward << s.input.thrust_accel << s.input.torque << s.ref.pos << termination_name(s.termination);
        w.end();
    }
}

void write_figure_csvs(const fs::path& dir, const Rollout& r) {
    {
        CsvWriter w(dir / "fig_gains.csv", {"t", "action", "k_jerk", "k_accel", "k_vel", "k_pos", "k_yaw_rate", "k_yaw"});
        for (const auto& s : r.steps) {
            w << s.t << s.action << s.gains.level(GainVector::kJerk, 0) << s.gains.level(GainVector::kAccel, 0)
              << s.gains.level(GainVector::kVel, 0) << s.gains.level(GainVector::kPos, 0) << s.gains.yaw_rate_gain()
              << s.gains.yaw_gain();
            w.end();
        }
    }
    {
        CsvWriter w(dir / "fig_external_errors.csv",
                    concat({{"t"}, xyz("e_r"), xyz("e_v"), xyz("e_a"), xyz("e_j"), {"psi", "psi_dot"}}));
        for (const auto& s : r.steps) {
            w << s.t << s.errors.e_r << s.errors.e_v << s.errors.e_a << s.errors.e_j << s.errors.psi
              << s.errors.psi_dot;
            w.end();
        }
    }
    {
        CsvWriter w(dir / "fig_position.csv", {"t", "x", "y", "z", "rd_x", "rd_y", "rd_z", "after_T_f"});
        for (const auto& s : r.steps) {
            w << s.t << s.state.r << s.ref.pos << (s.t >= r.T_f ? std::size_t{1} : std::size_t{0});
            w.end();
        }
    }
    {
        CsvWriter w(dir / "fig_euler.csv", {"t", "phi", "theta", "psi"});
        for (const auto& s : r.steps) {
            w << s.t << s.state.eta;
            w.end();
        }
    }
    {
        CsvWriter w(dir / "fig_controls.csv", {"t", "u_T", "tau_x", "tau_y", "tau_z"});
        for (const auto& s : r.steps) {
            w << s.t << s.input.thrust_accel << s.input.torque;
            w.end();
        }
    }
    {
        CsvWriter w(dir / "fig_reward.csv", {"t", "reward"});
        for (const auto& s : r.steps) {
            w << s.t << s.reward;
            w.end();
        }
    }
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::out_of_range("no CSV column " + name);
    return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, const std::string& name) const {
    return std::stod(rows.at(row).at(column(name)));
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        return cells;
    };
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty CSV " + path.string());
    t.header = split(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(t.rows.size() + 1) + " has " +
                                     std::to_string(cells.size()) + " cells, header has " +
                                     std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
}

std::shared_ptr<const ActionTable> certified_table(const RunConfig& cfg, std::ostream& log) {
    auto table = std::make_shared<const ActionTable>(build_action_table(cfg.gains, Execution::kParallel));
    log << "certified " << table->size() << " gain vectors\n";
    return table;
}

}  // namespace

int cmd_certify(const RunConfig& cfg, std::ostream& log) {
    fs::create_directories(cfg.output_dir);
    std::shared_ptr<const ActionTable> table;
    try {
        table = certified_table(cfg, log);
    } catch (const CertificationFailure& e) {
        log << "certification failed: " << e.what() << '\n';
        return kExitCertification;
    } catch (const std::invalid_argument& e) {
        log << "invalid gain library: " << e.what() << '\n';
        return kExitCertification;
    }
    {
        std::ofstream os(cfg.output_dir / "certificates.tsv", std::ios::binary);
        write_action_table(os, *table);
    }
    const BoundsReport report = validate_bounds(table->entries, cfg.bounds);
    write_text(cfg.output_dir / "bounds_report.txt", report.to_text());
    log << report.to_text();
    return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& log) {
    fs::create_directories(cfg.output_dir);
    std::shared_ptr<const ActionTable> table;
    try {
        table = certified_table(cfg, log);
    } catch (const std::exception& e) {
        log << "certification failed: " << e.what() << '\n';
        return kExitCertification;
    }

    const TrainConfig tcfg = cfg.train_config();
    const TrainResult res = train(make_env_factory(cfg, table), tcfg, Execution::kParallel, [&](const CurveRow& r) {
        if (r.episode % 10 == 0) {
            log << "episode " << r.episode << " return " << r.episode_return << " epsilon " << r.epsilon << '\n';
        }
    });

    write_curve_csv(cfg.output_dir / "curve.csv", res.curve);
    // output location is left out so identical runs give identical bytes
    nlohmann::json config_echo = to_json(cfg);
    config_echo.erase("output_dir");
    nlohmann::json extra = {{"config", config_echo},
                            {"seed", cfg.seed},
                            {"train_steps", res.train_steps},
                            {"env_steps", res.env_steps}};
    save_checkpoint(cfg.output_dir / "checkpoint.bin", res.net, extra);

    log << std::setprecision(6) << "trained " << res.curve.size() << " episodes, " << res.train_steps
        << " trainer steps in " << res.wall_seconds << " s\n";
    log << "final 30-episode mean return " << mean_return_tail(res.curve, 30) << '\n';
    if (res.dwell_violations > 0) {
        log << "dwell violation in " << res.dwell_violations << " episodes (min interval " << res.min_observed_dwell
            << ")\n";
        return kExitInternal;
    }
    const double fail = recent_failure_fraction(res.terminations);
    if (fail > kDivergenceFailureFraction) {
        log << "diverged: " << fail * 100.0 << "% failure terminations in the last 50 episodes\n";
        return kExitDivergence;
    }
    return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const std::optional<fs::path>& checkpoint, std::optional<std::size_t> fixed_gain,
             std::ostream& log) {
    fs::create_directories(cfg.output_dir);
    std::shared_ptr<const ActionTable> table;
    try {
        table = certified_table(cfg, log);
    } catch (const std::exception& e) {
        log << "certification failed: " << e.what() << '\n';
        return kExitCertification;
    }

    std::optional<QNetwork> net;
    Policy policy;
    if (fixed_gain) {
        if (*fixed_gain >= table->size()) {
            log << "fixed-gain index " << *fixed_gain << " outside [0, " << table->size() << ")\n";
            return kExitConfig;
        }
        policy = fixed_policy(*fixed_gain);
    } else {
        if (!checkpoint) {
            log << "eval needs --checkpoint or --fixed-gain\n";
            return kExitConfig;
        }
        Checkpoint ck = load_checkpoint(*checkpoint);
        std::vector<std::size_t> expected{kObservationSize};
        expected.insert(expected.end(), cfg.train.hidden_sizes.begin(), cfg.train.hidden_sizes.end());
        expected.push_back(table->size());
        if (ck.net.layer_sizes() != expected) {
            log << "checkpoint layer sizes do not match the configured network\n";
            return kExitConfig;
        }
        net = std::move(ck.net);
        policy = greedy_policy(*net);
    }

    const Rollout r = run_eval(cfg, table, policy);
    write_rollout_csv(cfg.output_dir / "rollout.csv", r);
    write_figure_csvs(cfg.output_dir, r);

    std::vector<std::size_t> actions;
    for (const auto& s : r.steps) actions.push_back(s.action);
    const long interval = min_change_interval(actions);
    const auto& last = r.steps.back();
    log << std::setprecision(6) << "eval: " << r.steps.size() << " steps, termination "
        << termination_name(r.termination) << ", final reward " << last.reward << ", final |e_r| "
        << (r.final_state.r - last.ref.pos).norm() << " m\n";
    if (interval >= 0 && interval < cfg.dwell_steps) {
        log << "dwell violation: gains changed after " << interval << " steps\n";
        return kExitInternal;
    }
    return kExitOk;
}

}  // namespace snapq
