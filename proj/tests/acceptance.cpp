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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Usage: acceptance [output_dir]

#include "snapq/commands.hpp"
#include "snapq/config.hpp"
#include "snapq/dqn.hpp"
#include "snapq/flat_controller.hpp"
#include "snapq/gain_library.hpp"
#include "snapq/qnetwork.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace snapq;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(int id, const std::string& name, const std::function<Outcome()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %2d %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const VehicleParams kParams;

std::shared_ptr<const ActionTable> default_table() {
    static const auto t = std::make_shared<const ActionTable>(build_action_table(GainLibrarySpec{}));
    return t;
}

State14 forced_start() {
    State14 x;
    x.r = {0.3, -0.2, 1.0};
    x.v = {0.5, 0.1, -0.2};
    x.eta = {0.1, -0.15, 0.3};
    x.omega = {0.2, -0.1, 0.4};
    x.thrust_dev = 0.5;
    x.thrust_dev_rate = -0.3;
    return x;
}

State14 integrate_forced(double dt) {
    const PhysicalInput in{2.0, {0.004, -0.003, 0.002}};
    State14 x = forced_start();
    const long n = std::lround(1.0 / dt);
    for (long i = 0; i < n; ++i) x = rk4_step(x, in, kParams, dt);
    return x;
}

Outcome certification() {
    const auto t0 = std::chrono::steady_clock::now();
    const ActionTable t = build_action_table(GainLibrarySpec{}, Execution::kParallel);
    const double secs = elapsed_since(t0);
    double worst_re = -1e300, worst_gap = 1e300;
    for (const auto& c : t.certificates) {
        worst_re = std::max(worst_re, c.max_real_part);
        worst_gap = std::min(worst_gap, c.min_eigen_gap);
    }
    const bool ok = t.size() == 625 && worst_re < -1e-6 && worst_gap > 1e-6 && secs < 10.0;
    return {ok, fmt("%zu entries, max Re %.4f, min gap %.3e, build %.2f s", t.size(), worst_re, worst_gap, secs)};
}

Outcome table_envelope() {
    const auto t0 = std::chrono::steady_clock::now();
    const ActionTable& t = *default_table();
    const GainBounds bounds = GainBounds::table_one();
    const BoundsReport report = validate_bounds(t.entries, bounds, 1e-4);
    const std::string text = report.to_text();
    const double secs = elapsed_since(t0);

    // Independent recomputation of which components leave the envelope.
    std::vector<std::size_t> expected;
    for (std::size_t c = 0; c < 14; ++c) {
        double mn = 1e300, mx = -1e300;
        for (const auto& e : t.entries) {
            mn = std::min(mn, e.k[c]);
            mx = std::max(mx, e.k[c]);
        }
        if (std::abs(mn - bounds.range[c].first) > 1e-4 || std::abs(mx - bounds.range[c].second) > 1e-4) {
            expected.push_back(c);
        }
    }
    bool itemized = report.deviations() == expected;
    for (std::size_t c : expected) {
        const std::string key = "k" + std::to_string(c + 1) + "\t";
        const auto pos = text.find(key);
        itemized = itemized && pos != std::string::npos &&
                   text.substr(pos, text.find('\n', pos) - pos).find("DEVIATION") != std::string::npos;
    }
    const bool ok = (report.all_within() || itemized) && secs < 1.0;
    std::string listed;
    for (std::size_t c : report.deviations()) listed += (listed.empty() ? "k" : ",k") + std::to_string(c + 1);
    return {ok, report.all_within() ? "all 14 components within 1e-4"
                                    : fmt("envelope not reproduced; report itemizes %zu deviations (%s)",
                                          expected.size(), listed.c_str())};
}

Outcome rk4_convergence() {
    const State14 ref = integrate_forced(5e-4);
    const double e1 = (integrate_forced(0.01).to_vector() - ref.to_vector()).norm();
    const double e2 = (integrate_forced(0.005).to_vector() - ref.to_vector()).norm();
    const double ratio = e1 / e2;
    return {ratio >= 12.0 && ratio <= 20.0, fmt("err(0.01) %.3e, err(0.005) %.3e, ratio %.2f", e1, e2, ratio)};
}

Outcome feedback_linearization() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        State14 x;
        x.r = {u(rng), u(rng), u(rng)};
        x.v = {u(rng), u(rng), u(rng)};
        x.eta = {1.2 * u(rng), 1.2 * u(rng), 3.0 * u(rng)};
        x.omega = {2.0 * u(rng), 2.0 * u(rng), 2.0 * u(rng)};
        x.thrust_dev = 3.0 * u(rng);
        x.thrust_dev_rate = 5.0 * u(rng);
        const Eigen::Vector4d v(5.0 * u(rng), 5.0 * u(rng), 5.0 * u(rng), 5.0 * u(rng));
        const Vector14 dx = dynamics_rhs(x, physical_input(x, v, kParams), kParams);
        const Eigen::Matrix3d E = euler_kinematic_matrix(x.eta.x(), x.eta.y());
        const Eigen::Matrix3d E_dot = euler_kinematic_matrix_dot(x.eta.x(), x.eta.y(), E * x.omega);
        const Eigen::Vector3d eta_ddot = E_dot * x.omega + E * dx.segment<3>(9);
        worst = std::max(worst, (eta_ddot - v.tail<3>()).cwiseAbs().maxCoeff());
    }
    return {worst < 1e-9, fmt("max |eta_ddot - u_eta| = %.3e over 1000 states", worst)};
}

Outcome snap_consistency() {
    const std::size_t action = 312;
    const GainVector& k = default_table()->at(action);
    State14 x;
    x.eta = {0.05, -0.04, 0.3};
    const double dt = 0.01;
    SnapController ctl(kParams, Reference(x.r, {1.0, 1.0, 1.5}, 5.0));
    std::vector<State14> xs;
    std::vector<Eigen::Vector3d> pred;
    for (long i = 0; i <= 500; ++i) {
        const auto o = ctl.compute(x, static_cast<double>(i) * dt, k);
        const auto maps = inversion_maps(x, kParams);
        xs.push_back(x);
        pred.push_back((maps.M * o.virtual_u + maps.n).head<3>());
        x = rk4_step(x, o.input, kParams, dt);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 100; i < 400; ++i) {
        const Eigen::Vector3d fd =
            (xs[i + 2].r - 4.0 * xs[i + 1].r + 6.0 * xs[i].r - 4.0 * xs[i - 1].r + xs[i - 2].r) / std::pow(dt, 4);
        num += (fd - pred[i]).squaredNorm();
        den += pred[i].squaredNorm();
    }
    const double rel = std::sqrt(num / den);
    return {rel < 0.02, fmt("relative L2 mismatch %.3e on t in [1, 4) s, action %zu", rel, action)};
}

Outcome fixed_gain_stabilization() {
    RunConfig cfg;
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> pick(0, 624);
    std::normal_distribution<double> n(0.0, 1.0);
    double worst_er = 0.0, worst_w = 0.0, worst_tilt = 0.0;
    bool all_time_limit = true;
    for (int i = 0; i < 20; ++i) {
        const std::size_t a = pick(rng);
        Eigen::Vector3d dir(n(rng), n(rng), n(rng));
        dir.normalize();
        cfg.eval.r_0 = cfg.episode.r_star + dir;
        const Rollout r = run_eval(cfg, default_table(), fixed_policy(a));
        all_time_limit = all_time_limit && r.termination == Termination::kTimeLimit;
        worst_er = std::max(worst_er, (r.final_state.r - cfg.episode.r_star).norm());
        worst_w = std::max(worst_w, r.final_state.omega.norm());
        for (const auto& s : r.steps) {
            worst_tilt = std::max({worst_tilt, std::abs(s.state.eta.x()), std::abs(s.state.eta.y())});
        }
    }
    worst_tilt *= 180.0 / std::numbers::pi;
    const bool ok = all_time_limit && worst_er < 0.01 && worst_w < 0.01 && worst_tilt < 80.0;
    return {ok, fmt("worst |e_r(10)| %.2e m, |omega(10)| %.2e rad/s, tilt %.2f deg", worst_er, worst_w, worst_tilt)};
}

Outcome reference_continuity() {
    const double T_f = 5.0;
    const QuinticBlend blend(T_f);
    // left limit: derivatives of the blend polynomial itself at tau = 1
    const auto& c = blend.coefficients();
    double limit = 0.0, scale = 1.0;
    for (int n = 1; n <= 4; ++n) {
        scale /= T_f;
        double acc = 0.0;
        for (int i = n; i <= 5; ++i) {
            double falling = 1.0;
            for (int j = 0; j < n; ++j) falling *= static_cast<double>(i - j);
            acc += falling * c[static_cast<std::size_t>(i)];
        }
        limit = std::max(limit, std::abs(acc * scale));
    }
    const double t_left = T_f - 1e-9 * T_f;
    const auto d = blend.evaluate(t_left);
    const double sampled = std::max({std::abs(d[1]), std::abs(d[2]), std::abs(d[3]), std::abs(d[4])});
    return {limit < 1e-8 && sampled < 1e-8,
            fmt("max |beta^(1..4)(T_f^-)| = %.3e (polynomial limit), %.3e at T_f - %.0e s", limit, sampled,
                T_f - t_left)};
}

Outcome gradient_check() {
    QNetwork net({15, 8, 8, 5});
    std::mt19937_64 rng(7);
    net.init_fan_in_uniform(rng);
    std::normal_distribution<double> n(0.0, 1.0);
    const Eigen::Index B = 8;
    Eigen::MatrixXd X(15, B);
    for (Eigen::Index j = 0; j < B; ++j)
        for (Eigen::Index i = 0; i < 15; ++i) X(i, j) = n(rng);
    std::vector<std::size_t> actions(B);
    for (Eigen::Index j = 0; j < B; ++j) actions[static_cast<std::size_t>(j)] = static_cast<std::size_t>(j % 5);
    Eigen::VectorXd y(B);
    for (Eigen::Index j = 0; j < B; ++j) y(j) = n(rng);
    std::vector<double> grad(net.param_count());
    BackpropWorkspace ws;
    taken_action_loss_grad(net, X, actions, y, grad, ws, Execution::kParallel);
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < net.param_count(); ++i) {
        const double p = net.params()[i];
        net.params()[i] = p + h;
        const double lp = taken_action_loss(net, X, actions, y, Execution::kSerial);
        net.params()[i] = p - h;
        const double lm = taken_action_loss(net, X, actions, y, Execution::kSerial);
        net.params()[i] = p;
        const double fd = (lp - lm) / (2 * h);
        worst = std::max(worst, std::abs(fd - grad[i]) / std::max(1e-6, std::abs(fd) + std::abs(grad[i])));
    }
    return {worst < 1e-4, fmt("max relative error %.3e over %zu parameters", worst, net.param_count())};
}

struct TrainingRun {
    RunConfig cfg;
    TrainResult result;
    Rollout eval;
    bool have = false;
};

TrainingRun& training_run(const fs::path& out) {
    static TrainingRun run;
    if (run.have) return run;
    run.cfg.output_dir = out / "train";
    fs::create_directories(run.cfg.output_dir);
    std::printf("     training %ld episodes (seed %llu)...\n", run.cfg.train.total_episodes,
                static_cast<unsigned long long>(run.cfg.seed));
    std::fflush(stdout);
    run.result = train(make_env_factory(run.cfg, default_table()), run.cfg.train_config(), Execution::kParallel,
                       [](const CurveRow& r) {
                           if (r.episode % 25 == 0) {
                               std::printf("     episode %ld return %.2f epsilon %.3f\n", r.episode, r.episode_return,
                                           r.epsilon);
                               std::fflush(stdout);
                           }
                       });
    write_curve_csv(run.cfg.output_dir / "curve.csv", run.result.curve);
    save_checkpoint(run.cfg.output_dir / "checkpoint.bin", run.result.net, {{"config", to_json(run.cfg)}});
    run.eval = run_eval(run.cfg, default_table(), greedy_policy(run.result.net));
    write_rollout_csv(run.cfg.output_dir / "rollout.csv", run.eval);
    write_figure_csvs(run.cfg.output_dir, run.eval);
    run.have = true;
    return run;
}

Outcome learning_trend(const fs::path& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const TrainingRun& run = training_run(out);
    const double first = mean_return_head(run.result.curve, 30);
    const double last = mean_return_tail(run.result.curve, 30);
    const double gap = std::abs(first);
    const double final_reward = run.eval.steps.back().reward;
    const bool ok = run.result.curve.size() == 300 && last - first >= 0.2 * gap && final_reward >= -0.05;
    return {ok, fmt("first-30 mean %.2f, last-30 mean %.2f (need >= %.2f), greedy final-step reward %.5f, "
                    "training %.0f s",
                    first, last, first + 0.2 * gap, final_reward, elapsed_since(t0))};
}

Outcome dwell_property(const fs::path& out) {
    const TrainingRun& run = training_run(out);
    std::vector<std::size_t> actions;
    for (const auto& s : run.eval.steps) actions.push_back(s.action);
    const long eval_gap = min_change_interval(actions);
    const long nd = run.cfg.dwell_steps;
    const bool ok = run.result.dwell_violations == 0 && (run.result.min_observed_dwell < 0 ||
                                                         run.result.min_observed_dwell >= nd) &&
                    (eval_gap < 0 || eval_gap >= nd);
    return {ok, fmt("training: %ld violating episodes, min interval %ld; evaluation min interval %ld; N_d = %ld",
                    run.result.dwell_violations, run.result.min_observed_dwell, eval_gap, nd)};
}

Outcome post_final_hover(const fs::path& out) {
    const TrainingRun& run = training_run(out);
    double worst_v = 0.0, worst_e = 0.0;
    auto visit = [&](double t, const State14& x) {
        if (t <= 8.0) return;
        worst_v = std::max(worst_v, x.v.norm());
        worst_e = std::max(worst_e, (x.r - run.cfg.episode.r_star).norm());
    };
    for (const auto& s : run.eval.steps) visit(s.t, s.state);
    visit(run.eval.final_time, run.eval.final_state);
    const bool ok = run.eval.termination == Termination::kTimeLimit && worst_v < 0.05 && worst_e < 0.05;
    return {ok, fmt("t > 8 s: max |v| %.4f m/s, max |e_r| %.4f m", worst_v, worst_e)};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

Outcome determinism(const fs::path& out) {
    // Two fresh runs with the default network and schedule, shortened to keep the suite fast.
    std::string files[2];
    for (int i = 0; i < 2; ++i) {
        RunConfig cfg;
        cfg.seed = 2026;
        cfg.train.total_episodes = 8;
        cfg.output_dir = out / ("determinism_" + std::to_string(i));
        fs::create_directories(cfg.output_dir);
        const TrainResult r = train(make_env_factory(cfg, default_table()), cfg.train_config());
        write_curve_csv(cfg.output_dir / "curve.csv", r.curve);
        files[i] = slurp(cfg.output_dir / "curve.csv");
    }
    const bool ok = !files[0].empty() && files[0] == files[1];
    return {ok, fmt("%zu-byte curve files %s", files[0].size(), ok ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
    fs::create_directories(out);

    run(1, "certification suite", certification);
    run(2, "table envelope", table_envelope);
    run(3, "rk4 convergence", rk4_convergence);
    run(4, "feedback-linearization exactness", feedback_linearization);
    run(5, "snap consistency", snap_consistency);
    run(6, "fixed-gain stabilization", fixed_gain_stabilization);
    run(7, "reference continuity", reference_continuity);
    run(8, "gradient check", gradient_check);
    run(12, "determinism", [&] { return determinism(out); });
    run(9, "learning trend", [&] { return learning_trend(out); });
    run(10, "dwell-time property", [&] { return dwell_property(out); });
    run(11, "post-T_f hover", [&] { return post_final_hover(out); });

    std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
