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

#include "snapq/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace snapq {

using nlohmann::json;

namespace {

std::string line_context(const std::string& text, std::size_t byte) {
    if (byte > 0) --byte;  // nlohmann reports the offset one past the offending character
    byte = std::min(byte, text.empty() ? 0 : text.size() - 1);
    std::size_t line = 1, line_start = 0;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            line_start = i + 1;
        }
    }
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    std::ostringstream os;
    os << "line " << line << ", column " << (byte - line_start + 1) << ":\n    "
       << text.substr(line_start, line_end - line_start) << "\n    "
       << std::string(byte - line_start, ' ') << '^';
    return os.str();
}

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + "expected an object");
    }

    template <class T>
    void read(const char* key, T& out) {
        if (const json* v = find(key)) {
            try {
                out = v->get<T>();
            } catch (const json::exception& e) {
                throw ConfigError(where(key) + "wrong type (" + e.what() + ")");
            }
        }
    }

    template <int N>
    void read_vec(const char* key, Eigen::Matrix<double, N, 1>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array() || v->size() != static_cast<std::size_t>(N)) {
                throw ConfigError(where(key) + "expected an array of " + std::to_string(N) + " numbers");
            }
            for (int i = 0; i < N; ++i) {
                if (!(*v)[static_cast<std::size_t>(i)].is_number()) throw ConfigError(where(key) + "expected numbers");
                out[i] = (*v)[static_cast<std::size_t>(i)].get<double>();
            }
        }
    }

    template <std::size_t N>
    void read_array(const char* key, std::array<double, N>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array() || v->size() != N) {
                throw ConfigError(where(key) + "expected an array of " + std::to_string(N) + " numbers");
            }
            for (std::size_t i = 0; i < N; ++i) {
                if (!(*v)[i].is_number()) throw ConfigError(where(key) + "expected numbers");
                out[i] = (*v)[i].get<double>();
            }
        }
    }

    const json* child(const char* key) { return find(key); }
    std::string path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError("unknown key '" + path(it.key().c_str()) + "'");
        }
    }

private:
    const json* find(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    std::string where(const char* key = nullptr) const {
        return "config field '" + (key ? path(key) : (path_.empty() ? std::string("<root>") : path_)) + "': ";
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_vehicle(const json& j, VehicleParams& v) {
    Section s(j, "vehicle");
    s.read("mass", v.mass);
    s.read("gravity", v.gravity);
    s.read_vec<3>("inertia", v.inertia);
    s.finish();
}

void read_episode(const json& j, EpisodeConfig& e) {
    Section s(j, "episode");
    s.read("dt", e.dt);
    s.read("episode_length", e.episode_length);
    s.read("T_f", e.T_f);
    s.read_vec<3>("r_star", e.r_star);
    s.read("snap_feedforward", e.snap_feedforward);
    s.read("penalize_physical_input", e.penalize_physical_input);
    if (const json* c = s.child("initial")) {
        Section i(*c, s.path("initial"));
        i.read_vec<3>("center", e.initial.center);
        i.read("position_half_width", e.initial.position_half_width);
        i.read("attitude_half_width_deg", e.initial.attitude_half_width_deg);
        i.finish();
    }
    if (const json* c = s.child("abort")) {
        Section a(*c, s.path("abort"));
        a.read("max_tilt_deg", e.abort.max_tilt_deg);
        a.read("max_position_error", e.abort.max_position_error);
        a.read("abort_reward", e.abort.abort_reward);
        a.finish();
    }
    s.finish();
}

void read_reward(const json& j, RewardWeights& w) {
    Section s(j, "reward");
    s.read("w_r", w.w_r);
    s.read("w_v", w.w_v);
    s.read("w_eta", w.w_eta);
    s.read("w_omega", w.w_omega);
    s.read("w_u", w.w_u);
    s.read("w_s", w.w_s);
    s.finish();
}

void read_gains(const json& j, RunConfig& cfg) {
    Section s(j, "gain_library");
    s.read_array<4>("nominal_poles", cfg.gains.nominal_poles);
    s.read_array<5>("scale_grid", cfg.gains.scale_grid);
    std::array<double, 2> yaw{cfg.gains.yaw_gains.first, cfg.gains.yaw_gains.second};
    s.read_array<2>("yaw_gains", yaw);
    cfg.gains.yaw_gains = {yaw[0], yaw[1]};
    s.read("dwell_steps", cfg.dwell_steps);
    if (const json* b = s.child("bounds")) {
        const std::string where = "config field '" + s.path("bounds") + "': ";
        if (!b->is_array() || b->size() != 14) throw ConfigError(where + "expected 14 [min, max] pairs");
        for (std::size_t i = 0; i < 14; ++i) {
            const json& p = (*b)[i];
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                throw ConfigError(where + "entry " + std::to_string(i) + " must be [min, max]");
            }
            cfg.bounds.range[i] = {p[0].get<double>(), p[1].get<double>()};
        }
    }
    s.finish();
}

void read_train(const json& j, TrainConfig& t) {
    Section s(j, "train");
    s.read("gamma", t.gamma);
    s.read("batch_size", t.batch_size);
    s.read("learning_rate", t.learning_rate);
    s.read("reward_scale", t.reward_scale);
    s.read("target_update_period", t.target_update_period);
    s.read("epsilon_start", t.epsilon_start);
    s.read("epsilon_end", t.epsilon_end);
    s.read("epsilon_decay_steps", t.epsilon_decay_steps);
    s.read("replay_capacity", t.replay_capacity);
    s.read("warmup_steps", t.warmup_steps);
    s.read("total_episodes", t.total_episodes);
    s.read("hidden_sizes", t.hidden_sizes);
    s.read("log_wall_time", t.log_wall_time);
    s.finish();
}

void read_eval(const json& j, EvalConfig& e) {
    Section s(j, "eval");
    s.read_vec<3>("r_0", e.r_0);
    s.read_vec<3>("eta_0_deg", e.eta_0_deg);
    s.finish();
}

template <class F>
void wrap(F&& f) {
    try {
        f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

json vec(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

void RunConfig::validate() const {
    wrap([&] { vehicle.validate(); });
    wrap([&] { episode.validate(); });
    wrap([&] { reward.validate(); });
    wrap([&] { train_config().validate(); });
    if (dwell_steps < 1) throw ConfigError("gain_library.dwell_steps must be >= 1");
    for (std::size_t i = 0; i < 14; ++i) {
        if (!(bounds.range[i].first <= bounds.range[i].second)) {
            throw ConfigError("gain_library.bounds entry " + std::to_string(i) + " has min > max");
        }
    }
    if (!eval.r_0.allFinite() || !eval.eta_0_deg.allFinite()) throw ConfigError("eval initial state must be finite");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t = train;
    t.seed = seed;
    return t;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ": JSON parse error at " + line_context(text, e.byte) + "\n" + e.what());
    }

    RunConfig cfg;
    Section s(root, "");
    if (const json* v = s.child("seed")) {
        if (!v->is_number_unsigned()) throw ConfigError("config field 'seed': expected a non-negative integer");
        cfg.seed = v->get<std::uint64_t>();
    }
    if (const json* v = s.child("output_dir")) {
        if (!v->is_string()) throw ConfigError("config field 'output_dir': expected a string");
        cfg.output_dir = v->get<std::string>();
    }
    if (const json* v = s.child("vehicle")) read_vehicle(*v, cfg.vehicle);
    if (const json* v = s.child("episode")) read_episode(*v, cfg.episode);
    if (const json* v = s.child("reward")) read_reward(*v, cfg.reward);
    if (const json* v = s.child("gain_library")) read_gains(*v, cfg);
    if (const json* v = s.child("train")) read_train(*v, cfg.train);
    if (const json* v = s.child("eval")) read_eval(*v, cfg.eval);
    s.finish();
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), path.string());
}

json to_json(const RunConfig& c) {
    json bounds = json::array();
    for (const auto& [lo, hi] : c.bounds.range) bounds.push_back({lo, hi});
    return {
        {"seed", c.seed},
        {"output_dir", c.output_dir.string()},
        {"vehicle", {{"mass", c.vehicle.mass}, {"gravity", c.vehicle.gravity}, {"inertia", vec(c.vehicle.inertia)}}},
        {"episode",
         {{"dt", c.episode.dt},
          {"episode_length", c.episode.episode_length},
          {"T_f", c.episode.T_f},
          {"r_star", vec(c.episode.r_star)},
          {"snap_feedforward", c.episode.snap_feedforward},
          {"penalize_physical_input", c.episode.penalize_physical_input},
          {"initial",
           {{"center", vec(c.episode.initial.center)},
            {"position_half_width", c.episode.initial.position_half_width},
            {"attitude_half_width_deg", c.episode.initial.attitude_half_width_deg}}},
          {"abort",
           {{"max_tilt_deg", c.episode.abort.max_tilt_deg},
            {"max_position_error", c.episode.abort.max_position_error},
            {"abort_reward", c.episode.abort.abort_reward}}}}},
        {"reward",
         {{"w_r", c.reward.w_r},
          {"w_v", c.reward.w_v},
          {"w_eta", c.reward.w_eta},
          {"w_omega", c.reward.w_omega},
          {"w_u", c.reward.w_u},
          {"w_s", c.reward.w_s}}},
        {"gain_library",
         {{"nominal_poles", c.gains.nominal_poles},
          {"scale_grid", c.gains.scale_grid},
          {"yaw_gains", {c.gains.yaw_gains.first, c.gains.yaw_gains.second}},
          {"dwell_steps", c.dwell_steps},
          {"bounds", bounds}}},
        {"train",
         {{"gamma", c.train.gamma},
          {"batch_size", c.train.batch_size},
          {"learning_rate", c.train.learning_rate},
          {"reward_scale", c.train.reward_scale},
          {"target_update_period", c.train.target_update_period},
          {"epsilon_start", c.train.epsilon_start},
          {"epsilon_end", c.train.epsilon_end},
          {"epsilon_decay_steps", c.train.epsilon_decay_steps},
          {"replay_capacity", c.train.replay_capacity},
          {"warmup_steps", c.train.warmup_steps},
          {"total_episodes", c.train.total_episodes},
          {"hidden_sizes", c.train.hidden_sizes},
          {"log_wall_time", c.train.log_wall_time}}},
        {"eval", {{"r_0", vec(c.eval.r_0)}, {"eta_0_deg", vec(c.eval.eta_0_deg)}}},
    };
}

}  // namespace snapq
