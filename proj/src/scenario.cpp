#include "senc/scenario.hpp"

#include <filesystem>

#include <json.hpp>

namespace senc {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& base_dir, const std::string& ref) {
    const fs::path p(ref);
    return p.is_absolute() ? ref : (fs::path(base_dir) / p).string();
}

MotionScript static_script() {
    MotionScript s;
    s.name = "static";
    MotionCommand origin;
    s.commands.push_back(origin);
    s.dwell_ms = 1000.0;
    return s;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("scenario: top level must be an object");

    try {
        Scenario s;
        s.name = j.value("name", s.name);

        if (j.contains("geometry")) {
            const json& g = j.at("geometry");
            if (g.is_string()) {
                const std::string ref = g.get<std::string>();
                if (ref != "default") s.rig = load_rig_config(resolve(base_dir, ref));
            } else {
                s.rig = parse_rig_config(g.dump());
            }
        }

        if (j.contains("deviation")) {
            const json& d = j.at("deviation");
            s.deviation.fixed_shortening_mm = d.value("fixed_shortening_mm", s.deviation.fixed_shortening_mm);
            s.deviation.count_noise_std = d.value("count_noise_std", s.deviation.count_noise_std);
            s.deviation.tcp_z_error_mm = d.value("tcp_z_error_mm", s.deviation.tcp_z_error_mm);
        }
        s.deviation.validate();

        if (j.contains("motion")) {
            const json& m = j.at("motion");
            if (m.is_string()) {
                const std::string ref = m.get<std::string>();
                if (ref == "accuracy")
                    s.motion = MotionScript::accuracy_protocol();
                else if (ref == "calibration66")
                    s.motion = MotionScript::calibration_protocol();
                else if (ref == "static")
                    s.motion = static_script();
                else
                    s.motion = parse_motion_script(read_text_file(resolve(base_dir, ref)));
            } else {
                s.motion = parse_motion_script(m.dump());
            }
        }
        s.motion.validate(s.rig.geometry.workspace);

        s.seed = j.value("seed", s.seed);
        s.offset_mm = j.value("offset_mm", s.offset_mm);
        if (j.contains("robot_base")) {
            const json& b = j.at("robot_base");
            if (!b.is_array() || b.size() != 6) throw ConfigError("scenario: robot_base needs 6 numbers");
            for (int i = 0; i < 6; ++i) s.robot_base[i] = b[static_cast<std::size_t>(i)].get<double>();
        }
        if (j.contains("stream")) {
            const json& st = j.at("stream");
            s.timing.move_ms = st.value("move_ms", s.timing.move_ms);
            s.timing.homing_margin_mm = st.value("homing_margin_mm", s.timing.homing_margin_mm);
            if (!(s.timing.move_ms >= 0.0) || !(s.timing.homing_margin_mm > 0.0))
                throw ConfigError("scenario: stream timing out of range");
        }
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    return parse_scenario(read_text_file(path), fs::path(path).parent_path().string());
}

std::array<EncoderSpec, kLegCount> scenario_encoders(const Scenario& scenario, SimRng& rng) {
    if (scenario.rig.has_encoders) return scenario.rig.encoders;
    return generate_encoder_specs(rng);
}

std::vector<Pose> scenario_poses(const Scenario& scenario) {
    std::vector<Pose> poses;
    poses.reserve(scenario.motion.commands.size() + 1);
    poses.push_back(Pose::identity());  // powered on at the nominal pose
    for (const auto& c : scenario.motion.commands)
        poses.push_back(matrix_to_pose(actual_helmet_transform(c.pose, scenario.deviation.tcp_z_error_mm)));
    return poses;
}

ScenarioStream scenario_stream(const Scenario& scenario, double rate_hz) {
    SimRng rng(scenario.seed);
    ScenarioStream out;
    out.rig = scenario.rig;
    out.rig.encoders = scenario_encoders(scenario, rng);
    out.rig.has_encoders = true;

    StreamTiming timing = scenario.timing;
    timing.rate_hz = rate_hz;
    const Trajectory traj = build_trajectory(scenario.rig.geometry, scenario.deviation, out.rig.encoders,
                                             scenario_poses(scenario), scenario.motion.dwell_ms, timing);
    out.stream = emit_count_stream(scenario.rig.geometry, traj, scenario.deviation, out.rig.encoders, &rng);
    return out;
}

}  // namespace senc
