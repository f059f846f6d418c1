#pragma once

#include <cstdint>
#include <string>

#include "senc/config.hpp"
#include "senc/simulator.hpp"

namespace senc {

// A simulation run described in JSON:
//
//   {"name": "ideal",
//    "geometry": "default" | "<path>" | {rig config object},
//    "deviation": {"fixed_shortening_mm": 3.0, "count_noise_std": 0, "tcp_z_error_mm": 0},
//    "motion": "accuracy" | "calibration66" | "static" | "<path>" | {motion script object},
//    "seed": 7,
//    "offset_mm": 3.0,
//    "robot_base": [x, y, z, roll, pitch, yaw],
//    "stream": {"move_ms": 40, "homing_margin_mm": 1.0}}
//
// Paths are resolved relative to the scenario file.
struct Scenario {
    std::string name = "unnamed";
    RigConfig rig;
    DeviationModel deviation;
    MotionScript motion = MotionScript::accuracy_protocol();
    std::uint64_t seed = 0;
    double offset_mm = 3.0;
    Pose robot_base = ProtocolOptions{}.robot_base;
    StreamTiming timing;
};

// Throws ConfigError on malformed input.
Scenario parse_scenario(const std::string& json_text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

// Encoder homing references for a run: the rig's if it lists them, otherwise
// drawn from `rng` (which is then advanced by six draws).
std::array<EncoderSpec, kLegCount> scenario_encoders(const Scenario& scenario, SimRng& rng);

// Poses the helmet actually reaches while executing the motion script.
std::vector<Pose> scenario_poses(const Scenario& scenario);

struct ScenarioStream {
    RigConfig rig;  // geometry plus the encoder references in effect
    CountStream stream;
};

// Deterministic in the scenario seed.
ScenarioStream scenario_stream(const Scenario& scenario, double rate_hz);

}  // namespace senc
