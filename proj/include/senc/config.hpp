#pragma once

#include <array>
#include <string>

#include "senc/encoder.hpp"
#include "senc/geometry.hpp"

namespace senc {

// Rig description: attachment geometry plus per-encoder homing references.
//
//   {"base_points":   [[x,y,z] x 6],
//    "helmet_points": [[x,y,z] x 6],
//    "workspace":     {"translation_mm": 10, "rotation_deg": 10},
//    "encoders":      [{"first_index_length_mm": ...} x 6]}   // optional
//
// Encoder entries may also override counts_per_mm, range_mm and
// index_spacing_counts.
struct RigConfig {
    PlatformGeometry geometry = PlatformGeometry::default_geometry();
    std::array<EncoderSpec, kLegCount> encoders{};
    bool has_encoders = false;
};

RigConfig parse_rig_config(const std::string& json_text);
std::string rig_config_to_json(const RigConfig& config);

// Throws ConfigError when the file cannot be read or is malformed.
RigConfig load_rig_config(const std::string& path);
void save_rig_config(const std::string& path, const RigConfig& config);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace senc
