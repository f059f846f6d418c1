#include "senc/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace senc {

using json = nlohmann::json;

namespace {

std::array<Vec3, kLegCount> points_from_json(const json& j, const char* key) {
    const json& arr = j.at(key);
    if (!arr.is_array() || arr.size() != kLegCount)
        throw ConfigError(std::string("rig config: '") + key + "' must hold exactly 6 points");
    std::array<Vec3, kLegCount> out;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const json& p = arr[i];
        if (!p.is_array() || p.size() != 3)
            throw ConfigError(std::string("rig config: '") + key + "' entries must be [x, y, z]");
        out[i] = Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    }
    return out;
}

json points_to_json(const std::array<Vec3, kLegCount>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back({p.x(), p.y(), p.z()});
    return arr;
}

}  // namespace

RigConfig parse_rig_config(const std::string& json_text) {
    try {
        const json j = json::parse(json_text);
        RigConfig cfg;
        cfg.geometry.base_points = points_from_json(j, "base_points");
        cfg.geometry.helmet_points = points_from_json(j, "helmet_points");
        if (j.contains("workspace")) {
            const json& w = j.at("workspace");
            cfg.geometry.workspace.translation_mm = w.at("translation_mm").get<double>();
            cfg.geometry.workspace.rotation_deg = w.at("rotation_deg").get<double>();
            if (!(cfg.geometry.workspace.translation_mm > 0.0) || !(cfg.geometry.workspace.rotation_deg > 0.0))
                throw ConfigError("rig config: workspace limits must be positive");
        }
        if (j.contains("encoders")) {
            const json& e = j.at("encoders");
            if (!e.is_array() || e.size() != kLegCount)
                throw ConfigError("rig config: 'encoders' must hold exactly 6 entries");
            for (std::size_t i = 0; i < kLegCount; ++i) {
                EncoderSpec spec;
                spec.first_index_length_mm = e[i].at("first_index_length_mm").get<double>();
                spec.counts_per_mm = e[i].value("counts_per_mm", spec.counts_per_mm);
                spec.range_mm = e[i].value("range_mm", spec.range_mm);
                spec.index_spacing_counts = e[i].value("index_spacing_counts", spec.index_spacing_counts);
                spec.validate();
                cfg.encoders[i] = spec;
            }
            cfg.has_encoders = true;
        }
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("rig config: ") + e.what());
    }
}

std::string rig_config_to_json(const RigConfig& cfg) {
    json j;
    j["base_points"] = points_to_json(cfg.geometry.base_points);
    j["helmet_points"] = points_to_json(cfg.geometry.helmet_points);
    j["workspace"] = {{"translation_mm", cfg.geometry.workspace.translation_mm},
                      {"rotation_deg", cfg.geometry.workspace.rotation_deg}};
    if (cfg.has_encoders) {
        json enc = json::array();
        for (const auto& s : cfg.encoders) {
            enc.push_back({{"first_index_length_mm", s.first_index_length_mm},
                           {"counts_per_mm", s.counts_per_mm},
                           {"range_mm", s.range_mm},
                           {"index_spacing_counts", s.index_spacing_counts}});
        }
        j["encoders"] = enc;
    }
    return j.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

RigConfig load_rig_config(const std::string& path) { return parse_rig_config(read_text_file(path)); }

void save_rig_config(const std::string& path, const RigConfig& config) {
    write_text_file(path, rig_config_to_json(config));
}

}  // namespace senc
