#include "senc/registration.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace senc {

using json = nlohmann::json;

FrameChain register_frames(const RigidTransform& base_to_helmet, const RigidTransform& helmet_to_robot,
                           std::uint64_t timestamp_us) {
    return {base_to_helmet * helmet_to_robot, base_to_helmet, helmet_to_robot, timestamp_us};
}

Pose encoder_pose_in_robot_frame(const FrameChain& chain, const RigidTransform& base_to_helmet_now) {
    return matrix_to_pose(base_to_helmet_now.inverse() * chain.base_to_robot);
}

namespace {

json matrix_json(const RigidTransform& t) {
    const Eigen::Matrix4d m = t.homogeneous();
    json arr = json::array();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) arr.push_back(m(r, c));
    return arr;
}

RigidTransform matrix_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 16) throw ConfigError(std::string("chain: '") + what + "' must hold 16 numbers");
    Eigen::Matrix4d m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m(r, c) = j.at(static_cast<std::size_t>(r * 4 + c)).get<double>();
    RigidTransform t = RigidTransform::from_homogeneous(m);
    const double ortho = (t.rotation * t.rotation.transpose() - Mat3::Identity()).norm();
    if (ortho > 1e-6 || t.rotation.determinant() < 0.0)
        throw ConfigError(std::string("chain: '") + what + "' is not a rigid transform");
    return t;
}

}  // namespace

std::string chain_to_json(const FrameChain& chain) {
    json j;
    j["base_to_robot"] = matrix_json(chain.base_to_robot);
    j["acquisition"] = {{"base_to_helmet", matrix_json(chain.base_to_helmet)},
                        {"helmet_to_robot", matrix_json(chain.helmet_to_robot)}};
    j["timestamp_us"] = chain.timestamp_us;
    return j.dump(2) + "\n";
}

FrameChain chain_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        FrameChain c;
        c.base_to_robot = matrix_from_json(j.at("base_to_robot"), "base_to_robot");
        c.base_to_helmet = matrix_from_json(j.at("acquisition").at("base_to_helmet"), "base_to_helmet");
        c.helmet_to_robot = matrix_from_json(j.at("acquisition").at("helmet_to_robot"), "helmet_to_robot");
        c.timestamp_us = j.value("timestamp_us", std::uint64_t{0});
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("chain: ") + e.what());
    }
}

FrameChain load_chain(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open chain file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return chain_from_json(ss.str());
}

void save_chain(const std::string& path, const FrameChain& chain) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write chain file " + path);
    out << chain_to_json(chain);
}

}  // namespace senc
