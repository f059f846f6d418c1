#pragma once

#include <cstdint>
#include <string>

#include "senc/geometry.hpp"

namespace senc {

// Fixed ring-to-robot transform captured from one simultaneous pair of
// readings: the encoder pose of the helmet in the ring frame and the robot's
// helmet-to-robot transform. base_to_robot = base_to_helmet * helmet_to_robot.
struct FrameChain {
    RigidTransform base_to_robot;
    RigidTransform base_to_helmet;   // acquisition pair, encoder side
    RigidTransform helmet_to_robot;  // acquisition pair, robot side
    std::uint64_t timestamp_us = 0;  // acquisition time on the rig clock
};

FrameChain register_frames(const RigidTransform& base_to_helmet, const RigidTransform& helmet_to_robot,
                           std::uint64_t timestamp_us = 0);

// matrix_to_pose(inverse(base_to_helmet_now) * base_to_robot). Propagates GimbalLock.
Pose encoder_pose_in_robot_frame(const FrameChain& chain, const RigidTransform& base_to_helmet_now);

// JSON: {"base_to_robot": [16 numbers, row-major 4x4],
//        "acquisition": {"base_to_helmet": [...16], "helmet_to_robot": [...16]},
//        "timestamp_us": n}
std::string chain_to_json(const FrameChain& chain);
FrameChain chain_from_json(const std::string& text);

FrameChain load_chain(const std::string& path);
void save_chain(const std::string& path, const FrameChain& chain);

}  // namespace senc
