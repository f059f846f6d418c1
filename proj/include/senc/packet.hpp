#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "senc/geometry.hpp"

namespace senc {

// Encoder counts from the acquisition board. Little-endian on the wire:
//
//   off  size  field
//    0    4    magic "SENC"
//    4    1    version (1)
//    5    1    flags: bit i = index pulse on channel i since the last packet;
//              bits 6-7 zero
//    6    4    sequence, u32, +1 per packet
//   10    8    timestamp, u64 microseconds
//   18   24    counts, 6 x i32 since power-on
struct CountPacket {
    static constexpr std::size_t kSize = 42;
    static constexpr std::uint8_t kVersion = 1;

    std::uint8_t flags = 0;
    std::uint32_t sequence = 0;
    std::uint64_t timestamp_us = 0;
    std::array<std::int32_t, kLegCount> counts{};

    bool index_seen(int channel) const { return ((flags >> channel) & 1u) != 0; }
    bool operator==(const CountPacket&) const = default;
};

// Solved pose republished by the client. Little-endian:
//
//   off  size  field
//    0    4    magic "SPOS"
//    4    1    version (1)
//    5    4    sequence echo, u32
//    9    1    converged (0/1)
//   10    1    homed (0/1); 0 means a status-only packet with a zero pose
//   11    4    iterations, u32
//   15   48    x, y, z (mm), roll, pitch, yaw (deg), 6 x f64
//   63    8    residual, f64 mm
struct PosePacket {
    static constexpr std::size_t kSize = 71;
    static constexpr std::uint8_t kVersion = 1;

    std::uint32_t sequence = 0;
    bool converged = false;
    bool homed = false;
    std::uint32_t iterations = 0;
    Pose pose;
    double residual_mm = 0.0;

    bool operator==(const PosePacket&) const = default;
};

std::array<std::uint8_t, CountPacket::kSize> encode(const CountPacket& p);
std::array<std::uint8_t, PosePacket::kSize> encode(const PosePacket& p);

// Throw PacketError on wrong size, magic, version, or reserved bits.
CountPacket decode_count_packet(std::span<const std::uint8_t> bytes);
PosePacket decode_pose_packet(std::span<const std::uint8_t> bytes);

}  // namespace senc
