#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "senc/calibration.hpp"
#include "senc/encoder.hpp"
#include "senc/kinematics.hpp"
#include "senc/registration.hpp"

namespace senc {

// Seeded generator used for every randomized simulation step.
using SimRng = std::mt19937_64;

struct DeviationModel {
    // Every string reads this much shorter than the ideal attachment-point
    // distance (the string rides on the guide-channel edge).
    double fixed_shortening_mm = 3.0;
    double count_noise_std = 0.0;  // counts, Gaussian
    // Error in the robot's TCP z-offset; rotations commanded about the believed
    // TCP also translate the real helmet.
    double tcp_z_error_mm = 0.0;

    void validate() const;
};

enum class Axis { X, Y, Z, Roll, Pitch, Yaw, Combined };

std::string_view axis_name(Axis axis);
Axis axis_from_name(std::string_view name);

// A commanded displacement from the nominal pose, in the helmet frame.
struct MotionCommand {
    Axis axis = Axis::Combined;
    double displacement = 0.0;  // mm or deg; 0 for combined commands
    Pose pose;
};

MotionCommand axis_command(Axis axis, double displacement);

struct MotionScript {
    std::string name;
    std::vector<MotionCommand> commands;
    double dwell_ms = 40.0;

    // -10..10 in unit steps on each axis, one axis at a time (126 points).
    static MotionScript accuracy_protocol();
    // 66 points: origin, +/-2,4,6,8,10 on each axis, five combined poses.
    static MotionScript calibration_protocol();

    // Throws ConfigError if a command leaves the workspace.
    void validate(const Workspace& workspace) const;
};

MotionScript parse_motion_script(const std::string& json_text);
std::string motion_script_to_json(const MotionScript& script);

// Helmet pose actually reached when the robot executes `commanded` about a TCP
// whose z-offset is off by `tcp_z_error_mm`: Tz(-e) * X(commanded) * Tz(e).
RigidTransform actual_helmet_transform(const Pose& commanded, double tcp_z_error_mm);

struct Measurement {
    std::array<std::int64_t, kLegCount> counts{};  // absolute encoder counts
    LegLengths lengths;                             // counts / counts_per_mm
    LegLengths extension;                           // before quantization
};

// Readings for the helmet at `pose`: IK minus the fixed shortening, quantized
// to whole counts, plus Gaussian count noise when the model asks for it (rng
// is only touched then). Throws OutOfRange if an extension leaves [0, range].
Measurement simulate_measurement(const PlatformGeometry& geom, const Pose& pose, const DeviationModel& model,
                                 const EncoderSpec& spec = {}, SimRng* rng = nullptr);

// Calibration samples for a script: measured at the actually reached pose,
// labelled with the commanded (robot-reported) pose.
std::vector<CalibrationSample> simulate_calibration_samples(const PlatformGeometry& geom,
                                                            const DeviationModel& model,
                                                            const MotionScript& script, SimRng& rng,
                                                            const EncoderSpec& spec = {});

struct ProtocolOptions {
    double offset_mm = 3.0;
    // Robot base in the ring frame.
    Pose robot_base{300.0, -450.0, -650.0, 90.0, 0.0, 0.0};
    EncoderSpec encoder;
};

struct PointResult {
    std::size_t index = 0;
    Axis axis = Axis::Combined;
    double displacement = 0.0;
    Pose commanded;
    bool converged = false;
    int iterations = 0;
    double residual_mm = 0.0;
    Vec3 delta_p = Vec3::Zero();  // P_enc - P_rob, robot frame, mm
    double error_mm = 0.0;        // |delta_p|
    double rotation_error_deg = 0.0;
};

struct AccuracyTable {
    std::vector<double> displacements;
    // cells[row][axis]; nullopt where the script has no such point. Failed
    // points are carried as NaN.
    std::vector<std::array<std::optional<double>, 6>> cells;
    std::array<double, 6> rms{};
};

struct AccuracyReport {
    std::vector<PointResult> points;
    FrameChain chain;
    std::size_t failed = 0;

    AccuracyTable table() const;
    void write_points_csv(std::ostream& os) const;
    // displacement,X,Y,Z,Roll,Pitch,Yaw rows plus an RMS row.
    void write_table_csv(std::ostream& os) const;
};

// Registers the ring-to-robot chain at the nominal pose, then walks the script:
// simulated readings, offset correction, FK from the nominal pose, and the
// translation disagreement with the robot-reported pose in the robot frame.
AccuracyReport run_accuracy_protocol(const PlatformGeometry& geom, const DeviationModel& model,
                                     const MotionScript& script, const SolverConfig& solver, SimRng& rng,
                                     const ProtocolOptions& options = {});

// ---------------------------------------------------------------------------
// Count streams

struct TrajectoryPoint {
    std::uint64_t time_us = 0;
    Pose pose;  // helmet in the ring frame
    // Homing samples drive the encoders directly with absolute counts.
    std::optional<std::array<std::int64_t, kLegCount>> homing_counts;
};

using Trajectory = std::vector<TrajectoryPoint>;

struct StreamTiming {
    double rate_hz = 1000.0;
    double move_ms = 40.0;
    double homing_margin_mm = 1.0;  // retract this far past the first index
};

// Homing retraction (one count per sample down to just below the first index
// on every channel, then back out) followed by the poses, each reached by a
// linear move of move_ms and held for dwell_ms.
Trajectory build_trajectory(const PlatformGeometry& geom, const DeviationModel& model,
                            const std::array<EncoderSpec, kLegCount>& encoders, const std::vector<Pose>& poses,
                            double dwell_ms, const StreamTiming& timing);

struct CountSample {
    std::uint64_t time_us = 0;
    std::array<std::int32_t, kLegCount> counts{};  // since power-on
    std::array<std::int32_t, kLegCount> deltas{};
    std::uint8_t index_flags = 0;  // bit i: channel i hit an index position
    bool homing = false;
    Pose truth;
    LegLengths extension;  // true reading before quantization
};

struct CountStream {
    std::vector<CountSample> samples;
    std::array<EncoderSpec, kLegCount> encoders{};
    std::array<std::int64_t, kLegCount> power_on_counts{};
};

CountStream emit_count_stream(const PlatformGeometry& geom, const Trajectory& trajectory,
                              const DeviationModel& model, const std::array<EncoderSpec, kLegCount>& encoders,
                              SimRng* rng = nullptr);

// Per-channel count events of the stream's homing segment.
std::array<ChannelTrace, kLegCount> homing_traces(const CountStream& stream);

// First index positions drawn uniformly in [6, 12] mm.
std::array<EncoderSpec, kLegCount> generate_encoder_specs(SimRng& rng, const EncoderSpec& base = {});

}  // namespace senc
