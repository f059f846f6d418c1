#include "senc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "senc/csv.hpp"

namespace senc {

using json = nlohmann::json;

void DeviationModel::validate() const {
    if (!std::isfinite(fixed_shortening_mm)) throw ConfigError("deviation: fixed_shortening_mm must be finite");
    if (!(count_noise_std >= 0.0)) throw ConfigError("deviation: count_noise_std must be >= 0");
    if (!std::isfinite(tcp_z_error_mm)) throw ConfigError("deviation: tcp_z_error_mm must be finite");
}

namespace {

constexpr std::array<std::string_view, 7> kAxisNames = {"x", "y", "z", "roll", "pitch", "yaw", "combined"};

}  // namespace

std::string_view axis_name(Axis axis) { return kAxisNames[static_cast<std::size_t>(axis)]; }

Axis axis_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kAxisNames.size(); ++i)
        if (kAxisNames[i] == name) return static_cast<Axis>(i);
    throw ConfigError("unknown axis '" + std::string(name) + "'");
}

MotionCommand axis_command(Axis axis, double displacement) {
    if (axis == Axis::Combined) throw ConfigError("axis_command needs a single axis");
    MotionCommand c;
    c.axis = axis;
    c.displacement = displacement;
    c.pose[static_cast<int>(axis)] = displacement;
    return c;
}

MotionScript MotionScript::accuracy_protocol() {
    MotionScript s;
    s.name = "accuracy-axis-sweep";
    for (int a = 0; a < 6; ++a)
        for (int d = -10; d <= 10; ++d) s.commands.push_back(axis_command(static_cast<Axis>(a), d));
    return s;
}

MotionScript MotionScript::calibration_protocol() {
    MotionScript s;
    s.name = "calibration-66";
    s.commands.push_back(axis_command(Axis::X, 0.0));
    s.commands.back().axis = Axis::Combined;  // shared origin
    for (int a = 0; a < 6; ++a) {
        for (double d : {-10.0, -8.0, -6.0, -4.0, -2.0, 2.0, 4.0, 6.0, 8.0, 10.0})
            s.commands.push_back(axis_command(static_cast<Axis>(a), d));
    }
    const Pose combined[] = {
        {5.0, -5.0, 5.0, 0.0, 0.0, 0.0},
        {0.0, 0.0, 0.0, 5.0, -5.0, 5.0},
        {4.0, 0.0, 0.0, 4.0, 0.0, 0.0},
        {0.0, -4.0, 0.0, 0.0, 4.0, 0.0},
        {0.0, 0.0, -4.0, 0.0, 0.0, -4.0},
    };
    for (const Pose& p : combined) {
        MotionCommand c;
        c.pose = p;
        s.commands.push_back(c);
    }
    return s;
}

void MotionScript::validate(const Workspace& workspace) const {
    if (commands.empty()) throw ConfigError("motion script '" + name + "' has no commands");
    if (!(dwell_ms >= 0.0)) throw ConfigError("motion script: dwell_ms must be >= 0");
    for (std::size_t i = 0; i < commands.size(); ++i)
        if (!workspace.contains(commands[i].pose))
            throw ConfigError("motion script '" + name + "' command " + std::to_string(i) +
                              " leaves the workspace: " + to_string(commands[i].pose));
}

MotionScript parse_motion_script(const std::string& json_text) {
    try {
        const json j = json::parse(json_text);
        if (j.value("version", 1) != 1) throw ConfigError("motion script: unsupported version");
        MotionScript s;
        s.name = j.value("name", std::string("unnamed"));
        s.dwell_ms = j.value("dwell_ms", s.dwell_ms);
        for (const json& c : j.at("commands")) {
            if (c.contains("pose")) {
                const json& p = c.at("pose");
                if (!p.is_array() || p.size() != 6) throw ConfigError("motion command 'pose' needs 6 numbers");
                MotionCommand cmd;
                for (int i = 0; i < 6; ++i) cmd.pose[i] = p[static_cast<std::size_t>(i)].get<double>();
                s.commands.push_back(cmd);
            } else {
                s.commands.push_back(
                    axis_command(axis_from_name(c.at("axis").get<std::string>()), c.at("value").get<double>()));
            }
        }
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("motion script: ") + e.what());
    }
}

std::string motion_script_to_json(const MotionScript& script) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["name"] = script.name;
    j["dwell_ms"] = script.dwell_ms;
    nlohmann::ordered_json cmds = nlohmann::ordered_json::array();
    for (const auto& c : script.commands) {
        if (c.axis == Axis::Combined) {
            nlohmann::ordered_json p = nlohmann::ordered_json::array();
            for (int i = 0; i < 6; ++i) p.push_back(c.pose[i]);
            cmds.push_back({{"pose", p}});
        } else {
            cmds.push_back({{"axis", axis_name(c.axis)}, {"value", c.displacement}});
        }
    }
    j["commands"] = cmds;
    return j.dump(1) + "\n";
}

RigidTransform actual_helmet_transform(const Pose& commanded, double tcp_z_error_mm) {
    const RigidTransform offset = RigidTransform::from_translation(Vec3(0.0, 0.0, tcp_z_error_mm));
    return offset.inverse() * pose_to_matrix(commanded) * offset;
}

namespace {

std::int64_t quantize(double extension_mm, const EncoderSpec& spec, const DeviationModel& model, SimRng* rng) {
    double counts = extension_mm * spec.counts_per_mm;
    if (model.count_noise_std > 0.0) {
        if (rng == nullptr) throw ConfigError("count noise requested without a random generator");
        std::normal_distribution<double> noise(0.0, model.count_noise_std);
        counts += noise(*rng);
    }
    return std::llround(counts);
}

}  // namespace

Measurement simulate_measurement(const PlatformGeometry& geom, const Pose& pose, const DeviationModel& model,
                                 const EncoderSpec& spec, SimRng* rng) {
    const LegLengths ik = inverse_kinematics(geom, pose);
    Measurement m;
    for (int i = 0; i < kLegCount; ++i) {
        const double ext = ik[i] - model.fixed_shortening_mm;
        if (ext < 0.0 || ext > spec.range_mm) throw OutOfRange(i, ext);
        m.extension[i] = ext;
    }
    for (int i = 0; i < kLegCount; ++i) {
        m.counts[static_cast<std::size_t>(i)] = quantize(m.extension[i], spec, model, rng);
        m.lengths[i] = counts_to_mm(spec, m.counts[static_cast<std::size_t>(i)]);
    }
    return m;
}

std::vector<CalibrationSample> simulate_calibration_samples(const PlatformGeometry& geom,
                                                            const DeviationModel& model,
                                                            const MotionScript& script, SimRng& rng,
                                                            const EncoderSpec& spec) {
    std::vector<CalibrationSample> out;
    out.reserve(script.commands.size());
    for (const auto& cmd : script.commands) {
        const Pose actual = matrix_to_pose(actual_helmet_transform(cmd.pose, model.tcp_z_error_mm));
        out.push_back({simulate_measurement(geom, actual, model, spec, &rng).lengths, cmd.pose});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Accuracy protocol

AccuracyReport run_accuracy_protocol(const PlatformGeometry& geom, const DeviationModel& model,
                                     const MotionScript& script, const SolverConfig& solver, SimRng& rng,
                                     const ProtocolOptions& options) {
    model.validate();
    script.validate(geom.workspace);

    const RigidTransform base_to_robot = pose_to_matrix(options.robot_base);
    const RigidTransform tcp_offset = RigidTransform::from_translation(Vec3(0.0, 0.0, model.tcp_z_error_mm));
    // Believed TCP at the nominal pose, in the robot frame.
    const RigidTransform tcp_origin = base_to_robot.inverse() * tcp_offset.inverse();

    auto measure_and_solve = [&](const Pose& commanded) {
        const Pose actual = matrix_to_pose(actual_helmet_transform(commanded, model.tcp_z_error_mm));
        const Measurement m = simulate_measurement(geom, actual, model, options.encoder, &rng);
        return forward_kinematics(geom, apply_offset(m.lengths, options.offset_mm), Pose::identity(), solver);
    };

    AccuracyReport report;
    const SolveResult reg = require_converged(measure_and_solve(Pose::identity()));
    report.chain = register_frames(pose_to_matrix(reg.pose), tcp_origin.inverse());

    for (std::size_t i = 0; i < script.commands.size(); ++i) {
        const MotionCommand& cmd = script.commands[i];
        const SolveResult r = measure_and_solve(cmd.pose);
        const RigidTransform robot_tcp = tcp_origin * pose_to_matrix(cmd.pose);
        const RigidTransform helmet_in_robot =
            pose_to_matrix(encoder_pose_in_robot_frame(report.chain, pose_to_matrix(r.pose))).inverse();

        PointResult p;
        p.index = i;
        p.axis = cmd.axis;
        p.displacement = cmd.displacement;
        p.commanded = cmd.pose;
        p.converged = r.converged;
        p.iterations = r.iterations;
        p.residual_mm = r.residual;
        p.delta_p = helmet_in_robot.translation - robot_tcp.translation;
        p.error_mm = p.delta_p.norm();
        const Mat3 rel = robot_tcp.rotation.transpose() * helmet_in_robot.rotation;
        p.rotation_error_deg = rad2deg(std::acos(std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0)));
        if (!p.converged) ++report.failed;
        report.points.push_back(p);
    }
    return report;
}

AccuracyTable AccuracyReport::table() const {
    AccuracyTable t;
    for (const auto& p : points)
        if (p.axis != Axis::Combined) t.displacements.push_back(p.displacement);
    std::sort(t.displacements.begin(), t.displacements.end());
    t.displacements.erase(std::unique(t.displacements.begin(), t.displacements.end()), t.displacements.end());
    t.cells.resize(t.displacements.size());

    std::array<double, 6> sum_sq{};
    std::array<int, 6> n{};
    for (const auto& p : points) {
        if (p.axis == Axis::Combined) continue;
        const auto a = static_cast<std::size_t>(p.axis);
        const auto row = static_cast<std::size_t>(
            std::lower_bound(t.displacements.begin(), t.displacements.end(), p.displacement) -
            t.displacements.begin());
        if (t.cells[row][a]) continue;  // first occurrence wins
        t.cells[row][a] = p.converged ? p.error_mm : std::nan("");
        if (p.converged) {
            sum_sq[a] += p.error_mm * p.error_mm;
            ++n[a];
        }
    }
    for (std::size_t a = 0; a < 6; ++a) t.rms[a] = n[a] ? std::sqrt(sum_sq[a] / n[a]) : 0.0;
    return t;
}

void AccuracyReport::write_points_csv(std::ostream& os) const {
    os << "index,axis,displacement,x_cmd,y_cmd,z_cmd,roll_cmd,pitch_cmd,yaw_cmd,converged,iterations,residual_mm,"
          "dp_x,dp_y,dp_z,dp_norm_mm,rotation_error_deg\n";
    for (const auto& p : points) {
        os << p.index << ',' << axis_name(p.axis) << ',' << csv::fmt(p.displacement, 3);
        for (int i = 0; i < 6; ++i) os << ',' << csv::fmt(p.commanded[i], 3);
        os << ',' << (p.converged ? 1 : 0) << ',' << p.iterations << ',' << csv::fmt(p.residual_mm, 9) << ','
           << csv::fmt(p.delta_p.x()) << ',' << csv::fmt(p.delta_p.y()) << ',' << csv::fmt(p.delta_p.z()) << ','
           << csv::fmt(p.error_mm) << ',' << csv::fmt(p.rotation_error_deg) << '\n';
    }
}

void AccuracyReport::write_table_csv(std::ostream& os) const {
    const AccuracyTable t = table();
    os << "displacement,X,Y,Z,Roll,Pitch,Yaw\n";
    for (std::size_t r = 0; r < t.displacements.size(); ++r) {
        os << csv::fmt(t.displacements[r], 3);
        for (const auto& cell : t.cells[r]) {
            os << ',';
            if (!cell) continue;
            if (std::isnan(*cell))
                os << "FAIL";
            else
                os << csv::fmt(*cell, 4);
        }
        os << '\n';
    }
    os << "RMS";
    for (double v : t.rms) os << ',' << csv::fmt(v, 4);
    os << '\n';
}

// ---------------------------------------------------------------------------
// Count streams

namespace {

std::uint64_t sample_time_us(std::size_t i, double rate_hz) {
    return static_cast<std::uint64_t>(std::llround(static_cast<double>(i) * 1e6 / rate_hz));
}

std::int64_t first_index_count(const EncoderSpec& spec) {
    return std::llround(spec.first_index_length_mm * spec.counts_per_mm);
}

}  // namespace

Trajectory build_trajectory(const PlatformGeometry& geom, const DeviationModel& model,
                            const std::array<EncoderSpec, kLegCount>& encoders, const std::vector<Pose>& poses,
                            double dwell_ms, const StreamTiming& timing) {
    if (poses.empty()) throw ConfigError("trajectory needs at least one pose");
    if (!(timing.rate_hz > 0.0)) throw ConfigError("trajectory: rate must be positive");

    std::vector<TrajectoryPoint> traj;
    auto push = [&](const Pose& p, std::optional<std::array<std::int64_t, kLegCount>> counts) {
        TrajectoryPoint tp;
        tp.time_us = sample_time_us(traj.size(), timing.rate_hz);
        tp.pose = p;
        tp.homing_counts = counts;
        traj.push_back(tp);
    };

    // Homing: from the power-on reading, one count per sample down past the
    // first index on every channel, then back.
    const Measurement start = simulate_measurement(geom, poses.front(), model, encoders[0]);
    std::array<std::int64_t, kLegCount> q{}, from{}, target{};
    for (std::size_t c = 0; c < kLegCount; ++c) {
        from[c] = std::llround(start.extension[static_cast<int>(c)] * encoders[c].counts_per_mm);
        target[c] = first_index_count(encoders[c]) -
                    std::llround(timing.homing_margin_mm * encoders[c].counts_per_mm);
        if (target[c] < 0) throw ConfigError("homing target below zero extension");
        if (target[c] >= from[c]) throw ConfigError("first index lies above the power-on reading");
    }
    q = from;
    push(poses.front(), q);
    for (const auto* goal : {&target, &from}) {
        bool moving = true;
        while (moving) {
            moving = false;
            for (std::size_t c = 0; c < kLegCount; ++c) {
                if (q[c] == (*goal)[c]) continue;
                q[c] += q[c] < (*goal)[c] ? 1 : -1;
                moving = true;
            }
            if (moving) push(poses.front(), q);
        }
    }

    const auto move_samples = static_cast<std::size_t>(std::llround(timing.move_ms * timing.rate_hz / 1000.0));
    const auto dwell_samples =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(dwell_ms * timing.rate_hz / 1000.0)));
    Pose prev = poses.front();
    for (std::size_t k = 0; k < poses.size(); ++k) {
        const Pose& next = poses[k];
        if (k > 0) {
            for (std::size_t s = 1; s <= move_samples; ++s) {
                const double f = static_cast<double>(s) / static_cast<double>(move_samples + 1);
                Pose p;
                for (int i = 0; i < 6; ++i) p[i] = prev[i] + f * (next[i] - prev[i]);
                push(p, std::nullopt);
            }
        }
        for (std::size_t s = 0; s < dwell_samples; ++s) push(next, std::nullopt);
        prev = next;
    }
    return traj;
}

CountStream emit_count_stream(const PlatformGeometry& geom, const Trajectory& trajectory,
                              const DeviationModel& model, const std::array<EncoderSpec, kLegCount>& encoders,
                              SimRng* rng) {
    model.validate();
    CountStream stream;
    stream.encoders = encoders;
    stream.samples.reserve(trajectory.size());

    std::array<std::int64_t, kLegCount> prev{};
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        const TrajectoryPoint& tp = trajectory[i];
        CountSample s;
        s.time_us = tp.time_us;
        s.truth = tp.pose;
        s.homing = tp.homing_counts.has_value();

        std::array<std::int64_t, kLegCount> q{};
        if (tp.homing_counts) {
            q = *tp.homing_counts;
            for (std::size_t c = 0; c < kLegCount; ++c) {
                const double ext = counts_to_mm(encoders[c], q[c]);
                if (ext < 0.0 || ext > encoders[c].range_mm) throw OutOfRange(static_cast<int>(c), ext);
                s.extension[static_cast<int>(c)] = ext;
            }
        } else {
            const LegLengths ik = inverse_kinematics(geom, tp.pose);
            for (std::size_t c = 0; c < kLegCount; ++c) {
                const int leg = static_cast<int>(c);
                const double ext = ik[leg] - model.fixed_shortening_mm;
                if (ext < 0.0 || ext > encoders[c].range_mm) throw OutOfRange(leg, ext);
                s.extension[leg] = ext;
                q[c] = quantize(ext, encoders[c], model, rng);
            }
        }

        if (i == 0) {
            stream.power_on_counts = q;
            prev = q;
        }
        for (std::size_t c = 0; c < kLegCount; ++c) {
            const std::int64_t a = prev[c];
            const std::int64_t b = q[c];
            for (int k = 0; k < 3; ++k) {
                const std::int64_t idx = first_index_count(encoders[c]) + k * encoders[c].index_spacing_counts;
                if ((b > a && a < idx && idx <= b) || (b < a && b <= idx && idx < a))
                    s.index_flags = static_cast<std::uint8_t>(s.index_flags | (1u << c));
            }
            s.deltas[c] = static_cast<std::int32_t>(b - a);
            s.counts[c] = static_cast<std::int32_t>(b - stream.power_on_counts[c]);
        }
        prev = q;
        stream.samples.push_back(s);
    }
    return stream;
}

std::array<ChannelTrace, kLegCount> homing_traces(const CountStream& stream) {
    std::array<ChannelTrace, kLegCount> traces;
    for (const auto& s : stream.samples) {
        if (!s.homing) continue;
        for (std::size_t c = 0; c < kLegCount; ++c)
            traces[c].push_back({s.deltas[c], ((s.index_flags >> c) & 1u) != 0});
    }
    return traces;
}

std::array<EncoderSpec, kLegCount> generate_encoder_specs(SimRng& rng, const EncoderSpec& base) {
    std::uniform_real_distribution<double> first(6.0, 12.0);
    std::array<EncoderSpec, kLegCount> out;
    for (auto& s : out) {
        s = base;
        s.first_index_length_mm = first(rng);
        s.validate();
    }
    return out;
}

}  // namespace senc
