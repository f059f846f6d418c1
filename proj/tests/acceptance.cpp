// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "senc/calibration.hpp"
#include "senc/csv.hpp"
#include "senc/kinematics.hpp"
#include "senc/packet.hpp"
#include "senc/registration.hpp"
#include "senc/scenario.hpp"
#include "senc/simulator.hpp"
#include "senc/telemetry.hpp"

using namespace senc;

namespace {

const std::string kData = SENC_DATA_DIR;

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string num(double v, int digits = 3) { return csv::fmt(v, digits); }

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

Pose uniform_workspace_pose(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> t(-10.0, 10.0), a(-10.0, 10.0);
    return {t(rng), t(rng), t(rng), a(rng), a(rng), a(rng)};
}

// 1 -------------------------------------------------------------------------

Outcome ik_ground_truth() {
    Outcome o;
    const LegLengths l = inverse_kinematics(PlatformGeometry::default_geometry(), Pose::identity());
    double worst = 0.0;
    for (int i = 0; i < 6; ++i) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double d = oracle::kHelmet[i][k] - oracle::kBase[i][k];
            s += d * d;
        }
        worst = std::max(worst, std::abs(l[i] - std::sqrt(s)));
    }
    if (!(worst <= 1e-9)) o.fail("oracle mismatch " + sci(worst) + " mm");
    double sym = 0.0;
    for (auto [a, b] : {std::pair{0, 5}, std::pair{1, 4}, std::pair{2, 3}}) sym = std::max(sym, std::abs(l[a] - l[b]));
    if (!(sym <= 1e-9)) o.fail("pair asymmetry " + sci(sym) + " mm");
    o.note("max oracle diff " + sci(worst) + " mm, max pair diff " + sci(sym) + " mm");
    return o;
}

// 2 -------------------------------------------------------------------------

Outcome fk_roundtrip() {
    Outcome o;
    const auto geom = PlatformGeometry::default_geometry();
    std::mt19937_64 rng(2024);
    std::vector<int> iterations;
    int not_converged = 0, off_pose = 0, alternate = 0;
    double worst_t = 0.0, worst_r = 0.0, worst_residual = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const Pose truth = uniform_workspace_pose(rng);
        const LegLengths lengths = inverse_kinematics(geom, truth);
        SolveResult r;
        try {
            r = forward_kinematics(geom, lengths, Pose::identity());
        } catch (const Error&) {
            ++not_converged;
            continue;
        }
        if (!r.converged) {
            ++not_converged;
            continue;
        }
        iterations.push_back(r.iterations);
        worst_residual = std::max(worst_residual, r.residual);
        double dt = 0.0, dr = 0.0;
        for (int i = 0; i < 3; ++i) dt = std::max(dt, std::abs(r.pose[i] - truth[i]));
        for (int i = 3; i < 6; ++i) dr = std::max(dr, std::abs(r.pose[i] - truth[i]));
        worst_t = std::max(worst_t, dt);
        worst_r = std::max(worst_r, dr);
        if (dt >= 1e-3 || dr >= 1e-3) {
            ++off_pose;
            // same six lengths, different pose: a second assembly of the mechanism
            const LegLengths back = inverse_kinematics(geom, r.pose);
            double mismatch = 0.0;
            for (int i = 0; i < 6; ++i) mismatch = std::max(mismatch, std::abs(back[i] - lengths[i]));
            if (mismatch < 1e-6) ++alternate;
        }
    }
    std::sort(iterations.begin(), iterations.end());
    const double median = iterations.empty() ? 0.0 : iterations[iterations.size() / 2];
    if (not_converged) o.fail(std::to_string(not_converged) + " did not converge");
    if (off_pose)
        o.fail(std::to_string(off_pose) + " converged away from the sampled pose (" + std::to_string(alternate) +
               " of them reproduce the lengths exactly: alternate assemblies)");
    if (!(worst_residual < 0.01)) o.fail("residual " + sci(worst_residual) + " mm");
    if (!(median <= 5)) o.fail("median iterations " + num(median, 1));
    o.note("median iterations " + num(median, 1) + ", max residual " + sci(worst_residual) + " mm, worst error " +
           num(worst_t, 6) + " mm / " + num(worst_r, 6) + " deg");
    return o;
}

// 3 -------------------------------------------------------------------------

Outcome jacobian_check() {
    Outcome o;
    const auto geom = PlatformGeometry::default_geometry();
    std::mt19937_64 rng(3);
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
        const Pose p = uniform_workspace_pose(rng);
        const Matrix6 diff = inverse_jacobian(geom, p) - finite_difference_jacobian(geom, p, 1e-4);
        worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
    if (!(worst <= 1e-5)) o.fail("max entry difference " + sci(worst));
    o.note("max entry difference " + sci(worst));
    return o;
}

// 4 -------------------------------------------------------------------------

Outcome homing() {
    Outcome o;
    Scenario sc = load_scenario(kData + "/scenarios/stream.json");
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        sc.seed = seed;
        const ScenarioStream ss = scenario_stream(sc, 1000.0);
        EncoderBank bank;
        for (std::size_t c = 0; c < kLegCount; ++c) bank[c] = EncoderChannel(ss.rig.encoders[c]);
        try {
            bank = home_all(bank, homing_traces(ss.stream));
        } catch (const Error& e) {
            o.fail(std::string("seed ") + std::to_string(seed) + ": " + e.what());
            continue;
        }
        for (const auto& s : ss.stream.samples) {
            if (s.homing) continue;
            for (std::size_t c = 0; c < kLegCount; ++c) {
                bank[c] = bank[c].fed(s.deltas[c], false);
                worst = std::max(worst, std::abs(bank[c].absolute_length() - s.extension[static_cast<int>(c)]));
                ++checked;
            }
        }
    }
    if (!(worst <= 1.0 / 60.0 + 1e-12)) o.fail("homed reading off by " + num(worst, 6) + " mm");
    if (checked == 0) o.fail("no post-homing samples");

    // full-range sweep of every channel
    SimRng rng(4);
    const auto encoders = generate_encoder_specs(rng);
    Trajectory traj;
    const auto full = static_cast<std::int64_t>(std::llround(encoders[0].full_range_counts()));
    for (std::int64_t q = 0; q <= full; ++q) {
        TrajectoryPoint tp;
        tp.time_us = static_cast<std::uint64_t>(q) * 1000;
        tp.homing_counts.emplace();
        tp.homing_counts->fill(q);
        traj.push_back(tp);
    }
    const CountStream sweep =
        emit_count_stream(PlatformGeometry::default_geometry(), traj, DeviationModel{}, encoders);
    std::array<int, kLegCount> events{};
    for (const auto& s : sweep.samples)
        for (std::size_t c = 0; c < kLegCount; ++c) events[c] += (s.index_flags >> c) & 1u;
    for (std::size_t c = 0; c < kLegCount; ++c)
        if (events[c] != 3) o.fail("channel " + std::to_string(c + 1) + " saw " + std::to_string(events[c]) + " index events");
    o.note("max homed error " + num(worst, 6) + " mm over " + std::to_string(checked) + " readings");
    return o;
}

// 5 -------------------------------------------------------------------------

struct CalibrationRun {
    Outcome outcome;
    std::string csv;
};

CalibrationRun offset_calibration() {
    CalibrationRun run;
    const Scenario sc = load_scenario(kData + "/scenarios/calibration.json");
    if (sc.deviation.fixed_shortening_mm != 3.0 || sc.motion.commands.size() != 66)
        run.outcome.fail("calibration scenario is not the 3 mm / 66-point setup");
    SimRng rng(sc.seed);
    const auto samples = simulate_calibration_samples(sc.rig.geometry, sc.deviation, sc.motion, rng);
    const auto grid = offset_grid(-2.0, 6.0, 0.5);
    const CalibrationSweep sweep = run_sweep(samples, grid, sc.rig.geometry);
    if (!(std::abs(sweep.best_offset - 3.0) <= 0.5)) run.outcome.fail("best offset " + num(sweep.best_offset));
    std::ostringstream os;
    sweep.write_csv(os);
    run.csv = os.str();
    run.outcome.note("best offset " + num(sweep.best_offset) + " mm, " + std::to_string(sweep.failed_pairs) + "/" +
                     std::to_string(sweep.total_pairs) + " divergent pairs excluded");
    return run;
}

// 6 -------------------------------------------------------------------------

struct ProtocolRun {
    Outcome outcome;
    std::string csv;
};

ProtocolRun tcp_signature() {
    ProtocolRun run;
    Outcome& o = run.outcome;
    const Scenario sc = load_scenario(kData + "/scenarios/tcp_error.json");
    if (sc.deviation.tcp_z_error_mm != 2.0) o.fail("tcp_error scenario is not 2 mm");
    SimRng rng(sc.seed);
    ProtocolOptions opts;
    opts.offset_mm = sc.offset_mm;
    opts.robot_base = sc.robot_base;
    const AccuracyReport rep = run_accuracy_protocol(sc.rig.geometry, sc.deviation, sc.motion, {}, rng, opts);
    if (rep.failed) o.fail(std::to_string(rep.failed) + " points did not converge");
    const AccuracyTable table = rep.table();
    const std::size_t roll = 3, pitch = 4, yaw = 5;
    double roll_max = 0.0;
    std::size_t zero = 0;
    while (zero < table.displacements.size() && table.displacements[zero] != 0.0) ++zero;
    if (zero == table.displacements.size()) {
        o.fail("no zero-displacement row");
        return run;
    }
    for (const auto& row : table.cells)
        if (row[roll]) roll_max = std::max(roll_max, *row[roll]);
    if (!(roll_max < 0.1)) o.fail("roll |dP| reaches " + num(roll_max, 4) + " mm");
    for (std::size_t axis : {pitch, yaw}) {
        const char* name = axis == pitch ? "pitch" : "yaw";
        auto cell = [&](std::size_t r) { return table.cells[r][axis].value_or(std::nan("")); };
        for (std::size_t r = zero + 1; r < table.cells.size(); ++r)
            if (!(cell(r) > cell(r - 1))) o.fail(std::string(name) + " |dP| does not grow at +" + num(table.displacements[r], 1));
        for (std::size_t r = zero; r-- > 0;)
            if (!(cell(r) > cell(r + 1))) o.fail(std::string(name) + " |dP| does not grow at " + num(table.displacements[r], 1));
    }
    o.note("RMS roll " + num(table.rms[roll], 4) + ", pitch " + num(table.rms[pitch], 4) + ", yaw " +
           num(table.rms[yaw], 4) + " mm; max roll " + num(roll_max, 4) + " mm");
    std::ostringstream os;
    rep.write_points_csv(os);
    rep.write_table_csv(os);
    run.csv = os.str();
    return run;
}

// 7 -------------------------------------------------------------------------

Outcome registration_identity() {
    Outcome o;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> t(-500, 500), a(-180, 180), p(-85, 85);
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
        const RigidTransform T = pose_to_matrix({t(rng), t(rng), t(rng), a(rng), p(rng), a(rng)});
        const Pose id = encoder_pose_in_robot_frame(register_frames(T, RigidTransform::identity()), T);
        for (int i = 0; i < 6; ++i) worst = std::max(worst, std::abs(id[i]));
    }
    if (!(worst <= 1e-9)) o.fail("max component " + sci(worst));
    o.note("max component " + sci(worst));
    return o;
}

// 8 -------------------------------------------------------------------------

struct LoopbackRun {
    Outcome outcome;
    std::string csv;
};

LoopbackRun telemetry_loopback() {
    LoopbackRun run;
    Outcome& o = run.outcome;
    const Scenario sc = load_scenario(kData + "/scenarios/stream.json");
    const ScenarioStream ss = scenario_stream(sc, 1000.0);
    const auto& samples = ss.stream.samples;

    ClientOptions co;
    co.listen = Endpoint::parse("127.0.0.1:0");
    co.rig = ss.rig;
    co.offset_mm = sc.offset_mm;
    co.idle_timeout = std::chrono::milliseconds(500);
    co.startup_timeout = std::chrono::milliseconds(5000);
    PoseClient client(co);

    ServeOptions so;
    so.destination = client.local_endpoint();
    so.rate_hz = 1000.0;
    so.packet_count = 10000;
    so.drop_sequences = {250, 4321, 4322, 9000};

    std::ostringstream log;
    ClientReport report;
    std::jthread rx([&] { report = client.run({}, &log); });
    const ServeReport sent = serve(ss.stream, so);
    rx.join();

    if (sent.generated != 10000) o.fail("generated " + std::to_string(sent.generated));
    if (sent.dropped != so.drop_sequences.size()) o.fail("dropped " + std::to_string(sent.dropped));
    if (report.received != sent.sent)
        o.fail("lost " + std::to_string(sent.sent - report.received) + " of " + std::to_string(sent.sent) + " sent");
    if (report.pipeline.gaps != so.drop_sequences.size())
        o.fail("gaps " + std::to_string(report.pipeline.gaps) + ", injected " + std::to_string(so.drop_sequences.size()));
    if (report.pipeline.out_of_order || report.malformed || report.queue_overflow) o.fail("reordered, malformed or overflowed");

    std::istringstream is(log.str());
    const auto table = csv::Table::read(is);
    const std::size_t seq = table.column("sequence"), homed = table.column("homed"), conv = table.column("converged");
    const std::size_t x = table.column("x"), y = table.column("y"), z = table.column("z");
    double worst = 0.0;
    std::size_t compared = 0, unsolved = 0;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const auto s = static_cast<std::size_t>(table.number(r, seq));
        const CountSample& truth = samples[std::min(s, samples.size() - 1)];
        if (truth.homing || table.number(r, homed) == 0.0) continue;
        if (table.number(r, conv) == 0.0) {
            ++unsolved;
            continue;
        }
        const Vec3 p(table.number(r, x), table.number(r, y), table.number(r, z));
        worst = std::max(worst, (p - truth.truth.translation()).norm());
        ++compared;
    }
    if (table.rows() != report.received) o.fail("log has " + std::to_string(table.rows()) + " rows");
    if (compared == 0) o.fail("no solved poses logged");
    if (unsolved) o.fail(std::to_string(unsolved) + " homed samples did not solve");
    if (!(worst <= 0.1)) o.fail("logged pose off truth by " + num(worst, 4) + " mm");

    // wire format
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::size_t mismatched = 0;
    for (int n = 0; n < 10000; ++n) {
        CountPacket c;
        c.flags = static_cast<std::uint8_t>(rng() & 0x3f);
        c.sequence = static_cast<std::uint32_t>(rng());
        c.timestamp_us = rng();
        for (auto& v : c.counts) v = static_cast<std::int32_t>(rng());
        const auto cb = encode(c);
        const CountPacket c2 = decode_count_packet(cb);
        if (!(c2 == c) || encode(c2) != cb) ++mismatched;

        PosePacket p;
        p.sequence = static_cast<std::uint32_t>(rng());
        p.converged = (rng() & 1) != 0;
        p.homed = (rng() & 1) != 0;
        p.iterations = static_cast<std::uint32_t>(rng() % 100);
        for (int i = 0; i < 6; ++i) p.pose[i] = u(rng);
        p.residual_mm = std::abs(u(rng));
        const auto pb = encode(p);
        const PosePacket p2 = decode_pose_packet(pb);
        if (!(p2 == p) || encode(p2) != pb) ++mismatched;
    }
    if (mismatched) o.fail(std::to_string(mismatched) + " packets changed in a round trip");

    o.note("sent " + std::to_string(sent.sent) + " in " + num(sent.elapsed_s, 2) + " s, received " +
           std::to_string(report.received) + ", gaps " + std::to_string(report.pipeline.gaps) + ", max pose error " +
           num(worst, 4) + " mm over " + std::to_string(compared) + " poses");
    run.csv = log.str();
    return run;
}

// ---------------------------------------------------------------------------

int failures = 0;

template <typename F>
Outcome guarded(F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        Outcome o;
        o.fail(std::string("exception: ") + e.what());
        return o;
    }
}

void check(int n, const char* title, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = guarded(f);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", n, title, o.detail.c_str(), seconds);
    std::fflush(stdout);
}

}  // namespace

int main() {
    check(1, "IK ground truth", ik_ground_truth);
    check(2, "FK roundtrip", fk_roundtrip);
    check(3, "Jacobian check", jacobian_check);
    check(4, "homing", homing);

    CalibrationRun cal;
    check(5, "offset calibration", [&] { cal = offset_calibration(); return cal.outcome; });
    ProtocolRun tcp;
    check(6, "TCP-error signature", [&] { tcp = tcp_signature(); return tcp.outcome; });
    check(7, "registration identity", registration_identity);
    LoopbackRun loop;
    check(8, "telemetry loopback", [&] { loop = telemetry_loopback(); return loop.outcome; });

    check(9, "determinism", [&] {
        Outcome o;
        if (cal.csv.empty() || tcp.csv.empty() || loop.csv.empty()) o.fail("a first run produced no CSV");
        if (offset_calibration().csv != cal.csv) o.fail("calibration CSV differs");
        if (tcp_signature().csv != tcp.csv) o.fail("accuracy CSV differs");
        if (telemetry_loopback().csv != loop.csv) o.fail("pose log CSV differs");
        o.note("sweep " + std::to_string(cal.csv.size()) + " B, accuracy " + std::to_string(tcp.csv.size()) +
               " B, pose log " + std::to_string(loop.csv.size()) + " B compared");
        return o;
    });

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
