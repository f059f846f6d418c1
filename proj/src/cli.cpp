#include "senc/cli.hpp"

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "senc/calibration.hpp"
#include "senc/config.hpp"
#include "senc/csv.hpp"
#include "senc/report.hpp"
#include "senc/scenario.hpp"
#include "senc/telemetry.hpp"

#ifndef SENC_VERSION
#define SENC_VERSION "dev"
#endif

namespace senc {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

// Bridges SIGINT to a stop_source for the lifetime of a long-running command.
class InterruptWatch {
public:
    InterruptWatch() {
        g_interrupted.store(false);
        previous_ = std::signal(SIGINT, on_sigint);
        watcher_ = std::jthread([this](std::stop_token st) {
            while (!st.stop_requested()) {
                if (g_interrupted.load()) {
                    source_.request_stop();
                    return;
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(50));
            }
        });
    }
    ~InterruptWatch() {
        watcher_.request_stop();
        watcher_.join();
        std::signal(SIGINT, previous_);
    }
    std::stop_token token() const { return source_.get_token(); }

private:
    std::stop_source source_;
    std::jthread watcher_;
    void (*previous_)(int) = SIG_DFL;
};

std::vector<double> parse_numbers(const std::string& text, std::size_t expected, const char* what) {
    std::vector<double> out;
    for (const auto& f : csv::split(text)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(f, &used));
            if (used != f.size()) throw std::invalid_argument(f);
        } catch (const std::exception&) {
            throw ConfigError(std::string(what) + ": '" + f + "' is not a number");
        }
    }
    if (expected && out.size() != expected)
        throw ConfigError(std::string(what) + ": expected " + std::to_string(expected) + " comma-separated values");
    return out;
}

Pose parse_pose(const std::string& text) {
    const auto v = parse_numbers(text, 6, "--guess");
    Pose p;
    for (int i = 0; i < 6; ++i) p[i] = v[static_cast<std::size_t>(i)];
    return p;
}

PlatformGeometry load_geometry(const std::string& path) {
    return path.empty() ? PlatformGeometry::default_geometry() : load_rig_config(path).geometry;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

template <typename F>
void write_file(const std::string& path, F&& body) {
    std::ostringstream os;
    body(os);
    write_text_file(path, os.str());
}

void write_manifest(const std::string& dir, RunManifest m) {
    m.tool_version = SENC_VERSION;
    m.outputs.push_back("manifest.json");
    write_text_file(join(dir, "manifest.json"), manifest_json(m));
}

std::string dir_of(const std::string& file) {
    const fs::path parent = fs::path(file).parent_path();
    return parent.empty() ? "." : parent.string();
}

std::string file_name(const std::string& path) { return fs::path(path).filename().string(); }

struct SolverFlags {
    double tolerance = 0.01;
    int max_iterations = 50;
    double damping = 0.0;

    void add(CLI::App* app) {
        app->add_option("--tolerance", tolerance, "FK stop threshold on ||L_m - L||, mm")->capture_default_str();
        app->add_option("--max-iterations", max_iterations, "FK iteration limit")->capture_default_str();
        app->add_option("--damping", damping, "Tikhonov damping for the pseudo-inverse")->capture_default_str();
    }
    SolverConfig config() const {
        SolverConfig c;
        c.length_tolerance = tolerance;
        c.max_iterations = max_iterations;
        c.damping = damping;
        c.validate();
        return c;
    }
};

void print_pose_header(std::ostream& os) { os << "index,x,y,z,roll,pitch,yaw,converged,iterations,residual_mm\n"; }

void print_pose_row(std::ostream& os, std::size_t index, const SolveResult& r) {
    os << index;
    for (int i = 0; i < 6; ++i) os << ',' << csv::fmt(r.pose[i]);
    os << ',' << (r.converged ? 1 : 0) << ',' << r.iterations << ',' << csv::fmt(r.residual, 9) << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"String-encoder Stewart platform pose toolkit", "senc"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SENC_VERSION);

    // solve -----------------------------------------------------------------
    auto* solve = app.add_subcommand("solve", "Forward kinematics: string lengths to helmet pose");
    std::string solve_lengths, solve_input, solve_geometry, solve_out, solve_guess = "0,0,0,0,0,0";
    double solve_offset = 0.0;
    SolverFlags solve_solver;
    auto* lengths_opt = solve->add_option("--lengths", solve_lengths, "Six comma-separated lengths, mm");
    solve->add_option("--input", solve_input, "CSV with columns L1..L6 (other columns ignored)")
        ->excludes(lengths_opt)
        ->check(CLI::ExistingFile);
    solve->add_option("--geometry", solve_geometry, "Rig config JSON (default: built-in geometry)");
    solve->add_option("--offset-mm", solve_offset, "String length offset added to every leg")->capture_default_str();
    solve->add_option("--guess", solve_guess, "Initial pose x,y,z,roll,pitch,yaw")->capture_default_str();
    solve->add_option("--out", solve_out, "Write the pose CSV here instead of stdout");
    solve_solver.add(solve);

    // simulate --------------------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "Generate calibration samples from a scenario");
    std::string sim_scenario, sim_out;
    simulate->add_option("--scenario", sim_scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", sim_out, "Samples CSV")->required();

    // calibrate -------------------------------------------------------------
    auto* calibrate = app.add_subcommand("calibrate", "Sweep string length offsets over calibration samples");
    std::string cal_samples, cal_geometry, cal_out_dir = ".", cal_offsets = "-2:6:0.5";
    SolverFlags cal_solver;
    double cal_max_fail = 0.10;
    calibrate->add_option("--samples", cal_samples, "Samples CSV (L1..L6,x,y,z,roll,pitch,yaw)")
        ->required()
        ->check(CLI::ExistingFile);
    calibrate->add_option("--offsets", cal_offsets, "Offset grid lo:hi:step or a comma list, mm")
        ->capture_default_str();
    calibrate->add_option("--geometry", cal_geometry, "Rig config JSON (default: built-in geometry)");
    calibrate->add_option("--out-dir", cal_out_dir, "Output directory")->capture_default_str();
    calibrate->add_option("--max-failure-fraction", cal_max_fail, "Tolerated fraction of divergent pairs")
        ->capture_default_str();
    cal_solver.add(calibrate);

    // evaluate --------------------------------------------------------------
    auto* evaluate = app.add_subcommand("evaluate", "Run the accuracy protocol of a scenario");
    std::string eval_scenario, eval_out_dir = ".";
    SolverFlags eval_solver;
    evaluate->add_option("--scenario", eval_scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--out-dir", eval_out_dir, "Output directory")->capture_default_str();
    eval_solver.add(evaluate);

    // home ------------------------------------------------------------------
    auto* home = app.add_subcommand("home", "Simulate the index-pulse homing retraction");
    std::string home_scenario, home_out_dir = ".";
    home->add_option("--scenario", home_scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    home->add_option("--out-dir", home_out_dir, "Output directory")->capture_default_str();

    // serve -----------------------------------------------------------------
    auto* serve_cmd = app.add_subcommand("serve", "Stream simulated encoder counts over UDP");
    std::string serve_scenario, serve_connect, serve_bind, serve_config_out;
    double serve_rate = 1000.0;
    double serve_duration = 0.0;
    std::vector<std::uint32_t> serve_drops;
    serve_cmd->add_option("--scenario", serve_scenario, "Scenario JSON")->required();
    serve_cmd->add_option("--connect", serve_connect, "Destination host:port")->required();
    serve_cmd->add_option("--bind", serve_bind, "Local host:port to send from");
    serve_cmd->add_option("--rate-hz", serve_rate, "Packet rate, 1-2000 Hz")->capture_default_str();
    serve_cmd->add_option("--duration-s", serve_duration,
                          "Seconds to stream; the last sample is held past the scenario end "
                          "(default: stream length)");
    serve_cmd->add_option("--drop-seq", serve_drops, "Sequence numbers to generate but not send");
    serve_cmd->add_option("--write-config", serve_config_out,
                          "Write the rig config (geometry + encoder references) the client needs");

    // stream ----------------------------------------------------------------
    auto* stream_cmd = app.add_subcommand("stream", "Receive counts, home, solve and republish poses");
    std::string stream_bind, stream_config, stream_chain, stream_log, stream_connect;
    double stream_offset = 3.0;
    int stream_idle_ms = 1000;
    std::uint64_t stream_max_packets = 0;
    SolverFlags stream_solver;
    stream_cmd->add_option("--bind", stream_bind, "Listen host:port")->required();
    stream_cmd->add_option("--config", stream_config, "Rig config JSON with encoder references")
        ->required()
        ->check(CLI::ExistingFile);
    stream_cmd->add_option("--offset-mm", stream_offset, "String length offset")->capture_default_str();
    stream_cmd->add_option("--chain", stream_chain, "Frame chain JSON; poses are then reported in the robot frame")
        ->check(CLI::ExistingFile);
    stream_cmd->add_option("--log", stream_log, "Pose log CSV");
    stream_cmd->add_option("--connect", stream_connect, "Republish pose packets to host:port");
    stream_cmd->add_option("--idle-timeout-ms", stream_idle_ms, "Stop after this long without packets")
        ->capture_default_str();
    stream_cmd->add_option("--max-packets", stream_max_packets, "Stop after this many packets (0: no limit)");
    stream_solver.add(stream_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (solve->parsed()) {
            const PlatformGeometry geom = load_geometry(solve_geometry);
            const SolverConfig cfg = solve_solver.config();
            const Pose guess = parse_pose(solve_guess);
            if (solve_input.empty() && solve_lengths.empty()) throw ConfigError("solve: give --lengths or --input");

            std::vector<LegLengths> batch;
            if (!solve_lengths.empty()) {
                const auto v = parse_numbers(solve_lengths, 6, "--lengths");
                LegLengths l;
                for (int i = 0; i < 6; ++i) l[i] = v[static_cast<std::size_t>(i)];
                batch.push_back(l);
            } else {
                std::istringstream in(read_text_file(solve_input));
                const auto table = csv::Table::read(in);
                std::array<std::size_t, 6> cols{};
                for (int i = 0; i < 6; ++i) cols[static_cast<std::size_t>(i)] = table.column("L" + std::to_string(i + 1));
                for (std::size_t r = 0; r < table.rows(); ++r) {
                    LegLengths l;
                    for (int i = 0; i < 6; ++i) l[i] = table.number(r, cols[static_cast<std::size_t>(i)]);
                    batch.push_back(l);
                }
            }

            std::ostringstream csv_out;
            print_pose_header(csv_out);
            int status = kExitOk;
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const LegLengths target = apply_offset(batch[i], solve_offset);
                SolveResult r;
                try {
                    r = forward_kinematics(geom, target, guess, cfg);
                } catch (const SingularConfiguration& e) {
                    r.pose = guess;
                    r.residual = (target.vector() - inverse_kinematics(geom, guess).vector()).norm();
                    err << "solve: row " << i << ": " << e.what() << '\n';
                }
                print_pose_row(csv_out, i, r);
                if (!r.converged) {
                    err << "solve: row " << i << " did not converge after " << r.iterations
                        << " iterations, residual " << csv::fmt(r.residual) << " mm\n";
                    status = kExitFailure;
                }
            }
            if (solve_out.empty()) {
                out << csv_out.str();
            } else {
                write_text_file(solve_out, csv_out.str());
                RunManifest m{"solve", "", {{"geometry", solve_geometry.empty() ? "default" : solve_geometry},
                                            {"offset_mm", csv::fmt(solve_offset, 3)},
                                            {"input", solve_input.empty() ? solve_lengths : solve_input}},
                              std::nullopt, {file_name(solve_out)}};
                write_manifest(dir_of(solve_out), m);
            }
            return status;
        }

        if (simulate->parsed()) {
            const Scenario sc = load_scenario(sim_scenario);
            err << "simulate: seed " << sc.seed << '\n';
            SimRng rng(sc.seed);
            const auto samples = simulate_calibration_samples(sc.rig.geometry, sc.deviation, sc.motion, rng);
            write_file(sim_out, [&](std::ostream& os) { write_samples_csv(os, samples); });
            write_manifest(dir_of(sim_out),
                           {"simulate", "", {{"scenario", sim_scenario}}, sc.seed, {file_name(sim_out)}});
            out << "wrote " << samples.size() << " samples to " << sim_out << '\n';
            return kExitOk;
        }

        if (calibrate->parsed()) {
            const PlatformGeometry geom = load_geometry(cal_geometry);
            std::vector<double> offsets;
            if (cal_offsets.find(':') != std::string::npos) {
                const auto v = parse_numbers([&] {
                    std::string s = cal_offsets;
                    std::replace(s.begin(), s.end(), ':', ',');
                    return s;
                }(), 3, "--offsets");
                offsets = offset_grid(v[0], v[1], v[2]);
            } else {
                offsets = parse_numbers(cal_offsets, 0, "--offsets");
            }
            std::istringstream in(read_text_file(cal_samples));
            const auto samples = read_samples_csv(in);
            SweepOptions opts;
            opts.max_failure_fraction = cal_max_fail;
            const CalibrationSweep sweep = run_sweep(samples, offsets, geom, cal_solver.config(), opts);
            if (sweep.failed_pairs > 0)
                err << "calibrate: warning: " << sweep.failed_pairs << " of " << sweep.total_pairs
                    << " (sample, offset) pairs diverged and were excluded\n";

            ensure_dir(cal_out_dir);
            write_file(join(cal_out_dir, "sweep.csv"), [&](std::ostream& os) { sweep.write_csv(os); });
            write_text_file(join(cal_out_dir, "sweep.svg"), sweep_svg(sweep));
            write_manifest(cal_out_dir, {"calibrate", "",
                                         {{"samples", cal_samples},
                                          {"offsets", cal_offsets},
                                          {"geometry", cal_geometry.empty() ? "default" : cal_geometry}},
                                         std::nullopt, {"sweep.csv", "sweep.svg"}});
            out << "best_offset_mm " << csv::fmt(sweep.best_offset, 3) << '\n';
            return kExitOk;
        }

        if (evaluate->parsed()) {
            const Scenario sc = load_scenario(eval_scenario);
            err << "evaluate: seed " << sc.seed << '\n';
            SimRng rng(sc.seed);
            ProtocolOptions opts;
            opts.offset_mm = sc.offset_mm;
            opts.robot_base = sc.robot_base;
            const AccuracyReport rep =
                run_accuracy_protocol(sc.rig.geometry, sc.deviation, sc.motion, eval_solver.config(), rng, opts);

            ensure_dir(eval_out_dir);
            write_file(join(eval_out_dir, "accuracy_points.csv"), [&](std::ostream& os) { rep.write_points_csv(os); });
            write_file(join(eval_out_dir, "accuracy_table.csv"), [&](std::ostream& os) { rep.write_table_csv(os); });
            write_text_file(join(eval_out_dir, "accuracy.svg"), accuracy_svg(rep.table()));
            save_chain(join(eval_out_dir, "chain.json"), rep.chain);
            write_manifest(eval_out_dir,
                           {"evaluate", "", {{"scenario", eval_scenario}}, sc.seed,
                            {"accuracy_points.csv", "accuracy_table.csv", "accuracy.svg", "chain.json"}});
            std::ostringstream table;
            rep.write_table_csv(table);
            out << table.str();
            if (rep.failed > 0) {
                err << "evaluate: " << rep.failed << " point(s) did not converge\n";
                return kExitFailure;
            }
            return kExitOk;
        }

        if (home->parsed()) {
            const Scenario sc = load_scenario(home_scenario);
            err << "home: seed " << sc.seed << '\n';
            const ScenarioStream ss = scenario_stream(sc, 1000.0);
            EncoderBank bank;
            for (std::size_t c = 0; c < kLegCount; ++c) bank[c] = EncoderChannel(ss.rig.encoders[c]);
            bank = home_all(bank, homing_traces(ss.stream));

            // Bring the homed channels up to the end of the homing segment.
            std::size_t last = 0;
            while (last + 1 < ss.stream.samples.size() && ss.stream.samples[last + 1].homing) ++last;
            const CountSample& at = ss.stream.samples[last];

            ensure_dir(home_out_dir);
            write_file(join(home_out_dir, "homing.csv"), [&](std::ostream& os) {
                os << "channel,first_index_length_mm,latched_raw_count,absolute_length_mm,true_length_mm,error_mm\n";
                for (std::size_t c = 0; c < kLegCount; ++c) {
                    const double abs_len = bank[c].absolute_length();
                    const double truth = at.extension[static_cast<int>(c)];
                    os << (c + 1) << ',' << csv::fmt(ss.rig.encoders[c].first_index_length_mm) << ','
                       << bank[c].index_count() << ',' << csv::fmt(abs_len) << ',' << csv::fmt(truth) << ','
                       << csv::fmt(abs_len - truth) << '\n';
                }
            });
            save_rig_config(join(home_out_dir, "rig.json"), ss.rig);
            write_manifest(home_out_dir, {"home", "", {{"scenario", home_scenario}}, sc.seed, {"homing.csv", "rig.json"}});
            out << "homed " << kLegCount << " channels\n";
            return kExitOk;
        }

        if (serve_cmd->parsed()) {
            // Everything that can fail on input is checked before a socket exists.
            const Scenario sc = load_scenario(serve_scenario);
            ServeOptions opts;
            opts.destination = Endpoint::parse(serve_connect);
            if (!serve_bind.empty()) opts.bind = Endpoint::parse(serve_bind);
            opts.rate_hz = serve_rate;
            opts.drop_sequences = serve_drops;
            opts.validate();
            err << "serve: seed " << sc.seed << '\n';
            const ScenarioStream ss = scenario_stream(sc, serve_rate);
            opts.packet_count = serve_duration > 0.0 ? static_cast<std::uint64_t>(std::llround(serve_duration * serve_rate))
                                                     : ss.stream.samples.size();
            if (!serve_config_out.empty()) {
                save_rig_config(serve_config_out, ss.rig);
                write_manifest(dir_of(serve_config_out),
                               {"serve", "", {{"scenario", serve_scenario}, {"connect", serve_connect},
                                              {"rate_hz", csv::fmt(serve_rate, 1)}},
                                sc.seed, {file_name(serve_config_out)}});
            }
            InterruptWatch watch;
            const ServeReport rep = serve(ss.stream, opts, watch.token());
            out << "generated " << rep.generated << " sent " << rep.sent << " dropped " << rep.dropped << " in "
                << csv::fmt(rep.elapsed_s, 3) << " s\n";
            return kExitOk;
        }

        if (stream_cmd->parsed()) {
            ClientOptions opts;
            opts.listen = Endpoint::parse(stream_bind);
            opts.rig = load_rig_config(stream_config);
            opts.offset_mm = stream_offset;
            if (!stream_chain.empty()) opts.chain = load_chain(stream_chain);
            if (!stream_connect.empty()) opts.publish = Endpoint::parse(stream_connect);
            opts.solver = stream_solver.config();
            opts.idle_timeout = std::chrono::milliseconds(stream_idle_ms);
            if (stream_max_packets > 0) opts.max_packets = stream_max_packets;

            PoseClient client(opts);
            err << "stream: listening on " << client.local_endpoint().str() << '\n';
            std::ofstream log_file;
            if (!stream_log.empty()) {
                log_file.open(stream_log, std::ios::binary);
                if (!log_file) throw ConfigError("cannot write " + stream_log);
            }
            InterruptWatch watch;
            const ClientReport rep = client.run(watch.token(), stream_log.empty() ? nullptr : &log_file);
            log_file.close();
            if (!stream_log.empty()) {
                RunManifest m{"stream", "", {{"config", stream_config}, {"offset_mm", csv::fmt(stream_offset, 3)}},
                              std::nullopt, {file_name(stream_log)}};
                if (!stream_chain.empty()) m.inputs["chain"] = stream_chain;
                write_manifest(dir_of(stream_log), m);
            }
            out << "received " << rep.received << " processed " << rep.pipeline.processed << " gaps "
                << rep.pipeline.gaps << " out_of_order " << rep.pipeline.out_of_order << " not_homed "
                << rep.pipeline.not_homed << " solve_failures " << rep.pipeline.solve_failures << " malformed "
                << rep.malformed << " max_queue " << rep.max_queue_depth << '\n';
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const BindFailure& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace senc
