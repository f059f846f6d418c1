#include "senc/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <ostream>
#include <thread>

#include "senc/csv.hpp"

namespace senc {

LegLengths apply_offset(const LegLengths& lengths, double offset) {
    LegLengths out;
    for (int i = 0; i < kLegCount; ++i) {
        out[i] = lengths[i] + offset;
        if (!(out[i] > 0.0)) throw NonPositiveLength(i, out[i]);
    }
    return out;
}

double position_error(const CalibrationSample& sample, double offset, const PlatformGeometry& geom,
                      const SolverConfig& solver) {
    const SolveResult r = forward_kinematics(geom, apply_offset(sample.measured_lengths, offset), Pose::identity(),
                                             solver);
    require_converged(r);
    return (r.pose.translation() - sample.ground_truth_pose.translation()).norm();
}

namespace {

SweepRow evaluate_offset(const std::vector<CalibrationSample>& samples, double offset, const PlatformGeometry& geom,
                         const SolverConfig& solver) {
    SweepRow row;
    row.offset_mm = offset;
    double sum_sq = 0.0;
    std::size_t used = 0;
    for (const auto& s : samples) {
        try {
            const double e = position_error(s, offset, geom, solver);
            sum_sq += e * e;
            row.max_mm = std::max(row.max_mm, e);
            ++used;
        } catch (const NoConvergence&) {
            ++row.failed;
        } catch (const SingularConfiguration&) {
            ++row.failed;
        } catch (const NonPositiveLength&) {
            ++row.failed;
        }
    }
    if (used == 0) {
        row.rms_mm = row.max_mm = std::numeric_limits<double>::infinity();
    } else {
        row.rms_mm = std::sqrt(sum_sq / static_cast<double>(used));
    }
    return row;
}

}  // namespace

CalibrationSweep run_sweep(const std::vector<CalibrationSample>& samples, const std::vector<double>& offsets,
                           const PlatformGeometry& geom, const SolverConfig& solver, const SweepOptions& options) {
    if (samples.empty()) throw ConfigError("calibration: no samples");
    if (offsets.empty()) throw ConfigError("calibration: no offsets");
    solver.validate();

    CalibrationSweep sweep;
    sweep.rows.resize(offsets.size());

    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(offsets.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < offsets.size(); i = next++)
            sweep.rows[i] = evaluate_offset(samples, offsets[i], geom, solver);
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }

    sweep.total_pairs = samples.size() * offsets.size();
    for (const auto& r : sweep.rows) sweep.failed_pairs += r.failed;
    if (static_cast<double>(sweep.failed_pairs) >
        options.max_failure_fraction * static_cast<double>(sweep.total_pairs))
        throw SweepFailed(sweep.failed_pairs, sweep.total_pairs);

    const auto best = std::min_element(sweep.rows.begin(), sweep.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.max_mm != b.max_mm) return a.max_mm < b.max_mm;
        return a.rms_mm < b.rms_mm;
    });
    sweep.best_offset = best->offset_mm;
    return sweep;
}

void CalibrationSweep::write_csv(std::ostream& os) const {
    os << "offset_mm,rms_mm,max_mm\n";
    for (const auto& r : rows) os << csv::fmt(r.offset_mm, 3) << ',' << csv::fmt(r.rms_mm) << ',' << csv::fmt(r.max_mm) << '\n';
    os << "# best_offset_mm=" << csv::fmt(best_offset, 3) << '\n';
}

std::vector<double> offset_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw ConfigError("offset grid: need step > 0 and hi >= lo");
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n + 1));
    for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

std::vector<CalibrationSample> read_samples_csv(std::istream& is) {
    const auto table = csv::Table::read(is);
    std::array<std::size_t, 6> lcol{};
    for (int i = 0; i < 6; ++i) lcol[static_cast<std::size_t>(i)] = table.column("L" + std::to_string(i + 1));
    static constexpr const char* pose_names[6] = {"x", "y", "z", "roll", "pitch", "yaw"};
    std::array<std::size_t, 6> pcol{};
    for (int i = 0; i < 6; ++i) pcol[static_cast<std::size_t>(i)] = table.column(pose_names[i]);

    std::vector<CalibrationSample> out;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        CalibrationSample s;
        for (int i = 0; i < 6; ++i) {
            s.measured_lengths[i] = table.number(r, lcol[static_cast<std::size_t>(i)]);
            s.ground_truth_pose[i] = table.number(r, pcol[static_cast<std::size_t>(i)]);
        }
        out.push_back(s);
    }
    return out;
}

void write_samples_csv(std::ostream& os, const std::vector<CalibrationSample>& samples) {
    os << "L1,L2,L3,L4,L5,L6,x,y,z,roll,pitch,yaw\n";
    for (const auto& s : samples) {
        for (int i = 0; i < 6; ++i) os << csv::fmt(s.measured_lengths[i], 9) << ',';
        for (int i = 0; i < 6; ++i) os << csv::fmt(s.ground_truth_pose[i], 9) << (i < 5 ? ',' : '\n');
    }
}

}  // namespace senc
