#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "senc/kinematics.hpp"

namespace senc {

struct CalibrationSample {
    LegLengths measured_lengths;
    Pose ground_truth_pose;  // in the string-encoder base frame
};

struct SweepRow {
    double offset_mm = 0.0;
    double rms_mm = 0.0;
    double max_mm = 0.0;
    std::size_t failed = 0;  // (sample, offset) pairs excluded for divergence
};

struct CalibrationSweep {
    std::vector<SweepRow> rows;  // in the order the offsets were given
    double best_offset = 0.0;
    std::size_t failed_pairs = 0;
    std::size_t total_pairs = 0;

    // offset_mm,rms_mm,max_mm rows followed by a "# best_offset_mm=..." line.
    void write_csv(std::ostream& os) const;
};

struct SweepOptions {
    double max_failure_fraction = 0.10;
    unsigned threads = 0;  // 0: hardware concurrency
};

// Adds `offset` to every leg. Throws NonPositiveLength if a result is <= 0.
LegLengths apply_offset(const LegLengths& lengths, double offset);

// |dP|: distance between the FK translation of the offset-adjusted lengths and
// the ground-truth translation. FK starts from the nominal pose. Throws
// NoConvergence.
double position_error(const CalibrationSample& sample, double offset, const PlatformGeometry& geom,
                      const SolverConfig& solver = {});

// Evaluates every (sample, offset) pair. The best offset minimises max error,
// ties broken by RMS. Divergent pairs are excluded and counted; SweepFailed is
// thrown if their fraction exceeds options.max_failure_fraction.
CalibrationSweep run_sweep(const std::vector<CalibrationSample>& samples, const std::vector<double>& offsets,
                           const PlatformGeometry& geom, const SolverConfig& solver = {},
                           const SweepOptions& options = {});

// lo, lo + step, ..., hi (inclusive, snapped to the step grid).
std::vector<double> offset_grid(double lo, double hi, double step);

std::vector<CalibrationSample> read_samples_csv(std::istream& is);
void write_samples_csv(std::ostream& os, const std::vector<CalibrationSample>& samples);

}  // namespace senc
