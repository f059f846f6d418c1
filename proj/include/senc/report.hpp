#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "senc/calibration.hpp"
#include "senc/simulator.hpp"

namespace senc {

// Written next to every CLI run's outputs. Contains nothing time-dependent so
// reruns with the same inputs reproduce it byte-for-byte.
struct RunManifest {
    std::string subcommand;
    std::string tool_version;
    std::map<std::string, std::string> inputs;  // role -> path or value
    std::optional<std::uint64_t> seed;
    std::vector<std::string> outputs;
};

std::string manifest_json(const RunManifest& manifest);

// Six panels of |dP| against displacement, one per axis.
std::string accuracy_svg(const AccuracyTable& table);

// RMS and max error against candidate offset, best offset marked.
std::string sweep_svg(const CalibrationSweep& sweep);

}  // namespace senc
