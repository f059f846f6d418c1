#include "senc/errors.hpp"

#include <sstream>

namespace senc {

namespace {

std::string leg_message(const char* what, int leg, double length) {
    std::ostringstream os;
    os << what << ": leg " << (leg + 1) << " length " << length << " mm";
    return os.str();
}

}  // namespace

DegenerateLeg::DegenerateLeg(int leg_, double length)
    : Error(leg_message("degenerate leg", leg_, length)), leg(leg_), length_mm(length) {}

SingularConfiguration::SingularConfiguration(double cond)
    : Error("singular configuration: inverse Jacobian condition number " + std::to_string(cond)),
      condition_number(cond) {}

NoConvergence::NoConvergence(int iters, double residual)
    : Error("forward kinematics did not converge after " + std::to_string(iters) +
            " iterations, residual " + std::to_string(residual) + " mm"),
      iterations(iters),
      residual_mm(residual) {}

HomingIncomplete::HomingIncomplete(std::vector<int> chans)
    : Error([&] {
          std::ostringstream os;
          os << "homing incomplete: no index pulse on channel(s)";
          for (int c : chans) os << ' ' << (c + 1);
          return os.str();
      }()),
      channels(std::move(chans)) {}

NonPositiveLength::NonPositiveLength(int leg_, double length)
    : Error(leg_message("non-positive length after offset", leg_, length)), leg(leg_), length_mm(length) {}

SweepFailed::SweepFailed(std::size_t failed, std::size_t total)
    : Error("calibration sweep failed: " + std::to_string(failed) + " of " + std::to_string(total) +
            " (sample, offset) pairs diverged"),
      failed_pairs(failed),
      total_pairs(total) {}

OutOfRange::OutOfRange(int leg_, double length)
    : Error(leg_message("string length out of encoder range", leg_, length)), leg(leg_), length_mm(length) {}

}  // namespace senc
