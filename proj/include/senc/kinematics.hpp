#pragma once

#include <array>

#include <Eigen/Dense>

#include "senc/geometry.hpp"

namespace senc {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

// Six string lengths in mm, index-aligned with the platform legs.
struct LegLengths {
    std::array<double, kLegCount> mm{};

    double operator[](int i) const { return mm[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return mm[static_cast<std::size_t>(i)]; }

    Vector6 vector() const { return Vector6(mm.data()); }
    static LegLengths from_vector(const Vector6& v);

    bool operator==(const LegLengths&) const = default;
};

enum class JacobianMethod { Analytic, FiniteDifference };

struct SolverConfig {
    double length_tolerance = 0.01;  // mm, on ||L_measured - L_estimated||
    int max_iterations = 50;
    double damping = 0.0;  // Tikhonov factor lambda; the pseudo-inverse uses lambda^2
    double finite_difference_step = 1e-4;  // mm / deg
    JacobianMethod jacobian = JacobianMethod::Analytic;
    // Once the residual is under length_tolerance, keep stepping (at most
    // refine_steps times) until it is under refine_tolerance. The coarse
    // tolerance alone leaves up to ~0.1 mm of pose error near the workspace
    // corners, where the smallest singular value of the Jacobian drops to ~0.1.
    int refine_steps = 10;
    double refine_tolerance = 1e-6;  // mm

    // Throws ConfigError if a field is out of its domain.
    void validate() const;
};

struct SolveResult {
    Pose pose;
    int iterations = 0;
    double residual = 0.0;  // mm
    bool converged = false;
};

// Leg lengths ||X * H_i - B_i|| for the helmet at `pose`.
// Throws DegenerateLeg if a length falls below 1e-9 mm.
LegLengths inverse_kinematics(const PlatformGeometry& geom, const Pose& pose);

// d(L_i)/d(x, y, z, roll, pitch, yaw), in mm/mm for the first three columns and
// mm/deg for the angular ones. Rows are leg-aligned. Throws SingularConfiguration
// when the condition number exceeds 1e12.
Matrix6 inverse_jacobian(const PlatformGeometry& geom, const Pose& pose);

// Central-difference inverse Jacobian with the given step (mm and deg).
Matrix6 finite_difference_jacobian(const PlatformGeometry& geom, const Pose& pose, double step);

// Damped SVD pseudo-inverse, singular values filtered as s / (s^2 + damping^2).
Matrix6 pseudo_inverse(const Matrix6& m, double damping);

double condition_number(const Matrix6& m);

// Iterates X_{k+1} = X_k + pinv(A(X_k)) (L_measured - L(X_k)) from
// `initial_guess`, where A is the inverse Jacobian. `iterations` counts the
// residual evaluations, so a guess that already matches returns 1.
//
// Hitting the iteration limit does not throw: the best pose seen is returned
// with converged = false (see require_converged). SingularConfiguration is
// propagated.
SolveResult forward_kinematics(const PlatformGeometry& geom, const LegLengths& measured,
                               const Pose& initial_guess, const SolverConfig& config = {});

// Throws NoConvergence if the result did not converge.
const SolveResult& require_converged(const SolveResult& result);

}  // namespace senc
