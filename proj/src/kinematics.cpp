#include "senc/kinematics.hpp"

#include <cmath>
#include <limits>

namespace senc {

namespace {

constexpr double kMinLegLength = 1e-9;
constexpr double kMaxCondition = 1e12;

// Derivatives of the elementary rotations with respect to their angle in radians.
Mat3 drot_x(double deg) {
    const double c = std::cos(deg2rad(deg));
    const double s = std::sin(deg2rad(deg));
    Mat3 r;
    r << 0, 0, 0,
         0, -s, -c,
         0, c, -s;
    return r;
}

Mat3 drot_y(double deg) {
    const double c = std::cos(deg2rad(deg));
    const double s = std::sin(deg2rad(deg));
    Mat3 r;
    r << -s, 0, c,
         0, 0, 0,
         -c, 0, -s;
    return r;
}

Mat3 drot_z(double deg) {
    const double c = std::cos(deg2rad(deg));
    const double s = std::sin(deg2rad(deg));
    Mat3 r;
    r << -s, -c, 0,
         c, -s, 0,
         0, 0, 0;
    return r;
}

Matrix6 analytic_jacobian(const PlatformGeometry& geom, const Pose& pose) {
    const Mat3 rz = rot_z(pose.roll);
    const Mat3 ry = rot_y(pose.pitch);
    const Mat3 rx = rot_x(pose.yaw);
    const Mat3 rot = rz * ry * rx;
    // Euler-rate partials of R, scaled to per-degree.
    const double per_deg = kPi / 180.0;
    const Mat3 d_roll = drot_z(pose.roll) * ry * rx * per_deg;
    const Mat3 d_pitch = rz * drot_y(pose.pitch) * rx * per_deg;
    const Mat3 d_yaw = rz * ry * drot_x(pose.yaw) * per_deg;

    Matrix6 jac;
    for (int i = 0; i < kLegCount; ++i) {
        const Vec3& h = geom.helmet_points[static_cast<std::size_t>(i)];
        const Vec3 leg = rot * h + pose.translation() - geom.base_points[static_cast<std::size_t>(i)];
        const double len = leg.norm();
        if (len < kMinLegLength) throw DegenerateLeg(i, len);
        const Vec3 u = leg / len;
        jac(i, 0) = u.x();
        jac(i, 1) = u.y();
        jac(i, 2) = u.z();
        jac(i, 3) = u.dot(d_roll * h);
        jac(i, 4) = u.dot(d_pitch * h);
        jac(i, 5) = u.dot(d_yaw * h);
    }
    return jac;
}

Pose add(const Pose& p, const Vector6& d) {
    Pose out = p;
    for (int i = 0; i < 6; ++i) out[i] += d(i);
    return out;
}

}  // namespace

LegLengths LegLengths::from_vector(const Vector6& v) {
    LegLengths l;
    for (int i = 0; i < kLegCount; ++i) l[i] = v(i);
    return l;
}

void SolverConfig::validate() const {
    if (!(length_tolerance > 0.0)) throw ConfigError("solver: length_tolerance must be > 0");
    if (max_iterations < 1) throw ConfigError("solver: max_iterations must be >= 1");
    if (!(damping >= 0.0)) throw ConfigError("solver: damping must be >= 0");
    if (!(finite_difference_step > 0.0)) throw ConfigError("solver: finite_difference_step must be > 0");
    if (refine_steps < 0) throw ConfigError("solver: refine_steps must be >= 0");
    if (!(refine_tolerance > 0.0)) throw ConfigError("solver: refine_tolerance must be > 0");
}

LegLengths inverse_kinematics(const PlatformGeometry& geom, const Pose& pose) {
    const RigidTransform x = pose_to_matrix(pose);
    LegLengths out;
    for (int i = 0; i < kLegCount; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double len = (x.apply(geom.helmet_points[k]) - geom.base_points[k]).norm();
        if (len < kMinLegLength) throw DegenerateLeg(i, len);
        out[i] = len;
    }
    return out;
}

double condition_number(const Matrix6& m) {
    Eigen::JacobiSVD<Matrix6> svd(m);
    const auto& s = svd.singularValues();
    if (s(5) <= 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / s(5);
}

Matrix6 inverse_jacobian(const PlatformGeometry& geom, const Pose& pose) {
    Matrix6 jac = analytic_jacobian(geom, pose);
    const double cond = condition_number(jac);
    if (!(cond <= kMaxCondition)) throw SingularConfiguration(cond);
    return jac;
}

Matrix6 finite_difference_jacobian(const PlatformGeometry& geom, const Pose& pose, double step) {
    Matrix6 jac;
    for (int j = 0; j < 6; ++j) {
        Pose plus = pose;
        Pose minus = pose;
        plus[j] += step;
        minus[j] -= step;
        const Vector6 col = (inverse_kinematics(geom, plus).vector() - inverse_kinematics(geom, minus).vector()) /
                            (2.0 * step);
        jac.col(j) = col;
    }
    return jac;
}

Matrix6 pseudo_inverse(const Matrix6& m, double damping) {
    Eigen::JacobiSVD<Matrix6> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cutoff = std::numeric_limits<double>::epsilon() * 6.0 * s(0);
    const double lambda2 = damping * damping;
    Vector6 inv_s;
    for (int i = 0; i < 6; ++i) {
        if (lambda2 > 0.0) {
            inv_s(i) = s(i) / (s(i) * s(i) + lambda2);
        } else {
            inv_s(i) = s(i) > cutoff ? 1.0 / s(i) : 0.0;
        }
    }
    return svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
}

SolveResult forward_kinematics(const PlatformGeometry& geom, const LegLengths& measured, const Pose& initial_guess,
                               const SolverConfig& config) {
    config.validate();
    const Vector6 target = measured.vector();

    SolveResult best;
    best.residual = std::numeric_limits<double>::infinity();

    const auto jacobian_at = [&](const Pose& p) {
        const Matrix6 jac = config.jacobian == JacobianMethod::Analytic
                                ? analytic_jacobian(geom, p)
                                : finite_difference_jacobian(geom, p, config.finite_difference_step);
        const double cond = condition_number(jac);
        if (!(cond <= kMaxCondition)) throw SingularConfiguration(cond);
        return jac;
    };

    Pose current = initial_guess;
    for (int k = 1; k <= config.max_iterations; ++k) {
        Vector6 err = target - inverse_kinematics(geom, current).vector();
        double residual = err.norm();
        if (residual < best.residual) {
            best.pose = current;
            best.residual = residual;
        }
        best.iterations = k;
        if (residual < config.length_tolerance) {
            best.pose = current;
            best.residual = residual;
            best.converged = true;
            for (int r = 0; r < config.refine_steps && residual >= config.refine_tolerance; ++r) {
                const Pose next = add(current, pseudo_inverse(jacobian_at(current), config.damping) * err);
                err = target - inverse_kinematics(geom, next).vector();
                ++best.iterations;
                if (!(err.norm() < residual)) break;
                current = next;
                residual = err.norm();
                best.pose = current;
                best.residual = residual;
            }
            return best;
        }
        if (!std::isfinite(residual) || k == config.max_iterations) break;
        current = add(current, pseudo_inverse(jacobian_at(current), config.damping) * err);
    }
    best.converged = false;
    return best;
}

const SolveResult& require_converged(const SolveResult& result) {
    if (!result.converged) throw NoConvergence(result.iterations, result.residual);
    return result;
}

}  // namespace senc
