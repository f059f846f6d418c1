#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>

#include "senc/errors.hpp"

namespace senc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr int kLegCount = 6;
inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// 6-DOF pose of the helmet in the base (imaging ring) frame.
//
// Angle naming follows the rig convention, which differs from aerospace usage:
// roll turns about z, pitch about y, yaw about x. The rotation is composed
// intrinsically Z, then Y, then X, i.e. R = Rz(roll) * Ry(pitch) * Rx(yaw).
// Translations are in mm and angles in degrees.
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double roll = 0.0;
    double pitch = 0.0;
    double yaw = 0.0;

    static Pose identity() { return {}; }

    // Access in parameter order (x, y, z, roll, pitch, yaw).
    double operator[](int i) const;
    double& operator[](int i);

    Vec3 translation() const { return {x, y, z}; }

    bool operator==(const Pose&) const = default;
};

std::string to_string(const Pose& pose);

struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static RigidTransform identity() { return {}; }
    static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    RigidTransform inverse() const;

    // Row-major 4x4 homogeneous form.
    Eigen::Matrix4d homogeneous() const;
    static RigidTransform from_homogeneous(const Eigen::Matrix4d& m);
};

// this * rhs: apply rhs first, then this.
RigidTransform operator*(const RigidTransform& lhs, const RigidTransform& rhs);

// Elementary rotations, angles in degrees.
Mat3 rot_x(double deg);
Mat3 rot_y(double deg);
Mat3 rot_z(double deg);

// R = Rz(roll) * Ry(pitch) * Rx(yaw), translation from the pose.
RigidTransform pose_to_matrix(const Pose& pose);

// Inverse of pose_to_matrix with pitch in [-90, 90] degrees. Throws GimbalLock
// when |pitch| is within 1e-7 degrees of 90.
Pose matrix_to_pose(const RigidTransform& t);

// Pose whose matrix is matrix(p) * matrix(q).
Pose compose(const Pose& p, const Pose& q);

inline Vec3 transform_point(const RigidTransform& t, const Vec3& p) { return t.apply(p); }

class GimbalLock : public Error {
public:
    // pose carries the conventional decomposition (yaw = 0).
    explicit GimbalLock(const Pose& pose);
    Pose pose;
};

struct Workspace {
    double translation_mm = 10.0;
    double rotation_deg = 10.0;

    bool contains(const Pose& p) const;
};

// Base and helmet attachment points, leg i connecting base_points[i] to
// helmet_points[i]. Base points live in the ring frame, helmet points in the
// helmet frame; at the nominal pose both frames coincide.
struct PlatformGeometry {
    std::array<Vec3, kLegCount> base_points;
    std::array<Vec3, kLegCount> helmet_points;
    Workspace workspace;

    // Attachment points of the built rig, in mm.
    static PlatformGeometry default_geometry();
};

}  // namespace senc
