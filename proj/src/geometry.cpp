#include "senc/geometry.hpp"

#include <cmath>
#include <cstdio>

namespace senc {

double Pose::operator[](int i) const {
    switch (i) {
        case 0: return x;
        case 1: return y;
        case 2: return z;
        case 3: return roll;
        case 4: return pitch;
        case 5: return yaw;
    }
    throw std::out_of_range("pose index");
}

double& Pose::operator[](int i) {
    switch (i) {
        case 0: return x;
        case 1: return y;
        case 2: return z;
        case 3: return roll;
        case 4: return pitch;
        case 5: return yaw;
    }
    throw std::out_of_range("pose index");
}

std::string to_string(const Pose& p) {
    char buf[192];
    std::snprintf(buf, sizeof buf, "x=%.4f y=%.4f z=%.4f roll=%.4f pitch=%.4f yaw=%.4f", p.x, p.y, p.z,
                  p.roll, p.pitch, p.yaw);
    return buf;
}

RigidTransform RigidTransform::inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
}

Eigen::Matrix4d RigidTransform::homogeneous() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
}

RigidTransform RigidTransform::from_homogeneous(const Eigen::Matrix4d& m) {
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

RigidTransform operator*(const RigidTransform& lhs, const RigidTransform& rhs) {
    return {lhs.rotation * rhs.rotation, lhs.rotation * rhs.translation + lhs.translation};
}

Mat3 rot_x(double deg) {
    const double c = std::cos(deg2rad(deg));
    const double s = std::sin(deg2rad(deg));
    Mat3 r;
    r << 1, 0, 0,
         0, c, -s,
         0, s, c;
    return r;
}

Mat3 rot_y(double deg) {
    const double c = std::cos(deg2rad(deg));
    const double s = std::sin(deg2rad(deg));
    Mat3 r;
    r << c, 0, s,
         0, 1, 0,
         -s, 0, c;
    return r;
}

Mat3 rot_z(double deg) {
    const double c = std::cos(deg2rad(deg));
    const double s = std::sin(deg2rad(deg));
    Mat3 r;
    r << c, -s, 0,
         s, c, 0,
         0, 0, 1;
    return r;
}

RigidTransform pose_to_matrix(const Pose& p) {
    return {rot_z(p.roll) * rot_y(p.pitch) * rot_x(p.yaw), p.translation()};
}

GimbalLock::GimbalLock(const Pose& p)
    : Error("gimbal lock: pitch at +/-90 deg, roll/yaw not separable (yaw set to 0)"), pose(p) {}

Pose matrix_to_pose(const RigidTransform& t) {
    const Mat3& r = t.rotation;
    Pose p;
    p.x = t.translation.x();
    p.y = t.translation.y();
    p.z = t.translation.z();
    p.pitch = rad2deg(std::atan2(-r(2, 0), std::hypot(r(0, 0), r(1, 0))));
    if (std::abs(90.0 - std::abs(p.pitch)) < 1e-7) {
        p.yaw = 0.0;
        p.roll = rad2deg(std::atan2(-r(0, 1), r(1, 1)));
        throw GimbalLock(p);
    }
    p.roll = rad2deg(std::atan2(r(1, 0), r(0, 0)));
    p.yaw = rad2deg(std::atan2(r(2, 1), r(2, 2)));
    return p;
}

Pose compose(const Pose& p, const Pose& q) {
    return matrix_to_pose(pose_to_matrix(p) * pose_to_matrix(q));
}

bool Workspace::contains(const Pose& p) const {
    constexpr double slack = 1e-9;
    for (int i = 0; i < 3; ++i) {
        if (std::abs(p[i]) > translation_mm + slack) return false;
        if (std::abs(p[i + 3]) > rotation_deg + slack) return false;
    }
    return true;
}

PlatformGeometry PlatformGeometry::default_geometry() {
    PlatformGeometry g;
    g.base_points = {Vec3{121.39, 48.35, 73.67},   Vec3{-18.82, 129.30, 73.67},
                     Vec3{-102.56, 80.95, 73.67},  Vec3{-102.56, -80.95, 73.67},
                     Vec3{-18.82, -129.30, 73.67}, Vec3{121.39, -48.35, 73.67}};
    g.helmet_points = {Vec3{96.99, 66.70, 42.06},    Vec3{9.27, 117.35, 42.06},
                       Vec3{-106.26, 50.64, 42.06},  Vec3{-106.26, -50.64, 42.06},
                       Vec3{9.27, -117.35, 42.06},   Vec3{96.99, -66.70, 42.06}};
    return g;
}

}  // namespace senc
