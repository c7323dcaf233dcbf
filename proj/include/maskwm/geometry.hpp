#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "maskwm/errors.hpp"

namespace maskwm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Rigid transform in SE(3). Rotation is a proper orthonormal 3x3 matrix,
// translation is in meters.
struct Pose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static Pose identity() { return Pose{}; }

    static Pose from_translation(const Vec3& t) { return Pose{Mat3::Identity(), t}; }

    static Pose from_rotation(const Mat3& r) { return Pose{r, Vec3::Zero()}; }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    // this ∘ other: apply `other` first, then this.
    Pose compose(const Pose& other) const {
        return Pose{rotation * other.rotation, rotation * other.translation + translation};
    }

    Pose inverse() const {
        Mat3 rt = rotation.transpose();
        return Pose{rt, -(rt * translation)};
    }

    // Row-major 4x4 homogeneous matrix, 16 doubles (manifest serialization).
    std::array<double, 16> to_matrix16() const {
        std::array<double, 16> m{};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) m[static_cast<std::size_t>(4 * r + c)] = rotation(r, c);
            m[static_cast<std::size_t>(4 * r + 3)] = translation(static_cast<Eigen::Index>(r));
        }
        m[15] = 1.0;
        return m;
    }

    static Pose from_matrix16(const std::array<double, 16>& m) {
        Pose p;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) p.rotation(r, c) = m[static_cast<std::size_t>(4 * r + c)];
            p.translation(static_cast<Eigen::Index>(r)) = m[static_cast<std::size_t>(4 * r + 3)];
        }
        return p;
    }

    bool is_rigid(double tol = 1e-9) const {
        const Mat3 rrt = rotation * rotation.transpose();
        return (rrt - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
               std::abs(rotation.determinant() - 1.0) <= tol;
    }
};

inline Pose operator*(const Pose& a, const Pose& b) { return a.compose(b); }

// Rotation about an arbitrary unit axis (Rodrigues).
inline Mat3 axis_angle_rotation(const Vec3& axis, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double x = axis.x(), y = axis.y(), z = axis.z();
    Mat3 r;
    r << c + x * x * (1 - c),     x * y * (1 - c) - z * s, x * z * (1 - c) + y * s,
         y * x * (1 - c) + z * s, c + y * y * (1 - c),     y * z * (1 - c) - x * s,
         z * x * (1 - c) - y * s, z * y * (1 - c) + x * s, c + z * z * (1 - c);
    return r;
}

// Extrinsic X-Y-Z convention: R = Rz(yaw) * Ry(pitch) * Rx(roll).
inline Mat3 rpy_to_rotation(double roll, double pitch, double yaw) {
    const double cr = std::cos(roll), sr = std::sin(roll);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    Mat3 r;
    r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
         sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
         -sp,     cp * sr,                cp * cr;
    return r;
}

inline Mat3 rpy_to_rotation(const Vec3& rpy) { return rpy_to_rotation(rpy.x(), rpy.y(), rpy.z()); }

// Inverse of rpy_to_rotation. At the pitch = ±π/2 gimbal lock the roll/yaw
// split is not unique; we return the roll = 0 representative.
inline Vec3 rotation_to_rpy(const Mat3& r) {
    const double sp = -r(2, 0);
    if (std::abs(sp) >= 1.0 - 1e-12) {
        const double pitch = sp > 0 ? M_PI / 2.0 : -M_PI / 2.0;
        const double yaw = std::atan2(-r(0, 1), r(1, 1));
        return Vec3(0.0, pitch, yaw);
    }
    const double pitch = std::asin(sp);
    const double roll = std::atan2(r(2, 1), r(2, 2));
    const double yaw = std::atan2(r(1, 0), r(0, 0));
    return Vec3(roll, pitch, yaw);
}

// Rotation vector (axis * angle) of R, i.e. the SO(3) log map.
inline Vec3 rotation_log(const Mat3& r) {
    const double tr = r.trace();
    double cos_angle = (tr - 1.0) / 2.0;
    cos_angle = std::min(1.0, std::max(-1.0, cos_angle));
    const double angle = std::acos(cos_angle);
    if (angle < 1e-12) return Vec3::Zero();
    if (angle > M_PI - 1e-6) {
        // Near π the off-diagonal formula degenerates; recover the axis from
        // the symmetric part.
        Vec3 axis;
        axis.x() = std::sqrt(std::max(0.0, (r(0, 0) + 1.0) / 2.0));
        axis.y() = std::sqrt(std::max(0.0, (r(1, 1) + 1.0) / 2.0));
        axis.z() = std::sqrt(std::max(0.0, (r(2, 2) + 1.0) / 2.0));
        if (axis.norm() < 1e-12) return Vec3(M_PI, 0, 0);
        // Fix signs using the larger off-diagonal sums.
        if (axis.x() >= axis.y() && axis.x() >= axis.z()) {
            if (r(0, 1) + r(1, 0) < 0) axis.y() = -axis.y();
            if (r(0, 2) + r(2, 0) < 0) axis.z() = -axis.z();
        } else if (axis.y() >= axis.z()) {
            if (r(0, 1) + r(1, 0) < 0) axis.x() = -axis.x();
            if (r(1, 2) + r(2, 1) < 0) axis.z() = -axis.z();
        } else {
            if (r(0, 2) + r(2, 0) < 0) axis.x() = -axis.x();
            if (r(1, 2) + r(2, 1) < 0) axis.y() = -axis.y();
        }
        axis.normalize();
        return axis * angle;
    }
    Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    return w * (angle / (2.0 * std::sin(angle)));
}

// Geodesic distance on SO(3) in radians.
inline double rotation_distance(const Mat3& a, const Mat3& b) {
    return rotation_log(a * b.transpose()).norm();
}

}  // namespace maskwm
