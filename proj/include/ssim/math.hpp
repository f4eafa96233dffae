#ifndef SSIM_MATH_HPP
#define SSIM_MATH_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>

#include "ssim/error.hpp"

namespace ssim {

template <typename S> using Vec3 = Eigen::Matrix<S, 3, 1>;
template <typename S> using Vec4 = Eigen::Matrix<S, 4, 1>;
template <typename S> using Mat3 = Eigen::Matrix<S, 3, 3>;
template <typename S> using Mat4 = Eigen::Matrix<S, 4, 4>;
template <typename S> using Quat = Eigen::Quaternion<S>;

inline constexpr double kPi = 3.14159265358979323846;

/// Unit-norm tolerance enforced on quaternions and rotation matrices.
inline constexpr double kOrthonormTol = 1e-9;

template <typename S>
bool all_finite(const Eigen::Ref<const Eigen::Matrix<S, Eigen::Dynamic, 1>>& x) {
    return x.allFinite();
}

/**
 * Cross-product matrix: cross_matrix(x) * y == x.cross(y).
 */
template <typename S>
Mat3<S> cross_matrix(const Vec3<S>& x) {
    if (!x.allFinite()) throw RuntimeError("cross_matrix: non-finite input");
    Mat3<S> m;
    m <<  S(0), -x.z(),  x.y(),
         x.z(),   S(0), -x.x(),
        -x.y(),  x.x(),   S(0);
    return m;
}

/**
 * 4x4 quaternion-rate matrix for scalar-last coefficients [q_v, q_s]:
 *
 *   Omega(w) = [ -w^x   w ]
 *              [ -w^T   0 ]
 *
 * so that qdot = 1/2 * Omega(w) * q.coeffs(). Skew-symmetric.
 */
template <typename S>
Mat4<S> omega_matrix(const Vec3<S>& w) {
    if (!w.allFinite()) throw RuntimeError("omega_matrix: non-finite body rate");
    Mat4<S> m = Mat4<S>::Zero();
    m.template topLeftCorner<3, 3>() = -cross_matrix<S>(w);
    m.template topRightCorner<3, 1>() = w;
    m.template bottomLeftCorner<1, 3>() = -w.transpose();
    return m;
}

/**
 * 4x3 companion matrix of the kinematics, qdot = 1/2 * Xi(q) * w:
 *
 *   Xi(q) = [ q_s I + q_v^x ]
 *           [    -q_v^T     ]
 *
 * Requires unit q; satisfies Xi^T Xi = I.
 */
template <typename S>
Eigen::Matrix<S, 4, 3> xi_matrix(const Quat<S>& q) {
    if (std::abs(q.norm() - S(1)) > kOrthonormTol)
        throw RuntimeError("xi_matrix: quaternion is not unit-norm");
    Eigen::Matrix<S, 4, 3> m;
    m.template topLeftCorner<3, 3>() =
        q.w() * Mat3<S>::Identity() + cross_matrix<S>(Vec3<S>(q.vec()));
    m.template bottomLeftCorner<1, 3>() = -q.vec().transpose();
    return m;
}

/**
 * Flip the quaternion sign so the scalar part is non-negative.
 * At q_s == 0 the sign is fixed by making the largest-magnitude vector
 * component positive, so antipodal representations resolve consistently.
 */
template <typename S>
Quat<S> properized(const Quat<S>& q) {
    if (q.w() < S(0)) return Quat<S>(-q.w(), -q.x(), -q.y(), -q.z());
    if (q.w() == S(0)) {
        int imax = 0;
        q.vec().cwiseAbs().maxCoeff(&imax);
        if (q.vec()[imax] < S(0))
            return Quat<S>(-q.w(), -q.x(), -q.y(), -q.z());
    }
    return q;
}

/// Normalize and properize in one call (post-integration cleanup).
template <typename S>
Quat<S> renormalized(const Quat<S>& q) {
    S n = q.norm();
    if (!(n > S(0)) || !std::isfinite(n))
        throw RuntimeError("renormalized: degenerate quaternion");
    Quat<S> u(q.w() / n, q.x() / n, q.y() / n, q.z() / n);
    return properized(u);
}

/// Rotation angle of a unit quaternion, in [0, pi].
template <typename S>
S rotation_angle(const Quat<S>& q) {
    return S(2) * std::atan2(q.vec().norm(), std::abs(q.w()));
}

/// Geodesic angle between two attitudes.
template <typename S>
S attitude_error_angle(const Quat<S>& a, const Quat<S>& b) {
    return rotation_angle<S>(Quat<S>(a.conjugate() * b));
}

template <typename S>
Quat<S> quat_from_axis_angle(const Vec3<S>& axis, S angle) {
    return Quat<S>(Eigen::AngleAxis<S>(angle, axis.normalized()));
}

/// Quaternion from scalar-last coefficient vector [q_v, q_s].
template <typename S>
Quat<S> quat_from_coeffs(const Vec4<S>& c) {
    return Quat<S>(c(3), c(0), c(1), c(2));
}

/**
 * Validate a rotation matrix: orthogonal and det = +1 within tolerance.
 */
template <typename S>
bool is_rotation_matrix(const Mat3<S>& r, S tol = S(kOrthonormTol)) {
    return (r.transpose() * r - Mat3<S>::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(r.determinant() - S(1)) <= tol;
}

}  // namespace ssim

#endif  // SSIM_MATH_HPP
