#ifndef SSIM_FRAMES_HPP
#define SSIM_FRAMES_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ssim {

/**
 * Reference frames used throughout the simulator.
 *
 * Inertial is J2000; Spacecraft is the body frame (origin at the center
 * of mass); Sun and SmallBody are body-centered inertial-orientation
 * frames; CenterOfMass tags lever arms measured from the spacecraft CM.
 */
enum class Frame { Inertial, Spacecraft, Sun, SmallBody, CenterOfMass };

constexpr const char* frame_name(Frame f) {
    switch (f) {
        case Frame::Inertial:     return "inertial";
        case Frame::Spacecraft:   return "spacecraft";
        case Frame::Sun:          return "sun";
        case Frame::SmallBody:    return "small-body";
        case Frame::CenterOfMass: return "center-of-mass";
    }
    return "?";
}

/**
 * A 3-vector tagged with the frame it is expressed in.
 *
 * Mixing frames is rejected at compile time: arithmetic is only defined
 * between vectors of the same Frame, and changing frames requires an
 * explicit FrameRotation. The tag is a zero-cost construction-time
 * contract; the wrapped Eigen vector is accessible for frame-agnostic
 * math once the frames have been lined up.
 */
template <Frame F, typename Scalar = double>
struct Framed {
    using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

    Vec3 v = Vec3::Zero();

    Framed() = default;
    explicit Framed(const Vec3& vec) : v(vec) {}
    Framed(Scalar x, Scalar y, Scalar z) : v(x, y, z) {}

    static constexpr Frame frame = F;

    Scalar norm() const { return v.norm(); }
    Framed normalized() const { return Framed(v.normalized()); }

    Framed operator+(const Framed& o) const { return Framed(v + o.v); }
    Framed operator-(const Framed& o) const { return Framed(v - o.v); }
    Framed operator-() const { return Framed(-v); }
    Framed operator*(Scalar s) const { return Framed(v * s); }
    Framed operator/(Scalar s) const { return Framed(v / s); }
    Framed& operator+=(const Framed& o) { v += o.v; return *this; }
    Framed& operator-=(const Framed& o) { v -= o.v; return *this; }

    Scalar dot(const Framed& o) const { return v.dot(o.v); }
    Framed cross(const Framed& o) const { return Framed(v.cross(o.v)); }
};

template <Frame F, typename S>
Framed<F, S> operator*(S s, const Framed<F, S>& a) { return a * s; }

/**
 * Rotation taking vectors expressed in frame From to frame To.
 *
 * Wraps a unit quaternion; inverse() flips the direction. Only vectors
 * tagged From can be rotated, and the result is tagged To.
 */
template <Frame From, Frame To, typename Scalar = double>
struct FrameRotation {
    Eigen::Quaternion<Scalar> q = Eigen::Quaternion<Scalar>::Identity();

    FrameRotation() = default;
    explicit FrameRotation(const Eigen::Quaternion<Scalar>& quat) : q(quat) {}

    Framed<To, Scalar> operator*(const Framed<From, Scalar>& x) const {
        return Framed<To, Scalar>(q * x.v);
    }

    FrameRotation<To, From, Scalar> inverse() const {
        return FrameRotation<To, From, Scalar>(q.conjugate());
    }

    Eigen::Matrix<Scalar, 3, 3> matrix() const { return q.toRotationMatrix(); }
};

using InertialVec = Framed<Frame::Inertial>;
using BodyVec = Framed<Frame::Spacecraft>;

/// Attitude of the spacecraft: rotation from the body frame to inertial.
using BodyToInertial = FrameRotation<Frame::Spacecraft, Frame::Inertial>;

/**
 * Position and attitude of the spacecraft frame in the inertial frame.
 */
struct Pose {
    InertialVec position;          // spacecraft CM, m
    BodyToInertial attitude;       // R^i_sc

    /// Express a body-frame vector in the inertial frame (rotation only).
    InertialVec to_inertial(const BodyVec& b) const { return attitude * b; }

    /// Express an inertial direction in the body frame (rotation only).
    BodyVec to_body(const InertialVec& i) const { return attitude.inverse() * i; }
};

}  // namespace ssim

#endif  // SSIM_FRAMES_HPP
