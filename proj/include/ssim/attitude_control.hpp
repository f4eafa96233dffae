#ifndef SSIM_ATTITUDE_CONTROL_HPP
#define SSIM_ATTITUDE_CONTROL_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

#include "ssim/attitude.hpp"

namespace ssim {

/**
 * Eigen-axis slew plan: rotation about the fixed axis of the error
 * quaternion with a trapezoidal rate profile.
 */
struct SlewProfile {
    Eigen::Vector3d axis_body = Eigen::Vector3d::UnitZ();
    double angle_rad = 0.0;
    std::vector<AttitudeCommand> commands;  // sampled every dt

    double total_commanded_rotation() const { return angle_rad; }
};

/**
 * Plan a minimum-path reorientation from q_current to q_target:
 * properized error quaternion, fixed eigen axis, trapezoidal rate
 * capped at the slew limit. The final command equals q_target.
 */
SlewProfile eigen_axis_guidance(const Eigen::Quaterniond& q_current,
                                const Eigen::Quaterniond& q_target,
                                double slew_rate_limit_rad_s, double dt,
                                double slew_accel_rad_s2 = 1e-3,
                                AttitudeMode mode = AttitudeMode::SmallBodyPointing);

/// Per-axis PD gains for the tracking controller.
struct ControllerGains {
    Eigen::Vector3d kp = Eigen::Vector3d::Zero();
    Eigen::Vector3d kd = Eigen::Vector3d::Zero();

    /// Critically damped gains from the body inertia diagonal and a
    /// closed-loop bandwidth.
    static ControllerGains critically_damped(const InertiaModel& model,
                                             double bandwidth_rad_s);

    void validate() const;
};

/**
 * Quaternion-error feedback with rate damping and gyroscopic
 * feed-forward:
 *   u = Kp qe_v - Kd (w - w_cmd) + w x (J_cm w + h_w),
 * with qe the properized body-frame error toward the target. At perfect
 * tracking the output is exactly the feed-forward term.
 */
Eigen::Vector3d tracking_controller(const AttitudeState& x,
                                    const AttitudeCommand& cmd,
                                    const ControllerGains& gains,
                                    const InertiaModel& model);

/// Per-axis thruster torque authority (12 microthrusters aggregated).
struct ThrusterSpec {
    double max_torque_per_axis_nm = 0.0;

    void validate() const;
};

/// Wheel accelerations plus thruster torque realizing a desired torque.
struct Allocation {
    Eigen::VectorXd wheel_accel;                                // rad/s^2
    Eigen::Vector3d thruster_torque = Eigen::Vector3d::Zero();  // N m
    bool wheels_saturated = false;

    /// Torque delivered to the body by this allocation.
    Eigen::Vector3d realized_torque(const InertiaModel& model) const;
};

/**
 * Split a desired body torque between the reaction wheels
 * (least-squares over the wheel axes) and the microthrusters (residual).
 * Wheels at their rate limit are not driven further toward it. Throws
 * SaturationError, carrying the achievable fraction, if the combined
 * authority cannot meet the command.
 */
Allocation allocate_actuators(const Eigen::Vector3d& u_desired,
                              const InertiaModel& model,
                              const ThrusterSpec& thrusters,
                              const AttitudeState& x);

/// One slice of a desaturation plan.
struct DesatStep {
    double duration_s = 0.0;
    Eigen::VectorXd wheel_accel;
    Eigen::Vector3d thruster_torque = Eigen::Vector3d::Zero();
};

struct DesatPlan {
    std::vector<DesatStep> steps;
    bool authority_limited = false;  // slower than nominal

    bool empty() const { return steps.empty(); }
};

/**
 * Plan reaction-wheel momentum dumping: wheels decelerate toward zero
 * while thrusters cancel the reaction torque. Wheels already below
 * threshold/2 are left alone; an all-below-threshold state yields an
 * empty plan. Deceleration is slowed (and flagged) when the thrusters
 * cannot cancel the nominal reaction.
 */
DesatPlan desaturate(const AttitudeState& x, const InertiaModel& model,
                     const ThrusterSpec& thrusters, double threshold_rad_s,
                     double dt);

}  // namespace ssim

#endif  // SSIM_ATTITUDE_CONTROL_HPP
