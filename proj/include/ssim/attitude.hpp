#ifndef SSIM_ATTITUDE_HPP
#define SSIM_ATTITUDE_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <memory>
#include <vector>

#include "ssim/math.hpp"
#include "ssim/state_vector.hpp"

namespace ssim {

/// Attitude modes set by the system-level executive.
enum class AttitudeMode { SmallBodyPointing, Recharge, Tcm, Downlink };

const char* attitude_mode_name(AttitudeMode m);

/**
 * Attitude state: body-to-inertial quaternion, body rates, and the
 * axial spin rates of the reaction wheels and gimballed solar wings.
 * Wheel/wing rates are absolute rates about their axes, so the wheel
 * momentum sum is the exact stored momentum.
 */
struct AttitudeState {
    Eigen::Quaterniond q = Eigen::Quaterniond::Identity();  // q^i_sc
    Eigen::Vector3d omega = Eigen::Vector3d::Zero();        // rad/s, body
    Eigen::VectorXd wheel_rates;                            // rad/s, n
    Eigen::VectorXd wing_rates;                             // rad/s, m
};

/**
 * One reaction wheel (or gimballed wing): 3x3 inertia, unit spin axis,
 * and actuation limits. For a wheel modeled by its axial moment j the
 * inertia is the rank-one dyad j * a a^T.
 */
struct RotorSpec {
    Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();  // kg m^2
    Eigen::Vector3d axis = Eigen::Vector3d::UnitX();    // unit
    double max_torque_nm = 0.0;
    double max_rate_rad_s = 0.0;

    /// Effective inertia about the spin axis.
    double axial_inertia() const { return axis.dot(inertia * axis); }

    /// Build a wheel spec from its axial moment of inertia.
    static RotorSpec axial(double j_kg_m2, const Eigen::Vector3d& spin_axis,
                           double max_torque, double max_rate);

    void validate(const char* what) const;
};

/**
 * Mass properties: total spacecraft inertia I_cm and the derived
 * body-side inertia J_cm = I_cm - sum(I_rw) - sum(I_sw) used by the
 * dynamics. Both must be positive-definite (checked at config load).
 */
struct InertiaModel {
    Eigen::Matrix3d i_cm = Eigen::Matrix3d::Identity();
    std::vector<RotorSpec> wheels;
    std::vector<RotorSpec> wings;

    Eigen::Matrix3d j_cm() const;

    /// Momentum stored in wheels and wings: sum I a w.
    Eigen::Vector3d rotor_momentum(const Eigen::VectorXd& wheel_rates,
                                   const Eigen::VectorXd& wing_rates) const;

    void validate() const;
};

/// A guidance/executive attitude command.
struct AttitudeCommand {
    Eigen::Quaterniond target_q = Eigen::Quaterniond::Identity();
    Eigen::Vector3d target_rate = Eigen::Vector3d::Zero();  // body frame
    AttitudeMode mode = AttitudeMode::SmallBodyPointing;
};

/**
 * What the actuators are commanded to do over a step: thruster torque
 * on the body plus wheel/wing axial accelerations. The net torque the
 * body sees is thruster_torque minus the rotor momentum rate.
 */
struct ActuatorCommand {
    Eigen::Vector3d thruster_torque = Eigen::Vector3d::Zero();  // N m, body
    Eigen::VectorXd wheel_accel;                                // rad/s^2
    Eigen::VectorXd wing_accel;                                 // rad/s^2

    static ActuatorCommand none(const InertiaModel& model);
};

/**
 * Attitude equations of motion:
 *   qdot = 1/2 Omega(w) q
 *   wdot = J_cm^{-1} (T_d + u - w x (J_cm w + h_w))
 * with u the total actuator torque and h_w the rotor momentum. Under
 * zero torque the inertial momentum R(q)(J_cm w + h_w) is conserved
 * exactly.
 */
AttitudeState attitude_derivative(const AttitudeState& x,
                                  const ActuatorCommand& cmd,
                                  const Eigen::Vector3d& disturbance_torque,
                                  const InertiaModel& model);

/// Convenience overload: a bare torque with rotors coasting.
AttitudeState attitude_derivative(const AttitudeState& x,
                                  const Eigen::Vector3d& total_torque,
                                  const Eigen::Vector3d& disturbance_torque,
                                  const InertiaModel& model);

/**
 * One RK4 step of the attitude state with inputs held constant,
 * followed by quaternion normalization and properization. Errors if
 * |w| dt exceeds the per-step rotation limit.
 */
AttitudeState step_attitude(const AttitudeState& x, const ActuatorCommand& cmd,
                            const Eigen::Vector3d& disturbance_torque,
                            const InertiaModel& model, double dt,
                            double max_rotation_per_step_rad = 0.01);

/// Bare-torque overload with rotors coasting.
AttitudeState step_attitude(const AttitudeState& x,
                            const Eigen::Vector3d& total_torque,
                            const Eigen::Vector3d& disturbance_torque,
                            const InertiaModel& model, double dt,
                            double max_rotation_per_step_rad = 0.01);

/// Flatten/restore the attitude state for generic integrators.
StateVector pack_attitude(const AttitudeState& x);
AttitudeState unpack_attitude(const StateVector& sv, int n_wheels, int n_wings);

}  // namespace ssim

#endif  // SSIM_ATTITUDE_HPP
