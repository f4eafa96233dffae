#include "ssim/attitude_control.hpp"

#include <algorithm>
#include <cmath>

#include "ssim/error.hpp"

namespace ssim {

SlewProfile eigen_axis_guidance(const Eigen::Quaterniond& q_current,
                                const Eigen::Quaterniond& q_target,
                                double slew_rate_limit_rad_s, double dt,
                                double slew_accel_rad_s2, AttitudeMode mode) {
    if (std::abs(q_current.norm() - 1.0) > kOrthonormTol ||
        std::abs(q_target.norm() - 1.0) > kOrthonormTol)
        throw RuntimeError("eigen_axis_guidance: quaternions must be unit-norm");
    if (!(slew_rate_limit_rad_s > 0.0) || !(slew_accel_rad_s2 > 0.0) || !(dt > 0.0))
        throw RuntimeError("eigen_axis_guidance: limits and dt must be positive");

    // Error quaternion taking current to target; the eigen axis of a
    // geodesic rotation is the same in the initial and final body frames.
    Eigen::Quaterniond q_err = properized(
        Eigen::Quaterniond(q_target * q_current.conjugate()));
    double angle = rotation_angle(q_err);

    SlewProfile plan;
    plan.angle_rad = angle;
    if (angle < 1e-12) {
        plan.commands.push_back({q_target, Eigen::Vector3d::Zero(), mode});
        return plan;
    }
    Eigen::Vector3d axis_i = q_err.vec().normalized();
    plan.axis_body = q_current.conjugate() * axis_i;

    // Trapezoidal rate profile (triangular when the slew is short).
    double v = slew_rate_limit_rad_s, a = slew_accel_rad_s2;
    double t_ramp = v / a;
    double ramp_angle = 0.5 * a * t_ramp * t_ramp;
    double t_coast;
    if (2.0 * ramp_angle >= angle) {
        t_ramp = std::sqrt(angle / a);
        v = a * t_ramp;
        t_coast = 0.0;
    } else {
        t_coast = (angle - 2.0 * ramp_angle) / v;
    }
    double t_total = 2.0 * t_ramp + t_coast;

    auto theta_at = [&](double t) {
        if (t <= t_ramp) return 0.5 * a * t * t;
        if (t <= t_ramp + t_coast) return 0.5 * a * t_ramp * t_ramp + v * (t - t_ramp);
        double td = t_total - t;
        return angle - 0.5 * a * td * td;
    };
    auto rate_at = [&](double t) {
        if (t <= t_ramp) return a * t;
        if (t <= t_ramp + t_coast) return v;
        return a * (t_total - t);
    };

    int n_steps = static_cast<int>(std::ceil(t_total / dt));
    plan.commands.reserve(static_cast<std::size_t>(n_steps) + 1);
    for (int k = 1; k <= n_steps; ++k) {
        double t = std::min(t_total, k * dt);
        Eigen::Quaterniond qc =
            quat_from_axis_angle(axis_i, theta_at(t)) * q_current;
        plan.commands.push_back(
            {qc.normalized(), plan.axis_body * rate_at(t), mode});
    }
    plan.commands.back() = {q_target, Eigen::Vector3d::Zero(), mode};
    return plan;
}

ControllerGains ControllerGains::critically_damped(const InertiaModel& model,
                                                   double bandwidth_rad_s) {
    Eigen::Vector3d j = model.j_cm().diagonal();
    ControllerGains g;
    g.kp = 2.0 * bandwidth_rad_s * bandwidth_rad_s * j;
    g.kd = 2.0 * bandwidth_rad_s * j;
    return g;
}

void ControllerGains::validate() const {
    if ((kp.array() <= 0.0).any() || (kd.array() <= 0.0).any())
        throw ConfigError("controller gains must be positive");
}

Eigen::Vector3d tracking_controller(const AttitudeState& x,
                                    const AttitudeCommand& cmd,
                                    const ControllerGains& gains,
                                    const InertiaModel& model) {
    Eigen::Quaterniond qe =
        properized(Eigen::Quaterniond(x.q.conjugate() * cmd.target_q));
    Eigen::Vector3d h = model.rotor_momentum(x.wheel_rates, x.wing_rates);
    Eigen::Vector3d feed_forward = x.omega.cross(model.j_cm() * x.omega + h);
    return gains.kp.cwiseProduct(qe.vec()) -
           gains.kd.cwiseProduct(x.omega - cmd.target_rate) + feed_forward;
}

void ThrusterSpec::validate() const {
    if (max_torque_per_axis_nm < 0.0)
        throw ConfigError("thrusters: negative torque authority");
}

Eigen::Vector3d Allocation::realized_torque(const InertiaModel& model) const {
    Eigen::Vector3d wheel_torque = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < model.wheels.size(); ++i)
        wheel_torque -= model.wheels[i].inertia * model.wheels[i].axis *
                        wheel_accel(static_cast<int>(i));
    return wheel_torque + thruster_torque;
}

Allocation allocate_actuators(const Eigen::Vector3d& u_desired,
                              const InertiaModel& model,
                              const ThrusterSpec& thrusters,
                              const AttitudeState& x) {
    const int n = static_cast<int>(model.wheels.size());
    Allocation out;
    out.wheel_accel = Eigen::VectorXd::Zero(n);
    if (u_desired.norm() == 0.0) return out;

    // Wheel torque map: body torque = -A diag(j) wdot.
    Eigen::MatrixXd w_map(3, n);
    for (int i = 0; i < n; ++i) {
        const RotorSpec& w = model.wheels[static_cast<std::size_t>(i)];
        bool at_limit = w.max_rate_rad_s > 0.0 &&
                        std::abs(x.wheel_rates(i)) >= w.max_rate_rad_s;
        // Frozen column if the wheel is pinned at its rate limit; the
        // least-squares solve then routes torque to the other wheels.
        w_map.col(i) = at_limit ? Eigen::Vector3d::Zero().eval()
                                : Eigen::Vector3d(w.inertia * w.axis);
    }

    if (n >= 1) {
        Eigen::VectorXd wdot =
            w_map.completeOrthogonalDecomposition().solve((-u_desired).eval());
        // Respect per-wheel torque limits by uniform scaling.
        double scale = 1.0;
        for (int i = 0; i < n; ++i) {
            const RotorSpec& w = model.wheels[static_cast<std::size_t>(i)];
            double torque = std::abs(w.axial_inertia() * wdot(i));
            if (w.max_torque_nm > 0.0 && torque > w.max_torque_nm)
                scale = std::min(scale, w.max_torque_nm / torque);
        }
        if (scale < 1.0) out.wheels_saturated = true;
        // Wheels pushed further past their rate limit are frozen too.
        for (int i = 0; i < n; ++i) {
            const RotorSpec& w = model.wheels[static_cast<std::size_t>(i)];
            if (w.max_rate_rad_s > 0.0 &&
                std::abs(x.wheel_rates(i)) >= w.max_rate_rad_s &&
                wdot(i) * x.wheel_rates(i) > 0.0)
                wdot(i) = 0.0;
        }
        out.wheel_accel = scale * wdot;
    }

    Eigen::Vector3d wheel_torque = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i)
        wheel_torque -= model.wheels[static_cast<std::size_t>(i)].inertia *
                        model.wheels[static_cast<std::size_t>(i)].axis *
                        out.wheel_accel(i);

    Eigen::Vector3d residual = u_desired - wheel_torque;
    double cap = thrusters.max_torque_per_axis_nm;
    Eigen::Vector3d clamped = residual.cwiseMax(-cap).cwiseMin(cap);
    out.thruster_torque = clamped;

    if ((residual - clamped).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, cap)) {
        double achievable =
            (wheel_torque + clamped).norm() / u_desired.norm();
        throw SaturationError(
            "allocate_actuators: command exceeds combined actuator authority "
            "(achievable fraction " + std::to_string(achievable) + ")",
            achievable);
    }
    return out;
}

DesatPlan desaturate(const AttitudeState& x, const InertiaModel& model,
                     const ThrusterSpec& thrusters, double threshold_rad_s,
                     double dt) {
    if (!(threshold_rad_s > 0.0) || !(dt > 0.0))
        throw RuntimeError("desaturate: threshold and dt must be positive");
    const int n = static_cast<int>(model.wheels.size());
    DesatPlan plan;
    bool any_over = false;
    for (int i = 0; i < n; ++i)
        any_over |= std::abs(x.wheel_rates(i)) > threshold_rad_s;
    if (!any_over) return plan;

    // The plan unwinds the wheels all the way to zero bias; the
    // executive's half-threshold hysteresis governs event re-firing.
    Eigen::VectorXd rates = x.wheel_rates;
    for (int guard = 0; guard < 100000; ++guard) {
        if (rates.cwiseAbs().maxCoeff() <= 0.0) break;

        DesatStep step;
        step.duration_s = dt;
        step.wheel_accel = Eigen::VectorXd::Zero(n);
        // Nominal per-wheel deceleration at the wheel torque limit.
        for (int i = 0; i < n; ++i) {
            const RotorSpec& w = model.wheels[static_cast<std::size_t>(i)];
            if (rates(i) == 0.0) continue;
            double max_acc = w.max_torque_nm > 0.0
                                 ? w.max_torque_nm / w.axial_inertia()
                                 : std::abs(rates(i)) / dt;
            step.wheel_accel(i) =
                -std::copysign(std::min(max_acc, std::abs(rates(i)) / dt), rates(i));
        }
        // Thrusters must cancel the wheel reaction; scale down if the
        // authority is insufficient (slower desat, flagged).
        Eigen::Vector3d reaction = Eigen::Vector3d::Zero();
        for (int i = 0; i < n; ++i)
            reaction -= model.wheels[static_cast<std::size_t>(i)].inertia *
                        model.wheels[static_cast<std::size_t>(i)].axis *
                        step.wheel_accel(i);
        double cap = thrusters.max_torque_per_axis_nm;
        double peak = reaction.cwiseAbs().maxCoeff();
        if (cap > 0.0 && peak > cap) {
            double s = cap / peak;
            step.wheel_accel *= s;
            reaction *= s;
            plan.authority_limited = true;
        }
        step.thruster_torque = -reaction;  // cancels the reaction exactly
        for (int i = 0; i < n; ++i) {
            double next = rates(i) + step.wheel_accel(i) * dt;
            // Snap to zero once the remaining bias is pure roundoff.
            rates(i) = (next * rates(i) <= 0.0 ||
                        std::abs(next) < 1e-12 * std::abs(x.wheel_rates(i)))
                           ? 0.0
                           : next;
        }
        plan.steps.push_back(std::move(step));
    }
    return plan;
}

}  // namespace ssim
