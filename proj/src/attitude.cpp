#include "ssim/attitude.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "ssim/error.hpp"
#include "ssim/integrate.hpp"

namespace ssim {

const char* attitude_mode_name(AttitudeMode m) {
    switch (m) {
        case AttitudeMode::SmallBodyPointing: return "small-body-pointing";
        case AttitudeMode::Recharge:          return "recharge";
        case AttitudeMode::Tcm:               return "tcm";
        case AttitudeMode::Downlink:          return "downlink";
    }
    return "?";
}

RotorSpec RotorSpec::axial(double j_kg_m2, const Eigen::Vector3d& spin_axis,
                           double max_torque, double max_rate) {
    RotorSpec s;
    s.axis = spin_axis.normalized();
    s.inertia = j_kg_m2 * s.axis * s.axis.transpose();
    s.max_torque_nm = max_torque;
    s.max_rate_rad_s = max_rate;
    return s;
}

void RotorSpec::validate(const char* what) const {
    if (std::abs(axis.norm() - 1.0) > kOrthonormTol)
        throw ConfigError(std::string(what) + ": spin axis must be unit length");
    if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ConfigError(std::string(what) + ": inertia must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(inertia);
    if (es.eigenvalues().minCoeff() < -1e-12)
        throw ConfigError(std::string(what) + ": inertia must be positive-semidefinite");
    if (!(axial_inertia() > 0.0))
        throw ConfigError(std::string(what) + ": zero axial inertia");
    if (max_torque_nm < 0.0 || max_rate_rad_s < 0.0)
        throw ConfigError(std::string(what) + ": negative actuation limit");
}

Eigen::Matrix3d InertiaModel::j_cm() const {
    Eigen::Matrix3d j = i_cm;
    for (const RotorSpec& w : wheels) j -= w.inertia;
    for (const RotorSpec& w : wings) j -= w.inertia;
    return j;
}

Eigen::Vector3d InertiaModel::rotor_momentum(const Eigen::VectorXd& wheel_rates,
                                             const Eigen::VectorXd& wing_rates) const {
    Eigen::Vector3d h = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < wheels.size(); ++i)
        h += wheels[i].inertia * wheels[i].axis * wheel_rates(static_cast<int>(i));
    for (std::size_t j = 0; j < wings.size(); ++j)
        h += wings[j].inertia * wings[j].axis * wing_rates(static_cast<int>(j));
    return h;
}

void InertiaModel::validate() const {
    auto check_pd = [](const Eigen::Matrix3d& m, const char* name) {
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9)
            throw ConfigError(std::string(name) + " must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
        if (!(es.eigenvalues().minCoeff() > 0.0))
            throw ConfigError(std::string(name) + " must be positive-definite");
    };
    check_pd(i_cm, "inertia I_cm");
    for (const RotorSpec& w : wheels) w.validate("reaction wheel");
    for (const RotorSpec& w : wings) w.validate("solar wing");
    check_pd(j_cm(), "derived inertia J_cm");
}

ActuatorCommand ActuatorCommand::none(const InertiaModel& model) {
    ActuatorCommand c;
    c.wheel_accel = Eigen::VectorXd::Zero(static_cast<int>(model.wheels.size()));
    c.wing_accel = Eigen::VectorXd::Zero(static_cast<int>(model.wings.size()));
    return c;
}

AttitudeState attitude_derivative(const AttitudeState& x,
                                  const ActuatorCommand& cmd,
                                  const Eigen::Vector3d& disturbance_torque,
                                  const InertiaModel& model) {
    const Eigen::Matrix3d j_cm = model.j_cm();
    const Eigen::Vector3d h = model.rotor_momentum(x.wheel_rates, x.wing_rates);
    const Eigen::Vector3d h_dot =
        model.rotor_momentum(cmd.wheel_accel, cmd.wing_accel);
    const Eigen::Vector3d u = cmd.thruster_torque - h_dot;

    AttitudeState xdot;
    Eigen::Vector4d qdot =
        0.5 * omega_matrix<double>(x.omega) * x.q.coeffs();
    xdot.q = Eigen::Quaterniond(qdot);  // coefficients of qdot, not a rotation
    xdot.omega = j_cm.ldlt().solve(
        disturbance_torque + u - x.omega.cross(j_cm * x.omega + h));
    xdot.wheel_rates = cmd.wheel_accel;
    xdot.wing_rates = cmd.wing_accel;
    return xdot;
}

AttitudeState attitude_derivative(const AttitudeState& x,
                                  const Eigen::Vector3d& total_torque,
                                  const Eigen::Vector3d& disturbance_torque,
                                  const InertiaModel& model) {
    ActuatorCommand cmd = ActuatorCommand::none(model);
    cmd.thruster_torque = total_torque;
    return attitude_derivative(x, cmd, disturbance_torque, model);
}

namespace {

std::shared_ptr<const StateLayout> attitude_layout(int n_wheels, int n_wings) {
    auto layout = std::make_shared<StateLayout>();
    layout->push_back({"q_x", "-"});
    layout->push_back({"q_y", "-"});
    layout->push_back({"q_z", "-"});
    layout->push_back({"q_s", "-"});
    layout->push_back({"omega_x", "rad/s"});
    layout->push_back({"omega_y", "rad/s"});
    layout->push_back({"omega_z", "rad/s"});
    for (int i = 0; i < n_wheels; ++i)
        layout->push_back({"omega_rw_" + std::to_string(i), "rad/s"});
    for (int j = 0; j < n_wings; ++j)
        layout->push_back({"omega_sw_" + std::to_string(j), "rad/s"});
    return layout;
}

}  // namespace

StateVector pack_attitude(const AttitudeState& x) {
    const int n = static_cast<int>(x.wheel_rates.size());
    const int m = static_cast<int>(x.wing_rates.size());
    Eigen::VectorXd v(7 + n + m);
    v.segment<4>(0) = x.q.coeffs();
    v.segment<3>(4) = x.omega;
    v.segment(7, n) = x.wheel_rates;
    v.segment(7 + n, m) = x.wing_rates;
    return StateVector(std::move(v), attitude_layout(n, m));
}

AttitudeState unpack_attitude(const StateVector& sv, int n_wheels, int n_wings) {
    if (sv.size() != 7 + n_wheels + n_wings)
        throw RuntimeError("unpack_attitude: state size mismatch");
    AttitudeState x;
    x.q = Eigen::Quaterniond(Eigen::Vector4d(sv.values.segment<4>(0)));
    x.omega = sv.values.segment<3>(4);
    x.wheel_rates = sv.values.segment(7, n_wheels);
    x.wing_rates = sv.values.segment(7 + n_wheels, n_wings);
    return x;
}

AttitudeState step_attitude(const AttitudeState& x, const ActuatorCommand& cmd,
                            const Eigen::Vector3d& disturbance_torque,
                            const InertiaModel& model, double dt,
                            double max_rotation_per_step_rad) {
    if (!(dt > 0.0)) throw RuntimeError("step_attitude: dt must be positive");
    double rotation = x.omega.norm() * dt;
    if (rotation > max_rotation_per_step_rad)
        throw RuntimeError(
            "step_attitude: rotation per step " + std::to_string(rotation) +
            " rad exceeds limit " + std::to_string(max_rotation_per_step_rad) +
            " rad; reduce the step size");

    const int n = static_cast<int>(x.wheel_rates.size());
    const int m = static_cast<int>(x.wing_rates.size());
    auto deriv = [&](double, const Eigen::VectorXd& flat) {
        AttitudeState xs;
        xs.q = Eigen::Quaterniond(Eigen::Vector4d(flat.segment<4>(0)));
        xs.omega = flat.segment<3>(4);
        xs.wheel_rates = flat.segment(7, n);
        xs.wing_rates = flat.segment(7 + n, m);
        AttitudeState xd = attitude_derivative(xs, cmd, disturbance_torque, model);
        Eigen::VectorXd out(flat.size());
        out.segment<4>(0) = xd.q.coeffs();
        out.segment<3>(4) = xd.omega;
        out.segment(7, n) = xd.wheel_rates;
        out.segment(7 + n, m) = xd.wing_rates;
        return out;
    };

    StateVector next = rk4_step(deriv, pack_attitude(x), 0.0, dt);
    AttitudeState xn = unpack_attitude(next, n, m);
    xn.q = renormalized(xn.q);
    return xn;
}

AttitudeState step_attitude(const AttitudeState& x,
                            const Eigen::Vector3d& total_torque,
                            const Eigen::Vector3d& disturbance_torque,
                            const InertiaModel& model, double dt,
                            double max_rotation_per_step_rad) {
    ActuatorCommand cmd = ActuatorCommand::none(model);
    cmd.thruster_torque = total_torque;
    return step_attitude(x, cmd, disturbance_torque, model, dt,
                         max_rotation_per_step_rad);
}

}  // namespace ssim
