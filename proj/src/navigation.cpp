#include "ssim/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ssim/error.hpp"
#include "ssim/frames.hpp"

namespace ssim {

void PropulsionCommand::validate(double max_thrust_n) const {
    if (!(stop_s > start_s))
        throw ConfigError("propulsion command: stop must be after start");
    if (max_thrust_n > 0.0 && thrust_n.norm() > max_thrust_n * (1.0 + 1e-12))
        throw ConfigError("propulsion command: thrust exceeds the configured maximum");
}

Eigen::Matrix<double, 6, 6> StateTransition::full() const {
    Eigen::Matrix<double, 6, 6> f = Eigen::Matrix<double, 6, 6>::Zero();
    f.topRightCorner<3, 3>() = Eigen::Matrix3d::Identity();
    f.bottomLeftCorner<3, 3>() = position_partial;
    return f;
}

Eigen::Matrix<double, 6, 1> nav_derivative(const NavState& x,
                                           const Eigen::Vector3d& thrust_n,
                                           double t,
                                           const Eigen::Quaterniond& attitude,
                                           const Environment& env,
                                           const VehicleForceModel& vehicle) {
    if (!(vehicle.mass_kg > 0.0))
        throw RuntimeError("nav_derivative: spacecraft mass must be positive");

    InertialVec center_pos = env.body_position(x.center_body, t);
    InertialVec r_abs = center_pos + InertialVec(x.position_m);

    Eigen::Vector3d force = thrust_n;  // F^d is zero in the cruise scenario
    for (const CelestialBody& b : env.bodies()) {
        if (!b.gravitating) continue;
        force += gravity_force(b, env.body_position(b.id, t), r_abs,
                               vehicle.mass_kg).v;
    }
    if (vehicle.include_srp && !vehicle.plates.empty()) {
        Pose pose{r_abs, BodyToInertial(attitude)};
        force += srp_force_torque(vehicle.plates, pose, env.sun_position(t),
                                  env.sun_constants()).first.v;
    }

    Eigen::Matrix<double, 6, 1> xdot;
    xdot.head<3>() = x.velocity_m_s;
    xdot.tail<3>() =
        force / vehicle.mass_kg - env.body_acceleration(x.center_body, t).v;
    return xdot;
}

double sphere_of_influence_m(const CelestialBody& body, const CelestialBody& sun,
                             double distance_to_sun_m) {
    return distance_to_sun_m * std::pow(body.mu_m3_s2 / sun.mu_m3_s2, 0.4);
}

NavState switch_center(const NavState& x, const std::string& to_body, double t,
                       const Environment& env) {
    InertialVec from_pos = env.body_position(x.center_body, t);
    InertialVec to_pos = env.body_position(to_body, t);
    InertialVec from_vel = env.body_velocity(x.center_body, t);
    InertialVec to_vel = env.body_velocity(to_body, t);
    NavState out;
    out.position_m = x.position_m + from_pos.v - to_pos.v;
    out.velocity_m_s = x.velocity_m_s + from_vel.v - to_vel.v;
    out.center_body = to_body;
    return out;
}

namespace {

// RK4 step of the 6-dof translational state with thrust held per-stage.
NavState rk4_nav(const NavState& x, double t, double dt,
                 const std::function<Eigen::Vector3d(double)>& thrust,
                 const Eigen::Quaterniond& attitude, const Environment& env,
                 const VehicleForceModel& vehicle) {
    auto f = [&](double ts, const Eigen::Matrix<double, 6, 1>& s) {
        NavState xs{s.head<3>(), s.tail<3>(), x.center_body};
        return nav_derivative(xs, thrust(ts), ts, attitude, env, vehicle);
    };
    Eigen::Matrix<double, 6, 1> s0;
    s0 << x.position_m, x.velocity_m_s;
    auto k1 = f(t, s0);
    auto k2 = f(t + 0.5 * dt, (s0 + 0.5 * dt * k1).eval());
    auto k3 = f(t + 0.5 * dt, (s0 + 0.5 * dt * k2).eval());
    auto k4 = f(t + dt, (s0 + dt * k3).eval());
    Eigen::Matrix<double, 6, 1> s1 =
        s0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!s1.allFinite())
        throw RuntimeError("propagate: non-finite navigation state");
    return NavState{s1.head<3>(), s1.tail<3>(), x.center_body};
}

// Pick the center of integration the state should use, with hysteresis.
std::string pick_center(const NavState& x, double t, const Environment& env,
                        const PropagateOptions& opt) {
    const CelestialBody& sun = env.sun();
    InertialVec r_abs = env.body_position(x.center_body, t) + InertialVec(x.position_m);
    for (const CelestialBody& b : env.bodies()) {
        if (!b.gravitating || b.id == env.sun_id()) continue;
        InertialVec b_pos = env.body_position(b.id, t);
        double d_body = (r_abs - b_pos).norm();
        double d_sun = (b_pos - InertialVec(sun.fixed_position_m)).norm();
        double r_soi = sphere_of_influence_m(b, sun, d_sun);
        if (x.center_body == b.id) {
            if (d_body > r_soi * opt.soi_hysteresis) return env.sun_id();
            return b.id;
        }
        if (d_body < r_soi / opt.soi_hysteresis) return b.id;
    }
    return x.center_body;
}

}  // namespace

std::vector<NavSample> propagate(
    const NavState& x0, const std::function<Eigen::Vector3d(double)>& thrust_profile,
    double t0, double dt, double horizon_s, const Eigen::Quaterniond& attitude,
    const Environment& env, const VehicleForceModel& vehicle,
    const PropagateOptions& options) {
    if (!(dt > 0.0)) throw RuntimeError("propagate: dt must be positive");

    VehicleForceModel veh = vehicle;
    veh.include_srp = vehicle.include_srp && options.include_srp;

    std::vector<NavSample> trace;
    trace.reserve(static_cast<std::size_t>(horizon_s / dt) + 2);
    trace.push_back({t0, x0});

    // Two-body energy reference for the instability check, reset on any
    // center switch, thrust arc, or SRP contribution.
    auto coast_energy = [&](const NavState& x, double t) {
        const CelestialBody& c = env.body(x.center_body);
        double r = x.position_m.norm();
        (void)t;
        return 0.5 * x.velocity_m_s.squaredNorm() - c.mu_m3_s2 / r;
    };
    bool pure_two_body = env.bodies().size() == 1 ||
                         std::count_if(env.bodies().begin(), env.bodies().end(),
                                       [](const CelestialBody& b) {
                                           return b.gravitating;
                                       }) == 1;
    double e_ref = 0.0;
    bool e_ref_valid = false;

    NavState x = x0;
    double t = t0;
    int n_steps = static_cast<int>(std::llround(horizon_s / dt));
    for (int k = 0; k < n_steps; ++k) {
        bool thrusting = thrust_profile(t).norm() > 0.0 ||
                         thrust_profile(t + dt).norm() > 0.0;
        x = rk4_nav(x, t, dt, thrust_profile, attitude, env, veh);
        t = t0 + (k + 1) * dt;

        if (options.switch_centers) {
            std::string c = pick_center(x, t, env, options);
            if (c != x.center_body) {
                x = switch_center(x, c, t, env);
                e_ref_valid = false;
            }
        }

        bool coasting = !thrusting && !(veh.include_srp && !veh.plates.empty());
        if (coasting && pure_two_body) {
            double e = coast_energy(x, t);
            if (!e_ref_valid) {
                e_ref = e;
                e_ref_valid = true;
            } else if (std::abs(e - e_ref) >
                       options.energy_drift_limit * std::abs(e_ref)) {
                throw RuntimeError(
                    "propagate: two-body energy drift exceeds " +
                    std::to_string(options.energy_drift_limit) +
                    " relative; reduce the step size");
            }
        } else {
            e_ref_valid = false;
        }
        trace.push_back({t, x});
    }
    return trace;
}

StateTransition state_transition_jacobian(const NavState& x, double t,
                                          const Environment& env) {
    InertialVec r_abs = env.body_position(x.center_body, t) + InertialVec(x.position_m);
    StateTransition st;
    for (const CelestialBody& b : env.bodies()) {
        if (!b.gravitating) continue;
        Eigen::Vector3d r = (r_abs - env.body_position(b.id, t)).v;
        double d = r.norm();
        if (!(d > 0.0))
            throw RuntimeError("state_transition_jacobian: zero separation from '" +
                               b.id + "'");
        double d3 = d * d * d, d5 = d3 * d * d;
        st.position_partial += 3.0 * b.mu_m3_s2 * r * r.transpose() / d5 -
                               b.mu_m3_s2 * Eigen::Matrix3d::Identity() / d3;
    }
    return st;
}

namespace {

// Deterministic standard normal: Box-Muller over explicit mt19937_64
// words, so draws are bit-identical across standard libraries.
class GaussianDraw {
public:
    explicit GaussianDraw(std::uint64_t seed) : rng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double u2 = uniform01();
        double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return mag * std::cos(2.0 * kPi * u2);
    }

private:
    double uniform01() {
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }

    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace

NavState inject_state_error(const NavState& x, double sigma_pos_m,
                            double sigma_vel_m_s, std::uint64_t seed) {
    if (sigma_pos_m < 0.0 || sigma_vel_m_s < 0.0)
        throw RuntimeError("inject_state_error: sigmas must be non-negative");
    GaussianDraw draw(seed);
    NavState out = x;
    for (int i = 0; i < 3; ++i) out.position_m(i) += sigma_pos_m * draw();
    for (int i = 0; i < 3; ++i) out.velocity_m_s(i) += sigma_vel_m_s * draw();
    return out;
}

}  // namespace ssim
