#ifndef SSIM_NAVIGATION_HPP
#define SSIM_NAVIGATION_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ssim/environment.hpp"

namespace ssim {

/**
 * Translational state: position and velocity relative to the current
 * center of integration, inertial orientation.
 */
struct NavState {
    Eigen::Vector3d position_m = Eigen::Vector3d::Zero();
    Eigen::Vector3d velocity_m_s = Eigen::Vector3d::Zero();
    std::string center_body;
};

/// A finite burn: constant inertial thrust over [start, stop).
struct PropulsionCommand {
    Eigen::Vector3d thrust_n = Eigen::Vector3d::Zero();
    double start_s = 0.0;
    double stop_s = 0.0;
    bool dv_clamped = false;  // demand exceeded the delta-v cap

    double duration() const { return stop_s - start_s; }
    bool active(double t) const { return t >= start_s && t < stop_s; }

    void validate(double max_thrust_n) const;
};

/// Spacecraft properties the translational dynamics needs.
struct VehicleForceModel {
    double mass_kg = 178.0;
    std::vector<Plate> plates;  // N-plate SRP geometry
    bool include_srp = true;
};

/// State-transition blocks of the gravity-only dynamics.
struct StateTransition {
    Eigen::Matrix3d position_partial = Eigen::Matrix3d::Zero();  // d(rddot)/dr

    /// Full 6x6 first-order system matrix [[0, I], [pp, 0]].
    Eigen::Matrix<double, 6, 6> full() const;
};

/**
 * Translational acceleration: gravity from every gravitating body,
 * N-plate SRP, thrust, all divided by mass, minus the center body's
 * own Keplerian acceleration (zero for a Sun-fixed center).
 * Returns d/dt [position, velocity].
 */
Eigen::Matrix<double, 6, 1> nav_derivative(const NavState& x,
                                           const Eigen::Vector3d& thrust_n,
                                           double t,
                                           const Eigen::Quaterniond& attitude,
                                           const Environment& env,
                                           const VehicleForceModel& vehicle);

/// Sphere-of-influence radius of a body about the Sun.
double sphere_of_influence_m(const CelestialBody& body, const CelestialBody& sun,
                             double distance_to_sun_m);

struct PropagateOptions {
    bool switch_centers = true;
    bool include_srp = true;
    /// Hysteresis factor on the SOI radius to avoid switch chatter.
    double soi_hysteresis = 1.05;
    /// Relative two-body energy drift treated as step instability.
    double energy_drift_limit = 1e-3;
};

struct NavSample {
    double t;
    NavState state;
};

/**
 * Fixed-step RK4 propagation over a horizon. After each step the
 * sphere-of-influence check may switch the center of integration.
 * Coasting arcs are monitored for two-body energy drift; instability
 * raises an error recommending a smaller step.
 */
std::vector<NavSample> propagate(
    const NavState& x0, const std::function<Eigen::Vector3d(double)>& thrust_profile,
    double t0, double dt, double horizon_s, const Eigen::Quaterniond& attitude,
    const Environment& env, const VehicleForceModel& vehicle,
    const PropagateOptions& options = {});

/**
 * Re-express the state relative to a new center body. Inertial position
 * and velocity are preserved exactly.
 */
NavState switch_center(const NavState& x, const std::string& to_body,
                       double t, const Environment& env);

/**
 * Gravity-only state-transition Jacobian at the current state:
 *   sum_k 3 mu_k r r^T / |r|^5 - mu_k I / |r|^3,
 * summed over gravitating bodies, r the body-to-spacecraft vector.
 * Trace-free for any point-mass field.
 */
StateTransition state_transition_jacobian(const NavState& x, double t,
                                          const Environment& env);

/**
 * Deterministic seeded Gaussian perturbation of a state copy, standing
 * in for radiometric/optical measurement error bounds. Ground truth is
 * untouched; identical seeds give identical draws.
 */
NavState inject_state_error(const NavState& x, double sigma_pos_m,
                            double sigma_vel_m_s, std::uint64_t seed);

}  // namespace ssim

#endif  // SSIM_NAVIGATION_HPP
