#ifndef SSIM_ENVIRONMENT_HPP
#define SSIM_ENVIRONMENT_HPP

#include <Eigen/Core>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssim/frames.hpp"
#include "ssim/math.hpp"

namespace ssim {

inline constexpr double kAstronomicalUnit = 1.495978707e11;  // m

/**
 * Solar photometric constants.
 *
 * H0 is the power density at the Sun's surface; the default calibrates
 * the inverse-square law to 1361 W/m^2 at 1 AU.
 */
struct SolarConstants {
    double surface_power_density_w_m2 =
        1361.0 * (kAstronomicalUnit / 6.957e8) * (kAstronomicalUnit / 6.957e8);
    double solar_radius_m = 6.957e8;
    double speed_of_light_m_s = 299792458.0;

    void validate() const;
};

/// Osculating Keplerian elements about the Sun.
struct KeplerElements {
    double sma_m = 0.0;            // semi-major axis
    double ecc = 0.0;
    double inc_rad = 0.0;
    double raan_rad = 0.0;
    double argp_rad = 0.0;
    double mean_anomaly_rad = 0.0; // at scenario epoch t = 0
};

/**
 * A celestial body: point-mass gravity source and/or comm geometry node.
 * Moves on a configured Keplerian two-body orbit about the Sun, or is
 * fixed at a constant inertial position.
 */
struct CelestialBody {
    std::string id;
    double mu_m3_s2 = 0.0;   // gravitational parameter
    double radius_m = 0.0;
    bool gravitating = true;
    std::optional<KeplerElements> orbit;  // absent -> fixed ephemeris
    Eigen::Vector3d fixed_position_m = Eigen::Vector3d::Zero();

    void validate() const;
};

/// Solve Kepler's equation M = E - e sin E for the eccentric anomaly.
double solve_kepler(double mean_anomaly, double ecc, double tol = 1e-13);

/**
 * One flat plate of the spacecraft exterior, for the N-plate SRP model.
 */
struct Plate {
    double area_m2 = 0.0;
    double reflection = 0.0;               // in [0, 1]
    BodyVec normal{1.0, 0.0, 0.0};         // unit, outward
    BodyVec center_of_pressure{0.0, 0.0, 0.0};  // from CM, m

    void validate() const;
};

/**
 * Uniform-density cuboid discretization of the spacecraft into K^3
 * partitions for the gravity-gradient torque sum.
 */
struct MassGrid {
    int partitions_per_axis = 1;        // K
    Eigen::Vector3d half_extents_m = Eigen::Vector3d::Zero();
    double total_mass_kg = 0.0;

    double partition_mass() const {
        double k = static_cast<double>(partitions_per_axis);
        return total_mass_kg / (k * k * k);
    }

    /// Centers of all K^3 partitions in the spacecraft frame.
    std::vector<BodyVec> partition_centers() const;

    void validate() const;
};

/**
 * Sunlight power density at distance d from the Sun: H0 (r0/d)^2.
 * Errors for d <= r0 (inside the Sun).
 */
double irradiance(double sun_distance_m, const SolarConstants& sun);

/// Solar radiation pressure at distance d: H(d) / c.
double srp_pressure(double sun_distance_m, const SolarConstants& sun);

/**
 * Point-mass gravity on the spacecraft CM:
 *   F = -mu m_sc r / |r|^3,  r = body -> spacecraft.
 * Returned in the inertial frame; points toward the body.
 */
InertialVec gravity_force(const CelestialBody& body,
                          const InertialVec& body_position,
                          const InertialVec& sc_position, double sc_mass_kg);

/**
 * Gravity-gradient torque about the CM via the K^3 cuboid sum:
 *   T = sum_k r_k x (R^sc_i F_k),
 * with F_k the point-mass force on each partition. Spacecraft frame.
 */
BodyVec gravity_torque(const CelestialBody& body,
                       const InertialVec& body_position, const MassGrid& grid,
                       const Pose& pose);

/**
 * N-plate SRP force (inertial) and torque about the CM (body frame).
 *
 * Per plate: |F_n| = rho(d_sc) a_n (1 + r_n) cos(theta_n), pushing along
 * the unit Sun-to-plate direction; plates lit from behind (cos < 0)
 * contribute nothing. Torques use center-of-pressure lever arms.
 */
std::pair<InertialVec, BodyVec> srp_force_torque(
    const std::vector<Plate>& plates, const Pose& pose,
    const InertialVec& sun_position, const SolarConstants& sun);

/**
 * Scenario-level collection of bodies with ephemeris evaluation.
 * Exactly one body is designated the Sun; its position is fixed.
 */
class Environment {
public:
    Environment() = default;
    Environment(SolarConstants sun_constants, std::vector<CelestialBody> bodies,
                std::string sun_id);

    const SolarConstants& sun_constants() const { return sun_; }
    const std::vector<CelestialBody>& bodies() const { return bodies_; }
    const CelestialBody& body(const std::string& id) const;
    bool has_body(const std::string& id) const;
    const CelestialBody& sun() const { return body(sun_id_); }
    const std::string& sun_id() const { return sun_id_; }

    InertialVec body_position(const std::string& id, double t) const;
    InertialVec body_velocity(const std::string& id, double t) const;

    /// Analytic Keplerian acceleration (zero for fixed bodies).
    InertialVec body_acceleration(const std::string& id, double t) const;

    InertialVec sun_position(double t) const { return body_position(sun_id_, t); }

    void validate() const;

private:
    SolarConstants sun_;
    std::vector<CelestialBody> bodies_;
    std::string sun_id_;
};

}  // namespace ssim

#endif  // SSIM_ENVIRONMENT_HPP
