#include "ssim/environment.hpp"

#include <algorithm>
#include <cmath>

#include "ssim/error.hpp"

namespace ssim {

void SolarConstants::validate() const {
    if (!(surface_power_density_w_m2 > 0.0))
        throw ConfigError("solar constants: H0 must be positive");
    if (!(solar_radius_m > 0.0))
        throw ConfigError("solar constants: solar radius must be positive");
    if (!(speed_of_light_m_s > 0.0))
        throw ConfigError("solar constants: speed of light must be positive");
}

void CelestialBody::validate() const {
    if (id.empty()) throw ConfigError("celestial body: empty id");
    if (gravitating && !(mu_m3_s2 > 0.0))
        throw ConfigError("celestial body '" + id + "': mu must be positive");
    if (radius_m < 0.0)
        throw ConfigError("celestial body '" + id + "': negative radius");
    if (orbit) {
        if (!(orbit->sma_m > 0.0))
            throw ConfigError("celestial body '" + id + "': orbit sma must be positive");
        if (orbit->ecc < 0.0 || orbit->ecc >= 1.0)
            throw ConfigError("celestial body '" + id + "': orbit ecc must be in [0,1)");
    }
}

double solve_kepler(double mean_anomaly, double ecc, double tol) {
    double m = std::fmod(mean_anomaly, 2.0 * kPi);
    if (m < 0.0) m += 2.0 * kPi;
    double e_anom = (ecc < 0.8) ? m : kPi;
    for (int i = 0; i < 64; ++i) {
        double d = (e_anom - ecc * std::sin(e_anom) - m) /
                   (1.0 - ecc * std::cos(e_anom));
        e_anom -= d;
        if (std::abs(d) < tol) break;
    }
    return e_anom;
}

void Plate::validate() const {
    if (!(area_m2 > 0.0)) throw ConfigError("plate: area must be positive");
    if (reflection < 0.0 || reflection > 1.0)
        throw ConfigError("plate: reflection coefficient must be in [0,1]");
    if (std::abs(normal.norm() - 1.0) > kOrthonormTol)
        throw ConfigError("plate: normal must be unit length");
}

std::vector<BodyVec> MassGrid::partition_centers() const {
    const int k = partitions_per_axis;
    std::vector<BodyVec> centers;
    centers.reserve(static_cast<std::size_t>(k) * k * k);
    for (int ix = 0; ix < k; ++ix)
        for (int iy = 0; iy < k; ++iy)
            for (int iz = 0; iz < k; ++iz) {
                auto coord = [&](int i, double h) {
                    return -h + (2.0 * i + 1.0) * h / k;
                };
                centers.emplace_back(coord(ix, half_extents_m.x()),
                                     coord(iy, half_extents_m.y()),
                                     coord(iz, half_extents_m.z()));
            }
    return centers;
}

void MassGrid::validate() const {
    if (partitions_per_axis < 1)
        throw ConfigError("mass grid: partitions per axis must be >= 1");
    if (!(total_mass_kg > 0.0))
        throw ConfigError("mass grid: total mass must be positive");
    if ((half_extents_m.array() < 0.0).any())
        throw ConfigError("mass grid: negative half extent");
}

double irradiance(double sun_distance_m, const SolarConstants& sun) {
    if (!(sun_distance_m > sun.solar_radius_m))
        throw RuntimeError("irradiance: distance " + std::to_string(sun_distance_m) +
                           " m is inside the solar radius");
    double ratio = sun.solar_radius_m / sun_distance_m;
    return sun.surface_power_density_w_m2 * ratio * ratio;
}

double srp_pressure(double sun_distance_m, const SolarConstants& sun) {
    return irradiance(sun_distance_m, sun) / sun.speed_of_light_m_s;
}

InertialVec gravity_force(const CelestialBody& body,
                          const InertialVec& body_position,
                          const InertialVec& sc_position, double sc_mass_kg) {
    InertialVec r = sc_position - body_position;  // body -> spacecraft
    double d = r.norm();
    if (!(d > 0.0))
        throw RuntimeError("gravity_force: zero separation from body '" + body.id + "'");
    if (d <= body.radius_m)
        throw RuntimeError("gravity_force: spacecraft inside body '" + body.id + "'");
    return r * (-body.mu_m3_s2 * sc_mass_kg / (d * d * d));
}

BodyVec gravity_torque(const CelestialBody& body,
                       const InertialVec& body_position, const MassGrid& grid,
                       const Pose& pose) {
    grid.validate();
    const double mk = grid.partition_mass();
    BodyVec torque{0.0, 0.0, 0.0};
    for (const BodyVec& rk_sc : grid.partition_centers()) {
        InertialVec rk_i = pose.position + pose.to_inertial(rk_sc);
        InertialVec fk = gravity_force(body, body_position, rk_i, mk);
        torque += rk_sc.cross(pose.to_body(fk));
    }
    return torque;
}

std::pair<InertialVec, BodyVec> srp_force_torque(
    const std::vector<Plate>& plates, const Pose& pose,
    const InertialVec& sun_position, const SolarConstants& sun) {
    if (plates.empty())
        throw RuntimeError("srp_force_torque: empty plate set");
    double d_sc = (pose.position - sun_position).norm();
    const double rho = srp_pressure(d_sc, sun);

    InertialVec force{0.0, 0.0, 0.0};
    BodyVec torque{0.0, 0.0, 0.0};
    for (const Plate& p : plates) {
        InertialVec rp_i = pose.position + pose.to_inertial(p.center_of_pressure);
        InertialVec sun_to_plate = rp_i - sun_position;
        double dn = sun_to_plate.norm();
        if (!(dn > 0.0))
            throw RuntimeError("srp_force_torque: plate coincides with the Sun");
        InertialVec u = sun_to_plate / dn;
        InertialVec normal_i = pose.to_inertial(p.normal);
        // Incidence: lit when the outward normal faces the Sun.
        double cos_theta = -u.dot(normal_i);
        if (cos_theta <= 0.0) continue;
        InertialVec fn = u * (rho * p.area_m2 * (1.0 + p.reflection) * cos_theta);
        force += fn;
        torque += p.center_of_pressure.cross(pose.to_body(fn));
    }
    return {force, torque};
}

Environment::Environment(SolarConstants sun_constants,
                         std::vector<CelestialBody> bodies, std::string sun_id)
    : sun_(sun_constants), bodies_(std::move(bodies)), sun_id_(std::move(sun_id)) {}

const CelestialBody& Environment::body(const std::string& id) const {
    auto it = std::find_if(bodies_.begin(), bodies_.end(),
                           [&](const CelestialBody& b) { return b.id == id; });
    if (it == bodies_.end())
        throw RuntimeError("environment: unknown body '" + id + "'");
    return *it;
}

bool Environment::has_body(const std::string& id) const {
    return std::any_of(bodies_.begin(), bodies_.end(),
                       [&](const CelestialBody& b) { return b.id == id; });
}

namespace {

// Perifocal -> inertial rotation for the given elements.
Eigen::Matrix3d perifocal_rotation(const KeplerElements& el) {
    return (Eigen::AngleAxisd(el.raan_rad, Eigen::Vector3d::UnitZ()) *
            Eigen::AngleAxisd(el.inc_rad, Eigen::Vector3d::UnitX()) *
            Eigen::AngleAxisd(el.argp_rad, Eigen::Vector3d::UnitZ()))
        .toRotationMatrix();
}

}  // namespace

InertialVec Environment::body_position(const std::string& id, double t) const {
    const CelestialBody& b = body(id);
    if (!b.orbit) return InertialVec(b.fixed_position_m);

    const KeplerElements& el = *b.orbit;
    const CelestialBody& sun_body = sun();
    double n = std::sqrt(sun_body.mu_m3_s2 / (el.sma_m * el.sma_m * el.sma_m));
    double e_anom = solve_kepler(el.mean_anomaly_rad + n * t, el.ecc);
    double x_pf = el.sma_m * (std::cos(e_anom) - el.ecc);
    double y_pf = el.sma_m * std::sqrt(1.0 - el.ecc * el.ecc) * std::sin(e_anom);
    Eigen::Vector3d r = perifocal_rotation(el) * Eigen::Vector3d(x_pf, y_pf, 0.0);
    return InertialVec(sun_body.fixed_position_m + r);
}

InertialVec Environment::body_velocity(const std::string& id, double t) const {
    const CelestialBody& b = body(id);
    if (!b.orbit) return InertialVec{0.0, 0.0, 0.0};

    const KeplerElements& el = *b.orbit;
    const CelestialBody& sun_body = sun();
    double n = std::sqrt(sun_body.mu_m3_s2 / (el.sma_m * el.sma_m * el.sma_m));
    double e_anom = solve_kepler(el.mean_anomaly_rad + n * t, el.ecc);
    double r_mag = el.sma_m * (1.0 - el.ecc * std::cos(e_anom));
    double e_dot = n * el.sma_m / r_mag;
    Eigen::Vector3d v_pf(-el.sma_m * std::sin(e_anom) * e_dot,
                         el.sma_m * std::sqrt(1.0 - el.ecc * el.ecc) *
                             std::cos(e_anom) * e_dot,
                         0.0);
    return InertialVec(perifocal_rotation(el) * v_pf);
}

InertialVec Environment::body_acceleration(const std::string& id, double t) const {
    const CelestialBody& b = body(id);
    if (!b.orbit) return InertialVec{0.0, 0.0, 0.0};
    const CelestialBody& sun_body = sun();
    InertialVec rel = body_position(id, t) - InertialVec(sun_body.fixed_position_m);
    double d = rel.norm();
    return rel * (-sun_body.mu_m3_s2 / (d * d * d));
}

void Environment::validate() const {
    sun_.validate();
    if (bodies_.empty()) throw ConfigError("environment: no bodies defined");
    for (const CelestialBody& b : bodies_) b.validate();
    if (!has_body(sun_id_))
        throw ConfigError("environment: sun body '" + sun_id_ + "' is not defined");
    if (sun().orbit)
        throw ConfigError("environment: the sun must use a fixed ephemeris");
    for (const CelestialBody& b : bodies_)
        if (std::count_if(bodies_.begin(), bodies_.end(),
                          [&](const CelestialBody& o) { return o.id == b.id; }) > 1)
            throw ConfigError("environment: duplicate body id '" + b.id + "'");
}

}  // namespace ssim
