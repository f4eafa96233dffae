#ifndef SSIM_SCENARIO_HPP
#define SSIM_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ssim/attitude.hpp"
#include "ssim/attitude_control.hpp"
#include "ssim/comms.hpp"
#include "ssim/environment.hpp"
#include "ssim/executive.hpp"
#include "ssim/navigation.hpp"
#include "ssim/power.hpp"

namespace ssim {

/// Mass properties, geometry, and actuation of the spacecraft.
struct VehicleConfig {
    double mass_kg = 178.0;
    InertiaModel inertia;
    ThrusterSpec thrusters;
    double max_thrust_n = 1.0;
    std::vector<Plate> plates;
    MassGrid mass_grid;
    BodyVec instrument_axis{1.0, 0.0, 0.0};
    BodyVec antenna_axis{0.0, 0.0, 1.0};

    void validate() const;
};

struct PowerConfig {
    std::vector<SolarArray> arrays;
    Battery battery;
    std::vector<PowerLoad> loads;
    double bus_voltage_v = 28.0;
    double bus_conversion_mu = 0.95;
    bool high_fidelity = false;
    double temperature_k = 298.15;

    void validate() const;
};

struct AttitudeConfig {
    Eigen::Quaterniond initial_q = Eigen::Quaterniond::Identity();
    Eigen::Vector3d initial_omega_rad_s = Eigen::Vector3d::Zero();
    std::vector<double> initial_wheel_rates;  // rad/s, zero-padded
    std::vector<double> initial_wing_rates;   // rad/s, zero-padded
    double controller_bandwidth_rad_s = 0.1;
    double slew_rate_limit_rad_s = 0.01;
    double slew_accel_rad_s2 = 2e-4;
    double max_rotation_per_step_rad = 0.05;
    double pointing_refresh_s = 600.0;

    void validate() const;
};

struct CommsConfig {
    LinkBudget link;
    ArqConfig arq;
    double buffer_capacity_bytes = 1e9;
    double ingest_bytes_per_s = 0.0;
    std::vector<std::pair<double, double>> ground_windows_s;
    std::string ground_station_body = "earth";

    void validate() const;
};

struct TcmConfig {
    bool enabled = true;
    double arrival_t_s = 0.0;
    double max_dv_m_s = 50.0;
    double check_period_s = 1800.0;
    double predict_dt_s = 300.0;

    void validate(double duration_s) const;
};

struct ExecutiveConfig {
    ExecutivePriorities priorities;
    EventConfig events;
    double recharge_complete_soc = 0.90;
    double heuristic_weight = 0.5;
    double dispatch_backoff_s = 60.0;

    void validate() const;
};

/// Seeded Gaussian error applied to the state the autonomy sees.
struct StateErrorConfig {
    double sigma_pos_m = 0.0;
    double sigma_vel_m_s = 0.0;
};

/**
 * A full simulation scenario, loadable from JSON with dotted-key
 * overrides. Unknown override keys are rejected with the nearest valid
 * key suggested.
 */
struct Scenario {
    double epoch_s = 0.0;
    double duration_s = 0.0;
    double dt_s = 1.0;
    std::uint64_t seed = 0;

    Environment environment;
    std::string target_body;

    VehicleConfig vehicle;
    PowerConfig power;
    AttitudeConfig attitude;
    CommsConfig comms;
    TcmConfig tcm;
    ExecutiveConfig executive;
    StateErrorConfig state_error;

    NavState initial_nav;  // resolved at load time

    void validate() const;

    /// Effective configuration echo (also defines the override keyspace).
    nlohmann::json to_json() const;

    static Scenario from_json(const nlohmann::json& doc);

    /// Parse a file, apply key=value overrides, validate.
    static Scenario load(const std::string& path,
                         const std::vector<std::string>& overrides = {});
};

/// Apply one "dotted.key=value" override to a JSON document.
void apply_override(nlohmann::json& doc, const std::string& assignment,
                    const nlohmann::json& keyspace);

/// All dotted key paths of a JSON document (override keyspace).
std::vector<std::string> dotted_keys(const nlohmann::json& doc);

}  // namespace ssim

#endif  // SSIM_SCENARIO_HPP
