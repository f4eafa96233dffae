#include "ssim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

#include "ssim/error.hpp"
#include "ssim/lambert.hpp"

namespace ssim {

using nlohmann::json;

namespace {

const json& jrequire(const json& j, const std::string& key, const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end())
        throw ConfigError("config: missing required key '" + ctx + key + "'");
    return *it;
}

template <typename T>
T jget(const json& j, const std::string& key, const std::string& ctx) {
    try {
        return jrequire(j, key, ctx).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for '" + ctx + key + "': " + e.what());
    }
}

template <typename T>
T jget_or(const json& j, const std::string& key, T def, const std::string& ctx) {
    if (!j.contains(key)) return def;
    return jget<T>(j, key, ctx);
}

Eigen::Vector3d jvec3(const json& j, const std::string& key, const std::string& ctx) {
    auto arr = jget<std::vector<double>>(j, key, ctx);
    if (arr.size() != 3)
        throw ConfigError("config: '" + ctx + key + "' must have 3 elements");
    return {arr[0], arr[1], arr[2]};
}

Eigen::Vector3d jvec3_or(const json& j, const std::string& key,
                         const Eigen::Vector3d& def, const std::string& ctx) {
    if (!j.contains(key)) return def;
    return jvec3(j, key, ctx);
}

json vec3_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

std::vector<std::pair<double, double>> jwindows(const json& j, const std::string& key,
                                                const std::string& ctx) {
    std::vector<std::pair<double, double>> out;
    if (!j.contains(key)) return out;
    for (const auto& w : j.at(key)) {
        auto arr = w.get<std::vector<double>>();
        if (arr.size() != 2)
            throw ConfigError("config: '" + ctx + key + "' entries must be [start, end]");
        out.emplace_back(arr[0], arr[1]);
    }
    return out;
}

json windows_json(const std::vector<std::pair<double, double>>& w) {
    json arr = json::array();
    for (const auto& [s, e] : w) arr.push_back(json::array({s, e}));
    return arr;
}

int levenshtein(const std::string& a, const std::string& b) {
    std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            int sub = prev[j - 1] + (a[i - 1] != b[j - 1]);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

void VehicleConfig::validate() const {
    if (!(mass_kg > 0.0)) throw ConfigError("vehicle: mass must be positive");
    inertia.validate();
    thrusters.validate();
    if (!(max_thrust_n > 0.0))
        throw ConfigError("vehicle: max thrust must be positive");
    for (const Plate& p : plates) p.validate();
    mass_grid.validate();
    if (std::abs(instrument_axis.norm() - 1.0) > kOrthonormTol)
        throw ConfigError("vehicle: instrument axis must be unit length");
    if (std::abs(antenna_axis.norm() - 1.0) > kOrthonormTol)
        throw ConfigError("vehicle: antenna axis must be unit length");
}

void PowerConfig::validate() const {
    if (arrays.empty()) throw ConfigError("power: no solar arrays");
    for (const SolarArray& a : arrays) a.validate();
    battery.validate();
    for (const PowerLoad& l : loads) l.validate();
    if (!(bus_voltage_v > 0.0))
        throw ConfigError("power: bus voltage must be positive");
    if (!(bus_conversion_mu > 0.0 && bus_conversion_mu <= 1.0))
        throw ConfigError("power: bus conversion loss must be in (0,1]");
}

void AttitudeConfig::validate() const {
    if (std::abs(initial_q.norm() - 1.0) > kOrthonormTol)
        throw ConfigError("attitude: initial quaternion must be unit-norm");
    if (!(controller_bandwidth_rad_s > 0.0) || !(slew_rate_limit_rad_s > 0.0) ||
        !(slew_accel_rad_s2 > 0.0) || !(max_rotation_per_step_rad > 0.0) ||
        !(pointing_refresh_s > 0.0))
        throw ConfigError("attitude: rates and limits must be positive");
}

void CommsConfig::validate() const {
    link.validate();
    arq.validate();
    if (!(buffer_capacity_bytes > 0.0))
        throw ConfigError("comms: buffer capacity must be positive");
    if (ingest_bytes_per_s < 0.0)
        throw ConfigError("comms: negative ingest rate");
    for (const auto& [s, e] : ground_windows_s)
        if (!(e > s)) throw ConfigError("comms: ground window end must exceed start");
}

void TcmConfig::validate(double duration_s) const {
    if (!enabled) return;
    if (arrival_t_s < duration_s)
        throw ConfigError("tcm: arrival epoch precedes the end of the run");
    if (!(check_period_s > 0.0) || !(predict_dt_s > 0.0))
        throw ConfigError("tcm: periods must be positive");
}

void ExecutiveConfig::validate() const {
    priorities.validate();
    events.validate();
    if (recharge_complete_soc <= events.soc_charge_threshold ||
        recharge_complete_soc > 1.0)
        throw ConfigError("executive: recharge completion SoC must be in "
                          "(charge threshold, 1]");
    if (heuristic_weight < 0.0 || heuristic_weight > 1.0)
        throw ConfigError("executive: heuristic weight must be in [0,1]");
    if (dispatch_backoff_s < 0.0)
        throw ConfigError("executive: negative dispatch backoff");
}

void Scenario::validate() const {
    if (!(dt_s > 0.0)) throw ConfigError("scenario: dt must be positive");
    if (duration_s < 0.0) throw ConfigError("scenario: duration must be non-negative");
    double steps = duration_s / dt_s;
    if (std::abs(steps - std::round(steps)) > 1e-9)
        throw ConfigError("scenario: duration must be a multiple of dt");
    environment.validate();
    if (!environment.has_body(target_body))
        throw ConfigError("scenario: target body '" + target_body + "' is not defined");
    if (!environment.has_body(comms.ground_station_body))
        throw ConfigError("scenario: ground station body '" +
                          comms.ground_station_body + "' is not defined");
    if (!environment.has_body(initial_nav.center_body))
        throw ConfigError("scenario: center body '" + initial_nav.center_body +
                          "' is not defined");
    vehicle.validate();
    power.validate();
    attitude.validate();
    comms.validate();
    tcm.validate(duration_s);
    executive.validate();
    if (state_error.sigma_pos_m < 0.0 || state_error.sigma_vel_m_s < 0.0)
        throw ConfigError("scenario: state error sigmas must be non-negative");
}

namespace {

CelestialBody body_from_json(const json& j, const std::string& ctx) {
    CelestialBody b;
    b.id = jget<std::string>(j, "id", ctx);
    b.mu_m3_s2 = jget_or<double>(j, "mu_m3_s2", 0.0, ctx);
    b.radius_m = jget_or<double>(j, "radius_m", 0.0, ctx);
    b.gravitating = jget_or<bool>(j, "gravitating", true, ctx);
    if (j.contains("orbit")) {
        const json& o = j.at("orbit");
        std::string octx = ctx + "orbit.";
        KeplerElements el;
        el.sma_m = jget<double>(o, "sma_m", octx);
        el.ecc = jget_or<double>(o, "ecc", 0.0, octx);
        el.inc_rad = jget_or<double>(o, "inc_rad", 0.0, octx);
        el.raan_rad = jget_or<double>(o, "raan_rad", 0.0, octx);
        el.argp_rad = jget_or<double>(o, "argp_rad", 0.0, octx);
        el.mean_anomaly_rad = jget_or<double>(o, "mean_anomaly_rad", 0.0, octx);
        b.orbit = el;
    } else {
        b.fixed_position_m = jvec3_or(j, "fixed_position_m",
                                      Eigen::Vector3d::Zero(), ctx);
    }
    return b;
}

json body_to_json(const CelestialBody& b) {
    json j;
    j["id"] = b.id;
    j["mu_m3_s2"] = b.mu_m3_s2;
    j["radius_m"] = b.radius_m;
    j["gravitating"] = b.gravitating;
    if (b.orbit) {
        j["orbit"] = {{"sma_m", b.orbit->sma_m},
                      {"ecc", b.orbit->ecc},
                      {"inc_rad", b.orbit->inc_rad},
                      {"raan_rad", b.orbit->raan_rad},
                      {"argp_rad", b.orbit->argp_rad},
                      {"mean_anomaly_rad", b.orbit->mean_anomaly_rad}};
    } else {
        j["fixed_position_m"] = vec3_json(b.fixed_position_m);
    }
    return j;
}

}  // namespace

Scenario Scenario::from_json(const json& doc) {
    Scenario s;
    s.epoch_s = jget_or<double>(doc, "epoch_s", 0.0, "");
    s.duration_s = jget<double>(doc, "duration_s", "");
    s.dt_s = jget<double>(doc, "dt_s", "");
    s.seed = jget_or<std::uint64_t>(doc, "seed", 0, "");

    // Environment.
    const json& je = jrequire(doc, "environment", "");
    SolarConstants sc;
    if (je.contains("solar")) {
        const json& js = je.at("solar");
        sc.surface_power_density_w_m2 = jget_or<double>(
            js, "surface_power_density_w_m2", sc.surface_power_density_w_m2,
            "environment.solar.");
        sc.solar_radius_m = jget_or<double>(js, "solar_radius_m", sc.solar_radius_m,
                                            "environment.solar.");
        sc.speed_of_light_m_s = jget_or<double>(
            js, "speed_of_light_m_s", sc.speed_of_light_m_s, "environment.solar.");
    }
    std::vector<CelestialBody> bodies;
    for (const auto& jb : jrequire(je, "bodies", "environment."))
        bodies.push_back(body_from_json(jb, "environment.bodies[]."));
    std::string sun_id = jget<std::string>(je, "sun_id", "environment.");
    s.environment = Environment(sc, std::move(bodies), sun_id);
    s.target_body = jget<std::string>(je, "target_body", "environment.");

    // Vehicle.
    const json& jv = jrequire(doc, "vehicle", "");
    s.vehicle.mass_kg = jget<double>(jv, "mass_kg", "vehicle.");
    auto inertia_rows = jget<std::vector<std::vector<double>>>(jv, "inertia_cm",
                                                               "vehicle.");
    if (inertia_rows.size() != 3 || inertia_rows[0].size() != 3)
        throw ConfigError("config: vehicle.inertia_cm must be a 3x3 matrix");
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            s.vehicle.inertia.i_cm(r, c) = inertia_rows[static_cast<std::size_t>(r)]
                                                       [static_cast<std::size_t>(c)];
    for (const auto& jw : jget_or<json>(jv, "wheels", json::array(), "vehicle.")) {
        s.vehicle.inertia.wheels.push_back(RotorSpec::axial(
            jget<double>(jw, "axial_inertia_kg_m2", "vehicle.wheels[]."),
            jvec3(jw, "axis", "vehicle.wheels[]."),
            jget<double>(jw, "max_torque_nm", "vehicle.wheels[]."),
            jget<double>(jw, "max_rate_rad_s", "vehicle.wheels[].")));
    }
    for (const auto& jw : jget_or<json>(jv, "wings", json::array(), "vehicle.")) {
        s.vehicle.inertia.wings.push_back(RotorSpec::axial(
            jget<double>(jw, "axial_inertia_kg_m2", "vehicle.wings[]."),
            jvec3(jw, "axis", "vehicle.wings[]."), 0.0,
            jget_or<double>(jw, "max_rate_rad_s", 1.0, "vehicle.wings[].")));
    }
    s.vehicle.thrusters.max_torque_per_axis_nm =
        jget<double>(jv, "thruster_torque_per_axis_nm", "vehicle.");
    s.vehicle.max_thrust_n = jget<double>(jv, "max_thrust_n", "vehicle.");
    for (const auto& jp : jget_or<json>(jv, "plates", json::array(), "vehicle.")) {
        Plate p;
        p.area_m2 = jget<double>(jp, "area_m2", "vehicle.plates[].");
        p.reflection = jget_or<double>(jp, "reflection", 0.0, "vehicle.plates[].");
        p.normal = BodyVec(jvec3(jp, "normal", "vehicle.plates[].").normalized());
        p.center_of_pressure = BodyVec(jvec3_or(jp, "center_of_pressure_m",
                                                Eigen::Vector3d::Zero(),
                                                "vehicle.plates[]."));
        s.vehicle.plates.push_back(p);
    }
    const json& jg = jrequire(jv, "mass_grid", "vehicle.");
    s.vehicle.mass_grid.partitions_per_axis =
        jget_or<int>(jg, "partitions_per_axis", 4, "vehicle.mass_grid.");
    s.vehicle.mass_grid.half_extents_m =
        jvec3(jg, "half_extents_m", "vehicle.mass_grid.");
    s.vehicle.mass_grid.total_mass_kg = s.vehicle.mass_kg;
    s.vehicle.instrument_axis = BodyVec(
        jvec3_or(jv, "instrument_axis", Eigen::Vector3d::UnitX(), "vehicle.")
            .normalized());
    s.vehicle.antenna_axis = BodyVec(
        jvec3_or(jv, "antenna_axis", Eigen::Vector3d::UnitZ(), "vehicle.")
            .normalized());

    // Power.
    const json& jp = jrequire(doc, "power", "");
    for (const auto& ja : jrequire(jp, "arrays", "power.")) {
        SolarArray a;
        std::string ctx = "power.arrays[].";
        a.area_m2 = jget<double>(ja, "area_m2", ctx);
        a.cell_efficiency = jget<double>(ja, "cell_efficiency", ctx);
        a.packing_fraction = jget<double>(ja, "packing_fraction", ctx);
        a.normal = BodyVec(jvec3(ja, "normal", ctx).normalized());
        a.centroid = BodyVec(jvec3_or(ja, "centroid_m", Eigen::Vector3d::Zero(), ctx));
        a.occlusion = jget_or<double>(ja, "occlusion", 1.0, ctx);
        a.degradation_rate_per_s = jget_or<double>(ja, "degradation_rate_per_s", 0.0, ctx);
        a.temp_coeff_per_k = jget_or<double>(ja, "temp_coeff_per_k", 0.0, ctx);
        a.temp_ref_k = jget_or<double>(ja, "temp_ref_k", 298.15, ctx);
        a.design_constant = jget_or<double>(ja, "design_constant", 1.0, ctx);
        a.irradiance_ref_w_m2 = jget_or<double>(ja, "irradiance_ref_w_m2", 1361.0, ctx);
        if (ja.contains("ivc")) {
            a.ivc.current_a = jget<std::vector<double>>(ja.at("ivc"), "current_a",
                                                        ctx + "ivc.");
            a.ivc.voltage_v = jget<std::vector<double>>(ja.at("ivc"), "voltage_v",
                                                        ctx + "ivc.");
        }
        s.power.arrays.push_back(a);
    }
    const json& jb = jrequire(jp, "battery", "power.");
    s.power.battery.capacity_wh = jget<double>(jb, "capacity_wh", "power.battery.");
    s.power.battery.charge_eff = jget_or<double>(jb, "charge_eff", 0.95, "power.battery.");
    s.power.battery.discharge_eff =
        jget_or<double>(jb, "discharge_eff", 0.95, "power.battery.");
    s.power.battery.soc = jget_or<double>(jb, "initial_soc", 0.5, "power.battery.");
    s.power.battery.fade_rate_per_s =
        jget_or<double>(jb, "fade_rate_per_s", 0.0, "power.battery.");
    for (const auto& jl : jget_or<json>(jp, "loads", json::array(), "power.")) {
        PowerLoad l;
        l.id = jget<std::string>(jl, "id", "power.loads[].");
        l.rated_w = jget<double>(jl, "rated_w", "power.loads[].");
        l.always_on = jget_or<bool>(jl, "always_on", false, "power.loads[].");
        l.active_windows_s = jwindows(jl, "windows_s", "power.loads[].");
        s.power.loads.push_back(l);
    }
    s.power.bus_voltage_v = jget_or<double>(jp, "bus_voltage_v", 28.0, "power.");
    s.power.bus_conversion_mu = jget_or<double>(jp, "bus_conversion_mu", 0.95, "power.");
    s.power.high_fidelity = jget_or<bool>(jp, "high_fidelity", false, "power.");
    s.power.temperature_k = jget_or<double>(jp, "temperature_k", 298.15, "power.");

    // Attitude.
    const json& jat = jrequire(doc, "attitude", "");
    {
        auto q = jget_or<std::vector<double>>(jat, "initial_q", {0, 0, 0, 1},
                                              "attitude.");
        if (q.size() != 4)
            throw ConfigError("config: attitude.initial_q must have 4 elements");
        s.attitude.initial_q =
            Eigen::Quaterniond(q[3], q[0], q[1], q[2]).normalized();
    }
    s.attitude.initial_omega_rad_s =
        jvec3_or(jat, "initial_omega_rad_s", Eigen::Vector3d::Zero(), "attitude.");
    s.attitude.initial_wheel_rates = jget_or<std::vector<double>>(
        jat, "initial_wheel_rates_rad_s", {}, "attitude.");
    s.attitude.initial_wing_rates = jget_or<std::vector<double>>(
        jat, "initial_wing_rates_rad_s", {}, "attitude.");
    s.attitude.controller_bandwidth_rad_s =
        jget_or<double>(jat, "controller_bandwidth_rad_s", 0.1, "attitude.");
    s.attitude.slew_rate_limit_rad_s =
        jget_or<double>(jat, "slew_rate_limit_rad_s", 0.01, "attitude.");
    s.attitude.slew_accel_rad_s2 =
        jget_or<double>(jat, "slew_accel_rad_s2", 2e-4, "attitude.");
    s.attitude.max_rotation_per_step_rad =
        jget_or<double>(jat, "max_rotation_per_step_rad", 0.05, "attitude.");
    s.attitude.pointing_refresh_s =
        jget_or<double>(jat, "pointing_refresh_s", 600.0, "attitude.");

    // Comms.
    const json& jc = jrequire(doc, "comms", "");
    {
        const json& jl = jrequire(jc, "link", "comms.");
        std::string ctx = "comms.link.";
        LinkBudget& lb = s.comms.link;
        lb.tx_power_w = jget_or<double>(jl, "tx_power_w", 50.0, ctx);
        lb.tx_gain_db = jget_or<double>(jl, "tx_gain_db", 28.1, ctx);
        lb.line_loss_db = jget_or<double>(jl, "line_loss_db", 1.0, ctx);
        lb.frequency_hz = jget_or<double>(jl, "frequency_hz", 8.45e9, ctx);
        lb.beamwidth_3db_rad =
            jget_or<double>(jl, "beamwidth_deg", 0.1, ctx) * kPi / 180.0;
        lb.gt_db_k = jget_or<double>(jl, "gt_db_k", 50.0, ctx);
        lb.other_losses_db = jget_or<double>(jl, "other_losses_db", 1.0, ctx);
        lb.margin_db = jget_or<double>(jl, "margin_db", 3.0, ctx);
        lb.required_eb_n0_db = jget_or<double>(jl, "required_eb_n0_db", 4.2, ctx);
        lb.coding_gain_db = jget_or<double>(jl, "coding_gain_db", 7.3, ctx);
        lb.data_rate_limit_bps = jget_or<double>(jl, "data_rate_limit_bps", 8e6, ctx);
    }
    {
        std::string ctx = "comms.arq.";
        const json ja = jget_or<json>(jc, "arq", json::object(), "comms.");
        int window = jget_or<int>(ja, "window_frames", 8, ctx);
        double ack = jget_or<double>(ja, "ack_fer", 0.01, ctx);
        // The link operates at Eb/N0 = required - coding gain + margin
        // (the decoder sees the coding gain); pin the waterfall there.
        s.comms.arq = ArqConfig::with_default_curve(
            window, ack,
            s.comms.link.required_eb_n0_db - s.comms.link.coding_gain_db +
                s.comms.link.margin_db);
        if (ja.contains("fer_curve")) {
            s.comms.arq.fer_curve.clear();
            for (const auto& row : ja.at("fer_curve")) {
                auto arr = row.get<std::vector<double>>();
                if (arr.size() != 2)
                    throw ConfigError("config: comms.arq.fer_curve rows are [eb_n0, fer]");
                s.comms.arq.fer_curve.emplace_back(arr[0], arr[1]);
            }
        }
    }
    s.comms.buffer_capacity_bytes =
        jget_or<double>(jc, "buffer_capacity_bytes", 1e9, "comms.");
    s.comms.ingest_bytes_per_s = jget_or<double>(jc, "ingest_bytes_per_s", 0.0, "comms.");
    s.comms.ground_windows_s = jwindows(jc, "ground_windows_s", "comms.");
    s.comms.ground_station_body =
        jget_or<std::string>(jc, "ground_station_body", "earth", "comms.");

    // TCM planning.
    const json jt = jget_or<json>(doc, "tcm", json::object(), "");
    s.tcm.enabled = jget_or<bool>(jt, "enabled", true, "tcm.");
    s.tcm.arrival_t_s = jget_or<double>(jt, "arrival_t_s", s.duration_s, "tcm.");
    s.tcm.max_dv_m_s = jget_or<double>(jt, "max_dv_m_s", 50.0, "tcm.");
    s.tcm.check_period_s = jget_or<double>(jt, "check_period_s", 1800.0, "tcm.");
    s.tcm.predict_dt_s = jget_or<double>(jt, "predict_dt_s", 300.0, "tcm.");

    // Executive.
    const json jx = jget_or<json>(doc, "executive", json::object(), "");
    s.executive.priorities.recharge =
        jget_or<int>(jx, "priority_recharge", 0, "executive.");
    s.executive.priorities.desaturate =
        jget_or<int>(jx, "priority_desaturate", 1, "executive.");
    s.executive.priorities.execute_tcm =
        jget_or<int>(jx, "priority_execute_tcm", 2, "executive.");
    s.executive.priorities.downlink =
        jget_or<int>(jx, "priority_downlink", 3, "executive.");
    s.executive.events.soc_charge_threshold =
        jget_or<double>(jx, "soc_charge_threshold", 0.30, "executive.");
    s.executive.events.soc_hysteresis =
        jget_or<double>(jx, "soc_hysteresis", 0.05, "executive.");
    s.executive.events.miss_threshold_m =
        jget_or<double>(jx, "miss_threshold_m", 5e6, "executive.");
    s.executive.events.miss_hysteresis_frac =
        jget_or<double>(jx, "miss_hysteresis_frac", 0.10, "executive.");
    s.executive.events.buffer_threshold_bytes =
        jget_or<double>(jx, "buffer_threshold_bytes", 1e8, "executive.");
    s.executive.events.buffer_hysteresis_bytes =
        jget_or<double>(jx, "buffer_hysteresis_bytes", 1e7, "executive.");
    s.executive.events.wheel_rate_threshold_rad_s =
        jget_or<double>(jx, "wheel_rate_threshold_rad_s", 300.0, "executive.");
    s.executive.recharge_complete_soc =
        jget_or<double>(jx, "recharge_complete_soc", 0.90, "executive.");
    s.executive.heuristic_weight =
        jget_or<double>(jx, "heuristic_weight", 0.5, "executive.");
    s.executive.dispatch_backoff_s =
        jget_or<double>(jx, "dispatch_backoff_s", 60.0, "executive.");

    // State error injection.
    const json jse = jget_or<json>(doc, "state_error", json::object(), "");
    s.state_error.sigma_pos_m = jget_or<double>(jse, "sigma_pos_m", 0.0, "state_error.");
    s.state_error.sigma_vel_m_s =
        jget_or<double>(jse, "sigma_vel_m_s", 0.0, "state_error.");

    // Initial translational state: explicit, or a Lambert transfer to
    // the target intercept with an optional injected velocity error.
    const json& jn = jrequire(doc, "nav", "");
    s.initial_nav.center_body =
        jget_or<std::string>(jn, "center_body", sun_id, "nav.");
    if (jn.contains("transfer")) {
        const json& jtr = jn.at("transfer");
        std::string ctx = "nav.transfer.";
        Eigen::Vector3d r0 = jvec3(jtr, "from_position_m", ctx);
        double t_arrive = jget<double>(jtr, "arrival_t_s", ctx);
        Eigen::Vector3d verr = jvec3_or(jtr, "velocity_error_m_s",
                                        Eigen::Vector3d::Zero(), ctx);
        Eigen::Vector3d target =
            s.environment.body_position(s.target_body, t_arrive).v;
        LambertSolution sol =
            lambert_solve(r0, target, t_arrive - s.epoch_s,
                          s.environment.sun().mu_m3_s2,
                          TransferDirection::Prograde, Eigen::Vector3d::UnitZ());
        s.initial_nav.position_m = r0;
        s.initial_nav.velocity_m_s = sol.v1 + verr;
    } else {
        s.initial_nav.position_m = jvec3(jn, "position_m", "nav.");
        s.initial_nav.velocity_m_s = jvec3(jn, "velocity_m_s", "nav.");
    }
    return s;
}

json Scenario::to_json() const {
    json doc;
    doc["epoch_s"] = epoch_s;
    doc["duration_s"] = duration_s;
    doc["dt_s"] = dt_s;
    doc["seed"] = seed;

    json je;
    je["solar"] = {{"surface_power_density_w_m2",
                    environment.sun_constants().surface_power_density_w_m2},
                   {"solar_radius_m", environment.sun_constants().solar_radius_m},
                   {"speed_of_light_m_s",
                    environment.sun_constants().speed_of_light_m_s}};
    je["bodies"] = json::array();
    for (const CelestialBody& b : environment.bodies())
        je["bodies"].push_back(body_to_json(b));
    je["sun_id"] = environment.sun_id();
    je["target_body"] = target_body;
    doc["environment"] = je;

    json jv;
    jv["mass_kg"] = vehicle.mass_kg;
    jv["inertia_cm"] = json::array();
    for (int r = 0; r < 3; ++r)
        jv["inertia_cm"].push_back(json::array({vehicle.inertia.i_cm(r, 0),
                                                vehicle.inertia.i_cm(r, 1),
                                                vehicle.inertia.i_cm(r, 2)}));
    jv["wheels"] = json::array();
    for (const RotorSpec& w : vehicle.inertia.wheels)
        jv["wheels"].push_back({{"axial_inertia_kg_m2", w.axial_inertia()},
                                {"axis", vec3_json(w.axis)},
                                {"max_torque_nm", w.max_torque_nm},
                                {"max_rate_rad_s", w.max_rate_rad_s}});
    jv["wings"] = json::array();
    for (const RotorSpec& w : vehicle.inertia.wings)
        jv["wings"].push_back({{"axial_inertia_kg_m2", w.axial_inertia()},
                               {"axis", vec3_json(w.axis)},
                               {"max_rate_rad_s", w.max_rate_rad_s}});
    jv["thruster_torque_per_axis_nm"] = vehicle.thrusters.max_torque_per_axis_nm;
    jv["max_thrust_n"] = vehicle.max_thrust_n;
    jv["plates"] = json::array();
    for (const Plate& p : vehicle.plates)
        jv["plates"].push_back({{"area_m2", p.area_m2},
                                {"reflection", p.reflection},
                                {"normal", vec3_json(p.normal.v)},
                                {"center_of_pressure_m",
                                 vec3_json(p.center_of_pressure.v)}});
    jv["mass_grid"] = {{"partitions_per_axis", vehicle.mass_grid.partitions_per_axis},
                       {"half_extents_m", vec3_json(vehicle.mass_grid.half_extents_m)}};
    jv["instrument_axis"] = vec3_json(vehicle.instrument_axis.v);
    jv["antenna_axis"] = vec3_json(vehicle.antenna_axis.v);
    doc["vehicle"] = jv;

    json jp;
    jp["arrays"] = json::array();
    for (const SolarArray& a : power.arrays) {
        json ja = {{"area_m2", a.area_m2},
                   {"cell_efficiency", a.cell_efficiency},
                   {"packing_fraction", a.packing_fraction},
                   {"normal", vec3_json(a.normal.v)},
                   {"centroid_m", vec3_json(a.centroid.v)},
                   {"occlusion", a.occlusion},
                   {"degradation_rate_per_s", a.degradation_rate_per_s},
                   {"temp_coeff_per_k", a.temp_coeff_per_k},
                   {"temp_ref_k", a.temp_ref_k},
                   {"design_constant", a.design_constant},
                   {"irradiance_ref_w_m2", a.irradiance_ref_w_m2}};
        ja["ivc"] = {{"current_a", a.ivc.current_a}, {"voltage_v", a.ivc.voltage_v}};
        jp["arrays"].push_back(ja);
    }
    jp["battery"] = {{"capacity_wh", power.battery.capacity_wh},
                     {"charge_eff", power.battery.charge_eff},
                     {"discharge_eff", power.battery.discharge_eff},
                     {"initial_soc", power.battery.soc},
                     {"fade_rate_per_s", power.battery.fade_rate_per_s}};
    jp["loads"] = json::array();
    for (const PowerLoad& l : power.loads)
        jp["loads"].push_back({{"id", l.id},
                               {"rated_w", l.rated_w},
                               {"always_on", l.always_on},
                               {"windows_s", windows_json(l.active_windows_s)}});
    jp["bus_voltage_v"] = power.bus_voltage_v;
    jp["bus_conversion_mu"] = power.bus_conversion_mu;
    jp["high_fidelity"] = power.high_fidelity;
    jp["temperature_k"] = power.temperature_k;
    doc["power"] = jp;

    json jat;
    jat["initial_q"] = json::array({attitude.initial_q.x(), attitude.initial_q.y(),
                                    attitude.initial_q.z(), attitude.initial_q.w()});
    jat["initial_omega_rad_s"] = vec3_json(attitude.initial_omega_rad_s);
    jat["initial_wheel_rates_rad_s"] = attitude.initial_wheel_rates;
    jat["initial_wing_rates_rad_s"] = attitude.initial_wing_rates;
    jat["controller_bandwidth_rad_s"] = attitude.controller_bandwidth_rad_s;
    jat["slew_rate_limit_rad_s"] = attitude.slew_rate_limit_rad_s;
    jat["slew_accel_rad_s2"] = attitude.slew_accel_rad_s2;
    jat["max_rotation_per_step_rad"] = attitude.max_rotation_per_step_rad;
    jat["pointing_refresh_s"] = attitude.pointing_refresh_s;
    doc["attitude"] = jat;

    json jc;
    jc["link"] = {{"tx_power_w", comms.link.tx_power_w},
                  {"tx_gain_db", comms.link.tx_gain_db},
                  {"line_loss_db", comms.link.line_loss_db},
                  {"frequency_hz", comms.link.frequency_hz},
                  {"beamwidth_deg", comms.link.beamwidth_3db_rad * 180.0 / kPi},
                  {"gt_db_k", comms.link.gt_db_k},
                  {"other_losses_db", comms.link.other_losses_db},
                  {"margin_db", comms.link.margin_db},
                  {"required_eb_n0_db", comms.link.required_eb_n0_db},
                  {"coding_gain_db", comms.link.coding_gain_db},
                  {"data_rate_limit_bps", comms.link.data_rate_limit_bps}};
    jc["arq"] = {{"window_frames", comms.arq.window_frames},
                 {"ack_fer", comms.arq.ack_fer}};
    jc["buffer_capacity_bytes"] = comms.buffer_capacity_bytes;
    jc["ingest_bytes_per_s"] = comms.ingest_bytes_per_s;
    jc["ground_windows_s"] = windows_json(comms.ground_windows_s);
    jc["ground_station_body"] = comms.ground_station_body;
    doc["comms"] = jc;

    doc["tcm"] = {{"enabled", tcm.enabled},
                  {"arrival_t_s", tcm.arrival_t_s},
                  {"max_dv_m_s", tcm.max_dv_m_s},
                  {"check_period_s", tcm.check_period_s},
                  {"predict_dt_s", tcm.predict_dt_s}};

    doc["executive"] = {
        {"priority_recharge", executive.priorities.recharge},
        {"priority_desaturate", executive.priorities.desaturate},
        {"priority_execute_tcm", executive.priorities.execute_tcm},
        {"priority_downlink", executive.priorities.downlink},
        {"soc_charge_threshold", executive.events.soc_charge_threshold},
        {"soc_hysteresis", executive.events.soc_hysteresis},
        {"miss_threshold_m", executive.events.miss_threshold_m},
        {"miss_hysteresis_frac", executive.events.miss_hysteresis_frac},
        {"buffer_threshold_bytes", executive.events.buffer_threshold_bytes},
        {"buffer_hysteresis_bytes", executive.events.buffer_hysteresis_bytes},
        {"wheel_rate_threshold_rad_s", executive.events.wheel_rate_threshold_rad_s},
        {"recharge_complete_soc", executive.recharge_complete_soc},
        {"heuristic_weight", executive.heuristic_weight},
        {"dispatch_backoff_s", executive.dispatch_backoff_s}};

    doc["state_error"] = {{"sigma_pos_m", state_error.sigma_pos_m},
                          {"sigma_vel_m_s", state_error.sigma_vel_m_s}};

    doc["nav"] = {{"center_body", initial_nav.center_body},
                  {"position_m", vec3_json(initial_nav.position_m)},
                  {"velocity_m_s", vec3_json(initial_nav.velocity_m_s)}};
    return doc;
}

std::vector<std::string> dotted_keys(const json& doc) {
    std::vector<std::string> keys;
    std::function<void(const json&, const std::string&)> walk =
        [&](const json& node, const std::string& prefix) {
            if (node.is_object()) {
                for (auto it = node.begin(); it != node.end(); ++it) {
                    std::string path =
                        prefix.empty() ? it.key() : prefix + "." + it.key();
                    keys.push_back(path);
                    walk(it.value(), path);
                }
            } else if (node.is_array()) {
                for (std::size_t i = 0; i < node.size(); ++i) {
                    std::string path = prefix + "." + std::to_string(i);
                    keys.push_back(path);
                    walk(node[i], path);
                }
            }
        };
    walk(doc, "");
    return keys;
}

void apply_override(json& doc, const std::string& assignment, const json& keyspace) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "' must be key=value");
    std::string key = assignment.substr(0, eq);
    std::string value = assignment.substr(eq + 1);

    std::vector<std::string> valid = dotted_keys(keyspace);
    if (std::find(valid.begin(), valid.end(), key) == valid.end()) {
        std::string best;
        int best_d = std::numeric_limits<int>::max();
        for (const std::string& k : valid) {
            int d = levenshtein(key, k);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        throw ConfigError("unknown override key '" + key + "' (did you mean '" +
                          best + "'?)");
    }

    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        parsed = value;  // plain string
    }

    json* node = &doc;
    std::string rest = key;
    while (true) {
        auto dot = rest.find('.');
        std::string head = rest.substr(0, dot);
        bool is_index = !head.empty() &&
                        head.find_first_not_of("0123456789") == std::string::npos;
        json& child = is_index ? (*node)[std::stoul(head)] : (*node)[head];
        if (dot == std::string::npos) {
            child = parsed;
            return;
        }
        node = &child;
        rest = rest.substr(dot + 1);
    }
}

Scenario Scenario::load(const std::string& path,
                        const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("scenario file '" + path + "' is not valid JSON: " +
                          e.what());
    }

    if (!overrides.empty()) {
        // The effective config of the unmodified file defines the valid
        // key space, so overrides of defaulted keys are accepted too.
        json keyspace = Scenario::from_json(doc).to_json();
        for (const std::string& ov : overrides) apply_override(doc, ov, keyspace);
    }

    Scenario s = Scenario::from_json(doc);
    s.validate();
    return s;
}

}  // namespace ssim
