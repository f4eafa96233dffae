#include "ssim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssim/error.hpp"
#include "ssim/lambert.hpp"

namespace ssim {

namespace {

constexpr double kBurnAlignTolRad = 0.1;

Eigen::Quaterniond point_axis_at(const Eigen::Vector3d& body_axis,
                                 const Eigen::Vector3d& inertial_dir) {
    return Eigen::Quaterniond::FromTwoVectors(body_axis, inertial_dir.normalized());
}

}  // namespace

SimEngine::SimEngine(Scenario scenario)
    : scn_(std::move(scenario)),
      exec_(scn_.executive.priorities, scn_.executive.events),
      writer_(static_cast<int>(scn_.vehicle.inertia.wheels.size())) {
    scn_.validate();

    force_model_.mass_kg = scn_.vehicle.mass_kg;
    force_model_.plates = scn_.vehicle.plates;
    force_model_.include_srp = !scn_.vehicle.plates.empty();

    gains_ = ControllerGains::critically_damped(
        scn_.vehicle.inertia, scn_.attitude.controller_bandwidth_rad_s);

    t_ = scn_.epoch_s;
    total_steps_ = static_cast<std::size_t>(std::llround(scn_.duration_s / scn_.dt_s));

    nav_ = scn_.initial_nav;
    att_.q = scn_.attitude.initial_q;
    att_.omega = scn_.attitude.initial_omega_rad_s;
    const int n = static_cast<int>(scn_.vehicle.inertia.wheels.size());
    const int m = static_cast<int>(scn_.vehicle.inertia.wings.size());
    att_.wheel_rates = Eigen::VectorXd::Zero(n);
    att_.wing_rates = Eigen::VectorXd::Zero(m);
    int n_init = std::min(n, static_cast<int>(scn_.attitude.initial_wheel_rates.size()));
    for (int i = 0; i < n_init; ++i)
        att_.wheel_rates(i) = scn_.attitude.initial_wheel_rates[static_cast<std::size_t>(i)];
    int m_init = std::min(m, static_cast<int>(scn_.attitude.initial_wing_rates.size()));
    for (int j = 0; j < m_init; ++j)
        att_.wing_rates(j) = scn_.attitude.initial_wing_rates[static_cast<std::size_t>(j)];

    soc_ = scn_.power.battery.soc;
    buffer_.capacity_bytes = scn_.comms.buffer_capacity_bytes;

    refresh_default_pointing(true);

    // Net power at the initial state seeds the energy trapezoid.
    Pose pose{InertialVec(inertial_position()), BodyToInertial(att_.q)};
    double p_solar = solar_power_lf(scn_.power.arrays, pose,
                                    scn_.environment.sun_position(t_),
                                    scn_.environment.sun_constants());
    prev_p_net_w_ = net_power(p_solar, scn_.power.loads, t_,
                              scn_.power.high_fidelity, scn_.power.bus_conversion_mu);

    summary_.duration_s = scn_.duration_s;
    summary_.initial_distance_m = distance_to_target();
    summary_.min_soc = soc_;
}

Eigen::Vector3d SimEngine::inertial_position() const {
    return nav_.position_m +
           scn_.environment.body_position(nav_.center_body, t_).v;
}

double SimEngine::distance_to_target() const {
    return (inertial_position() -
            scn_.environment.body_position(scn_.target_body, t_).v).norm();
}

Eigen::Vector3d SimEngine::target_body_direction() const {
    Eigen::Vector3d to_body =
        scn_.environment.body_position(scn_.target_body, t_).v - inertial_position();
    double d = to_body.norm();
    if (!(d > 0.0)) return Eigen::Vector3d::UnitX();
    return to_body / d;
}

NavState SimEngine::onboard_nav_estimate() const {
    if (scn_.state_error.sigma_pos_m == 0.0 && scn_.state_error.sigma_vel_m_s == 0.0)
        return nav_;
    // Per-step seed keeps the draw deterministic and uncorrelated.
    std::uint64_t seed = scn_.seed ^ (0x9e3779b97f4a7c15ull * (step_index_ + 1));
    return inject_state_error(nav_, scn_.state_error.sigma_pos_m,
                              scn_.state_error.sigma_vel_m_s, seed);
}

bool SimEngine::ground_window_visible(double t) const {
    for (const auto& [s, e] : scn_.comms.ground_windows_s)
        if (t >= s && t < e) return true;
    return false;
}

SimEngine::DisturbanceTorques SimEngine::environment_torques() const {
    DisturbanceTorques out;
    Pose pose{InertialVec(inertial_position()), BodyToInertial(att_.q)};
    for (const CelestialBody& b : scn_.environment.bodies()) {
        if (!b.gravitating) continue;
        out.total += gravity_torque(b, scn_.environment.body_position(b.id, t_),
                                    scn_.vehicle.mass_grid, pose).v;
    }
    if (!scn_.vehicle.plates.empty()) {
        out.total += srp_force_torque(scn_.vehicle.plates, pose,
                                      scn_.environment.sun_position(t_),
                                      scn_.environment.sun_constants()).second.v;
    }
    return out;
}

void SimEngine::set_attitude_target(const AttitudeCommand& cmd) {
    current_cmd_ = cmd;
    slew_ = eigen_axis_guidance(att_.q, cmd.target_q,
                                scn_.attitude.slew_rate_limit_rad_s, scn_.dt_s,
                                scn_.attitude.slew_accel_rad_s2, cmd.mode);
    slew_idx_ = 0;
}

const AttitudeCommand& SimEngine::current_command() {
    if (slew_ && slew_idx_ < slew_->commands.size())
        return slew_->commands[slew_idx_];
    return current_cmd_;
}

void SimEngine::refresh_default_pointing(bool force) {
    if (!force && t_ - last_pointing_refresh_ < scn_.attitude.pointing_refresh_s)
        return;
    AttitudeCommand cmd;
    cmd.mode = AttitudeMode::SmallBodyPointing;
    cmd.target_q =
        point_axis_at(scn_.vehicle.instrument_axis.v, target_body_direction());
    set_attitude_target(cmd);
    last_pointing_refresh_ = t_;
}

double SimEngine::predicted_miss_distance() {
    double horizon = scn_.tcm.arrival_t_s - t_;
    if (horizon <= scn_.tcm.predict_dt_s) return -1.0;

    // Gravity-only forecast from the onboard state estimate.
    NavState est = onboard_nav_estimate();
    PropagateOptions opt;
    opt.switch_centers = false;
    opt.include_srp = false;
    auto thrust = [](double) { return Eigen::Vector3d::Zero(); };
    auto trace = propagate(est, thrust, t_, scn_.tcm.predict_dt_s, horizon,
                           att_.q, scn_.environment, force_model_, opt);
    const NavSample& end = trace.back();
    Eigen::Vector3d r_inertial =
        end.state.position_m +
        scn_.environment.body_position(end.state.center_body, end.t).v;
    return (r_inertial -
            scn_.environment.body_position(scn_.target_body, end.t).v).norm();
}

void SimEngine::check_active_completion() {
    Task* active = exec_.queue().active();
    if (!active) return;
    bool completed = false;
    switch (active->kind) {
        case TaskKind::Recharge:
            completed = soc_ >= scn_.executive.recharge_complete_soc;
            break;
        case TaskKind::ExecuteTcm:
            completed = burn_ && t_ >= burn_->stop_s;
            break;
        case TaskKind::Downlink:
            completed = buffer_.fill_bytes <= 0.0 || !ground_window_visible(t_);
            break;
        case TaskKind::Desaturate:
            completed = desat_active_ && desat_idx_ >= desat_.steps.size();
            break;
    }
    if (!completed) return;

    summary_.tasks_completed[task_kind_name(active->kind)]++;
    if (active->kind == TaskKind::ExecuteTcm) {
        burn_.reset();
        pending_burn_.reset();
    }
    if (active->kind == TaskKind::Desaturate) desat_active_ = false;
    exec_.queue().complete(*active);
    exec_.queue().purge_done();
    refresh_default_pointing(true);
}

void SimEngine::dispatch_new_task(Task& task) {
    switch (task.kind) {
        case TaskKind::Recharge: {
            Pose pose{InertialVec(inertial_position()), BodyToInertial(att_.q)};
            AttitudeCommand cmd = charging_attitude(
                pose, scn_.power.arrays, scn_.environment.sun_constants(),
                scn_.environment.sun_position(t_),
                InertialVec(target_body_direction()),
                scn_.vehicle.instrument_axis, scn_.executive.heuristic_weight);
            set_attitude_target(cmd);
            break;
        }
        case TaskKind::ExecuteTcm: {
            NavState helio = switch_center(onboard_nav_estimate(),
                                           scn_.environment.sun_id(), t_,
                                           scn_.environment);
            Eigen::Vector3d target = scn_.environment
                                         .body_position(scn_.target_body,
                                                        scn_.tcm.arrival_t_s).v;
            try {
                PropulsionCommand burn = plan_tcm(
                    helio.position_m, helio.velocity_m_s, target, t_,
                    scn_.tcm.arrival_t_s, scn_.environment.sun().mu_m3_s2,
                    scn_.tcm.max_dv_m_s, scn_.vehicle.max_thrust_n,
                    scn_.vehicle.mass_kg);
                pending_burn_ = burn;
                task.burn = burn;
            } catch (const RuntimeError&) {
                exec_.queue().reject(task, t_, scn_.executive.dispatch_backoff_s);
                return;
            }
            AttitudeCommand cmd;
            cmd.mode = AttitudeMode::Tcm;
            Eigen::Vector3d dir = pending_burn_->thrust_n.norm() > 0.0
                                      ? pending_burn_->thrust_n.normalized()
                                      : target_body_direction();
            cmd.target_q = point_axis_at(scn_.vehicle.instrument_axis.v, dir);
            set_attitude_target(cmd);
            break;
        }
        case TaskKind::Downlink: {
            AttitudeCommand cmd;
            cmd.mode = AttitudeMode::Downlink;
            Eigen::Vector3d to_ground =
                scn_.environment.body_position(scn_.comms.ground_station_body, t_).v -
                inertial_position();
            cmd.target_q = point_axis_at(scn_.vehicle.antenna_axis.v, to_ground);
            set_attitude_target(cmd);
            break;
        }
        case TaskKind::Desaturate: {
            desat_ = desaturate(att_, scn_.vehicle.inertia, scn_.vehicle.thrusters,
                                scn_.executive.events.wheel_rate_threshold_rad_s,
                                scn_.dt_s);
            desat_idx_ = 0;
            desat_active_ = !desat_.empty();
            if (!desat_active_) {
                exec_.queue().complete(task);
                exec_.queue().purge_done();
            }
            break;
        }
    }
}

// Pointing targets drift as the geometry evolves (Earth moves about a
// quarter degree per window against a 0.1 degree beam), so long-running
// tasks re-aim periodically.
void SimEngine::refresh_active_target(Task& task) {
    if (t_ - last_task_refresh_ < scn_.attitude.pointing_refresh_s) return;
    last_task_refresh_ = t_;
    switch (task.kind) {
        case TaskKind::Recharge: {
            Pose pose{InertialVec(inertial_position()), BodyToInertial(att_.q)};
            set_attitude_target(charging_attitude(
                pose, scn_.power.arrays, scn_.environment.sun_constants(),
                scn_.environment.sun_position(t_),
                InertialVec(target_body_direction()),
                scn_.vehicle.instrument_axis, scn_.executive.heuristic_weight));
            break;
        }
        case TaskKind::Downlink: {
            AttitudeCommand cmd;
            cmd.mode = AttitudeMode::Downlink;
            Eigen::Vector3d to_ground =
                scn_.environment.body_position(scn_.comms.ground_station_body, t_).v -
                inertial_position();
            cmd.target_q = point_axis_at(scn_.vehicle.antenna_axis.v, to_ground);
            set_attitude_target(cmd);
            break;
        }
        case TaskKind::ExecuteTcm:   // burn direction is fixed at plan time
        case TaskKind::Desaturate:
            break;
    }
}

void SimEngine::run_executive() {
    check_active_completion();

    if (scn_.tcm.enabled && t_ - last_tcm_check_ >= scn_.tcm.check_period_s) {
        double miss = predicted_miss_distance();
        miss_valid_ = miss >= 0.0;
        predicted_miss_m_ = miss_valid_ ? miss : 0.0;
        last_tcm_check_ = t_;
    }

    StateSnapshot snap;
    snap.t = t_;
    snap.soc = soc_;
    snap.predicted_miss_m = predicted_miss_m_;
    snap.miss_valid = miss_valid_;
    snap.buffer_fill_bytes = buffer_.fill_bytes;
    snap.ground_window_visible = ground_window_visible(t_);
    snap.max_wheel_rate_rad_s =
        att_.wheel_rates.size() > 0 ? att_.wheel_rates.cwiseAbs().maxCoeff() : 0.0;

    Task* active = exec_.step(snap);
    if (active && active->seq != last_active_seq_) {
        last_active_seq_ = active->seq;
        if (started_seqs_.insert(active->seq).second)
            summary_.tasks_started[task_kind_name(active->kind)]++;
        last_task_refresh_ = t_;
        dispatch_new_task(*active);
    } else if (active) {
        refresh_active_target(*active);
    } else {
        last_active_seq_ = static_cast<std::uint64_t>(-1);
        refresh_default_pointing(false);
    }

    // A planned burn starts once the attitude is aligned.
    if (pending_burn_ && !burn_) {
        Task* act = exec_.queue().active();
        if (act && act->kind == TaskKind::ExecuteTcm &&
            attitude_error_angle(att_.q, current_cmd_.target_q) < kBurnAlignTolRad) {
            double duration = pending_burn_->duration();
            burn_ = *pending_burn_;
            burn_->start_s = t_;
            burn_->stop_s = t_ + duration;
        }
    }
}

ActuatorCommand SimEngine::attitude_control_step(const Eigen::Vector3d& t_d) {
    (void)t_d;
    ActuatorCommand act = ActuatorCommand::none(scn_.vehicle.inertia);
    last_u_norm_ = 0.0;
    last_alloc_saturated_ = false;

    Task* active = exec_.queue().active();
    if (desat_active_ && active && active->kind == TaskKind::Desaturate) {
        if (desat_idx_ < desat_.steps.size()) {
            const DesatStep& s = desat_.steps[desat_idx_++];
            act.wheel_accel = s.wheel_accel;
            act.thruster_torque = s.thruster_torque;
        }
        return act;
    }

    const AttitudeCommand& cmd = current_command();
    if (slew_ && slew_idx_ < slew_->commands.size()) ++slew_idx_;

    Eigen::Vector3d u =
        tracking_controller(att_, cmd, gains_, scn_.vehicle.inertia);
    last_u_norm_ = u.norm();
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            Allocation alloc =
                allocate_actuators(u, scn_.vehicle.inertia, scn_.vehicle.thrusters, att_);
            act.wheel_accel = alloc.wheel_accel;
            act.thruster_torque = alloc.thruster_torque;
            return act;
        } catch (const SaturationError& e) {
            last_alloc_saturated_ = true;
            u *= 0.9 * e.achievable_fraction();
        }
    }
    // Still infeasible: command what the wheels alone can do safely.
    act = ActuatorCommand::none(scn_.vehicle.inertia);
    return act;
}

void SimEngine::integrate(const ActuatorCommand& act) {
    att_ = step_attitude(att_, act, last_t_d_, scn_.vehicle.inertia, scn_.dt_s,
                         scn_.attitude.max_rotation_per_step_rad);

    auto thrust = [&](double ts) {
        return (burn_ && burn_->active(ts)) ? burn_->thrust_n
                                            : Eigen::Vector3d::Zero();
    };
    PropagateOptions opt;
    opt.switch_centers = true;
    opt.include_srp = true;
    auto trace = propagate(nav_, thrust, t_, scn_.dt_s, scn_.dt_s, att_.q,
                           scn_.environment, force_model_, opt);
    nav_ = trace.back().state;

    if (burn_) {
        double overlap = std::max(
            0.0, std::min(burn_->stop_s, t_ + scn_.dt_s) - std::max(burn_->start_s, t_));
        cum_dv_ += burn_->thrust_n.norm() * overlap / scn_.vehicle.mass_kg;
    }
}

void SimEngine::update_power() {
    double t_new = t_ + scn_.dt_s;
    Pose pose{InertialVec(nav_.position_m +
                          scn_.environment.body_position(nav_.center_body, t_new).v),
              BodyToInertial(att_.q)};
    InertialVec sun_pos = scn_.environment.sun_position(t_new);

    double p_solar = 0.0;
    if (scn_.power.high_fidelity) {
        double h = irradiance((pose.position - sun_pos).norm(),
                              scn_.environment.sun_constants());
        for (const SolarArray& a : scn_.power.arrays)
            p_solar += mppt_power(a, h, incidence_angle(a, pose, sun_pos),
                                  scn_.power.temperature_k, t_new);
    } else {
        p_solar = solar_power_lf(scn_.power.arrays, pose, sun_pos,
                                 scn_.environment.sun_constants());
    }
    double p_net = net_power(p_solar, scn_.power.loads, t_new,
                             scn_.power.high_fidelity, scn_.power.bus_conversion_mu);

    double e_net = net_energy({{t_, prev_p_net_w_}, {t_new, p_net}});
    Battery batt = scn_.power.battery;
    SocUpdate upd = apply_soc_delta(soc_, soc_delta_lf(batt, e_net));
    soc_ = upd.soc;

    last_p_solar_ = p_solar;
    last_p_net_ = p_net;
    last_soc_clamped_ = upd.clamped;
    if (upd.clamped) summary_.soc_clamp_events++;
    prev_p_net_w_ = p_net;
    summary_.min_soc = std::min(summary_.min_soc, soc_);
}

void SimEngine::update_comms() {
    double t_new = t_ + scn_.dt_s;
    last_cn0_ = 0.0;
    last_rb_ = 0.0;
    last_reff_ = 0.0;
    last_drained_ = 0.0;

    last_dropped_ = buffer_.ingest(scn_.comms.ingest_bytes_per_s * scn_.dt_s);
    summary_.bytes_dropped += last_dropped_;

    last_window_ = ground_window_visible(t_new);
    if (!last_window_) return;

    Eigen::Vector3d r_inertial =
        nav_.position_m + scn_.environment.body_position(nav_.center_body, t_new).v;
    Eigen::Vector3d to_ground =
        scn_.environment.body_position(scn_.comms.ground_station_body, t_new).v -
        r_inertial;
    double range = to_ground.norm();
    if (!(range > 0.0)) return;
    Eigen::Vector3d antenna_i = att_.q * scn_.vehicle.antenna_axis.v;
    double pointing_err = std::acos(
        std::clamp(antenna_i.dot(to_ground / range), -1.0, 1.0));

    last_cn0_ = carrier_to_noise_db_hz(scn_.comms.link, range, pointing_err);
    DataRate rate = supportable_data_rate(last_cn0_, scn_.comms.link);
    last_rb_ = rate.bps;
    try {
        last_reff_ = arq_effective_rate_bps(rate.bps, last_cn0_, scn_.comms.arq);
    } catch (const RuntimeError&) {
        last_reff_ = 0.0;  // unusable link this step
    }

    Task* active = exec_.queue().active();
    if (active && active->kind == TaskKind::Downlink && last_reff_ > 0.0) {
        last_drained_ = downlink_session(buffer_, last_reff_, scn_.dt_s);
        summary_.bytes_downlinked += last_drained_;
    }
}

void SimEngine::append_telemetry() {
    double t_new = t_ + scn_.dt_s;
    TelemetryRecord r;
    r.t = t_new;
    r.position_m =
        nav_.position_m + scn_.environment.body_position(nav_.center_body, t_new).v;
    r.velocity_m_s =
        nav_.velocity_m_s + scn_.environment.body_velocity(nav_.center_body, t_new).v;
    r.distance_to_target_m =
        (r.position_m - scn_.environment.body_position(scn_.target_body, t_new).v)
            .norm();
    r.cumulative_dv_m_s = cum_dv_;
    r.q_coeffs = att_.q.coeffs();
    r.omega_rad_s = att_.omega;
    r.wheel_rates_rad_s = att_.wheel_rates;
    r.mode = attitude_mode_name(current_cmd_.mode);
    r.control_torque_nm = last_u_norm_;
    r.p_solar_w = last_p_solar_;
    r.p_net_w = last_p_net_;
    r.soc = soc_;
    r.soc_clamped = last_soc_clamped_;
    r.cn0_db_hz = last_cn0_;
    r.rb_bps = last_rb_;
    r.reff_bps = last_reff_;
    r.window_visible = last_window_;
    r.buffer_fill_bytes = buffer_.fill_bytes;
    r.bytes_drained = last_drained_;
    r.bytes_dropped = last_dropped_;
    Task* active = exec_.queue().active();
    r.active_task = active ? task_kind_name(active->kind) : "none";
    r.active_priority = active ? active->priority : -1;
    int min_open = exec_.queue().min_open_priority();
    r.min_open_priority =
        min_open == std::numeric_limits<int>::max() ? -1 : min_open;
    r.queue_depth = exec_.queue().open_count();
    r.thrusting = burn_ && burn_->active(t_new - 0.5 * scn_.dt_s);
    r.alloc_saturated = last_alloc_saturated_;
    writer_.append(r);

    if (active && active->kind == TaskKind::Recharge &&
        summary_.first_recharge_t_s < 0.0)
        summary_.first_recharge_t_s = t_;
}

namespace {

// Ground-truth fingerprint: only the integration phase may change it.
struct TruthMark {
    Eigen::Vector3d r, v;
    Eigen::Vector4d q;
    Eigen::Vector3d w;

    static TruthMark of(const NavState& nav, const AttitudeState& att) {
        return {nav.position_m, nav.velocity_m_s, att.q.coeffs(), att.omega};
    }
    bool operator==(const TruthMark& o) const {
        return r == o.r && v == o.v && q == o.q && w == o.w;
    }
};

}  // namespace

void SimEngine::step() {
    try {
        DisturbanceTorques dist = environment_torques();
        last_t_d_ = dist.total;

        TruthMark before = TruthMark::of(nav_, att_);
        run_executive();
        ActuatorCommand act = attitude_control_step(last_t_d_);
        if (!(TruthMark::of(nav_, att_) == before))
            throw RuntimeError("executive/control phase mutated ground truth");

        integrate(act);

        TruthMark integrated = TruthMark::of(nav_, att_);
        update_power();
        update_comms();
        append_telemetry();
        if (!(TruthMark::of(nav_, att_) == integrated))
            throw RuntimeError("power/comms phase mutated ground truth");

        t_ += scn_.dt_s;
        ++step_index_;
    } catch (const SimError&) {
        throw;
    } catch (const std::exception& e) {
        throw RuntimeError("step " + std::to_string(step_index_) + " (t=" +
                           std::to_string(t_) + "): " + e.what());
    }
}

RunSummary SimEngine::run() {
    while (!done()) {
        try {
            step();
        } catch (const SimError& e) {
            throw RuntimeError("run halted at step " + std::to_string(step_index_) +
                               " (t=" + std::to_string(t_) + "): " + e.what());
        }
    }
    summary_.steps = step_index_;
    summary_.final_distance_m = distance_to_target();
    summary_.final_soc = soc_;
    summary_.total_dv_m_s = cum_dv_;
    summary_.telemetry_hash = writer_.content_hash();
    return summary_;
}

}  // namespace ssim
