#ifndef SSIM_ENGINE_HPP
#define SSIM_ENGINE_HPP

#include <cstddef>
#include <optional>
#include <set>

#include "ssim/attitude_control.hpp"
#include "ssim/scenario.hpp"
#include "ssim/telemetry.hpp"

namespace ssim {

/**
 * The deterministic time-stepping loop. Each step runs, in order:
 * environment disturbances, executive evaluate/schedule/dispatch,
 * attitude guidance/control/allocation, attitude and translational RK4
 * integration, power generation and SoC, comms rates and buffer, and a
 * telemetry append. Identical scenarios and seeds produce bit-identical
 * telemetry.
 */
class SimEngine {
public:
    explicit SimEngine(Scenario scenario);

    /// Advance one dt. Errors carry the step index and cause.
    void step();

    bool done() const { return step_index_ >= total_steps_; }

    /// Run to completion and produce the summary.
    RunSummary run();

    // Introspection (tests, CLI).
    double t() const { return t_; }
    std::size_t step_index() const { return step_index_; }
    const NavState& nav() const { return nav_; }
    const AttitudeState& attitude() const { return att_; }
    double soc() const { return soc_; }
    const DataBuffer& buffer() const { return buffer_; }
    Executive& executive() { return exec_; }
    const TelemetryWriter& writer() const { return writer_; }
    const Scenario& scenario() const { return scn_; }

    /// Ground-truth position in the inertial frame (not center-relative).
    Eigen::Vector3d inertial_position() const;
    double distance_to_target() const;

private:
    struct DisturbanceTorques {
        Eigen::Vector3d total = Eigen::Vector3d::Zero();
    };

    DisturbanceTorques environment_torques() const;
    void refresh_default_pointing(bool force);
    void refresh_active_target(Task& task);
    void run_executive();
    void dispatch_new_task(Task& task);
    void check_active_completion();
    ActuatorCommand attitude_control_step(const Eigen::Vector3d& t_d);
    void integrate(const ActuatorCommand& act);
    void update_power();
    void update_comms();
    void append_telemetry();

    void set_attitude_target(const AttitudeCommand& cmd);
    const AttitudeCommand& current_command();
    Eigen::Vector3d target_body_direction() const;
    NavState onboard_nav_estimate() const;
    bool ground_window_visible(double t) const;
    double predicted_miss_distance();

    Scenario scn_;
    VehicleForceModel force_model_;
    ControllerGains gains_;

    double t_ = 0.0;
    std::size_t step_index_ = 0;
    std::size_t total_steps_ = 0;

    NavState nav_;
    AttitudeState att_;
    double soc_ = 0.5;
    DataBuffer buffer_;
    double cum_dv_ = 0.0;

    Executive exec_;
    std::uint64_t last_active_seq_ = static_cast<std::uint64_t>(-1);
    std::set<std::uint64_t> started_seqs_;

    AttitudeCommand current_cmd_;
    std::optional<SlewProfile> slew_;
    std::size_t slew_idx_ = 0;
    double last_pointing_refresh_ = -1e18;
    double last_task_refresh_ = -1e18;

    std::optional<PropulsionCommand> pending_burn_;  // waiting for attitude
    std::optional<PropulsionCommand> burn_;
    DesatPlan desat_;
    std::size_t desat_idx_ = 0;
    bool desat_active_ = false;

    double last_tcm_check_ = -1e18;
    double predicted_miss_m_ = 0.0;
    bool miss_valid_ = false;

    double prev_p_net_w_ = 0.0;

    // Step products for telemetry.
    Eigen::Vector3d last_t_d_ = Eigen::Vector3d::Zero();
    double last_u_norm_ = 0.0;
    bool last_alloc_saturated_ = false;
    double last_p_solar_ = 0.0;
    double last_p_net_ = 0.0;
    bool last_soc_clamped_ = false;
    double last_cn0_ = 0.0;
    double last_rb_ = 0.0;
    double last_reff_ = 0.0;
    bool last_window_ = false;
    double last_drained_ = 0.0;
    double last_dropped_ = 0.0;

    TelemetryWriter writer_;
    RunSummary summary_;
};

}  // namespace ssim

#endif  // SSIM_ENGINE_HPP
