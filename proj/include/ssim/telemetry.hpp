#ifndef SSIM_TELEMETRY_HPP
#define SSIM_TELEMETRY_HPP

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

namespace ssim {

inline constexpr int kTelemetrySchemaVersion = 1;

/**
 * One row of the run telemetry: every subsystem's outputs at the end
 * of a step. Written as CSV with a fixed, documented column order.
 */
struct TelemetryRecord {
    double t = 0.0;

    // Navigation (heliocentric inertial).
    Eigen::Vector3d position_m = Eigen::Vector3d::Zero();
    Eigen::Vector3d velocity_m_s = Eigen::Vector3d::Zero();
    double distance_to_target_m = 0.0;
    double cumulative_dv_m_s = 0.0;

    // Attitude.
    Eigen::Vector4d q_coeffs = Eigen::Vector4d(0, 0, 0, 1);
    Eigen::Vector3d omega_rad_s = Eigen::Vector3d::Zero();
    Eigen::VectorXd wheel_rates_rad_s;
    std::string mode = "small-body-pointing";
    double control_torque_nm = 0.0;

    // Power.
    double p_solar_w = 0.0;
    double p_net_w = 0.0;
    double soc = 0.0;
    bool soc_clamped = false;

    // Comms.
    double cn0_db_hz = 0.0;
    double rb_bps = 0.0;
    double reff_bps = 0.0;
    bool window_visible = false;
    double buffer_fill_bytes = 0.0;
    double bytes_drained = 0.0;
    double bytes_dropped = 0.0;

    // Executive.
    std::string active_task = "none";
    int active_priority = -1;      // -1 when idle
    int min_open_priority = -1;    // -1 when the queue is empty
    int queue_depth = 0;
    bool thrusting = false;
    bool alloc_saturated = false;
};

/**
 * Streams telemetry rows as CSV into an in-memory buffer, for writing
 * and hashing. The first line carries the schema version.
 */
class TelemetryWriter {
public:
    explicit TelemetryWriter(int n_wheels);

    void append(const TelemetryRecord& r);

    const std::string& csv() const { return buf_; }
    std::size_t rows() const { return rows_; }

    /// FNV-1a hash of the CSV bytes (determinism checks).
    std::uint64_t content_hash() const;

    void write_file(const std::string& path) const;

private:
    std::string buf_;
    int n_wheels_;
    std::size_t rows_ = 0;
};

/// End-of-run roll-up written as summary.json.
struct RunSummary {
    int schema_version = kTelemetrySchemaVersion;
    double duration_s = 0.0;
    std::size_t steps = 0;
    double initial_distance_m = 0.0;
    double final_distance_m = 0.0;
    double min_soc = 1.0;
    double final_soc = 0.0;
    double total_dv_m_s = 0.0;
    double bytes_downlinked = 0.0;
    double bytes_dropped = 0.0;
    int soc_clamp_events = 0;
    std::map<std::string, int> tasks_started;
    std::map<std::string, int> tasks_completed;
    double first_recharge_t_s = -1.0;
    std::uint64_t telemetry_hash = 0;

    nlohmann::json to_json() const;
    void write_file(const std::string& path) const;
};

}  // namespace ssim

#endif  // SSIM_TELEMETRY_HPP
