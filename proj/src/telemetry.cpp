#include "ssim/telemetry.hpp"

#include <cstdio>
#include <fstream>

#include "ssim/error.hpp"

namespace ssim {

namespace {

// Shortest round-trippable decimal form, locale-independent.
void append_num(std::string& out, double v) {
    char tmp[32];
    std::snprintf(tmp, sizeof(tmp), "%.17g", v);
    out += tmp;
}

}  // namespace

TelemetryWriter::TelemetryWriter(int n_wheels) : n_wheels_(n_wheels) {
    buf_ += "# ssim-telemetry-schema ";
    buf_ += std::to_string(kTelemetrySchemaVersion);
    buf_ += '\n';
    buf_ +=
        "t,px,py,pz,vx,vy,vz,dist_target,cum_dv,qx,qy,qz,qw,wx,wy,wz";
    for (int i = 0; i < n_wheels_; ++i) buf_ += ",rw" + std::to_string(i);
    buf_ +=
        ",mode,u_ctrl,p_solar,p_net,soc,soc_clamped,cn0,rb,reff,window,"
        "buffer,drained,dropped,active_task,active_priority,min_open_priority,"
        "queue_depth,thrusting,saturated\n";
}

void TelemetryWriter::append(const TelemetryRecord& r) {
    std::string& b = buf_;
    append_num(b, r.t);
    for (int i = 0; i < 3; ++i) { b += ','; append_num(b, r.position_m(i)); }
    for (int i = 0; i < 3; ++i) { b += ','; append_num(b, r.velocity_m_s(i)); }
    b += ','; append_num(b, r.distance_to_target_m);
    b += ','; append_num(b, r.cumulative_dv_m_s);
    for (int i = 0; i < 4; ++i) { b += ','; append_num(b, r.q_coeffs(i)); }
    for (int i = 0; i < 3; ++i) { b += ','; append_num(b, r.omega_rad_s(i)); }
    for (int i = 0; i < n_wheels_; ++i) {
        b += ',';
        append_num(b, i < r.wheel_rates_rad_s.size() ? r.wheel_rates_rad_s(i) : 0.0);
    }
    b += ',' + r.mode;
    b += ','; append_num(b, r.control_torque_nm);
    b += ','; append_num(b, r.p_solar_w);
    b += ','; append_num(b, r.p_net_w);
    b += ','; append_num(b, r.soc);
    b += r.soc_clamped ? ",1" : ",0";
    b += ','; append_num(b, r.cn0_db_hz);
    b += ','; append_num(b, r.rb_bps);
    b += ','; append_num(b, r.reff_bps);
    b += r.window_visible ? ",1" : ",0";
    b += ','; append_num(b, r.buffer_fill_bytes);
    b += ','; append_num(b, r.bytes_drained);
    b += ','; append_num(b, r.bytes_dropped);
    b += ',' + r.active_task;
    b += ',' + std::to_string(r.active_priority);
    b += ',' + std::to_string(r.min_open_priority);
    b += ',' + std::to_string(r.queue_depth);
    b += r.thrusting ? ",1" : ",0";
    b += r.alloc_saturated ? ",1" : ",0";
    b += '\n';
    ++rows_;
}

std::uint64_t TelemetryWriter::content_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : buf_) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void TelemetryWriter::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot write telemetry file '" + path + "'");
    out << buf_;
}

nlohmann::json RunSummary::to_json() const {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["duration_s"] = duration_s;
    j["steps"] = steps;
    j["initial_distance_m"] = initial_distance_m;
    j["final_distance_m"] = final_distance_m;
    j["min_soc"] = min_soc;
    j["final_soc"] = final_soc;
    j["total_dv_m_s"] = total_dv_m_s;
    j["bytes_downlinked"] = bytes_downlinked;
    j["bytes_dropped"] = bytes_dropped;
    j["soc_clamp_events"] = soc_clamp_events;
    j["tasks_started"] = tasks_started;
    j["tasks_completed"] = tasks_completed;
    j["first_recharge_t_s"] = first_recharge_t_s;
    j["telemetry_hash"] = telemetry_hash;
    return j;
}

void RunSummary::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot write summary file '" + path + "'");
    out << to_json().dump(2) << '\n';
}

}  // namespace ssim
