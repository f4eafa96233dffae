#include "ssim/comms.hpp"

#include <algorithm>
#include <cmath>

#include "ssim/error.hpp"
#include "ssim/math.hpp"

namespace ssim {

double LinkBudget::eirp_dbw() const {
    return 10.0 * std::log10(tx_power_w) + tx_gain_db - line_loss_db;
}

void LinkBudget::validate() const {
    if (!(tx_power_w > 0.0)) throw ConfigError("link: tx power must be positive");
    if (!(frequency_hz > 0.0)) throw ConfigError("link: frequency must be positive");
    if (!(beamwidth_3db_rad > 0.0))
        throw ConfigError("link: beamwidth must be positive");
    if (margin_db < 0.0) throw ConfigError("link: margin must be non-negative");
    if (other_losses_db < 0.0)
        throw ConfigError("link: lump losses must be non-negative");
    if (!(data_rate_limit_bps > 0.0))
        throw ConfigError("link: data-rate limit must be positive");
}

double free_space_loss_db(double range_m, double frequency_hz) {
    if (!(range_m > 0.0))
        throw RuntimeError("free_space_loss: range must be positive");
    double wavelength = 299792458.0 / frequency_hz;
    return 20.0 * std::log10(4.0 * kPi * range_m / wavelength);
}

double pointing_loss_db(double pointing_error_rad, double beamwidth_3db_rad) {
    double ratio = pointing_error_rad / beamwidth_3db_rad;
    return 12.0 * ratio * ratio;
}

double carrier_to_noise_db_hz(const LinkBudget& budget, double range_m,
                              double pointing_error_rad) {
    double losses = free_space_loss_db(range_m, budget.frequency_hz) +
                    pointing_loss_db(pointing_error_rad, budget.beamwidth_3db_rad) +
                    budget.other_losses_db;
    return budget.eirp_dbw() + budget.gt_db_k - losses - kBoltzmannDbJ;
}

DataRate supportable_data_rate(double cn0_db_hz, const LinkBudget& budget) {
    if (!std::isfinite(cn0_db_hz))
        throw RuntimeError("supportable_data_rate: non-finite C/N0");
    double rb_db = cn0_db_hz - budget.required_eb_n0_db + budget.coding_gain_db -
                   budget.margin_db;
    double bps = std::pow(10.0, rb_db / 10.0);
    bool clamped = bps > budget.data_rate_limit_bps;
    return {rb_db, clamped ? budget.data_rate_limit_bps : bps, clamped};
}

double ArqConfig::fer_at(double eb_n0_db) const {
    if (fer_curve.empty()) return 0.0;
    if (eb_n0_db <= fer_curve.front().first) return fer_curve.front().second;
    if (eb_n0_db >= fer_curve.back().first) return fer_curve.back().second;
    for (std::size_t k = 1; k < fer_curve.size(); ++k) {
        if (eb_n0_db <= fer_curve[k].first) {
            auto [x0, y0] = fer_curve[k - 1];
            auto [x1, y1] = fer_curve[k];
            return y0 + (y1 - y0) * (eb_n0_db - x0) / (x1 - x0);
        }
    }
    return fer_curve.back().second;
}

void ArqConfig::validate() const {
    if (window_frames < 1) throw ConfigError("arq: window must be >= 1");
    if (ack_fer < 0.0 || ack_fer >= 1.0)
        throw ConfigError("arq: ack FER must be in [0, 1)");
    for (std::size_t k = 0; k < fer_curve.size(); ++k) {
        if (fer_curve[k].second < 0.0 || fer_curve[k].second > 1.0)
            throw ConfigError("arq: FER values must be in [0, 1]");
        if (k > 0) {
            if (fer_curve[k].first <= fer_curve[k - 1].first)
                throw ConfigError("arq: FER curve abscissae must increase");
            if (fer_curve[k].second > fer_curve[k - 1].second)
                throw ConfigError("arq: FER curve must be non-increasing");
        }
    }
}

ArqConfig ArqConfig::with_default_curve(int window, double ack_fer,
                                        double operating_eb_n0_db) {
    // Logistic waterfall, one decade per dB, pinned to 1e-5 at the
    // operating point.
    const double slope = std::log(10.0);  // per dB
    double center = operating_eb_n0_db - std::log(1e5 - 1.0) / slope;
    ArqConfig cfg;
    cfg.window_frames = window;
    cfg.ack_fer = ack_fer;
    for (double x = center - 10.0; x <= center + 14.0 + 1e-9; x += 0.25)
        cfg.fer_curve.emplace_back(x, 1.0 / (1.0 + std::exp(slope * (x - center))));
    return cfg;
}

double arq_effective_rate_bps(double rb_bps, double cn0_db_hz,
                              const ArqConfig& cfg) {
    if (!(rb_bps > 0.0))
        throw RuntimeError("arq_effective_rate: data rate must be positive");
    double rb_db = 10.0 * std::log10(rb_bps);
    double f = cfg.fer_at(cn0_db_hz - rb_db);
    double good = (1.0 - f) * (1.0 - cfg.ack_fer);
    if (!(good > 0.0))
        throw RuntimeError("arq_effective_rate: link unusable (zero throughput)");
    double denom = 1.0 + cfg.window_frames * (1.0 - good) / good;
    return rb_bps / denom;
}

double DataBuffer::ingest(double bytes) {
    if (bytes < 0.0) throw RuntimeError("buffer: negative ingest");
    double space = capacity_bytes - fill_bytes;
    double stored = std::min(bytes, space);
    fill_bytes += stored;
    return bytes - stored;
}

double DataBuffer::drain(double bytes) {
    if (bytes < 0.0) throw RuntimeError("buffer: negative drain");
    double sent = std::min(bytes, fill_bytes);
    fill_bytes -= sent;
    return sent;
}

void DataBuffer::validate() const {
    if (!(capacity_bytes > 0.0))
        throw ConfigError("buffer: capacity must be positive");
    if (fill_bytes < 0.0 || fill_bytes > capacity_bytes)
        throw ConfigError("buffer: fill outside [0, capacity]");
}

double downlink_session(DataBuffer& buffer, double r_eff_bps, double duration_s) {
    if (duration_s < 0.0)
        throw RuntimeError("downlink_session: negative duration");
    return buffer.drain(r_eff_bps * duration_s / 8.0);
}

}  // namespace ssim
