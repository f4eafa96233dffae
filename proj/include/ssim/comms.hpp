#ifndef SSIM_COMMS_HPP
#define SSIM_COMMS_HPP

#include <cstdint>
#include <utility>
#include <vector>

namespace ssim {

/// Boltzmann's constant in dBJ/K as used in link budgets.
inline constexpr double kBoltzmannDbJ = -228.6;

/**
 * Deterministic link-budget parameters. EIRP is derived from the
 * transmit power, antenna gain, and line loss; losses beyond free-space
 * and pointing (atmospheric, polarization, implementation) are a
 * configured lump sum.
 */
struct LinkBudget {
    double tx_power_w = 50.0;
    double tx_gain_db = 28.1;
    double line_loss_db = 1.0;
    double frequency_hz = 8.45e9;
    double beamwidth_3db_rad = 0.1 * 3.14159265358979323846 / 180.0;
    double gt_db_k = 50.0;         // receiver G/T (ground asset, non-paper)
    double other_losses_db = 0.0;  // atmospheric + polarization + implementation
    double margin_db = 3.0;        // M
    double required_eb_n0_db = 4.2;
    double coding_gain_db = 7.3;
    double data_rate_limit_bps = 8e6;  // 1 MB/s

    double eirp_dbw() const;

    void validate() const;
};

/// Free-space path loss 20 log10(4 pi d / lambda), dB.
double free_space_loss_db(double range_m, double frequency_hz);

/// Gaussian-beam pointing loss 12 (err / beamwidth)^2, dB.
double pointing_loss_db(double pointing_error_rad, double beamwidth_3db_rad);

/**
 * Received carrier-to-noise density ratio, dB-Hz:
 *   C/N0 = EIRP + G/T - L - k,
 * with L recomputed from the range (free-space), the pointing error
 * (Gaussian beam), and the configured lump losses.
 */
double carrier_to_noise_db_hz(const LinkBudget& budget, double range_m,
                              double pointing_error_rad = 0.0);

struct DataRate {
    double db_hz;    // before the clamp
    double bps;      // linear, clamped to the configured limit
    bool clamped;
};

/**
 * Supportable data rate: R_b(dB-Hz) = C/N0 - Eb/N0 + coding gain - M,
 * converted to bps and clamped to the data-rate limit.
 */
DataRate supportable_data_rate(double cn0_db_hz, const LinkBudget& budget);

/**
 * Go-Back-N ARQ configuration: window size, acknowledgment-channel
 * frame error rate, and the FER waterfall f(Eb/N0) as a monotone
 * non-increasing table.
 */
struct ArqConfig {
    int window_frames = 1;   // N
    double ack_fer = 0.0;    // P_ack in [0, 1)
    std::vector<std::pair<double, double>> fer_curve;  // (Eb/N0 dB, FER)

    double fer_at(double eb_n0_db) const;

    void validate() const;

    /// Logistic waterfall calibrated to FER 1e-5 at the operating point.
    static ArqConfig with_default_curve(int window, double ack_fer,
                                        double operating_eb_n0_db);
};

/**
 * Effective Go-Back-N throughput:
 *   R_eff = R_b / (1 + N (1 - (1-f)(1-P_ack)) / ((1-f)(1-P_ack))),
 * with f evaluated at C/N0 - R_b(dB). Errors when the link is unusable
 * ((1-f)(1-P_ack) = 0). Always <= R_b.
 */
double arq_effective_rate_bps(double rb_bps, double cn0_db_hz,
                              const ArqConfig& cfg);

/**
 * Onboard science/engineering data store. Ingest beyond capacity drops
 * data and flags the overflow.
 */
struct DataBuffer {
    double capacity_bytes = 1e9;
    double fill_bytes = 0.0;

    /// Returns bytes dropped (0 when it all fit).
    double ingest(double bytes);

    /// Remove up to the requested bytes; returns bytes actually drained.
    double drain(double bytes);

    void validate() const;
};

/// Drain a buffer at the effective rate for a session; returns bytes sent.
double downlink_session(DataBuffer& buffer, double r_eff_bps, double duration_s);

}  // namespace ssim

#endif  // SSIM_COMMS_HPP
