#include <doctest.h>

#include <cmath>

#include "ssim/comms.hpp"
#include "ssim/math.hpp"
#include "ssim/error.hpp"

using namespace ssim;

namespace {

// Budget matching the spacecraft design values.
LinkBudget reference_budget() {
    LinkBudget b;
    b.tx_power_w = 50.0;
    b.tx_gain_db = 28.1;
    b.line_loss_db = 1.0;
    b.gt_db_k = 40.0;
    b.other_losses_db = 0.0;
    b.margin_db = 3.0;
    b.required_eb_n0_db = 4.2;
    b.coding_gain_db = 0.0;
    return b;
}

// Range at which the free-space loss alone equals the target dB.
double range_for_loss(double loss_db, double frequency_hz) {
    double wavelength = 299792458.0 / frequency_hz;
    return wavelength * std::pow(10.0, loss_db / 20.0) / (4.0 * kPi);
}

}  // namespace

TEST_CASE("carrier-to-noise reproduces the worked budget") {
    LinkBudget b = reference_budget();

    // EIRP = 10 log10(50) + 28.1 - 1 = 44.09 dBW.
    CHECK(b.eirp_dbw() == doctest::Approx(44.0897).epsilon(1e-5));

    // L = 265 dB total (all free-space here): C/N0 = 47.69 dB-Hz.
    double d = range_for_loss(265.0, b.frequency_hz);
    double cn0 = carrier_to_noise_db_hz(b, d, 0.0);
    double expected = b.eirp_dbw() + 40.0 - 265.0 + 228.6;
    CHECK(cn0 == doctest::Approx(expected).epsilon(1e-9));
    CHECK(cn0 == doctest::Approx(47.69).epsilon(2e-4));

    // Doubling the range adds 20 log10(2) dB of free-space loss.
    double cn0_far = carrier_to_noise_db_hz(b, 2.0 * d, 0.0);
    CHECK(cn0 - cn0_far == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-9));

    CHECK_THROWS_AS(carrier_to_noise_db_hz(b, 0.0, 0.0), RuntimeError);
}

TEST_CASE("pointing loss model") {
    LinkBudget b = reference_budget();
    CHECK(pointing_loss_db(0.0, b.beamwidth_3db_rad) == 0.0);
    // Half-beamwidth error costs 3 dB in the Gaussian model.
    CHECK(pointing_loss_db(0.5 * b.beamwidth_3db_rad, b.beamwidth_3db_rad) ==
          doctest::Approx(3.0).epsilon(1e-12));

    // C/N0 strictly decreasing in range and pointing error.
    double d = range_for_loss(260.0, b.frequency_hz);
    double prev = 1e99;
    for (double err = 0.0; err < 3e-3; err += 5e-4) {
        double cn0 = carrier_to_noise_db_hz(b, d, err);
        CHECK(cn0 < prev);
        prev = cn0;
    }
}

TEST_CASE("supportable data rate and clamping") {
    LinkBudget b = reference_budget();

    // 47.69 - 4.2 - 3 = 40.49 dB-Hz ~ 11194 bps.
    DataRate r = supportable_data_rate(47.6897, b);
    CHECK(r.db_hz == doctest::Approx(40.4897).epsilon(1e-9));
    CHECK(r.bps == doctest::Approx(11193.9).epsilon(1e-4));
    CHECK(!r.clamped);

    // Coding gain multiplies the linear rate by 10^0.73.
    LinkBudget coded = b;
    coded.coding_gain_db = 7.3;
    DataRate rc = supportable_data_rate(47.6897, coded);
    CHECK(rc.bps / r.bps == doctest::Approx(std::pow(10.0, 0.73)).epsilon(1e-9));

    // Raising the margin by x dB divides the linear rate by 10^(x/10).
    LinkBudget tight = b;
    tight.margin_db = 5.5;
    DataRate rm = supportable_data_rate(47.6897, tight);
    CHECK(r.bps / rm.bps == doctest::Approx(std::pow(10.0, 0.25)).epsilon(1e-9));

    // Rates above the limit clamp to exactly 1 MB/s = 8e6 bps.
    DataRate big = supportable_data_rate(82.0, b);
    CHECK(big.clamped);
    CHECK(big.bps == 8e6);
}

TEST_CASE("go-back-n effective rate") {
    // Error-free channel: R_eff = R_b.
    ArqConfig clean;
    clean.window_frames = 4;
    clean.ack_fer = 0.0;
    CHECK(arq_effective_rate_bps(1e4, 50.0, clean) == doctest::Approx(1e4));

    // f = 0, P_ack = 0.5, N = 1: denominator = 1 + 0.5/0.5 = 2.
    ArqConfig half;
    half.window_frames = 1;
    half.ack_fer = 0.5;
    CHECK(arq_effective_rate_bps(1e4, 50.0, half) ==
          doctest::Approx(5e3).epsilon(1e-12));

    // Monotone non-increasing in N at fixed error rates.
    ArqConfig lossy = ArqConfig::with_default_curve(1, 0.05, 4.2);
    lossy.validate();
    double prev = 1e99;
    for (int n = 1; n <= 64; ++n) {
        lossy.window_frames = n;
        double reff = arq_effective_rate_bps(1e4, 45.0, lossy);
        CHECK(reff <= prev + 1e-12);
        prev = reff;
    }

    // Unusable link: f = 1 kills the denominator.
    ArqConfig dead;
    dead.fer_curve = {{0.0, 1.0}, {100.0, 1.0}};
    CHECK_THROWS_AS(arq_effective_rate_bps(1e4, 50.0, dead), RuntimeError);
}

TEST_CASE("arq default curve calibration") {
    ArqConfig cfg = ArqConfig::with_default_curve(8, 0.01, 4.2);
    cfg.validate();
    // FER at the operating point is the calibrated 1e-5.
    CHECK(cfg.fer_at(4.2) == doctest::Approx(1e-5).epsilon(0.05));
    // Waterfall: much worse below, vanishing above.
    CHECK(cfg.fer_at(-10.0) > 0.99);
    CHECK(cfg.fer_at(12.0) < 1e-8);
}

TEST_CASE("arq never exceeds the raw rate across a parameter sweep") {
    ArqConfig cfg = ArqConfig::with_default_curve(1, 0.0, 4.2);
    int checked = 0;
    for (int n = 1; n <= 10; ++n)
        for (int ai = 0; ai < 10; ++ai)
            for (int ci = 0; ci < 10; ++ci) {
                cfg.window_frames = n;
                cfg.ack_fer = 0.09 * ai;
                double cn0 = 35.0 + 2.0 * ci;
                double rb = 1e4;
                double reff = arq_effective_rate_bps(rb, cn0, cfg);
                CHECK(reff <= rb * (1.0 + 1e-12));
                bool error_free = cfg.fer_at(cn0 - 40.0) == 0.0 && ai == 0;
                if (!error_free) CHECK(reff < rb);
                ++checked;
            }
    CHECK(checked == 1000);
}

TEST_CASE("data buffer accounting") {
    DataBuffer buf;
    buf.capacity_bytes = 1000.0;
    buf.validate();

    CHECK(buf.ingest(400.0) == 0.0);
    CHECK(buf.fill_bytes == 400.0);
    // Overflow drops the excess.
    CHECK(buf.ingest(900.0) == doctest::Approx(300.0));
    CHECK(buf.fill_bytes == 1000.0);

    // Empty buffer is unchanged by a session.
    DataBuffer empty;
    CHECK(downlink_session(empty, 8e5, 10.0) == 0.0);
    CHECK(empty.fill_bytes == 0.0);

    // 1e6 bytes at 8e5 bps for 10 s: exactly drained.
    DataBuffer fill;
    fill.fill_bytes = 1e6;
    CHECK(downlink_session(fill, 8e5, 10.0) == doctest::Approx(1e6));
    CHECK(fill.fill_bytes == 0.0);

    // Drain never exceeds the fill.
    DataBuffer small;
    small.fill_bytes = 10.0;
    CHECK(downlink_session(small, 8e9, 100.0) == doctest::Approx(10.0));
    CHECK(small.fill_bytes == 0.0);

    CHECK_THROWS_AS(downlink_session(small, 1.0, -1.0), RuntimeError);
}
