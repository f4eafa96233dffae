#ifndef SSIM_POWER_HPP
#define SSIM_POWER_HPP

#include <string>
#include <utility>
#include <vector>

#include "ssim/environment.hpp"
#include "ssim/frames.hpp"

namespace ssim {

/**
 * Tabulated current-voltage characteristic of a solar array.
 * Currents strictly increasing, voltages non-increasing. Loads beyond
 * the short-circuit current read as zero volts.
 */
struct IvcTable {
    std::vector<double> current_a;
    std::vector<double> voltage_v;

    double short_circuit_current() const { return current_a.back(); }
    double open_circuit_voltage() const { return voltage_v.front(); }

    /// Linear interpolation; clamps to 0 V beyond the last row.
    double voltage_at(double i_load) const;

    void validate() const;

    /// Single-knee synthetic curve shipped as the config default.
    static IvcTable default_single_knee();
};

/**
 * One solar array: LF geometric parameters plus the HF extras
 * (occlusion, degradation, temperature derate, design constant, IVC).
 */
struct SolarArray {
    double area_m2 = 0.0;
    double cell_efficiency = 0.0;     // e_j
    double packing_fraction = 0.0;    // p_j
    BodyVec normal{1.0, 0.0, 0.0};    // unit, spacecraft frame
    BodyVec centroid{0.0, 0.0, 0.0};  // m, spacecraft frame

    double occlusion = 1.0;               // O, (0, 1]
    double degradation_rate_per_s = 0.0;  // L_d(t) = 1 - rate * t, floored at 0
    double temp_coeff_per_k = 0.0;        // xi = 1 - k_T (T - T_ref)
    double temp_ref_k = 298.15;
    double design_constant = 1.0;         // eta
    double irradiance_ref_w_m2 = 1361.0;  // H_ref for IVC illumination scaling
    IvcTable ivc = IvcTable::default_single_knee();

    double degradation_at(double elapsed_s) const;

    void validate() const;
};

/// A power-consuming component with a boolean activity schedule.
struct PowerLoad {
    std::string id;
    double rated_w = 0.0;  // P_c
    bool always_on = false;
    std::vector<std::pair<double, double>> active_windows_s;  // [start, end)

    bool active(double t) const;

    void validate() const;
};

/**
 * Battery bank state and efficiencies. capacity_wh is the LF constant
 * maximum; the HF maximum fades linearly with time.
 */
struct Battery {
    double capacity_wh = 80.0;       // \hat E_max
    double charge_eff = 0.95;        // e_b+
    double discharge_eff = 0.95;     // e_b-
    double soc = 0.5;                // Q_b in [0, 1]
    double fade_rate_per_s = 0.0;    // E_max(t) = capacity * (1 - rate * t)

    double capacity_wh_at(double elapsed_s) const;

    void validate() const;
};

/**
 * Incidence angle of sunlight on an array, radians in [0, pi]:
 * the angle between the array-to-Sun direction and the rotated normal.
 * Zero means face-on.
 */
double incidence_angle(const SolarArray& array, const Pose& pose,
                       const InertialVec& sun_position);

/**
 * Low-fidelity generated power: sum_j H(d) a_j e_j p_j cos(theta_j),
 * with back-lit arrays (cos < 0) contributing zero.
 */
double solar_power_lf(const std::vector<SolarArray>& arrays, const Pose& pose,
                      const InertialVec& sun_position, const SolarConstants& sun);

/**
 * IVC output voltage under load: the base table scaled by
 * xi(T) * O * L_d(t) * eta * (H cos(theta) / H_ref).
 * Monotone non-increasing in the load current.
 */
double solar_voltage_hf(const SolarArray& array, double irradiance_w_m2,
                        double theta_rad, double temperature_k, double i_load_a,
                        double elapsed_s = 0.0);

/**
 * Maximum-power-point output: max over I_load of V(I_load) * I_load,
 * via a coarse scan of the scaled IVC followed by golden-section
 * refinement. Ties break toward lower current.
 */
double mppt_power(const SolarArray& array, double irradiance_w_m2,
                  double theta_rad, double temperature_k, double elapsed_s = 0.0);

/**
 * Net instantaneous power. LF: P_solar - sum of active loads.
 * HF: mu * P_solar - sum of active loads (bus conversion loss).
 */
double net_power(double p_solar_w, const std::vector<PowerLoad>& loads, double t,
                 bool high_fidelity = false, double bus_conversion_mu = 1.0);

/**
 * Energy surplus/deficit in Wh: trapezoidal integral of a (t, P) trace
 * divided by 3600. Errors on an empty trace.
 */
double net_energy(const std::vector<std::pair<double, double>>& power_trace_w);

/// Result of applying a SoC delta: new value plus a saturation flag.
struct SocUpdate {
    double soc;
    bool clamped;
};

/**
 * LF SoC change for a net energy: surplus charges at e_b+, deficit
 * discharges at 1/e_b-. Returns the unclamped delta.
 */
double soc_delta_lf(const Battery& battery, double e_net_wh);

/// Clamp soc + delta into [0, 1], flagging saturation.
SocUpdate apply_soc_delta(double soc, double delta);

/**
 * Coulomb-counting SoC change: integral of battery current over the
 * window divided by the time-varying capacity (converted to Ah at the
 * bus voltage).
 */
double soc_delta_coulomb(const Battery& battery,
                         const std::vector<std::pair<double, double>>& current_trace_a,
                         double bus_voltage_v, double elapsed_s);

}  // namespace ssim

#endif  // SSIM_POWER_HPP
