#include "ssim/power.hpp"

#include <algorithm>
#include <cmath>

#include "ssim/error.hpp"

namespace ssim {

double IvcTable::voltage_at(double i_load) const {
    if (i_load < 0.0)
        throw RuntimeError("ivc: negative load current");
    if (i_load >= current_a.back()) return 0.0;
    if (i_load <= current_a.front()) return voltage_v.front();
    auto hi = std::upper_bound(current_a.begin(), current_a.end(), i_load);
    std::size_t k = static_cast<std::size_t>(hi - current_a.begin());
    double i0 = current_a[k - 1], i1 = current_a[k];
    double v0 = voltage_v[k - 1], v1 = voltage_v[k];
    return v0 + (v1 - v0) * (i_load - i0) / (i1 - i0);
}

void IvcTable::validate() const {
    if (current_a.size() < 2 || current_a.size() != voltage_v.size())
        throw ConfigError("ivc: table needs >= 2 matched (current, voltage) rows");
    for (std::size_t k = 1; k < current_a.size(); ++k) {
        if (!(current_a[k] > current_a[k - 1]))
            throw ConfigError("ivc: currents must be strictly increasing");
        if (voltage_v[k] > voltage_v[k - 1])
            throw ConfigError("ivc: voltage must be non-increasing in current");
    }
    if (current_a.front() != 0.0)
        throw ConfigError("ivc: table must start at zero current");
}

IvcTable IvcTable::default_single_knee() {
    // V(I) = Voc (1 - (I/Isc)^9): flat shoulder, sharp knee near Isc.
    constexpr double voc = 32.0, isc = 8.0;
    IvcTable t;
    for (int k = 0; k <= 16; ++k) {
        double frac = k / 16.0;
        t.current_a.push_back(isc * frac);
        t.voltage_v.push_back(voc * (1.0 - std::pow(frac, 9.0)));
    }
    return t;
}

double SolarArray::degradation_at(double elapsed_s) const {
    return std::max(0.0, 1.0 - degradation_rate_per_s * elapsed_s);
}

void SolarArray::validate() const {
    if (!(area_m2 > 0.0)) throw ConfigError("solar array: area must be positive");
    auto in01 = [](double x) { return x > 0.0 && x <= 1.0; };
    if (!in01(cell_efficiency))
        throw ConfigError("solar array: cell efficiency must be in (0,1]");
    if (!in01(packing_fraction))
        throw ConfigError("solar array: packing fraction must be in (0,1]");
    if (!in01(occlusion))
        throw ConfigError("solar array: occlusion must be in (0,1]");
    if (std::abs(normal.norm() - 1.0) > kOrthonormTol)
        throw ConfigError("solar array: normal must be unit length");
    if (degradation_rate_per_s < 0.0)
        throw ConfigError("solar array: negative degradation rate");
    ivc.validate();
}

bool PowerLoad::active(double t) const {
    if (always_on) return true;
    for (const auto& [start, end] : active_windows_s)
        if (t >= start && t < end) return true;
    return false;
}

void PowerLoad::validate() const {
    if (rated_w < 0.0)
        throw ConfigError("load '" + id + "': rated power must be >= 0");
    for (const auto& [start, end] : active_windows_s)
        if (!(end > start))
            throw ConfigError("load '" + id + "': window end must exceed start");
}

double Battery::capacity_wh_at(double elapsed_s) const {
    return capacity_wh * std::max(0.0, 1.0 - fade_rate_per_s * elapsed_s);
}

void Battery::validate() const {
    if (!(capacity_wh > 0.0))
        throw ConfigError("battery: capacity must be positive");
    auto in01 = [](double x) { return x > 0.0 && x <= 1.0; };
    if (!in01(charge_eff) || !in01(discharge_eff))
        throw ConfigError("battery: efficiencies must be in (0,1]");
    if (soc < 0.0 || soc > 1.0)
        throw ConfigError("battery: initial SoC must be in [0,1]");
    if (fade_rate_per_s < 0.0)
        throw ConfigError("battery: negative fade rate");
}

double incidence_angle(const SolarArray& array, const Pose& pose,
                       const InertialVec& sun_position) {
    InertialVec centroid_i = pose.position + pose.to_inertial(array.centroid);
    InertialVec to_sun = sun_position - centroid_i;
    double d = to_sun.norm();
    if (!(d > 0.0))
        throw RuntimeError("incidence_angle: array coincides with the Sun");
    double c = (to_sun / d).dot(pose.to_inertial(array.normal));
    return std::acos(std::clamp(c, -1.0, 1.0));
}

// Cosines this small are edge-on up to roundoff (cos(pi/2) as a double
// is ~6e-17); treat them as dark.
constexpr double kCosDark = 1e-12;

double solar_power_lf(const std::vector<SolarArray>& arrays, const Pose& pose,
                      const InertialVec& sun_position, const SolarConstants& sun) {
    double h = irradiance((pose.position - sun_position).norm(), sun);
    double total = 0.0;
    for (const SolarArray& a : arrays) {
        double c = std::cos(incidence_angle(a, pose, sun_position));
        if (c <= kCosDark) continue;  // back-lit or edge-on
        total += h * a.area_m2 * a.cell_efficiency * a.packing_fraction * c;
    }
    return total;
}

namespace {

// Multiplicative scale applied to the base IVC voltage.
double ivc_scale(const SolarArray& a, double irradiance_w_m2, double theta_rad,
                 double temperature_k, double elapsed_s) {
    double xi = std::max(0.0, 1.0 - a.temp_coeff_per_k * (temperature_k - a.temp_ref_k));
    double c = std::cos(theta_rad);
    double illum =
        c <= kCosDark ? 0.0 : irradiance_w_m2 * c / a.irradiance_ref_w_m2;
    return xi * a.occlusion * a.degradation_at(elapsed_s) * a.design_constant * illum;
}

}  // namespace

double solar_voltage_hf(const SolarArray& array, double irradiance_w_m2,
                        double theta_rad, double temperature_k, double i_load_a,
                        double elapsed_s) {
    if (i_load_a < 0.0)
        throw RuntimeError("solar_voltage_hf: negative load current");
    return ivc_scale(array, irradiance_w_m2, theta_rad, temperature_k, elapsed_s) *
           array.ivc.voltage_at(i_load_a);
}

double mppt_power(const SolarArray& array, double irradiance_w_m2,
                  double theta_rad, double temperature_k, double elapsed_s) {
    double g = ivc_scale(array, irradiance_w_m2, theta_rad, temperature_k, elapsed_s);
    if (g <= 0.0) return 0.0;

    const IvcTable& t = array.ivc;
    auto power = [&](double i) { return i * t.voltage_at(i); };

    // Coarse scan: table nodes plus the analytic vertex of each linear
    // segment, so the golden-section bracket always contains the max.
    double best_i = 0.0, best_p = 0.0;
    auto consider = [&](double i) {
        double p = power(i);
        if (p > best_p) { best_p = p; best_i = i; }
    };
    for (std::size_t k = 0; k + 1 < t.current_a.size(); ++k) {
        double i0 = t.current_a[k], i1 = t.current_a[k + 1];
        double v0 = t.voltage_v[k], v1 = t.voltage_v[k + 1];
        consider(i0);
        double s = (v1 - v0) / (i1 - i0);
        if (s < 0.0) {
            double vertex = (s * i0 - v0) / (2.0 * s);
            if (vertex > i0 && vertex < i1) consider(vertex);
        }
    }
    consider(t.current_a.back());

    // Golden-section refinement around the coarse winner.
    double span = t.short_circuit_current() / (t.current_a.size() - 1.0);
    double lo = std::max(0.0, best_i - span);
    double hi = std::min(t.short_circuit_current(), best_i + span);
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
    double f1 = power(x1), f2 = power(x2);
    while (b - a > 1e-12 * std::max(1.0, hi)) {
        if (f1 >= f2) {  // >= ties toward lower current
            b = x2; x2 = x1; f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = power(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = power(x2);
        }
    }
    return g * std::max(best_p, power(0.5 * (a + b)));
}

double net_power(double p_solar_w, const std::vector<PowerLoad>& loads, double t,
                 bool high_fidelity, double bus_conversion_mu) {
    if (high_fidelity && !(bus_conversion_mu > 0.0 && bus_conversion_mu <= 1.0))
        throw RuntimeError("net_power: bus conversion loss must be in (0,1]");
    double generated = high_fidelity ? bus_conversion_mu * p_solar_w : p_solar_w;
    double consumed = 0.0;
    for (const PowerLoad& l : loads)
        if (l.active(t)) consumed += l.rated_w;
    return generated - consumed;
}

double net_energy(const std::vector<std::pair<double, double>>& power_trace_w) {
    if (power_trace_w.empty())
        throw RuntimeError("net_energy: empty power trace");
    double joules = 0.0;
    for (std::size_t k = 1; k < power_trace_w.size(); ++k) {
        double dt = power_trace_w[k].first - power_trace_w[k - 1].first;
        if (dt < 0.0) throw RuntimeError("net_energy: trace not time-ordered");
        joules += 0.5 * (power_trace_w[k].second + power_trace_w[k - 1].second) * dt;
    }
    return joules / 3600.0;
}

double soc_delta_lf(const Battery& battery, double e_net_wh) {
    if (e_net_wh > 0.0)
        return battery.charge_eff * e_net_wh / battery.capacity_wh;
    return e_net_wh / (battery.discharge_eff * battery.capacity_wh);
}

SocUpdate apply_soc_delta(double soc, double delta) {
    double q = soc + delta;
    if (q < 0.0) return {0.0, true};
    if (q > 1.0) return {1.0, true};
    return {q, false};
}

double soc_delta_coulomb(const Battery& battery,
                         const std::vector<std::pair<double, double>>& current_trace_a,
                         double bus_voltage_v, double elapsed_s) {
    double e_max_wh = battery.capacity_wh_at(elapsed_s);
    if (!(e_max_wh > 0.0))
        throw RuntimeError("soc_delta_coulomb: battery capacity has faded to zero");
    if (!(bus_voltage_v > 0.0))
        throw RuntimeError("soc_delta_coulomb: bus voltage must be positive");
    if (current_trace_a.empty())
        throw RuntimeError("soc_delta_coulomb: empty current trace");
    double amp_seconds = 0.0;
    for (std::size_t k = 1; k < current_trace_a.size(); ++k) {
        double dt = current_trace_a[k].first - current_trace_a[k - 1].first;
        amp_seconds += 0.5 * (current_trace_a[k].second + current_trace_a[k - 1].second) * dt;
    }
    double capacity_ah = e_max_wh / bus_voltage_v;
    return (amp_seconds / 3600.0) / capacity_ah;
}

}  // namespace ssim
