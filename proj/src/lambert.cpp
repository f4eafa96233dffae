#include "ssim/lambert.hpp"

#include <algorithm>
#include <cmath>

#include "ssim/error.hpp"
#include "ssim/math.hpp"

namespace ssim {

namespace {

// Stumpff functions c2(psi), c3(psi). The trig forms lose ~half the
// mantissa to cancellation for small |psi|, so the series (exact to
// machine precision there) takes over below 1e-2.
void stumpff(double psi, double& c2, double& c3) {
    if (psi > 1e-2) {
        double s = std::sqrt(psi);
        c2 = (1.0 - std::cos(s)) / psi;
        c3 = (s - std::sin(s)) / (s * s * s);
    } else if (psi < -1e-2) {
        double s = std::sqrt(-psi);
        c2 = (1.0 - std::cosh(s)) / psi;
        c3 = (std::sinh(s) - s) / (s * s * s);
    } else {
        c2 = 0.0;
        c3 = 0.0;
        double term2 = 0.5, term3 = 1.0 / 6.0;
        for (int k = 0; k < 8; ++k) {
            c2 += term2;
            c3 += term3;
            term2 *= -psi / ((2.0 * k + 3.0) * (2.0 * k + 4.0));
            term3 *= -psi / ((2.0 * k + 4.0) * (2.0 * k + 5.0));
        }
    }
}

// Universal-variables formulation (bisection on psi). Valid away from
// the 180-degree transfer singularity.
LambertSolution lambert_universal(const Eigen::Vector3d& r1, const Eigen::Vector3d& r2,
                                  double tof, double mu, double sin_dnu,
                                  double cos_dnu) {
    double r1n = r1.norm(), r2n = r2.norm();
    double a_geom = sin_dnu * std::sqrt(r1n * r2n / (1.0 - cos_dnu));
    if (a_geom == 0.0)
        throw RuntimeError("lambert: degenerate geometry (A = 0)");

    double psi = 0.0, psi_up = 4.0 * kPi * kPi * (1.0 - 1e-12), psi_low = -4.0 * kPi * kPi;
    double c2, c3, y = 0.0;
    int iter = 0;
    const int max_iter = 200;
    double dt_trial = 0.0;
    for (; iter < max_iter; ++iter) {
        stumpff(psi, c2, c3);
        y = r1n + r2n + a_geom * (psi * c3 - 1.0) / std::sqrt(c2);
        if (a_geom > 0.0 && y < 0.0) {
            // Raise psi until y becomes positive (short-way fix).
            psi_low = psi;
            psi = 0.5 * (psi_low + psi_up);
            continue;
        }
        double chi = std::sqrt(y / c2);
        dt_trial = (chi * chi * chi * c3 + a_geom * std::sqrt(y)) / std::sqrt(mu);
        if (std::abs(dt_trial - tof) < 1e-12 * std::max(1.0, tof)) break;
        if (dt_trial <= tof)
            psi_low = psi;
        else
            psi_up = psi;
        psi = 0.5 * (psi_low + psi_up);
    }
    if (iter >= max_iter)
        throw RuntimeError("lambert: no convergence after " +
                           std::to_string(max_iter) + " iterations (residual " +
                           std::to_string(dt_trial - tof) + " s)");

    double f = 1.0 - y / r1n;
    double g = a_geom * std::sqrt(y / mu);
    double gdot = 1.0 - y / r2n;
    LambertSolution sol;
    sol.v1 = (r2 - f * r1) / g;
    sol.v2 = (gdot * r2 - r1) / g;
    sol.iterations = iter + 1;
    return sol;
}

// Antipodal (180 deg) branch: conics through both points share the
// semilatus p = 2 r1 r2 / (r1 + r2); the free parameter is the
// eccentricity component perpendicular to r1 in the hint plane.
LambertSolution lambert_antipodal(const Eigen::Vector3d& r1, const Eigen::Vector3d& r2,
                                  double tof, double mu,
                                  const Eigen::Vector3d& h_hat) {
    double r1n = r1.norm(), r2n = r2.norm();
    double p = 2.0 * r1n * r2n / (r1n + r2n);
    Eigen::Vector3d r1_hat = r1 / r1n;
    Eigen::Vector3d w_hat = h_hat.cross(r1_hat).normalized();
    double e_par = p / r1n - 1.0;

    auto tof_for = [&](double e_perp) {
        Eigen::Vector3d e_vec = e_par * r1_hat + e_perp * w_hat;
        double e = e_vec.norm();
        double a = p / (1.0 - e * e);
        double nu1;
        if (e < 1e-15) {
            nu1 = 0.0;  // circular: anomaly origin arbitrary
        } else {
            Eigen::Vector3d e_hat = e_vec / e;
            double c = std::clamp(e_hat.dot(r1_hat), -1.0, 1.0);
            double s = h_hat.dot(e_hat.cross(r1_hat));
            nu1 = std::atan2(s, c);
        }
        double nu2 = nu1 + kPi;
        auto ecc_anom = [&](double nu) {
            return 2.0 * std::atan2(std::sqrt(1.0 - e) * std::sin(0.5 * nu),
                                    std::sqrt(1.0 + e) * std::cos(0.5 * nu));
        };
        double e1 = ecc_anom(nu1), e2 = ecc_anom(nu2);
        double m1 = e1 - e * std::sin(e1);
        double m2 = e2 - e * std::sin(e2);
        double dm = m2 - m1;
        while (dm <= 0.0) dm += 2.0 * kPi;
        return std::sqrt(a * a * a / mu) * dm;
    };

    // Bracket the requested time of flight in e_perp. Positive e_perp
    // puts periapsis between the endpoints (fast branch), negative
    // apoapsis (slow branch).
    double e_room = std::sqrt(std::max(0.0, 1.0 - e_par * e_par)) * (1.0 - 1e-9);
    double t0 = tof_for(0.0);
    double lo, hi;  // invariants: tof_for(lo) >= tof, tof_for(hi) <= tof
    if (tof == t0) {
        lo = hi = 0.0;
    } else if (tof < t0) {
        lo = 0.0;
        hi = e_room;
        if (tof_for(hi) > tof)
            throw RuntimeError("lambert: 180-deg transfer time below the elliptic minimum");
    } else {
        hi = 0.0;
        lo = -e_room;
        if (tof_for(lo) < tof)
            throw RuntimeError("lambert: 180-deg transfer time above the elliptic maximum");
    }
    int iter = 0;
    double e_perp = 0.0;
    for (; iter < 200; ++iter) {
        e_perp = 0.5 * (lo + hi);
        double t = tof_for(e_perp);
        if (std::abs(t - tof) < 1e-12 * std::max(1.0, tof)) break;
        if (t > tof)
            lo = e_perp;
        else
            hi = e_perp;
    }

    Eigen::Vector3d e_vec = e_par * r1_hat + e_perp * w_hat;
    double h = std::sqrt(mu * p);
    LambertSolution sol;
    sol.v1 = (mu / h) * h_hat.cross(e_vec + r1_hat);
    sol.v2 = (mu / h) * h_hat.cross(e_vec + r2 / r2n);
    sol.iterations = iter + 1;
    return sol;
}

}  // namespace

LambertSolution lambert_solve(const Eigen::Vector3d& r1_m, const Eigen::Vector3d& r2_m,
                              double tof_s, double mu_m3_s2,
                              TransferDirection direction,
                              std::optional<Eigen::Vector3d> plane_normal_hint) {
    if (!(tof_s > 0.0))
        throw RuntimeError("lambert: time of flight must be positive");
    if (!(mu_m3_s2 > 0.0))
        throw RuntimeError("lambert: mu must be positive");
    double r1n = r1_m.norm(), r2n = r2_m.norm();
    if (!(r1n > 0.0) || !(r2n > 0.0))
        throw RuntimeError("lambert: endpoint at the attracting center");

    double cos_dnu = std::clamp(r1_m.dot(r2_m) / (r1n * r2n), -1.0, 1.0);
    Eigen::Vector3d cross = r1_m.cross(r2_m);
    double cross_n = cross.norm();

    const double collinear_tol = 1e-8;
    bool collinear = cross_n < collinear_tol * r1n * r2n;

    if (collinear) {
        if (!plane_normal_hint)
            throw RuntimeError(
                "lambert: endpoints are collinear with the center; supply a "
                "transfer-plane hint");
        if (cos_dnu > 0.0)
            throw RuntimeError("lambert: coincident endpoint directions are degenerate");
        Eigen::Vector3d h_hat = plane_normal_hint->normalized();
        if (std::abs(h_hat.dot(r1_m / r1n)) > 1e-6)
            throw RuntimeError("lambert: plane hint is not perpendicular to r1");
        if (direction == TransferDirection::Retrograde) h_hat = -h_hat;
        return lambert_antipodal(r1_m, r2_m, tof_s, mu_m3_s2, h_hat);
    }

    // Transfer angle sign from the orbit normal implied by direction.
    Eigen::Vector3d n_hat = cross / cross_n;
    Eigen::Vector3d ref = plane_normal_hint ? plane_normal_hint->normalized()
                                            : Eigen::Vector3d::UnitZ();
    bool flip = direction == TransferDirection::Prograde ? n_hat.dot(ref) < 0.0
                                                         : n_hat.dot(ref) > 0.0;
    double sin_dnu = (flip ? -1.0 : 1.0) * cross_n / (r1n * r2n);
    return lambert_universal(r1_m, r2_m, tof_s, mu_m3_s2, sin_dnu, cos_dnu);
}

PropulsionCommand plan_tcm(const Eigen::Vector3d& r_now_m,
                           const Eigen::Vector3d& v_now_m_s,
                           const Eigen::Vector3d& r_target_m, double t_now_s,
                           double t_arrive_s, double mu_m3_s2, double max_dv_m_s,
                           double max_thrust_n, double mass_kg) {
    if (!(t_arrive_s > t_now_s))
        throw RuntimeError("plan_tcm: arrival epoch must be in the future");
    if (!(max_thrust_n > 0.0) || !(mass_kg > 0.0))
        throw RuntimeError("plan_tcm: thrust and mass must be positive");

    // The current orbit plane disambiguates near-collinear geometry.
    Eigen::Vector3d h = r_now_m.cross(v_now_m_s);
    std::optional<Eigen::Vector3d> hint;
    if (h.norm() > 0.0) hint = h.normalized();

    LambertSolution sol = lambert_solve(r_now_m, r_target_m,
                                        t_arrive_s - t_now_s, mu_m3_s2,
                                        TransferDirection::Prograde, hint);
    Eigen::Vector3d dv = sol.v1 - v_now_m_s;

    PropulsionCommand cmd;
    double dv_mag = dv.norm();
    if (max_dv_m_s > 0.0 && dv_mag > max_dv_m_s) {
        dv *= max_dv_m_s / dv_mag;
        dv_mag = max_dv_m_s;
        cmd.dv_clamped = true;
    }
    cmd.start_s = t_now_s;
    if (dv_mag == 0.0) {
        cmd.thrust_n = Eigen::Vector3d::Zero();
        cmd.stop_s = t_now_s;  // nothing to do
        return cmd;
    }
    cmd.thrust_n = dv.normalized() * max_thrust_n;
    cmd.stop_s = t_now_s + mass_kg * dv_mag / max_thrust_n;
    return cmd;
}

}  // namespace ssim
