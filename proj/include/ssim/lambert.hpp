#ifndef SSIM_LAMBERT_HPP
#define SSIM_LAMBERT_HPP

#include <Eigen/Core>
#include <optional>

#include "ssim/navigation.hpp"

namespace ssim {

enum class TransferDirection { Prograde, Retrograde };

struct LambertSolution {
    Eigen::Vector3d v1 = Eigen::Vector3d::Zero();  // m/s at r1
    Eigen::Vector3d v2 = Eigen::Vector3d::Zero();  // m/s at r2
    int iterations = 0;
};

/**
 * Zero-revolution Lambert solver: find the two-body velocities
 * connecting r1 to r2 in the given time of flight.
 *
 * Universal-variables iteration with bisection safeguarding. Antipodal
 * geometry (transfer angle ~180 deg) is handled on the fixed-semilatus
 * conic family through both points, which requires the transfer-plane
 * hint; collinear geometry without a hint is an error.
 */
LambertSolution lambert_solve(
    const Eigen::Vector3d& r1_m, const Eigen::Vector3d& r2_m, double tof_s,
    double mu_m3_s2, TransferDirection direction = TransferDirection::Prograde,
    std::optional<Eigen::Vector3d> plane_normal_hint = std::nullopt);

/**
 * Plan a trajectory correction maneuver: Lambert from the current
 * position (about the given center, typically the Sun) to the target
 * intercept position, impulsive delta-v turned into a finite burn at
 * max thrust starting now. Demands above the delta-v cap are scaled
 * down and flagged.
 */
PropulsionCommand plan_tcm(const Eigen::Vector3d& r_now_m,
                           const Eigen::Vector3d& v_now_m_s,
                           const Eigen::Vector3d& r_target_m, double t_now_s,
                           double t_arrive_s, double mu_m3_s2, double max_dv_m_s,
                           double max_thrust_n, double mass_kg);

}  // namespace ssim

#endif  // SSIM_LAMBERT_HPP
