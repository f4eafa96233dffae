#ifndef SSIM_INTEGRATE_HPP
#define SSIM_INTEGRATE_HPP

#include <Eigen/Core>
#include <functional>
#include <string>

#include "ssim/error.hpp"
#include "ssim/state_vector.hpp"

namespace ssim {

/// Time derivative of a flat state: f(t, x) -> xdot.
using Derivative =
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

namespace detail {

inline void check_finite(const Eigen::VectorXd& xdot, const StateVector& ref,
                         const char* stage) {
    if (xdot.allFinite()) return;
    for (Eigen::Index i = 0; i < xdot.size(); ++i) {
        if (!std::isfinite(xdot(i)))
            throw RuntimeError(std::string("rk4_step: non-finite derivative in slot '") +
                               ref.slot_name(i) + "' at " + stage);
    }
}

}  // namespace detail

/**
 * Classical fixed-step 4th-order Runge-Kutta step.
 *
 * Exactly four derivative evaluations; each is checked for finiteness
 * and failures name the offending state slot.
 */
inline StateVector rk4_step(const Derivative& f, const StateVector& x,
                            double t, double dt) {
    if (!(dt > 0.0)) throw RuntimeError("rk4_step: dt must be positive");

    const Eigen::VectorXd& x0 = x.values;
    Eigen::VectorXd k1 = f(t, x0);
    detail::check_finite(k1, x, "k1");
    Eigen::VectorXd k2 = f(t + 0.5 * dt, x0 + 0.5 * dt * k1);
    detail::check_finite(k2, x, "k2");
    Eigen::VectorXd k3 = f(t + 0.5 * dt, x0 + 0.5 * dt * k2);
    detail::check_finite(k3, x, "k3");
    Eigen::VectorXd k4 = f(t + dt, x0 + dt * k3);
    detail::check_finite(k4, x, "k4");

    return StateVector(x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4),
                       x.layout);
}

}  // namespace ssim

#endif  // SSIM_INTEGRATE_HPP
