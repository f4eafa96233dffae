#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "ssim/frames.hpp"
#include "ssim/integrate.hpp"
#include "ssim/math.hpp"

using namespace ssim;

namespace {

std::mt19937 rng(20240117);

Eigen::Vector3d random_vec(double scale = 1.0) {
    std::uniform_real_distribution<double> d(-scale, scale);
    return {d(rng), d(rng), d(rng)};
}

Eigen::Quaterniond random_unit_quat() {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::Quaterniond q(d(rng), d(rng), d(rng), d(rng));
    while (q.norm() < 1e-3) q = Eigen::Quaterniond(d(rng), d(rng), d(rng), d(rng));
    q.normalize();
    return q;
}

}  // namespace

TEST_CASE("cross_matrix basics") {
    CHECK(cross_matrix<double>(Eigen::Vector3d::Zero()).isZero(0.0));

    Eigen::Vector3d x(1, 0, 0), y(0, 1, 0);
    CHECK((cross_matrix<double>(x) * y - Eigen::Vector3d(0, 0, 1)).norm() == 0.0);

    for (int i = 0; i < 100; ++i) {
        Eigen::Vector3d v = random_vec(10.0);
        CHECK((cross_matrix<double>(v) * v).norm() <= 1e-12 * v.squaredNorm());
        Eigen::Vector3d w = random_vec(10.0);
        CHECK((cross_matrix<double>(v) * w - v.cross(w)).norm() < 1e-12);
    }
}

TEST_CASE("omega_matrix block layout and skew symmetry") {
    CHECK(omega_matrix<double>(Eigen::Vector3d::Zero()).isZero(0.0));

    // Expanding the block definition by hand for w = (0,0,1).
    Eigen::Matrix4d om = omega_matrix<double>(Eigen::Vector3d(0, 0, 1));
    CHECK(om(0, 1) == doctest::Approx(1.0));
    CHECK(om(1, 0) == doctest::Approx(-1.0));
    CHECK(om(3, 2) == doctest::Approx(-1.0));
    CHECK(om(2, 3) == doctest::Approx(1.0));
    CHECK(om(0, 0) == 0.0);
    CHECK(om(3, 3) == 0.0);

    for (int i = 0; i < 100; ++i) {
        Eigen::Matrix4d m = omega_matrix<double>(random_vec(5.0));
        CHECK((m + m.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }

    Eigen::Vector3d bad(0, 0, std::nan(""));
    CHECK_THROWS_AS((void)omega_matrix<double>(bad), RuntimeError);
}

TEST_CASE("xi_matrix identity and kinematic equivalence") {
    Eigen::Matrix<double, 4, 3> xi = xi_matrix(Eigen::Quaterniond::Identity());
    Eigen::Matrix<double, 4, 3> expected;
    expected << 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0;
    CHECK((xi - expected).cwiseAbs().maxCoeff() == 0.0);

    // q = (0, 0, sin 45, cos 45): hand expansion of the block formula.
    double s = std::sin(kPi / 4), c = std::cos(kPi / 4);
    Eigen::Quaterniond q45(c, 0, 0, s);
    Eigen::Matrix<double, 4, 3> xi45 = xi_matrix(q45);
    Eigen::Matrix<double, 4, 3> expected45;
    expected45 << c, -s, 0, s, c, 0, 0, 0, c, 0, 0, -s;
    CHECK((xi45 - expected45).cwiseAbs().maxCoeff() < 1e-15);

    // 1/2 Omega(w) q == 1/2 Xi(q) w for random pairs.
    for (int i = 0; i < 100; ++i) {
        Eigen::Quaterniond q = random_unit_quat();
        Eigen::Vector3d w = random_vec(3.0);
        Eigen::Vector4d lhs = 0.5 * omega_matrix<double>(w) * q.coeffs();
        Eigen::Vector4d rhs = 0.5 * xi_matrix(q) * w;
        CHECK((lhs - rhs).norm() < 1e-12);
    }

    for (int i = 0; i < 20; ++i) {
        Eigen::Quaterniond q = random_unit_quat();
        Eigen::Matrix3d gram = xi_matrix(q).transpose() * xi_matrix(q);
        CHECK((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    }

    Eigen::Quaterniond not_unit(2.0, 0, 0, 0);
    CHECK_THROWS_AS((void)xi_matrix(not_unit), RuntimeError);
}

TEST_CASE("properize sign conventions") {
    Eigen::Quaterniond q(-0.5, 0.5, 0.5, 0.5);
    CHECK(properized(q).w() == doctest::Approx(0.5));

    // 180-degree rotations resolve by the largest vector component.
    Eigen::Quaterniond antipodal(0.0, 0.0, 0.0, -1.0);
    Eigen::Quaterniond p = properized(antipodal);
    CHECK(p.z() == doctest::Approx(1.0));

    Eigen::Quaterniond already(0.7, 0.1, 0.1, std::sqrt(1 - 0.49 - 0.03));
    CHECK(properized(already).coeffs() == already.coeffs());
}

TEST_CASE("quaternion rotation round trips") {
    for (int i = 0; i < 50; ++i) {
        Eigen::Quaterniond q = properized(random_unit_quat());
        Eigen::Matrix3d r = q.toRotationMatrix();
        CHECK(is_rotation_matrix<double>(r));
        Eigen::Quaterniond back = properized(Eigen::Quaterniond(r));
        CHECK((back.coeffs() - q.coeffs()).cwiseAbs().maxCoeff() < 1e-9);

        Eigen::Quaterniond round = q * q.conjugate();
        CHECK(attitude_error_angle(round, Eigen::Quaterniond::Identity()) < 1e-9);
    }
}

TEST_CASE("rk4 trivial and exponential") {
    auto layout = make_layout({{"x", "-"}});
    StateVector x0(Eigen::VectorXd::Constant(1, 1.0), layout);

    auto zero = [](double, const Eigen::VectorXd& x) {
        return Eigen::VectorXd::Zero(x.size()).eval();
    };
    StateVector same = rk4_step(zero, x0, 0.0, 17.0);
    CHECK(same.values(0) == 1.0);

    // One RK4 step of xdot = x from 1 with h = 0.1:
    // 1 + h + h^2/2 + h^3/6 + h^4/24 (the hand formula).
    auto ident = [](double, const Eigen::VectorXd& x) { return x.eval(); };
    double h = 0.1;
    double oracle = 1.0 + h + h * h / 2 + h * h * h / 6 + h * h * h * h / 24;
    StateVector x1 = rk4_step(ident, x0, 0.0, h);
    CHECK(x1.values(0) == doctest::Approx(oracle).epsilon(1e-15));
    CHECK(x1.values(0) == doctest::Approx(1.1051708).epsilon(1e-7));
}

TEST_CASE("rk4 harmonic oscillator energy drift") {
    auto layout = make_layout({{"pos", "m"}, {"vel", "m/s"}});
    auto f = [](double, const Eigen::VectorXd& x) {
        Eigen::VectorXd d(2);
        d << x(1), -x(0);
        return d;
    };
    Eigen::VectorXd s(2);
    s << 1.0, 0.0;
    StateVector x(s, layout);
    double t = 0.0, dt = 0.01;
    for (int i = 0; i < 1000; ++i) {
        x = rk4_step(f, x, t, dt);
        t += dt;
    }
    double energy = 0.5 * (x.values(0) * x.values(0) + x.values(1) * x.values(1));
    CHECK(std::abs(energy - 0.5) < 1e-6);
    // Analytic solution oracle.
    CHECK(x.values(0) == doctest::Approx(std::cos(t)).epsilon(1e-7));
    CHECK(x.values(1) == doctest::Approx(-std::sin(t)).epsilon(1e-7));
}

TEST_CASE("rk4 convergence order on xdot = lambda x") {
    auto layout = make_layout({{"x", "-"}});
    const double lam = -1.3;
    auto f = [&](double, const Eigen::VectorXd& x) { return (lam * x).eval(); };

    auto integrate = [&](int n) {
        StateVector x(Eigen::VectorXd::Constant(1, 1.0), layout);
        double dt = 1.0 / n;
        for (int i = 0; i < n; ++i) x = rk4_step(f, x, i * dt, dt);
        return std::abs(x.values(0) - std::exp(lam));
    };
    double e1 = integrate(64), e2 = integrate(128);
    double order = std::log2(e1 / e2);
    CHECK(order >= 3.9);
}

TEST_CASE("rk4 makes exactly four derivative evaluations") {
    auto layout = make_layout({{"x", "-"}});
    int calls = 0;
    auto f = [&](double, const Eigen::VectorXd& x) {
        ++calls;
        return x.eval();
    };
    rk4_step(f, StateVector(Eigen::VectorXd::Ones(1), layout), 0.0, 0.5);
    CHECK(calls == 4);
}

TEST_CASE("rk4 names the offending slot") {
    auto layout = make_layout({{"position", "m"}, {"velocity", "m/s"}});
    auto f = [](double, const Eigen::VectorXd& x) {
        Eigen::VectorXd d(2);
        d << x(1), std::numeric_limits<double>::quiet_NaN();
        return d;
    };
    StateVector x(Eigen::VectorXd::Zero(2), layout);
    CHECK_THROWS_WITH_AS(rk4_step(f, x, 0.0, 0.1),
                         doctest::Contains("velocity"), RuntimeError);
    CHECK_THROWS_AS(rk4_step(f, x, 0.0, -1.0), RuntimeError);
}

TEST_CASE("state vector layout contract") {
    auto layout = make_layout({{"a", "-"}, {"b", "-"}});
    CHECK_THROWS_AS(StateVector(Eigen::VectorXd::Zero(3), layout), RuntimeError);
    StateVector ok(Eigen::VectorXd::Zero(2), layout);
    CHECK(ok.slot_name(1) == "b");
}

template <typename A, typename B>
concept FrameAddable = requires(A a, B b) { a + b; };
template <typename A, typename B>
concept FrameDottable = requires(A a, B b) { a.dot(b); };

TEST_CASE("framed vectors reject cross-frame arithmetic at compile time") {
    using IV = Framed<Frame::Inertial>;
    using BV = Framed<Frame::Spacecraft>;
    static_assert(FrameAddable<IV, IV>);
    static_assert(!FrameAddable<IV, BV>);
    static_assert(!FrameDottable<IV, BV>);

    // Explicit transforms move vectors between frames and round-trip.
    BodyToInertial r(Eigen::Quaterniond(Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitY())));
    BV body(1.0, 2.0, 3.0);
    IV inertial = r * body;
    BV back = r.inverse() * inertial;
    CHECK((back.v - body.v).norm() < 1e-15);
}
