#include "fishsim/liegroup.hpp"

#include <cmath>

namespace fishsim {

Mat3 hat(const Vec3& v) {
    Mat3 m;
    m << 0, -v.z(), v.y(),
         v.z(), 0, -v.x(),
         -v.y(), v.x(), 0;
    return m;
}

Vec3 vee(const Mat3& m) {
    const double skew_err = (m + m.transpose()).norm();
    if (skew_err > 1e-8) {
        throw NotSkew("vee: matrix is not skew-symmetric, ||m + m^T|| = " +
                      std::to_string(skew_err));
    }
    const Mat3 s = 0.5 * (m - m.transpose());
    return Vec3(s(2, 1), s(0, 2), s(1, 0));
}

double orthogonality_error(const Mat3& r) {
    return (Mat3::Identity() - r.transpose() * r).norm();
}

Rotation::Rotation(const Mat3& m) : m_(m) {
    if (orthogonality_error(m) > kConstructionTol || m.determinant() <= 0) {
        throw ValidationError("Rotation: matrix is not in SO(3), ||I - R^T R|| = " +
                              std::to_string(orthogonality_error(m)));
    }
}

Rotation exp_so3(const Vec3& v) {
    const double theta2 = v.squaredNorm();
    const Mat3 k = hat(v);
    double a, b;  // R = I + a*K + b*K^2
    if (theta2 < 1e-12) {
        // series: sin t / t = 1 - t^2/6, (1 - cos t)/t^2 = 1/2 - t^2/24
        a = 1.0 - theta2 / 6.0;
        b = 0.5 - theta2 / 24.0;
    } else {
        const double theta = std::sqrt(theta2);
        a = std::sin(theta) / theta;
        b = (1.0 - std::cos(theta)) / theta2;
    }
    return Rotation::unchecked(Mat3::Identity() + a * k + b * (k * k));
}

Vec3 log_so3(const Rotation& r) {
    const Mat3& m = r.matrix();
    double c = 0.5 * (m.trace() - 1.0);
    c = std::clamp(c, -1.0, 1.0);
    const double theta = std::acos(c);
    const Vec3 w(0.5 * (m(2, 1) - m(1, 2)),
                 0.5 * (m(0, 2) - m(2, 0)),
                 0.5 * (m(1, 0) - m(0, 1)));
    if (theta < 1e-8) return w;  // w = sin(theta)/theta * axis*theta ~ axis*theta
    return theta / std::sin(theta) * w;
}

Eigen::VectorXd Velocity::to_vector() const {
    Eigen::VectorXd v(dim());
    v.segment<3>(0) = omega0;
    v.segment<3>(3) = xdot;
    for (size_t i = 0; i < omegas.size(); ++i) v.segment<3>(6 + 3 * i) = omegas[i];
    return v;
}

Velocity Velocity::from_vector(const Eigen::VectorXd& v) {
    if (v.size() < 6 || v.size() % 3 != 0) {
        throw DimensionMismatch("Velocity::from_vector: dimension " +
                                std::to_string(v.size()));
    }
    Velocity xi;
    xi.omega0 = v.segment<3>(0);
    xi.xdot = v.segment<3>(3);
    const int p = static_cast<int>(v.size() - 6) / 3;
    xi.omegas.resize(p);
    for (int i = 0; i < p; ++i) xi.omegas[i] = v.segment<3>(6 + 3 * i);
    return xi;
}

Eigen::VectorXd Momentum::to_vector() const {
    Eigen::VectorXd v(dim());
    v.segment<3>(0) = p0;
    v.segment<3>(3) = px;
    for (size_t i = 0; i < ps.size(); ++i) v.segment<3>(6 + 3 * i) = ps[i];
    return v;
}

Momentum Momentum::from_vector(const Eigen::VectorXd& v) {
    if (v.size() < 6 || v.size() % 3 != 0) {
        throw DimensionMismatch("Momentum::from_vector: dimension " +
                                std::to_string(v.size()));
    }
    Momentum mu;
    mu.p0 = v.segment<3>(0);
    mu.px = v.segment<3>(3);
    const int p = static_cast<int>(v.size() - 6) / 3;
    mu.ps.resize(p);
    for (int i = 0; i < p; ++i) mu.ps[i] = v.segment<3>(6 + 3 * i);
    return mu;
}

Momentum coad_continuous(const Velocity& xi, const Momentum& mu) {
    if (xi.omegas.size() != mu.ps.size()) {
        throw DimensionMismatch("coad_continuous: velocity has " +
                                std::to_string(xi.omegas.size()) + " peripherals, momentum has " +
                                std::to_string(mu.ps.size()));
    }
    Momentum out;
    out.p0 = -xi.omega0.cross(mu.p0);
    out.px = mu.px;
    out.ps.resize(mu.ps.size());
    for (size_t i = 0; i < mu.ps.size(); ++i) out.ps[i] = -xi.omegas[i].cross(mu.ps[i]);
    return out;
}

Momentum coAd_discrete(const DiscreteStep& f, const Momentum& mu) {
    if (f.fis.size() != mu.ps.size()) {
        throw DimensionMismatch("coAd_discrete: step has " +
                                std::to_string(f.fis.size()) + " peripherals, momentum has " +
                                std::to_string(mu.ps.size()));
    }
    Momentum out;
    out.p0 = f.f0 * mu.p0;
    out.px = mu.px;
    out.ps.resize(mu.ps.size());
    for (size_t i = 0; i < mu.ps.size(); ++i) out.ps[i] = f.fis[i] * mu.ps[i];
    return out;
}

}  // namespace fishsim
