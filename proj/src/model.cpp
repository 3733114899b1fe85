#include "fishsim/model.hpp"

#include <Eigen/Cholesky>

namespace fishsim {

SystemParams make_system_params(const BodyParams& central,
                                const std::vector<BodyParams>& peripherals,
                                const std::vector<Vec3>& d0i,
                                const std::vector<Vec3>& di0) {
    if (peripherals.size() != d0i.size() || peripherals.size() != di0.size()) {
        throw DimensionMismatch("make_system_params: " + std::to_string(peripherals.size()) +
                                " peripherals, " + std::to_string(d0i.size()) + " d0i, " +
                                std::to_string(di0.size()) + " di0 offsets");
    }
    SystemParams p;
    p.central = central;
    p.peripherals = peripherals;
    p.d0i = d0i;
    p.di0 = di0;
    std::vector<BodyParams> all;
    all.push_back(central);
    all.insert(all.end(), peripherals.begin(), peripherals.end());
    p.nonstandard = nonstandard_inertias(all, di0);
    return p;
}

Pose Pose::from(const Configuration& c) {
    Pose p;
    p.r0 = c.r0.matrix();
    p.x = c.x;
    p.rs.reserve(c.peripherals.size());
    for (const auto& r : c.peripherals) p.rs.push_back(r.matrix());
    return p;
}

Configuration Pose::to_configuration() const {
    Configuration c;
    c.r0 = Rotation(r0);
    c.x = x;
    c.peripherals.reserve(rs.size());
    for (const auto& r : rs) c.peripherals.emplace_back(r);
    return c;
}

Vec3 body_velocity(const SystemParams& params, const Pose& pose, const Velocity& xi, int i) {
    const int p = params.peripheral_count();
    if (i < 0 || i > p) {
        throw IndexOutOfRange("body_velocity: body index " + std::to_string(i) + " of " +
                              std::to_string(p + 1));
    }
    if (i == 0) return pose.r0.transpose() * xi.xdot;
    const Mat3& ri = pose.rs[i - 1];
    return ri.transpose() * xi.xdot -
           ri.transpose() * pose.r0 * hat(params.d0i[i - 1]) * xi.omega0 +
           params.di0[i - 1].cross(xi.omegas[i - 1]);
}

Eigen::MatrixXd assemble_inertia(const SystemParams& params, const Pose& pose) {
    const int p = params.peripheral_count();
    Eigen::MatrixXd ii = Eigen::MatrixXd::Zero(params.dof(), params.dof());
    const Mat3& r0 = pose.r0;
    Mat3 b00 = params.central.total_inertia;
    Mat3 b0x = Mat3::Zero();
    Mat3 bxx = r0 * params.central.total_mass_matrix * r0.transpose();
    for (int i = 0; i < p; ++i) {
        const Mat3& ri = pose.rs[i];
        const Mat3& mi = params.peripherals[i].total_mass_matrix;
        const Mat3 d0 = hat(params.d0i[i]);
        const Mat3 dp = hat(params.di0[i]);
        const Mat3 rimr = ri * mi * ri.transpose();
        b00 -= d0 * r0.transpose() * rimr * r0 * d0;
        b0x += d0 * r0.transpose() * rimr;
        bxx += rimr;
        const Mat3 b0i = d0 * r0.transpose() * ri * mi * dp;
        const Mat3 bxi = ri * mi * dp;
        ii.block<3, 3>(0, 6 + 3 * i) = b0i;
        ii.block<3, 3>(6 + 3 * i, 0) = b0i.transpose();
        ii.block<3, 3>(3, 6 + 3 * i) = bxi;
        ii.block<3, 3>(6 + 3 * i, 3) = bxi.transpose();
        ii.block<3, 3>(6 + 3 * i, 6 + 3 * i) =
            params.peripherals[i].total_inertia - dp * mi * dp;
    }
    ii.block<3, 3>(0, 0) = b00;
    ii.block<3, 3>(0, 3) = b0x;
    ii.block<3, 3>(3, 0) = b0x.transpose();
    ii.block<3, 3>(3, 3) = bxx;
    return ii;
}

double kinetic_energy(const SystemParams& params, const Pose& pose, const Velocity& xi) {
    const Eigen::VectorXd v = xi.to_vector();
    return 0.5 * v.dot(assemble_inertia(params, pose) * v);
}

Momentum legendre_to_momentum(const SystemParams& params, const Pose& pose, const Velocity& xi) {
    return Momentum::from_vector(assemble_inertia(params, pose) * xi.to_vector());
}

Velocity legendre_to_velocity(const SystemParams& params, const Pose& pose, const Momentum& mu) {
    const Eigen::MatrixXd ii = assemble_inertia(params, pose);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(ii);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw SolveFailure("legendre_to_velocity: block inertia matrix is not SPD");
    }
    const Eigen::VectorXd b = mu.to_vector();
    const Eigen::VectorXd v = ldlt.solve(b);
    if ((ii * v - b).norm() > 1e-9 * std::max(1.0, b.norm())) {
        throw SolveFailure("legendre_to_velocity: solve residual too large");
    }
    return Velocity::from_vector(v);
}

HamiltonDerivative hamilton_rhs(const SystemParams& params, const Pose& pose,
                                const Momentum& mu) {
    const Velocity xi = legendre_to_velocity(params, pose, mu);
    const int p = params.peripheral_count();
    const Mat3& r0 = pose.r0;
    const Vec3 v0 = r0.transpose() * xi.xdot;

    HamiltonDerivative d;
    d.mu_dot.p0 = -xi.omega0.cross(mu.p0) - v0.cross(params.central.total_mass_matrix * v0);
    d.mu_dot.px = Vec3::Zero();
    d.mu_dot.ps.resize(p);
    for (int i = 0; i < p; ++i) {
        const Mat3& ri = pose.rs[i];
        const Mat3& mi = params.peripherals[i].total_mass_matrix;
        const Vec3 vi = body_velocity(params, pose, xi, i + 1);
        const Vec3 d0iw0 = params.d0i[i].cross(xi.omega0);
        d.mu_dot.p0 -= d0iw0.cross(r0.transpose() * (ri * (mi * vi)));
        d.mu_dot.ps[i] =
            -xi.omegas[i].cross(mu.ps[i]) +
            (mi * vi).cross(ri.transpose() * (xi.xdot - r0 * params.d0i[i].cross(xi.omega0)));
    }
    d.r0_dot = r0 * hat(xi.omega0);
    d.x_dot = xi.xdot;
    d.ri_dot.resize(p);
    for (int i = 0; i < p; ++i) d.ri_dot[i] = pose.rs[i] * hat(xi.omegas[i]);
    return d;
}

HamiltonDerivative hamilton_rhs(const SystemParams& params, const SystemState& state) {
    return hamilton_rhs(params, Pose::from(state.config), state.momentum);
}

Eigen::VectorXd euler_lagrange_residual(const SystemParams& params, const Pose& pose,
                                        const Velocity& xi, const Velocity& xidot) {
    const int p = params.peripheral_count();
    const Mat3& r0 = pose.r0;
    const Vec3 v0 = r0.transpose() * xi.xdot;
    const Mat3& m0 = params.central.total_mass_matrix;

    Eigen::VectorXd forcing = Eigen::VectorXd::Zero(params.dof());
    Vec3 f0 = xi.omega0.cross(params.central.total_inertia * xi.omega0) + v0.cross(m0 * v0);
    const Mat3 w0hat = hat(xi.omega0);
    Vec3 fx = r0 * (w0hat * m0 - m0 * w0hat) * v0;
    for (int i = 0; i < p; ++i) {
        const Mat3& ri = pose.rs[i];
        const Mat3& mi = params.peripherals[i].total_mass_matrix;
        const Vec3& omi = xi.omegas[i];
        const Mat3 wihat = hat(omi);
        const Vec3 vi = body_velocity(params, pose, xi, i + 1);
        const Vec3 wi = (wihat * mi - mi * wihat) *
                            (ri.transpose() * (xi.xdot - r0 * params.d0i[i].cross(xi.omega0))) -
                        mi * (ri.transpose() * (r0 * xi.omega0.cross(params.d0i[i].cross(xi.omega0)))) +
                        omi.cross(mi * params.di0[i].cross(omi));
        f0 += params.d0i[i].cross(r0.transpose() * (ri * wi));
        fx += ri * wi;
        forcing.segment<3>(6 + 3 * i) = omi.cross(params.peripherals[i].total_inertia * omi) +
                                        vi.cross(mi * vi) - params.di0[i].cross(wi);
    }
    forcing.segment<3>(0) = f0;
    forcing.segment<3>(3) = fx;
    return assemble_inertia(params, pose) * xidot.to_vector() + forcing;
}

Conserved conserved_quantities(const SystemParams& params, const Pose& pose,
                               const Momentum& mu) {
    const Velocity xi = legendre_to_velocity(params, pose, mu);
    Conserved c;
    c.energy = 0.5 * mu.to_vector().dot(xi.to_vector());
    c.px = mu.px;
    c.p_omega = pose.x.cross(mu.px) + pose.r0 * mu.p0;
    for (size_t i = 0; i < mu.ps.size(); ++i) c.p_omega += pose.rs[i] * mu.ps[i];
    return c;
}

Conserved conserved_quantities(const SystemParams& params, const SystemState& state) {
    return conserved_quantities(params, Pose::from(state.config), state.momentum);
}

}  // namespace fishsim
