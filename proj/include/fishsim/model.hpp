#pragma once

#include "fishsim/hydro.hpp"
#include "fishsim/liegroup.hpp"

namespace fishsim {

/// Parameters of a star-topology assembly: one central body and P
/// peripherals, each attached to the center by a ball joint.
struct SystemParams {
    BodyParams central;
    std::vector<BodyParams> peripherals;
    std::vector<Vec3> d0i;  // joint offset from body-0 center, body-0 frame
    std::vector<Vec3> di0;  // joint offset from body-i center, body-i frame
    NonstandardInertia nonstandard;

    int peripheral_count() const { return static_cast<int>(peripherals.size()); }
    int dof() const { return 6 + 3 * peripheral_count(); }
    const BodyParams& body(int i) const { return i == 0 ? central : peripherals[i - 1]; }
};

SystemParams make_system_params(const BodyParams& central,
                                const std::vector<BodyParams>& peripherals,
                                const std::vector<Vec3>& d0i,
                                const std::vector<Vec3>& di0);

/// Raw attitude/position tuple. Unlike Configuration the rotation blocks
/// are not validated, so trajectories that drift off SO(3) (classical RK)
/// can still be evaluated.
struct Pose {
    Mat3 r0 = Mat3::Identity();
    Vec3 x = Vec3::Zero();
    std::vector<Mat3> rs;

    static Pose from(const Configuration& c);
    /// Throws ValidationError if any rotation block is off SO(3).
    Configuration to_configuration() const;
};

/// Point of the Hamiltonian flow.
struct SystemState {
    Configuration config;
    Momentum momentum;
    double time = 0;
};

struct HamiltonDerivative {
    Momentum mu_dot;  // px slot identically zero
    Mat3 r0_dot;
    Vec3 x_dot;
    std::vector<Mat3> ri_dot;
};

struct Conserved {
    double energy = 0;
    Vec3 px = Vec3::Zero();
    Vec3 p_omega = Vec3::Zero();
};

/// Velocity of the body-i mass center in the body-i frame.
Vec3 body_velocity(const SystemParams& params, const Pose& pose, const Velocity& xi, int i);

/// The configuration-dependent block inertia matrix (dim 6+3P).
Eigen::MatrixXd assemble_inertia(const SystemParams& params, const Pose& pose);

/// T = 1/2 xi^T II xi.
double kinetic_energy(const SystemParams& params, const Pose& pose, const Velocity& xi);

/// mu = II xi.
Momentum legendre_to_momentum(const SystemParams& params, const Pose& pose, const Velocity& xi);

/// xi = II^-1 mu via an SPD factorization.
Velocity legendre_to_velocity(const SystemParams& params, const Pose& pose, const Momentum& mu);

HamiltonDerivative hamilton_rhs(const SystemParams& params, const Pose& pose, const Momentum& mu);
HamiltonDerivative hamilton_rhs(const SystemParams& params, const SystemState& state);

/// Left-hand side of the forced Euler-Lagrange system; zero on exact
/// trajectories. Diagnostic only, time stepping uses the Hamiltonian form.
Eigen::VectorXd euler_lagrange_residual(const SystemParams& params, const Pose& pose,
                                        const Velocity& xi, const Velocity& xidot);

/// Energy, total linear momentum and total angular momentum
/// p_Omega = hat(x) p_x + sum_i R_i p_i.
Conserved conserved_quantities(const SystemParams& params, const Pose& pose, const Momentum& mu);
Conserved conserved_quantities(const SystemParams& params, const SystemState& state);

// Convenience overloads on a validated Configuration.
inline Vec3 body_velocity(const SystemParams& p, const Configuration& c, const Velocity& xi,
                          int i) {
    return body_velocity(p, Pose::from(c), xi, i);
}
inline Eigen::MatrixXd assemble_inertia(const SystemParams& p, const Configuration& c) {
    return assemble_inertia(p, Pose::from(c));
}
inline double kinetic_energy(const SystemParams& p, const Configuration& c, const Velocity& xi) {
    return kinetic_energy(p, Pose::from(c), xi);
}
inline Momentum legendre_to_momentum(const SystemParams& p, const Configuration& c,
                                     const Velocity& xi) {
    return legendre_to_momentum(p, Pose::from(c), xi);
}
inline Velocity legendre_to_velocity(const SystemParams& p, const Configuration& c,
                                     const Momentum& mu) {
    return legendre_to_velocity(p, Pose::from(c), mu);
}

}  // namespace fishsim
