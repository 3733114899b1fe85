#pragma once

#include <array>
#include <vector>

#include "fishsim/liegroup.hpp"

namespace fishsim {

/// Ellipsoid described by its semi-axes l_1, l_2, l_3 (m), aligned with
/// the body principal axes.
struct EllipsoidGeometry {
    Vec3 semi_axes = Vec3::Ones();
};

/// One rigid ellipsoid with its rigid-body and added (fluid) inertias.
struct BodyParams {
    EllipsoidGeometry geometry;
    double mass = 0;            // m^b (kg)
    Mat3 body_inertia;          // J^b (kg m^2)
    Mat3 added_mass;            // M^f (kg)
    Mat3 added_inertia;         // J^f (kg m^2)
    Mat3 total_mass_matrix;     // M = m^b I + M^f
    Mat3 total_inertia;         // J = J^b + J^f
};

/// Nonstandard inertia matrices used by the discrete Lagrangian.
struct NonstandardInertia {
    Mat3 jd0;                 // J_d0 = 1/2 tr(J_0) I - J_0
    std::vector<Mat3> jprime; // J'_i = J_i - hat(d_i0) M_i hat(d_i0)
    std::vector<Mat3> jdi;    // J'_di = 1/2 tr(J'_i) I - J'_i
};

/// Potential-flow shape factors gamma_q of an ellipsoid. Each lies in
/// (0, 2) and they sum to 2.
std::array<double, 3> gamma_factors(const EllipsoidGeometry& geom);

/// Added rotational inertia factors lambda_q. Zero when the two
/// transverse semi-axes are equal (the 0/0 limit).
std::array<double, 3> lambda_factors(const EllipsoidGeometry& geom, double mass);

/// M^f = m^b diag[gamma_q / (2 - gamma_q)].
Mat3 added_mass_matrix(const EllipsoidGeometry& geom, double mass);

/// Solid ellipsoid inertia (m/5) diag(l2^2+l3^2, l1^2+l3^2, l1^2+l2^2).
Mat3 solid_ellipsoid_inertia(const EllipsoidGeometry& geom, double mass);

/// Assembles all inertia matrices of one body.
BodyParams build_body_params(const EllipsoidGeometry& geom, double mass);

/// Nonstandard inertias for a central body plus peripherals with joint
/// offsets d_i0 (peripheral-frame offsets from body-i center to joint i).
NonstandardInertia nonstandard_inertias(const std::vector<BodyParams>& bodies,
                                        const std::vector<Vec3>& di0);

/// Neutral-buoyancy mass rho_f * (4/3) pi l1 l2 l3.
double neutral_buoyancy_mass(const EllipsoidGeometry& geom, double fluid_density);

}  // namespace fishsim
