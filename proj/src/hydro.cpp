#include "fishsim/hydro.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

namespace fishsim {

namespace {

void require_positive_axes(const EllipsoidGeometry& geom) {
    for (int q = 0; q < 3; ++q) {
        if (!(geom.semi_axes[q] > 0)) {
            throw ValidationError("EllipsoidGeometry: semi-axis " + std::to_string(q + 1) +
                                  " must be positive");
        }
    }
}

}  // namespace

std::array<double, 3> gamma_factors(const EllipsoidGeometry& geom) {
    require_positive_axes(geom);
    const double l1 = geom.semi_axes[0], l2 = geom.semi_axes[1], l3 = geom.semi_axes[2];
    const double c = l1 * l2 * l3;  // scale of the rational substitution nu = c t/(1-t)
    std::array<double, 3> gamma{};
    for (int q = 0; q < 3; ++q) {
        const double lq2 = geom.semi_axes[q] * geom.semi_axes[q];
        auto integrand = [&](double t) {
            if (t >= 1.0) return 0.0;  // integrand decays like sqrt(1 - t)
            const double nu = c * t / (1.0 - t);
            const double dnu = c / ((1.0 - t) * (1.0 - t));
            const double root =
                std::sqrt((l1 * l1 + nu) * (l2 * l2 + nu) * (l3 * l3 + nu));
            return dnu / ((lq2 + nu) * root);
        };
        boost::math::quadrature::tanh_sinh<double> integrator;
        double err = 0, l1_norm = 0;
        const double val = integrator.integrate(integrand, 0.0, 1.0, 1e-12, &err, &l1_norm);
        if (!(err <= 1e-10 * std::max(1.0, std::abs(val))) || !std::isfinite(val)) {
            throw QuadratureFailure("gamma_factors: quadrature error estimate " +
                                    std::to_string(err));
        }
        gamma[q] = c * val;
    }
    return gamma;
}

std::array<double, 3> lambda_factors(const EllipsoidGeometry& geom, double mass) {
    require_positive_axes(geom);
    if (!(mass >= 0)) throw ValidationError("lambda_factors: negative mass");
    const auto g = gamma_factors(geom);
    const Vec3& l = geom.semi_axes;
    const double lmax2 = l.cwiseProduct(l).maxCoeff();
    std::array<double, 3> lambda{};
    for (int q = 0; q < 3; ++q) {
        // cyclic: lambda_1 pairs axes (2,3), lambda_2 pairs (3,1), ...
        const int a = (q + 1) % 3, b = (q + 2) % 3;
        const double la2 = l[a] * l[a], lb2 = l[b] * l[b];
        if (std::abs(la2 - lb2) < 1e-12 * lmax2) {
            lambda[q] = 0.0;  // equal transverse axes: analytic limit
            continue;
        }
        const double num = (la2 - lb2) * (la2 - lb2) * (g[b] - g[a]);
        const double den = 2.0 * (la2 - lb2) + (la2 + lb2) * (g[a] - g[b]);
        lambda[q] = 0.2 * mass * num / den;
    }
    return lambda;
}

Mat3 added_mass_matrix(const EllipsoidGeometry& geom, double mass) {
    const auto g = gamma_factors(geom);
    Vec3 diag;
    for (int q = 0; q < 3; ++q) diag[q] = mass * g[q] / (2.0 - g[q]);
    return diag.asDiagonal();
}

Mat3 solid_ellipsoid_inertia(const EllipsoidGeometry& geom, double mass) {
    const Vec3 l2 = geom.semi_axes.cwiseProduct(geom.semi_axes);
    return (mass / 5.0) * Vec3(l2[1] + l2[2], l2[0] + l2[2], l2[0] + l2[1]).asDiagonal();
}

BodyParams build_body_params(const EllipsoidGeometry& geom, double mass) {
    require_positive_axes(geom);
    if (!(mass > 0)) throw ValidationError("build_body_params: mass must be positive");
    BodyParams b;
    b.geometry = geom;
    b.mass = mass;
    b.body_inertia = solid_ellipsoid_inertia(geom, mass);
    b.added_mass = added_mass_matrix(geom, mass);
    const auto lam = lambda_factors(geom, mass);
    b.added_inertia = Vec3(lam[0], lam[1], lam[2]).asDiagonal();
    b.total_mass_matrix = mass * Mat3::Identity() + b.added_mass;
    b.total_inertia = b.body_inertia + b.added_inertia;
    return b;
}

NonstandardInertia nonstandard_inertias(const std::vector<BodyParams>& bodies,
                                        const std::vector<Vec3>& di0) {
    if (bodies.empty()) throw ValidationError("nonstandard_inertias: no bodies");
    if (di0.size() + 1 != bodies.size()) {
        throw DimensionMismatch("nonstandard_inertias: " + std::to_string(bodies.size()) +
                                " bodies but " + std::to_string(di0.size()) + " joint offsets");
    }
    NonstandardInertia n;
    const Mat3& j0 = bodies[0].total_inertia;
    n.jd0 = 0.5 * j0.trace() * Mat3::Identity() - j0;
    for (size_t i = 0; i + 1 < bodies.size(); ++i) {
        const Mat3 d = hat(di0[i]);
        const Mat3 jp = bodies[i + 1].total_inertia - d * bodies[i + 1].total_mass_matrix * d;
        n.jprime.push_back(jp);
        n.jdi.push_back(0.5 * jp.trace() * Mat3::Identity() - jp);
    }
    return n;
}

double neutral_buoyancy_mass(const EllipsoidGeometry& geom, double fluid_density) {
    require_positive_axes(geom);
    return fluid_density * (4.0 / 3.0) * M_PI * geom.semi_axes.prod();
}

}  // namespace fishsim
