#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracle_helpers.hpp"

using namespace fishsim;

TEST_CASE("gamma factors match an independent quadrature oracle") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> axis(0.3, 6.0);
    for (int k = 0; k < 20; ++k) {
        const Vec3 l(axis(rng), axis(rng), axis(rng));
        const auto g = gamma_factors({l});
        for (int q = 0; q < 3; ++q) {
            CHECK(g[q] == doctest::Approx(oracle::gamma_oracle(l, q)).epsilon(1e-9));
        }
    }
}

TEST_CASE("frozen gamma values for the reference geometries") {
    const auto g0 = gamma_factors({Vec3(8.0, 1.5, 2.0)});
    CHECK(g0[0] == doctest::Approx(0.123697832297230).epsilon(1e-11));
    CHECK(g0[1] == doctest::Approx(1.078155692938364).epsilon(1e-11));
    CHECK(g0[2] == doctest::Approx(0.798146474764406).epsilon(1e-11));

    const auto g1 = gamma_factors({Vec3(5.0, 0.8, 1.5)});
    CHECK(g1[0] == doctest::Approx(0.122929147186283).epsilon(1e-11));
    CHECK(g1[1] == doctest::Approx(1.236715172812765).epsilon(1e-11));
    CHECK(g1[2] == doctest::Approx(0.640355680000952).epsilon(1e-11));
}

TEST_CASE("gamma sum rule, scaling and permutation invariance") {
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> axis(0.2, 10.0);
    for (int k = 0; k < 50; ++k) {
        const Vec3 l(axis(rng), axis(rng), axis(rng));
        const auto g = gamma_factors({l});
        CHECK(std::abs(g[0] + g[1] + g[2] - 2.0) < 1e-9);

        // gamma is dimensionless: uniform scaling leaves it unchanged
        const auto gs = gamma_factors({3.7 * l});
        for (int q = 0; q < 3; ++q) CHECK(g[q] == doctest::Approx(gs[q]).epsilon(1e-10));

        // cyclic permutation of the axes permutes the factors
        const auto gp = gamma_factors({Vec3(l[1], l[2], l[0])});
        for (int q = 0; q < 3; ++q) CHECK(gp[q] == doctest::Approx(g[(q + 1) % 3]).epsilon(1e-10));
    }
}

TEST_CASE("sphere limits") {
    const EllipsoidGeometry sphere{Vec3(2.5, 2.5, 2.5)};
    const auto g = gamma_factors(sphere);
    for (int q = 0; q < 3; ++q) CHECK(g[q] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // added mass of a sphere is half the displaced-analog mass m
    const double m = 1.7;
    const Mat3 mf = added_mass_matrix(sphere, m);
    for (int q = 0; q < 3; ++q) CHECK(std::abs(mf(q, q) - 0.5 * m) < 1e-10);

    // no added rotational inertia for a sphere, exactly
    const auto lam = lambda_factors(sphere, m);
    CHECK(lam[0] == 0.0);
    CHECK(lam[1] == 0.0);
    CHECK(lam[2] == 0.0);
}

TEST_CASE("spheroid: zero lambda about the symmetry axis only") {
    const auto lam = lambda_factors({Vec3(4.0, 1.2, 1.2)}, 1.0);
    CHECK(lam[0] == 0.0);  // transverse axes equal: exact 0/0 limit
    CHECK(lam[1] > 0.0);
    CHECK(lam[2] > 0.0);
    CHECK(lam[1] == doctest::Approx(lam[2]).epsilon(1e-10));
}

TEST_CASE("frozen lambda values for the reference geometries") {
    const auto lam0 = lambda_factors({Vec3(8.0, 1.5, 2.0)}, 1.0);
    CHECK(lam0[0] == doctest::Approx(0.09801).epsilon(5e-4));
    CHECK(lam0[1] == doctest::Approx(6.55003).epsilon(5e-4));
    CHECK(lam0[2] == doctest::Approx(12.07758).epsilon(5e-4));

    const auto lam1 = lambda_factors({Vec3(5.0, 0.8, 1.5)}, 0.25);
    CHECK(lam1[0] == doctest::Approx(0.05165).epsilon(5e-4));
    CHECK(lam1[1] == doctest::Approx(0.42643).epsilon(5e-4));
    CHECK(lam1[2] == doctest::Approx(1.63901).epsilon(5e-4));
}

TEST_CASE("solid ellipsoid inertia") {
    const Mat3 j = solid_ellipsoid_inertia({Vec3(1.0, 2.0, 3.0)}, 5.0);
    CHECK(j(0, 0) == doctest::Approx(5.0 / 5.0 * (4.0 + 9.0)));
    CHECK(j(1, 1) == doctest::Approx(5.0 / 5.0 * (1.0 + 9.0)));
    CHECK(j(2, 2) == doctest::Approx(5.0 / 5.0 * (1.0 + 4.0)));
    CHECK((j - j.diagonal().asDiagonal().toDenseMatrix()).norm() == 0.0);
}

TEST_CASE("assembled body parameters are SPD and consistent") {
    const BodyParams b = build_body_params({Vec3(8.0, 1.5, 2.0)}, 1.0);
    CHECK((b.total_mass_matrix - b.mass * Mat3::Identity() - b.added_mass).norm() < 1e-14);
    CHECK((b.total_inertia - b.body_inertia - b.added_inertia).norm() < 1e-14);
    Eigen::SelfAdjointEigenSolver<Mat3> es(b.total_mass_matrix);
    CHECK(es.eigenvalues().minCoeff() > 0);
    Eigen::SelfAdjointEigenSolver<Mat3> ej(b.total_inertia);
    CHECK(ej.eigenvalues().minCoeff() > 0);
}

TEST_CASE("nonstandard inertias") {
    const BodyParams central = build_body_params({Vec3(8.0, 1.5, 2.0)}, 1.0);
    const BodyParams fin = build_body_params({Vec3(5.0, 0.8, 1.5)}, 0.25);
    const Vec3 d10(-5.5, 0, 0);
    const NonstandardInertia n = nonstandard_inertias({central, fin}, {d10});

    const Mat3& j0 = central.total_inertia;
    CHECK((n.jd0 - (0.5 * j0.trace() * Mat3::Identity() - j0)).norm() < 1e-14);

    const Mat3 jp_expect =
        fin.total_inertia - hat(d10) * fin.total_mass_matrix * hat(d10);
    REQUIRE(n.jprime.size() == 1);
    CHECK((n.jprime[0] - jp_expect).norm() < 1e-12);
    CHECK((n.jdi[0] - (0.5 * jp_expect.trace() * Mat3::Identity() - jp_expect)).norm() < 1e-12);

    // J' must remain SPD for the reference joint offsets
    Eigen::SelfAdjointEigenSolver<Mat3> es(n.jprime[0]);
    CHECK(es.eigenvalues().minCoeff() > 0);

    CHECK_THROWS_AS(nonstandard_inertias({central, fin}, {}), DimensionMismatch);
    CHECK_THROWS_AS(nonstandard_inertias({}, {}), ValidationError);
}

TEST_CASE("neutral buoyancy mass") {
    const double r = 1.3, rho = 2.0;
    CHECK(neutral_buoyancy_mass({Vec3(r, r, r)}, rho) ==
          doctest::Approx(rho * 4.0 / 3.0 * M_PI * r * r * r).epsilon(1e-14));
}

TEST_CASE("invalid geometry and mass are rejected") {
    CHECK_THROWS_AS(gamma_factors({Vec3(1.0, -1.0, 1.0)}), ValidationError);
    CHECK_THROWS_AS(gamma_factors({Vec3(0.0, 1.0, 1.0)}), ValidationError);
    CHECK_THROWS_AS(build_body_params({Vec3(1.0, 1.0, 1.0)}, 0.0), ValidationError);
    CHECK_THROWS_AS(lambda_factors({Vec3(1.0, 1.0, 1.0)}, -1.0), ValidationError);
}
