// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failed criteria. Runs the full reference scenario, so allow a few minutes.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "fishsim/scenario.hpp"
#include "oracle_helpers.hpp"

using namespace fishsim;

namespace {

int g_failures = 0;

void report(int n, bool ok, const std::string& text) {
    std::printf("criterion %2d: %s  %s\n", n, ok ? "PASS" : "FAIL", text.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Scenario load_reference() {
    const char* dir = std::getenv("FISHSIM_SCENARIO_DIR");
    const std::filesystem::path base = dir ? dir : "scenarios";
    return load_scenario(base / "paper_sec5.json");
}

double max_abs_diag_err(const Mat3& m, const Vec3& expect) {
    double e = 0;
    for (int q = 0; q < 3; ++q) e = std::max(e, std::abs(m(q, q) - expect[q]));
    return e;
}

// ---------------------------------------------------------------- criterion 1
void criterion_inertia_tables() {
    const auto t0 = std::chrono::steady_clock::now();
    const BodyParams b0 = build_body_params({Vec3(8.0, 1.5, 2.0)}, 1.0);
    const BodyParams b1 = build_body_params({Vec3(5.0, 0.8, 1.5)}, 0.25);
    double err = 0;
    err = std::max(err, max_abs_diag_err(b0.total_mass_matrix, Vec3(1.0659, 2.1696, 1.6641)));
    err = std::max(err, max_abs_diag_err(b1.total_mass_matrix, Vec3(0.2664, 0.6551, 0.3677)));
    err = std::max(err, max_abs_diag_err(b0.total_inertia, Vec3(1.3480, 20.1500, 25.3276)));
    err = std::max(err, max_abs_diag_err(b1.total_inertia, Vec3(0.1961, 1.7889, 2.9210)));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(1, err <= 5e-4 && secs < 1.0,
           fmt("inertia tables: max entry error %.2e (limit 5e-4), %.3f s", err, secs));
}

// ---------------------------------------------------------------- criterion 2
void criterion_quadrature_identities() {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> axis(0.2, 10.0);
    double worst_sum = 0;
    for (int k = 0; k < 200; ++k) {
        const Vec3 l(axis(rng), axis(rng), axis(rng));
        const auto g = gamma_factors({l});
        worst_sum = std::max(worst_sum, std::abs(g[0] + g[1] + g[2] - 2.0));
    }
    const double m = 1.37;
    const EllipsoidGeometry sphere{Vec3(1.9, 1.9, 1.9)};
    const Mat3 mf = added_mass_matrix(sphere, m);
    double sphere_err = 0;
    for (int q = 0; q < 3; ++q) sphere_err = std::max(sphere_err, std::abs(mf(q, q) - 0.5 * m));
    const auto lam = lambda_factors(sphere, m);
    const bool lambda_zero = lam[0] == 0.0 && lam[1] == 0.0 && lam[2] == 0.0;
    report(2, worst_sum <= 1e-9 && sphere_err <= 1e-10 && lambda_zero,
           fmt("gamma sum err %.2e (limit 1e-9); sphere added-mass err %.2e; sphere "
               "lambda exactly zero",
               worst_sum, sphere_err) +
               (lambda_zero ? "" : " VIOLATED"));
}

// ------------------------------------------------- criteria 3, 4, 5, 6 (LGVI)
struct LongRunData {
    bool px_bit_identical = true;
    double px0_norm = 0;
    double max_dpomega_1e4 = 0;
    double lgvi_slope_times_T = 0;
    double lgvi_max_de = 0;
    double lgvi_max_orth = 0;
    double e0 = 0;
};

LongRunData long_lgvi_run(const SystemParams& params, const SystemState& s0) {
    LongRunData d;
    SolverSettings set;  // h = 1e-3, newton_tol = 1e-13
    const long n = 100000;
    const Conserved c0 = conserved_quantities(params, s0);
    d.e0 = c0.energy;
    d.px0_norm = s0.momentum.px.norm();

    std::vector<double> energy;
    energy.reserve(n + 1);
    energy.push_back(c0.energy);
    const Vec3 px0 = s0.momentum.px;

    SystemState s = s0;
    for (long k = 1; k <= n; ++k) {
        s = implicit_step(params, s, set).next;
        if (s.momentum.px.x() != px0.x() || s.momentum.px.y() != px0.y() ||
            s.momentum.px.z() != px0.z())
            d.px_bit_identical = false;
        const Conserved c = conserved_quantities(params, s);
        energy.push_back(c.energy);
        if (k <= 10000)
            d.max_dpomega_1e4 = std::max(d.max_dpomega_1e4, (c.p_omega - c0.p_omega).norm());
        double orth = orthogonality_error(s.config.r0.matrix());
        for (const auto& r : s.config.peripherals)
            orth = std::max(orth, orthogonality_error(r.matrix()));
        d.lgvi_max_orth = std::max(d.lgvi_max_orth, orth);
        d.lgvi_max_de = std::max(d.lgvi_max_de, std::abs(c.energy - c0.energy));
    }

    // least-squares slope of E(t)
    const double t_total = n * set.h;
    double st = 0, se = 0, stt = 0, ste = 0;
    for (long k = 0; k <= n; ++k) {
        const double t = k * set.h;
        st += t;
        se += energy[k];
        stt += t * t;
        ste += t * energy[k];
    }
    const double m = n + 1;
    const double slope = (m * ste - st * se) / (m * stt - st * st);
    d.lgvi_slope_times_T = std::abs(slope) * t_total;
    return d;
}

// ---------------------------------------------------------------- criterion 7
double short_time_disagreement(const SystemParams& params, const SystemState& s0) {
    SolverSettings set;  // h = 1e-3
    RkSettings rset;
    rset.mode = RkSettings::Mode::adaptive;
    rset.rel_tol = 1e-8;
    rset.abs_tol = 1e-10;
    const RkTrajectory ref = run_rk(params, s0, rset, 1.0, 1, 0.01);

    SystemState s = s0;
    double worst = 0;
    long ref_row = 1;
    for (long k = 1; k <= 1000; ++k) {
        s = implicit_step(params, s, set).next;
        if (k % 10 != 0) continue;
        const Eigen::VectorXd xi_l =
            legendre_to_velocity(params, Pose::from(s.config), s.momentum).to_vector();
        const Eigen::VectorXd xi_r =
            legendre_to_velocity(params, RkState::unpack_pose(ref.states[ref_row], 2),
                                 RkState::unpack_momentum(ref.states[ref_row], 2))
                .to_vector();
        ++ref_row;
        worst = std::max(worst, (xi_l - xi_r).norm() / std::max(1.0, xi_r.norm()));
    }
    return worst;
}

// ---------------------------------------------------------------- criterion 8
double flow_equivalence(const SystemParams& params) {
    std::mt19937 rng(99);
    SolverSettings set;
    double worst = 0;
    for (int seed = 0; seed < 10; ++seed) {
        const SystemState s0 = oracle::random_state(params, rng);
        SystemState s = s0;
        std::vector<DiscreteStep> steps;
        for (int k = 0; k < 100; ++k) {
            const LgviStepResult r = implicit_step(params, s, set);
            steps.push_back(r.step);
            s = r.next;
        }
        Configuration config = s0.config;
        DiscreteStep f = steps[0];
        for (int k = 0; k + 1 < 100; ++k) {
            const DiscreteStep g = lagrangian_two_step(params, config, f, set);
            double diff = (g.f0.matrix() - steps[k + 1].f0.matrix()).norm();
            diff = std::max(diff, (g.dx - steps[k + 1].dx).norm());
            for (int i = 0; i < params.peripheral_count(); ++i)
                diff = std::max(diff,
                                (g.fis[i].matrix() - steps[k + 1].fis[i].matrix()).norm());
            worst = std::max(worst, diff);
            config.r0 = config.r0 * f.f0;
            config.x += f.dx;
            for (int i = 0; i < params.peripheral_count(); ++i)
                config.peripherals[i] = config.peripherals[i] * f.fis[i];
            f = g;
        }
    }
    return worst;
}

// ---------------------------------------------------------------- criterion 9
void criterion_consistency_and_order(const SystemParams& params, const SystemState& s0) {
    // (a) L_d(g, exp(h xi)) / h -> T(g, xi) with O(h) error
    Velocity xi;
    xi.omega0 = Vec3(0.2, 0.1, 0.5);
    xi.xdot = Vec3(0.0, -0.4142, -0.59);
    xi.omegas = {Vec3(0.1, -0.3, -0.2), Vec3(-0.1, 0.4, -0.6)};
    const double t = kinetic_energy(params, s0.config, xi);
    auto ld_err = [&](double h) {
        DiscreteStep f;
        f.f0 = exp_so3(h * xi.omega0);
        f.dx = h * xi.xdot;
        for (const Vec3& w : xi.omegas) f.fis.push_back(exp_so3(h * w));
        return std::abs(discrete_lagrangian(params, s0.config, f, h) / h - t);
    };
    const double consistency_slope = std::log2(ld_err(2e-3) / ld_err(1e-3));

    // (b) self-convergence of the integrator against a tight reference
    RkSettings rset;
    rset.mode = RkSettings::Mode::adaptive;
    rset.rel_tol = 1e-12;
    rset.abs_tol = 1e-13;
    const RkTrajectory ref = run_rk(params, s0, rset, 1.0, 1, 1.0);
    const Eigen::VectorXd xi_ref =
        legendre_to_velocity(params, RkState::unpack_pose(ref.states.back(), 2),
                             RkState::unpack_momentum(ref.states.back(), 2))
            .to_vector();
    auto xi_err = [&](double h) {
        SolverSettings set;
        set.h = h;
        SystemState s = s0;
        const long n = std::lround(1.0 / h);
        for (long k = 0; k < n; ++k) s = implicit_step(params, s, set).next;
        const Eigen::VectorXd v =
            legendre_to_velocity(params, Pose::from(s.config), s.momentum).to_vector();
        return (v - xi_ref).norm() / xi_ref.norm();
    };
    const double e4 = xi_err(4e-3), e2 = xi_err(2e-3), e1 = xi_err(1e-3);
    const double s1 = std::log2(e4 / e2), s2 = std::log2(e2 / e1);
    report(9, consistency_slope >= 0.9 && s1 >= 0.9 && s2 >= 0.9,
           fmt("L_d consistency slope %.2f; self-convergence slopes %.2f, %.2f (need >= 0.9)",
               consistency_slope, s1, s2));
}

// --------------------------------------------------------------- criterion 10
void criterion_oracle_equivalence(const SystemParams& params, const SystemState& s0) {
    std::mt19937 rng(17);
    double worst_ke = 0;
    for (int k = 0; k < 100; ++k) {
        const SystemState s = oracle::random_state(params, rng);
        const Pose pose = Pose::from(s.config);
        Velocity xi;
        xi.omega0 = oracle::random_vec3(rng);
        xi.xdot = oracle::random_vec3(rng);
        xi.omegas = {oracle::random_vec3(rng), oracle::random_vec3(rng)};
        const double a = kinetic_energy(params, pose, xi);
        const double b = oracle::bodywise_kinetic_energy(params, pose, xi);
        worst_ke = std::max(worst_ke, std::abs(a - b) / std::max(1.0, std::abs(b)));
    }

    // high-accuracy reference trajectory of the Hamiltonian flow
    const double h_ref = 1e-4;
    const long n = 10000;
    std::vector<Eigen::VectorXd> ys;
    ys.reserve(n + 1);
    Eigen::VectorXd y = RkState::pack(Pose::from(s0.config), s0.momentum);
    ys.push_back(y);
    for (long k = 0; k < n; ++k) {
        y = rk_step(params, y, h_ref);
        ys.push_back(y);
    }
    auto xi_at = [&](long row) {
        return legendre_to_velocity(params, RkState::unpack_pose(ys[row], 2),
                                    RkState::unpack_momentum(ys[row], 2))
            .to_vector();
    };
    double worst_res = 0;
    const long stride = 5;  // delta = 5e-4
    const double delta = stride * h_ref;
    for (long row = 1000; row <= 9000; row += 1000) {
        const Eigen::VectorXd xidot =
            (-xi_at(row + 2 * stride) + 8.0 * xi_at(row + stride) - 8.0 * xi_at(row - stride) +
             xi_at(row - 2 * stride)) /
            (12.0 * delta);
        const Pose pose = RkState::unpack_pose(ys[row], 2);
        const Velocity xi = Velocity::from_vector(xi_at(row));
        const Eigen::VectorXd res =
            euler_lagrange_residual(params, pose, xi, Velocity::from_vector(xidot));
        const double scale = std::max(1.0, (assemble_inertia(params, pose) * xidot).norm());
        worst_res = std::max(worst_res, res.norm() / scale);
    }
    report(10, worst_ke <= 1e-12 && worst_res <= 1e-8,
           fmt("kinetic-energy route difference %.2e (limit 1e-12); EL residual %.2e "
               "(limit 1e-8)",
               worst_ke, worst_res));
}

}  // namespace

int main() {
    criterion_inertia_tables();
    criterion_quadrature_identities();

    const Scenario scenario = load_reference();
    const ResolvedScenario rs = resolve_scenario(scenario);
    const SystemParams& params = rs.params;
    const SystemState& s0 = rs.initial;

    const LongRunData lr = long_lgvi_run(params, s0);
    report(3, lr.px_bit_identical && lr.px0_norm <= 1e-3,
           std::string("p_x ") +
               (lr.px_bit_identical ? "bit-identical" : "NOT bit-identical") +
               fmt(" over 1e5 steps; ||p_x(0)|| = %.2e (limit 1e-3)", lr.px0_norm));
    report(4, lr.max_dpomega_1e4 <= 1e-8,
           fmt("max ||p_Omega(t) - p_Omega(0)|| over 1e4 steps = %.2e (limit 1e-8)",
               lr.max_dpomega_1e4));

    // RK4 baseline over the same physical duration
    RkSettings rk4;
    rk4.h = 0.01;
    const Conserved c0 = conserved_quantities(params, s0);
    double rk4_max_de = 0, rk4_max_orth = 0;
    {
        Eigen::VectorXd y = RkState::pack(Pose::from(s0.config), s0.momentum);
        const long n = std::lround(100.0 / rk4.h);
        for (long k = 1; k <= n; ++k) {
            y = rk_step(params, y, rk4.h);
            const Pose pose = RkState::unpack_pose(y, 2);
            const Conserved c =
                conserved_quantities(params, pose, RkState::unpack_momentum(y, 2));
            rk4_max_de = std::max(rk4_max_de, std::abs(c.energy - c0.energy));
            double orth = orthogonality_error(pose.r0);
            for (const auto& r : pose.rs) orth = std::max(orth, orthogonality_error(r));
            rk4_max_orth = std::max(rk4_max_orth, orth);
        }
    }
    report(5,
           lr.lgvi_slope_times_T <= 1e-4 * std::abs(lr.e0) && rk4_max_de >= 10.0 * lr.lgvi_max_de,
           fmt("LGVI energy slope x T = %.2e (limit %.2e); RK4 |dE| = %.2e",
               lr.lgvi_slope_times_T, 1e-4 * std::abs(lr.e0), rk4_max_de) +
               fmt(" vs LGVI |dE| = %.2e (RK4 must be >= 10x)", lr.lgvi_max_de));
    report(6, lr.lgvi_max_orth <= 1e-12 && rk4_max_orth > 1e-6,
           fmt("LGVI max orthogonality error %.2e (limit 1e-12); un-projected RK4 %.2e "
               "(must exceed 1e-6 by t = 100)",
               lr.lgvi_max_orth, rk4_max_orth));

    const double c7 = short_time_disagreement(params, s0);
    report(7, c7 <= 1e-3,
           fmt("max relative xi difference LGVI vs adaptive RK over [0,1] s = %.2e "
               "(limit 1e-3)",
               c7));

    const double c8 = flow_equivalence(params);
    report(8, c8 <= 1e-9,
           fmt("Hamiltonian vs Lagrangian flow max step difference = %.2e (limit 1e-9, "
               "100 steps, 10 seeds)",
               c8));

    criterion_consistency_and_order(params, s0);
    criterion_oracle_equivalence(params, s0);

    std::printf("%d of 10 criteria failed\n", g_failures);
    return g_failures;
}
