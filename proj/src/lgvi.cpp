#include "fishsim/lgvi.hpp"

#include <Eigen/LU>
#include <cmath>
#include <functional>

namespace fishsim {

namespace {

DiscreteStep unflatten_step(const Eigen::VectorXd& u) {
    DiscreteStep s;
    s.f0 = exp_so3(u.segment<3>(0));
    s.dx = u.segment<3>(3);
    const int p = static_cast<int>(u.size() - 6) / 3;
    s.fis.reserve(p);
    for (int i = 0; i < p; ++i) s.fis.push_back(exp_so3(u.segment<3>(6 + 3 * i)));
    return s;
}

Eigen::VectorXd flatten_step(const DiscreteStep& s) {
    Eigen::VectorXd u(6 + 3 * static_cast<int>(s.fis.size()));
    u.segment<3>(0) = log_so3(s.f0);
    u.segment<3>(3) = s.dx;
    for (size_t i = 0; i < s.fis.size(); ++i) u.segment<3>(6 + 3 * i) = log_so3(s.fis[i]);
    return u;
}

// h * mu_k as a function of (g_k, f_k): the input-side discrete Legendre
// transform, also the left-hand side of the implicit step equations.
Eigen::VectorXd scaled_input_momentum(const SystemParams& params, const Configuration& config,
                                      const DiscreteStep& step) {
    const int p = params.peripheral_count();
    const Mat3& r0 = config.r0.matrix();
    const Mat3& f0 = step.f0.matrix();
    const Mat3& jd0 = params.nonstandard.jd0;
    const CouplingTerms ct = coupling_terms(params, config, step);

    Eigen::VectorXd out(params.dof());
    const Vec3 r0dx = r0.transpose() * step.dx;
    Vec3 hp0 = vee(f0 * jd0 - jd0 * f0.transpose()) -
               (params.central.total_mass_matrix * r0dx).cross(r0dx);
    Vec3 hpx = r0 * (params.central.total_mass_matrix * r0dx);
    for (int i = 0; i < p; ++i) {
        const Mat3& ri = config.peripherals[i].matrix();
        const Mat3& fi = step.fis[i].matrix();
        const Mat3& jdi = params.nonstandard.jdi[i];
        const Mat3& mi = params.peripherals[i].total_mass_matrix;
        hp0 += params.d0i[i].cross(r0.transpose() * ct.a[i]);
        hpx += ct.a[i];
        out.segment<3>(6 + 3 * i) =
            vee(fi * jdi - jdi * fi.transpose()) -
            (fi * params.di0[i]).cross(mi * (ri.transpose() * ct.b[i])) -
            ri.transpose() * ct.a[i].cross(ct.b[i]);
    }
    out.segment<3>(0) = hp0;
    out.segment<3>(3) = hpx;
    return out;
}

// h * mu_{k+1} rotational slots as a function of (g_k, f_k).
Momentum output_momentum(const SystemParams& params, const Configuration& config,
                         const DiscreteStep& step, double h, const Vec3& px) {
    const int p = params.peripheral_count();
    const Mat3& r0 = config.r0.matrix();
    const Mat3& f0 = step.f0.matrix();
    const Mat3& jd0 = params.nonstandard.jd0;
    const Mat3 r0next = r0 * f0;
    const CouplingTerms ct = coupling_terms(params, config, step);

    Momentum mu;
    Vec3 hp0 = vee(jd0 * f0 - f0.transpose() * jd0);
    mu.ps.resize(p);
    for (int i = 0; i < p; ++i) {
        const Mat3& ri = config.peripherals[i].matrix();
        const Mat3& fi = step.fis[i].matrix();
        const Mat3& jdi = params.nonstandard.jdi[i];
        const Mat3& mi = params.peripherals[i].total_mass_matrix;
        hp0 += params.d0i[i].cross(r0next.transpose() * ct.a[i]);
        mu.ps[i] = (vee(jdi * fi - fi.transpose() * jdi) -
                    params.di0[i].cross(fi.transpose() * (mi * (ri.transpose() * ct.b[i])))) /
                   h;
    }
    mu.p0 = hp0 / h;
    mu.px = px;  // copied, not recomputed
    return mu;
}

Configuration advance(const Configuration& config, const DiscreteStep& step) {
    Configuration next;
    next.r0 = config.r0 * step.f0;
    next.x = config.x + step.dx;
    next.peripherals.reserve(config.peripherals.size());
    for (size_t i = 0; i < config.peripherals.size(); ++i) {
        next.peripherals.push_back(config.peripherals[i] * step.fis[i]);
    }
    return next;
}

// Newton iteration on res(u) = 0 with a forward-difference Jacobian.
Eigen::VectorXd newton_solve(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& res,
                             Eigen::VectorXd u, const SolverSettings& settings,
                             const char* what) {
    Eigen::VectorXd r = res(u);
    const int n = static_cast<int>(u.size());
    for (int it = 0; r.norm() > settings.newton_tol; ++it) {
        if (it >= settings.max_iters) {
            throw NewtonDivergence(std::string(what) + ": residual " +
                                   std::to_string(r.norm()) + " after " +
                                   std::to_string(settings.max_iters) + " iterations");
        }
        const double eps = 1e-7 * std::max(1.0, u.norm());
        Eigen::MatrixXd jac(n, n);
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd up = u;
            up[j] += eps;
            jac.col(j) = (res(up) - r) / eps;
        }
        const Eigen::VectorXd du = jac.partialPivLu().solve(r);
        if (!du.allFinite()) {
            throw NewtonDivergence(std::string(what) + ": singular Jacobian");
        }
        u -= du;
        r = res(u);
    }
    return u;
}

}  // namespace

CouplingTerms coupling_terms(const SystemParams& params, const Configuration& config,
                             const DiscreteStep& step) {
    const int p = params.peripheral_count();
    const Mat3& r0 = config.r0.matrix();
    CouplingTerms ct;
    ct.a.resize(p);
    ct.b.resize(p);
    for (int i = 0; i < p; ++i) {
        const Mat3& ri = config.peripherals[i].matrix();
        const Mat3& fi = step.fis[i].matrix();
        ct.b[i] = step.dx + r0 * ((step.f0.matrix() - Mat3::Identity()) * params.d0i[i]);
        ct.a[i] = ri * (params.peripherals[i].total_mass_matrix *
                        (ri.transpose() * ct.b[i] - (fi - Mat3::Identity()) * params.di0[i]));
    }
    return ct;
}

double discrete_lagrangian(const SystemParams& params, const Configuration& config,
                           const DiscreteStep& step, double h) {
    const int p = params.peripheral_count();
    const Mat3& r0 = config.r0.matrix();
    const Mat3& f0 = step.f0.matrix();
    const Vec3& dx = step.dx;
    const Mat3 f0m = f0 - Mat3::Identity();

    double ld = (0.5 / h) * dx.dot(r0 * (params.central.total_mass_matrix * (r0.transpose() * dx))) +
                (1.0 / h) * ((Mat3::Identity() - f0) * params.nonstandard.jd0).trace();
    for (int i = 0; i < p; ++i) {
        const Mat3& ri = config.peripherals[i].matrix();
        const Mat3& fi = step.fis[i].matrix();
        const Mat3& mi = params.peripherals[i].total_mass_matrix;
        const Vec3& d0i = params.d0i[i];
        const Vec3& di0 = params.di0[i];
        const Vec3 u = r0 * (f0m * d0i);                       // R_0 (F_0 - I) d_0i
        const Vec3 w = ri * (mi * ((fi - Mat3::Identity()) * di0));  // R_i M_i (F_i - I) d_i0
        const Mat3 mri = ri * mi * ri.transpose();
        ld += (0.5 / h) * dx.dot(mri * dx);
        ld += (1.0 / h) * ((Mat3::Identity() - fi) * params.nonstandard.jdi[i]).trace();
        ld += (0.5 / h) * u.dot(mri * u);
        ld += (1.0 / h) * dx.dot(mri * u);
        ld -= (1.0 / h) * dx.dot(w);
        ld -= (1.0 / h) * u.dot(w);
    }
    return ld;
}

Momentum discrete_legendre(const SystemParams& params, const Configuration& config,
                           const DiscreteStep& step, double h) {
    return Momentum::from_vector(scaled_input_momentum(params, config, step) / h);
}

LgviStepResult implicit_step(const SystemParams& params, const SystemState& state,
                             const SolverSettings& settings) {
    const double h = settings.h;
    if (!(h > 0) || !(settings.newton_tol > 0) || settings.max_iters < 1) {
        throw ValidationError("implicit_step: invalid solver settings");
    }
    const Configuration& g = state.config;
    const Eigen::VectorXd target = h * state.momentum.to_vector();

    // O(h^2) predictor from the continuous velocity
    const Velocity xi = legendre_to_velocity(params, Pose::from(g), state.momentum);
    Eigen::VectorXd u = h * xi.to_vector();

    int iters = 0;
    auto res = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return scaled_input_momentum(params, g, unflatten_step(v)) - target;
    };
    // count iterations by wrapping newton_solve's residual calls is noisy;
    // run the same loop here to keep the count exact
    Eigen::VectorXd r = res(u);
    const int n = static_cast<int>(u.size());
    while (r.norm() > settings.newton_tol) {
        if (iters >= settings.max_iters) {
            throw NewtonDivergence("implicit_step: residual " + std::to_string(r.norm()) +
                                   " after " + std::to_string(settings.max_iters) +
                                   " iterations (step size too large?)");
        }
        const double eps = 1e-7 * std::max(1.0, u.norm());
        Eigen::MatrixXd jac(n, n);
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd up = u;
            up[j] += eps;
            jac.col(j) = (res(up) - r) / eps;
        }
        const Eigen::VectorXd du = jac.partialPivLu().solve(r);
        if (!du.allFinite()) throw NewtonDivergence("implicit_step: singular Jacobian");
        u -= du;
        r = res(u);
        ++iters;
    }

    LgviStepResult out;
    out.step = unflatten_step(u);
    out.next.config = advance(g, out.step);
    out.next.momentum = output_momentum(params, g, out.step, h, state.momentum.px);
    out.next.time = state.time + h;
    out.newton_iters = iters;
    return out;
}

DiscreteStep lagrangian_two_step(const SystemParams& params, const Configuration& config_k,
                                 const DiscreteStep& step_k, const SolverSettings& settings) {
    const int p = params.peripheral_count();
    const Configuration config_next = advance(config_k, step_k);
    const Mat3 r0n = config_next.r0.matrix();
    const Mat3& f0k = step_k.f0.matrix();
    const Mat3& jd0 = params.nonstandard.jd0;
    const CouplingTerms ctk = coupling_terms(params, config_k, step_k);

    // terms of the discrete Euler-Lagrange equations that depend on (g_k, f_k) only
    Eigen::VectorXd known(params.dof());
    known.segment<3>(0) = vee(jd0 * f0k - f0k.transpose() * jd0);
    known.segment<3>(3) = config_k.r0.matrix() *
                          (params.central.total_mass_matrix *
                           (config_k.r0.matrix().transpose() * step_k.dx));
    for (int i = 0; i < p; ++i) {
        const Mat3& fik = step_k.fis[i].matrix();
        const Mat3& jdi = params.nonstandard.jdi[i];
        const Mat3& mi = params.peripherals[i].total_mass_matrix;
        known.segment<3>(3) += ctk.a[i];
        known.segment<3>(6 + 3 * i) =
            vee(jdi * fik - fik.transpose() * jdi) -
            params.di0[i].cross(
                fik.transpose() *
                (mi * (config_k.peripherals[i].matrix().transpose() * ctk.b[i])));
    }

    auto res = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
        const DiscreteStep f = unflatten_step(u);
        const CouplingTerms ct = coupling_terms(params, config_next, f);
        const Mat3& f0 = f.f0.matrix();
        Eigen::VectorXd r = known;
        const Vec3 rdx = r0n.transpose() * f.dx;
        r.segment<3>(0) += -vee(f0 * jd0 - jd0 * f0.transpose()) +
                           (params.central.total_mass_matrix * rdx).cross(rdx);
        r.segment<3>(3) -= r0n * (params.central.total_mass_matrix * rdx);
        for (int i = 0; i < p; ++i) {
            const Mat3& rin = config_next.peripherals[i].matrix();
            const Mat3& fi = f.fis[i].matrix();
            const Mat3& jdi = params.nonstandard.jdi[i];
            const Mat3& mi = params.peripherals[i].total_mass_matrix;
            r.segment<3>(0) += params.d0i[i].cross(r0n.transpose() * (ctk.a[i] - ct.a[i]));
            r.segment<3>(3) -= ct.a[i];
            r.segment<3>(6 + 3 * i) +=
                -vee(fi * jdi - jdi * fi.transpose()) +
                (fi * params.di0[i]).cross(mi * (rin.transpose() * ct.b[i])) +
                rin.transpose() * ct.a[i].cross(ct.b[i]);
        }
        return r;
    };

    const Eigen::VectorXd u =
        newton_solve(res, flatten_step(step_k), settings, "lagrangian_two_step");
    return unflatten_step(u);
}

LgviTrajectory run_lgvi(const SystemParams& params, const SystemState& initial,
                        const SolverSettings& settings, long n_steps) {
    if (n_steps < 0) throw ValidationError("run_lgvi: negative step count");
    LgviTrajectory traj;
    traj.states.reserve(n_steps + 1);
    traj.states.push_back(initial);
    traj.steps.reserve(n_steps);
    traj.newton_iters.reserve(n_steps);
    for (long k = 0; k < n_steps; ++k) {
        try {
            LgviStepResult r = implicit_step(params, traj.states.back(), settings);
            traj.states.push_back(std::move(r.next));
            traj.steps.push_back(std::move(r.step));
            traj.newton_iters.push_back(r.newton_iters);
        } catch (const NewtonDivergence& e) {
            throw NewtonDivergence("step " + std::to_string(k) + ": " + e.what(), k);
        }
    }
    return traj;
}

}  // namespace fishsim
