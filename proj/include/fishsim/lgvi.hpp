#pragma once

#include "fishsim/model.hpp"

namespace fishsim {

struct SolverSettings {
    double h = 1e-3;           // fixed step size (s)
    double newton_tol = 1e-13; // absolute, on the h-scaled residual
    int max_iters = 50;
};

struct CouplingTerms {
    std::vector<Vec3> a;  // A_i = R_i M_i (R_i^T B_i - (F_i - I) d_i0)
    std::vector<Vec3> b;  // B_i = dx + R_0 (F_0 - I) d_0i
};

struct LgviStepResult {
    DiscreteStep step;
    SystemState next;
    int newton_iters = 0;
};

struct LgviTrajectory {
    std::vector<SystemState> states;  // length n_steps + 1
    std::vector<DiscreteStep> steps;  // length n_steps
    std::vector<int> newton_iters;    // length n_steps
};

/// One-step approximation of the action integral; zero at the identity step.
double discrete_lagrangian(const SystemParams& params, const Configuration& config,
                           const DiscreteStep& step, double h);

CouplingTerms coupling_terms(const SystemParams& params, const Configuration& config,
                             const DiscreteStep& step);

/// Input-side discrete Legendre transform: the momentum mu_k for which
/// (g_k, f_k) solves the one-step equations.
Momentum discrete_legendre(const SystemParams& params, const Configuration& config,
                           const DiscreteStep& step, double h);

/// Solves the implicit one-step equations for f_k by Newton iteration and
/// returns the updated state. Configuration updates are group products only;
/// p_x is copied bit-exactly.
LgviStepResult implicit_step(const SystemParams& params, const SystemState& state,
                             const SolverSettings& settings);

/// Two-step Lagrangian form: given (g_k, f_k), solves the discrete
/// Euler-Lagrange equations for f_{k+1}. Cross-validation for implicit_step.
DiscreteStep lagrangian_two_step(const SystemParams& params, const Configuration& config_k,
                                 const DiscreteStep& step_k, const SolverSettings& settings);

LgviTrajectory run_lgvi(const SystemParams& params, const SystemState& initial,
                        const SolverSettings& settings, long n_steps);

}  // namespace fishsim
