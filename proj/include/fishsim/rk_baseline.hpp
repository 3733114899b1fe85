#pragma once

#include "fishsim/model.hpp"

namespace fishsim {

struct RkSettings {
    enum class Mode { fixed, adaptive };
    Mode mode = Mode::fixed;
    double h = 1e-3;        // fixed mode
    double rel_tol = 1e-8;  // adaptive mode
    double abs_tol = 1e-10;
    bool reorthonormalize = false;
};

/// Flat ODE state [R_0 row-major; x; R_i row-major ...; p_0; p_x; p_i ...].
/// Rotation blocks are raw reals; nothing keeps them on SO(3).
struct RkState {
    static int dim(int peripheral_count) { return 18 + 12 * peripheral_count; }
    static Eigen::VectorXd pack(const Pose& pose, const Momentum& mu);
    static Pose unpack_pose(const Eigen::VectorXd& y, int peripheral_count);
    static Momentum unpack_momentum(const Eigen::VectorXd& y, int peripheral_count);
};

struct RkTrajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<double> accepted_h;  // step size used to reach each sample
};

/// Time derivative of the flat state under Hamilton's equations.
Eigen::VectorXd rk_rhs(const SystemParams& params, const Eigen::VectorXd& y);

/// One classical RK4 step. Optionally projects rotation blocks back to
/// SO(3) by polar decomposition afterwards.
Eigen::VectorXd rk_step(const SystemParams& params, const Eigen::VectorXd& y, double h,
                        bool reorthonormalize = false);

/// Integrates to t_final, sampling every `cadence` fixed steps (or at
/// t = k * cadence * h_init for the adaptive mode).
RkTrajectory run_rk(const SystemParams& params, const SystemState& initial,
                    const RkSettings& settings, double t_final, long cadence = 1,
                    double sample_dt = 0.0);

/// Nearest rotation to m in the Frobenius sense (polar factor).
Mat3 project_rotation(const Mat3& m);

/// Generic classical RK4 step on dy/dt = f(y); exposed for order checks.
template <class F>
Eigen::VectorXd rk4_generic(F&& f, const Eigen::VectorXd& y, double h) {
    const Eigen::VectorXd k1 = f(y);
    const Eigen::VectorXd k2 = f(y + 0.5 * h * k1);
    const Eigen::VectorXd k3 = f(y + 0.5 * h * k2);
    const Eigen::VectorXd k4 = f(y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace fishsim
