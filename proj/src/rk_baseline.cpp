#include "fishsim/rk_baseline.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace fishsim {

namespace {

void write_mat(Eigen::VectorXd& y, int off, const Mat3& m) {
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) y[off + 3 * r + c] = m(r, c);
}

Mat3 read_mat(const Eigen::VectorXd& y, int off) {
    Mat3 m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = y[off + 3 * r + c];
    return m;
}

}  // namespace

Eigen::VectorXd RkState::pack(const Pose& pose, const Momentum& mu) {
    const int p = static_cast<int>(pose.rs.size());
    Eigen::VectorXd y(dim(p));
    write_mat(y, 0, pose.r0);
    y.segment<3>(9) = pose.x;
    for (int i = 0; i < p; ++i) write_mat(y, 12 + 9 * i, pose.rs[i]);
    y.segment(12 + 9 * p, 6 + 3 * p) = mu.to_vector();
    return y;
}

Pose RkState::unpack_pose(const Eigen::VectorXd& y, int p) {
    Pose pose;
    pose.r0 = read_mat(y, 0);
    pose.x = y.segment<3>(9);
    pose.rs.resize(p);
    for (int i = 0; i < p; ++i) pose.rs[i] = read_mat(y, 12 + 9 * i);
    return pose;
}

Momentum RkState::unpack_momentum(const Eigen::VectorXd& y, int p) {
    return Momentum::from_vector(y.segment(12 + 9 * p, 6 + 3 * p));
}

Eigen::VectorXd rk_rhs(const SystemParams& params, const Eigen::VectorXd& y) {
    const int p = params.peripheral_count();
    const Pose pose = RkState::unpack_pose(y, p);
    const Momentum mu = RkState::unpack_momentum(y, p);
    const HamiltonDerivative d = hamilton_rhs(params, pose, mu);
    Eigen::VectorXd dy(y.size());
    write_mat(dy, 0, d.r0_dot);
    dy.segment<3>(9) = d.x_dot;
    for (int i = 0; i < p; ++i) write_mat(dy, 12 + 9 * i, d.ri_dot[i]);
    dy.segment(12 + 9 * p, 6 + 3 * p) = d.mu_dot.to_vector();
    return dy;
}

Mat3 project_rotation(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0) {
        Mat3 flip = Mat3::Identity();
        flip(2, 2) = -1;
        r = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    return r;
}

Eigen::VectorXd rk_step(const SystemParams& params, const Eigen::VectorXd& y, double h,
                        bool reorthonormalize) {
    Eigen::VectorXd out =
        rk4_generic([&](const Eigen::VectorXd& v) { return rk_rhs(params, v); }, y, h);
    if (reorthonormalize) {
        const int p = params.peripheral_count();
        write_mat(out, 0, project_rotation(read_mat(out, 0)));
        for (int i = 0; i < p; ++i)
            write_mat(out, 12 + 9 * i, project_rotation(read_mat(out, 12 + 9 * i)));
    }
    return out;
}

namespace {

// Dormand-Prince 5(4) embedded pair.
struct Dp45Result {
    Eigen::VectorXd y5;
    double err = 0;  // scaled error norm
};

Dp45Result dp45_step(const SystemParams& params, const Eigen::VectorXd& y, double h,
                     double rel_tol, double abs_tol) {
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    auto f = [&](const Eigen::VectorXd& v) { return rk_rhs(params, v); };
    const Eigen::VectorXd k1 = f(y);
    const Eigen::VectorXd k2 = f(y + h * (a21 * k1));
    const Eigen::VectorXd k3 = f(y + h * (a31 * k1 + a32 * k2));
    const Eigen::VectorXd k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Eigen::VectorXd k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Eigen::VectorXd k6 =
        f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Dp45Result r;
    r.y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Eigen::VectorXd k7 = f(r.y5);
    const Eigen::VectorXd err_vec =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double acc = 0;
    for (int j = 0; j < y.size(); ++j) {
        const double scale =
            abs_tol + rel_tol * std::max(std::abs(y[j]), std::abs(r.y5[j]));
        const double q = err_vec[j] / scale;
        acc += q * q;
    }
    r.err = std::sqrt(acc / y.size());
    return r;
}

}  // namespace

RkTrajectory run_rk(const SystemParams& params, const SystemState& initial,
                    const RkSettings& settings, double t_final, long cadence,
                    double sample_dt) {
    if (t_final < 0) throw ValidationError("run_rk: negative duration");
    RkTrajectory traj;
    Eigen::VectorXd y = RkState::pack(Pose::from(initial.config), initial.momentum);
    traj.times.push_back(initial.time);
    traj.states.push_back(y);
    traj.accepted_h.push_back(0);

    if (settings.mode == RkSettings::Mode::fixed) {
        if (!(settings.h > 0)) throw ValidationError("run_rk: fixed mode needs h > 0");
        const long n = std::lround(t_final / settings.h);
        for (long k = 1; k <= n; ++k) {
            y = rk_step(params, y, settings.h, settings.reorthonormalize);
            if (k % cadence == 0 || k == n) {
                traj.times.push_back(initial.time + k * settings.h);
                traj.states.push_back(y);
                traj.accepted_h.push_back(settings.h);
            }
        }
        return traj;
    }

    if (!(settings.rel_tol > 0) || !(settings.abs_tol > 0)) {
        throw ValidationError("run_rk: adaptive mode needs positive tolerances");
    }
    double t = initial.time;
    const double t_end = initial.time + t_final;
    double next_sample = sample_dt > 0 ? initial.time + sample_dt : t_end;
    double h = sample_dt > 0 ? std::min(sample_dt, 1e-2) : 1e-2;
    double prev_err = 1.0;
    const int max_rejects = 30;
    while (t < t_end - 1e-14 * std::max(1.0, std::abs(t_end))) {
        const double target = std::min(next_sample, t_end);
        double h_try = std::min(h, target - t);
        int rejects = 0;
        for (;;) {
            const Dp45Result r = dp45_step(params, y, h_try, settings.rel_tol,
                                           settings.abs_tol);
            if (r.err <= 1.0) {
                y = r.y5;
                t += h_try;
                // PI controller
                const double fac = 0.9 * std::pow(std::max(r.err, 1e-10), -0.7 / 5.0) *
                                   std::pow(std::max(prev_err, 1e-10), 0.4 / 5.0);
                h = h_try * std::clamp(fac, 0.2, 5.0);
                prev_err = std::max(r.err, 1e-10);
                break;
            }
            h_try *= std::max(0.2, 0.9 * std::pow(r.err, -1.0 / 5.0));
            if (++rejects > max_rejects) {
                throw SolveFailure("run_rk: adaptive step control failed at t = " +
                                   std::to_string(t));
            }
        }
        if (settings.reorthonormalize) {
            const int p = params.peripheral_count();
            write_mat(y, 0, project_rotation(read_mat(y, 0)));
            for (int i = 0; i < p; ++i)
                write_mat(y, 12 + 9 * i, project_rotation(read_mat(y, 12 + 9 * i)));
        }
        const bool at_sample = t >= target - 1e-12 * std::max(1.0, std::abs(target));
        if (at_sample || sample_dt <= 0) {
            traj.times.push_back(t);
            traj.states.push_back(y);
            traj.accepted_h.push_back(h_try);
            if (at_sample && sample_dt > 0) next_sample += sample_dt;
        }
    }
    return traj;
}

}  // namespace fishsim
