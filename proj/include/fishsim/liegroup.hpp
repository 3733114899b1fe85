#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fishsim/errors.hpp"

namespace fishsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Hat map: hat(v) * w == v x w.
Mat3 hat(const Vec3& v);

/// Inverse of the hat map. The input must be skew-symmetric within
/// 1e-8 Frobenius; the skew part is used.
Vec3 vee(const Mat3& m);

/// Frobenius norm of I - R^T R. Zero iff R is orthogonal.
double orthogonality_error(const Mat3& r);

/// A 3x3 rotation matrix, validated on construction.
class Rotation {
public:
    Rotation() : m_(Mat3::Identity()) {}

    /// Throws ValidationError unless ||R^T R - I||_F <= 1e-10 and det R > 0.
    explicit Rotation(const Mat3& m);

    /// Skips validation. For internal use where the input is orthogonal
    /// by construction (group products, exponentials).
    static Rotation unchecked(const Mat3& m) {
        Rotation r;
        r.m_ = m;
        return r;
    }

    static constexpr double kConstructionTol = 1e-10;

    const Mat3& matrix() const { return m_; }
    Rotation transposed() const { return unchecked(m_.transpose()); }
    Rotation operator*(const Rotation& o) const { return unchecked(m_ * o.m_); }
    Vec3 operator*(const Vec3& v) const { return m_ * v; }

private:
    Mat3 m_;
};

/// Rodrigues rotation exp: so(3) -> SO(3), with a series fallback for
/// small angles so the Newton solver stays smooth near the identity.
Rotation exp_so3(const Vec3& v);

/// Logarithm of a rotation, inverse of exp_so3 for angles < pi.
Vec3 log_so3(const Rotation& r);

/// Group element g = (R_0, x, R_1, ..., R_P).
struct Configuration {
    Rotation r0;
    Vec3 x = Vec3::Zero();
    std::vector<Rotation> peripherals;

    int body_count() const { return 1 + static_cast<int>(peripherals.size()); }
};

/// Algebra element xi = [Omega_0; xdot; Omega_1; ...; Omega_P].
struct Velocity {
    Vec3 omega0 = Vec3::Zero();
    Vec3 xdot = Vec3::Zero();
    std::vector<Vec3> omegas;

    int dim() const { return 6 + 3 * static_cast<int>(omegas.size()); }
    Eigen::VectorXd to_vector() const;
    static Velocity from_vector(const Eigen::VectorXd& v);
};

/// Co-algebra element mu = [p_0; p_x; p_1; ...; p_P].
struct Momentum {
    Vec3 p0 = Vec3::Zero();
    Vec3 px = Vec3::Zero();
    std::vector<Vec3> ps;

    int dim() const { return 6 + 3 * static_cast<int>(ps.size()); }
    Eigen::VectorXd to_vector() const;
    static Momentum from_vector(const Eigen::VectorXd& v);
};

/// Relative group update f_k = (F_0, dx, F_1, ..., F_P), g_{k+1} = g_k f_k.
struct DiscreteStep {
    Rotation f0;
    Vec3 dx = Vec3::Zero();
    std::vector<Rotation> fis;

    static DiscreteStep identity(int peripheral_count) {
        DiscreteStep s;
        s.fis.resize(peripheral_count);
        return s;
    }
};

/// ad*_xi mu = [-hat(Omega_0) p_0; p_x; -hat(Omega_i) p_i].
Momentum coad_continuous(const Velocity& xi, const Momentum& mu);

/// Ad*_{f^-1} mu = [F_0 p_0; p_x; F_i p_i].
Momentum coAd_discrete(const DiscreteStep& f, const Momentum& mu);

}  // namespace fishsim
