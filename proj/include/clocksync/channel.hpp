#pragma once

// Single-qubit CPTP maps in the Pauli transfer-matrix picture.
//
// Conventions used throughout the library:
//   * Operator basis order is (I, Z, X, Y).  A transfer matrix M acts as
//     E(sigma_xi) = sum_eta sigma_eta * M(eta, xi), so the first column is
//     (1, t_Z, t_X, t_Y) and the first row (1, 0, 0, 0) encodes trace
//     preservation.
//   * Z = |0><0| - |1><1| with |0> the upper level.
//   * Channels compose by matrix product: "first then second" is second*first.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "clocksync/errors.hpp"

namespace clocksync {

using complex = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;
using Mat3r = Eigen::Matrix3d;
using Mat4c = Eigen::Matrix4cd;
using Mat4r = Eigen::Matrix4d;
using Vec3r = Eigen::Vector3d;

inline constexpr double kDefaultTol = 1e-9;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum PauliIndex : int { kPauliI = 0, kPauliZ = 1, kPauliX = 2, kPauliY = 3 };

inline const Mat2c& pauli_matrix(int index) {
    static const std::array<Mat2c, 4> basis = [] {
        std::array<Mat2c, 4> b;
        b[kPauliI] << 1, 0, 0, 1;
        b[kPauliZ] << 1, 0, 0, -1;
        b[kPauliX] << 0, 1, 1, 0;
        b[kPauliY] << 0, complex(0, -1), complex(0, 1), 0;
        return b;
    }();
    return basis[static_cast<std::size_t>(index)];
}

// exp(-i Z angle / 2)
inline Mat2c z_half_rotation(double angle) {
    Mat2c u = Mat2c::Zero();
    u(0, 0) = std::exp(complex(0, -angle / 2));
    u(1, 1) = std::exp(complex(0, angle / 2));
    return u;
}

inline double reduce_angle(double angle) {
    double r = std::fmod(angle, kTwoPi);
    if (r < 0) r += kTwoPi;
    // fmod can land exactly on 2*pi after the correction above.
    if (r >= kTwoPi) r = 0.0;
    return r;
}

// The four physical numbers of the restricted phase-covariant channel:
// Z displacement t, Z compression s, equatorial compression lambda and
// systematic Z rotation alpha.  Canonical form keeps lambda >= 0 (a negative
// lambda is the same channel with alpha shifted by pi) and alpha in [0, 2pi).
struct ChannelParams {
    double t = 0.0;
    double s = 1.0;
    double lambda = 1.0;
    double alpha = 0.0;

    static ChannelParams canonical(double t, double s, double lambda, double alpha) {
        if (!std::isfinite(t) || !std::isfinite(s) || !std::isfinite(lambda) ||
            !std::isfinite(alpha)) {
            throw OutOfRangeError("channel parameters must be finite");
        }
        if (lambda < 0) {
            lambda = -lambda;
            alpha += std::numbers::pi;
        }
        constexpr double eps = 1e-12;
        if (std::abs(t) > 1 + eps || std::abs(s) > 1 + eps || lambda > 1 + eps) {
            throw OutOfRangeError("channel parameters outside |t|<=1, |s|<=1, lambda<=1");
        }
        return ChannelParams{t, s, lambda, reduce_angle(alpha)};
    }
};

// 4x4 real matrix of a qubit superoperator in the (I, Z, X, Y) basis.
struct PauliTransferMatrix {
    Mat4r m = Mat4r::Identity();

    double first_row_residual() const {
        double r = std::abs(m(0, 0) - 1.0);
        for (int j = 1; j < 4; ++j) r = std::max(r, std::abs(m(0, j)));
        return r;
    }
};

// Channel applied to half of a maximally entangled pair, normalized to unit
// trace; positivity of this operator certifies complete positivity.
struct ChoiOperator {
    Mat4c m = Mat4c::Zero();
};

struct CptpReport {
    bool cptp = false;
    std::array<double, 4> choi_eigenvalues{};
    double trace_preservation_residual = 0.0;
};

inline PauliTransferMatrix make_channel(const ChannelParams& p) {
    PauliTransferMatrix out;
    const double c = std::cos(p.alpha);
    const double sn = std::sin(p.alpha);
    out.m << 1, 0, 0, 0,
             p.t, p.s, 0, 0,
             0, 0, p.lambda * c, -p.lambda * sn,
             0, 0, p.lambda * sn, p.lambda * c;
    return out;
}

// General trace-preserving qubit map: lower-right block R2*S*R1 acting on
// Bloch coordinates ordered (Z, X, Y) and displacement column t_vec.
inline PauliTransferMatrix make_general_channel(const Vec3r& t_vec, const Mat3r& r1,
                                                const Vec3r& s_diag, const Mat3r& r2) {
    constexpr double tol = 1e-9;
    auto check_rotation = [&](const Mat3r& r, const char* name) {
        double orth = (r * r.transpose() - Mat3r::Identity()).cwiseAbs().maxCoeff();
        if (orth > tol || std::abs(r.determinant() - 1.0) > tol) {
            throw NonRotationError(std::string(name) + " is not a proper rotation");
        }
    };
    check_rotation(r1, "R1");
    check_rotation(r2, "R2");
    if (s_diag.cwiseAbs().maxCoeff() > 1 + 1e-12) {
        throw OutOfRangeError("compression factors must satisfy |s_j| <= 1");
    }
    PauliTransferMatrix out;
    out.m.setZero();
    out.m(0, 0) = 1.0;
    out.m.block<3, 1>(1, 0) = t_vec;
    out.m.block<3, 3>(1, 1) = r2 * s_diag.asDiagonal() * r1;
    return out;
}

// "Apply first, then second."
inline PauliTransferMatrix compose(const PauliTransferMatrix& second,
                                   const PauliTransferMatrix& first) {
    return PauliTransferMatrix{second.m * first.m};
}

inline ChoiOperator choi_of(const PauliTransferMatrix& channel) {
    // (E x id) on the Bell projector = 1/4 sum_xi E(sigma_xi) (x) sigma_xi^T.
    Mat4c choi = Mat4c::Zero();
    for (int xi = 0; xi < 4; ++xi) {
        Mat2c image = Mat2c::Zero();
        for (int eta = 0; eta < 4; ++eta) image += channel.m(eta, xi) * pauli_matrix(eta);
        const Mat2c transposed = pauli_matrix(xi).transpose();
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                choi.block<2, 2>(2 * a, 2 * b) += 0.25 * image(a, b) * transposed;
            }
        }
    }
    return ChoiOperator{choi};
}

inline CptpReport is_cptp(const PauliTransferMatrix& channel, double tol = kDefaultTol) {
    if (tol <= 0) throw OutOfRangeError("tolerance must be positive");
    CptpReport report;
    report.trace_preservation_residual = channel.first_row_residual();
    Eigen::SelfAdjointEigenSolver<Mat4c> solver(choi_of(channel).m);
    for (int i = 0; i < 4; ++i) {
        report.choi_eigenvalues[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    }
    const double min_eig = solver.eigenvalues().minCoeff();
    report.cptp = report.trace_preservation_residual <= tol && min_eig >= -tol;
    return report;
}

// Closed-form complete-positivity margin for the restricted channel at
// alpha = 0: nonnegative exactly on {1 - s >= |t|, (1+s)^2 - t^2 >= 4 lambda^2}.
// Derived from the Choi eigenvalues; tests validate it against is_cptp.
inline double cptp_margin_alpha0(double t, double s, double lambda) {
    const double m1 = 1.0 - s - std::abs(t);
    const double m2 = (1.0 + s) * (1.0 + s) - t * t - 4.0 * lambda * lambda;
    return std::min(m1, m2);
}

// A channel carries no synchronization information iff it commutes with every
// rotation about the shared Z axis.
inline bool is_phase_covariant(const PauliTransferMatrix& channel, double tol = kDefaultTol) {
    if (tol <= 0) throw OutOfRangeError("tolerance must be positive");
    for (int k = 0; k < 24; ++k) {
        const double theta = (k + 0.37) * kTwoPi / 24.0;
        const Mat4r rot = make_channel(ChannelParams{0, 1, 1, theta}).m;
        if ((rot * channel.m - channel.m * rot).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
}

// Pi(O) = (O - Z O Z)/2: keeps the off-diagonal (equatorial) part of O.
inline Mat2c project_equatorial(const Mat2c& op) {
    const Mat2c& z = pauli_matrix(kPauliZ);
    return 0.5 * (op - z * op * z);
}

// Pi . E(O) = lambda e^{-iZ alpha/2} Pi(O) e^{iZ alpha/2} for the restricted
// phase-covariant channel.
inline Mat2c projected_channel_action(const PauliTransferMatrix& channel, const Mat2c& op) {
    if (!is_phase_covariant(channel)) {
        throw NotPhaseCovariantError("channel does not commute with Z rotations");
    }
    const double lambda = std::hypot(channel.m(2, 2), channel.m(3, 2));
    const double alpha = lambda > 0 ? std::atan2(channel.m(3, 2), channel.m(2, 2)) : 0.0;
    const Mat2c u = z_half_rotation(alpha);
    return lambda * (u * project_equatorial(op) * u.adjoint());
}

}  // namespace clocksync
