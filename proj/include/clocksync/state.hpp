#pragma once

// Dense multi-qubit density-operator arithmetic: state preparation, ideal
// gates, per-qubit channel application, Pauli-string expectations and
// Alice <-> Bob frame conversion.
//
// Qubit 0 is the leftmost tensor factor (most significant bit of the matrix
// index).  Bob's operators are Alice's conjugated by e^{-iZ phi/2} per qubit,
// so X_B = cos(phi) X_A + sin(phi) Y_A.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "clocksync/channel.hpp"
#include "clocksync/errors.hpp"

namespace clocksync {

// Dense representation exists to serve as a brute-force oracle; analytic
// paths handle large sizes.
inline constexpr int kMaxQubits = 12;

enum class Frame { Alice, Bob };

struct PauliString {
    std::vector<PauliIndex> letters;
    Frame frame = Frame::Alice;

    static PauliString repeated(PauliIndex p, int n, Frame frame) {
        return PauliString{std::vector<PauliIndex>(static_cast<std::size_t>(n), p), frame};
    }
};

// Phase offset phi = omega * t_BA between the two clocks.
struct FrameOffset {
    double phi = 0.0;
    double omega = 1.0;

    static FrameOffset of(double phi, double omega) {
        if (!(omega > 0)) throw OutOfRangeError("omega must be positive");
        return FrameOffset{reduce_angle(phi), omega};
    }

    double time_offset() const { return phi / omega; }
};

struct DensityOperator {
    int n_qubits = 0;
    Eigen::MatrixXcd matrix;

    Eigen::Index dim() const { return matrix.rows(); }
};

inline DensityOperator cat_state(int n) {
    if (n < 1) throw OutOfRangeError("cat state needs at least one qubit");
    if (n > kMaxQubits) throw TooManyQubitsError("cat state beyond the dense-engine qubit cap");
    const Eigen::Index d = Eigen::Index(1) << n;
    DensityOperator rho{n, Eigen::MatrixXcd::Zero(d, d)};
    rho.matrix(0, 0) = 0.5;
    rho.matrix(0, d - 1) = 0.5;
    rho.matrix(d - 1, 0) = 0.5;
    rho.matrix(d - 1, d - 1) = 0.5;
    return rho;
}

inline DensityOperator plus_state() {
    DensityOperator rho{1, Eigen::MatrixXcd(2, 2)};
    rho.matrix << 0.5, 0.5, 0.5, 0.5;
    return rho;
}

// Conjugation by the per-qubit frame rotation: e^{-iZ phi/2}^(x)n O h.c.
// The rotation is diagonal, so only index phases are involved.
inline Eigen::MatrixXcd frame_rotate(const Eigen::MatrixXcd& op, double phi) {
    const Eigen::Index d = op.rows();
    if (d != op.cols() || d == 0 || (d & (d - 1)) != 0) {
        throw DimensionMismatchError("operator dimension must be a power of two");
    }
    int n = 0;
    while ((Eigen::Index(1) << n) < d) ++n;
    std::vector<complex> phase(static_cast<std::size_t>(d));
    for (Eigen::Index a = 0; a < d; ++a) {
        const int weight = n - 2 * std::popcount(static_cast<std::uint64_t>(a));
        phase[static_cast<std::size_t>(a)] = std::exp(complex(0, -phi * weight / 2));
    }
    Eigen::MatrixXcd out(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
            out(a, b) = phase[static_cast<std::size_t>(a)] * op(a, b) *
                        std::conj(phase[static_cast<std::size_t>(b)]);
        }
    }
    return out;
}

inline Mat2c frame_rotate(const Mat2c& op, double phi) {
    const Mat2c u = z_half_rotation(phi);
    return u * op * u.adjoint();
}

enum class Gate { XFlip, YHalfTurn, Hadamard, ZRotation };

inline Mat2c gate_unitary(Gate gate, double theta = 0.0) {
    Mat2c u;
    switch (gate) {
        case Gate::XFlip:
            return pauli_matrix(kPauliX);
        case Gate::YHalfTurn:
            // exp(-i Y pi/4): takes |0> to (|0>+|1>)/sqrt(2).
            u << 1, -1, 1, 1;
            return u / std::numbers::sqrt2;
        case Gate::Hadamard:
            u << 1, 1, 1, -1;
            return u / std::numbers::sqrt2;
        case Gate::ZRotation:
            return z_half_rotation(theta);
    }
    throw OutOfRangeError("unknown gate");
}

namespace detail {

// 2x2 block transform on the tensor factor at `qubit`; `f` maps the four
// block entries (b00, b01, b10, b11) in place.
template <typename F>
void for_each_block(Eigen::MatrixXcd& m, int n_qubits, int qubit, F&& f) {
    const Eigen::Index d = m.rows();
    const Eigen::Index mask = Eigen::Index(1) << (n_qubits - 1 - qubit);
    for (Eigen::Index a = 0; a < d; ++a) {
        if (a & mask) continue;
        for (Eigen::Index b = 0; b < d; ++b) {
            if (b & mask) continue;
            f(m(a, b), m(a, b | mask), m(a | mask, b), m(a | mask, b | mask));
        }
    }
}

inline void check_qubit_index(const DensityOperator& rho, int qubit) {
    if (qubit < 0 || qubit >= rho.n_qubits) {
        throw IndexOutOfRangeError("qubit index out of range");
    }
}

}  // namespace detail

inline DensityOperator apply_unitary_at(const DensityOperator& rho, const Mat2c& u, int qubit) {
    detail::check_qubit_index(rho, qubit);
    DensityOperator out = rho;
    const Mat2c ud = u.adjoint();
    detail::for_each_block(out.matrix, rho.n_qubits, qubit,
                           [&](complex& b00, complex& b01, complex& b10, complex& b11) {
                               Mat2c blk;
                               blk << b00, b01, b10, b11;
                               blk = u * blk * ud;
                               b00 = blk(0, 0);
                               b01 = blk(0, 1);
                               b10 = blk(1, 0);
                               b11 = blk(1, 1);
                           });
    return out;
}

inline DensityOperator apply_gate(const DensityOperator& rho, Gate gate, int qubit, Frame frame,
                                  double phi, double theta = 0.0) {
    Mat2c u = gate_unitary(gate, theta);
    if (frame == Frame::Bob) u = frame_rotate(u, phi);
    return apply_unitary_at(rho, u, qubit);
}

inline DensityOperator apply_channel_at(const DensityOperator& rho,
                                        const PauliTransferMatrix& channel, int qubit) {
    detail::check_qubit_index(rho, qubit);
    if (!is_cptp(channel).cptp) throw NotCptpError("channel rejected by the CPTP check");
    DensityOperator out = rho;
    const Mat4r& m = channel.m;
    detail::for_each_block(
        out.matrix, rho.n_qubits, qubit,
        [&](complex& b00, complex& b01, complex& b10, complex& b11) {
            // Pauli coordinates of the block, order (I, Z, X, Y).
            const complex ci = b00 + b11;
            const complex cz = b00 - b11;
            const complex cx = b01 + b10;
            const complex cy = complex(0, 1) * (b01 - b10);
            const complex oi = m(0, 0) * ci + m(0, 1) * cz + m(0, 2) * cx + m(0, 3) * cy;
            const complex oz = m(1, 0) * ci + m(1, 1) * cz + m(1, 2) * cx + m(1, 3) * cy;
            const complex ox = m(2, 0) * ci + m(2, 1) * cz + m(2, 2) * cx + m(2, 3) * cy;
            const complex oy = m(3, 0) * ci + m(3, 1) * cz + m(3, 2) * cx + m(3, 3) * cy;
            b00 = 0.5 * (oi + oz);
            b11 = 0.5 * (oi - oz);
            b01 = 0.5 * (ox - complex(0, 1) * oy);
            b10 = 0.5 * (ox + complex(0, 1) * oy);
        });
    return out;
}

// Tr(rho * P) with Bob-frame letters conjugated by the frame rotation at
// evaluation time.
inline double pauli_expectation(const DensityOperator& rho, const PauliString& string,
                                double phi) {
    if (static_cast<int>(string.letters.size()) != rho.n_qubits) {
        throw DimensionMismatchError("Pauli string length does not match qubit count");
    }
    const int n = rho.n_qubits;
    std::vector<Mat2c> ops;
    ops.reserve(string.letters.size());
    for (PauliIndex p : string.letters) {
        Mat2c op = pauli_matrix(p);
        if (string.frame == Frame::Bob) op = frame_rotate(op, phi);
        ops.push_back(op);
    }
    const Eigen::Index d = rho.dim();
    complex acc = 0;
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
            const complex r = rho.matrix(a, b);
            if (r == complex(0, 0)) continue;
            complex factor = 1;
            for (int q = 0; q < n; ++q) {
                const int shift = n - 1 - q;
                const Eigen::Index ab = (a >> shift) & 1;
                const Eigen::Index bb = (b >> shift) & 1;
                factor *= ops[static_cast<std::size_t>(q)](bb, ab);
                if (factor == complex(0, 0)) break;
            }
            acc += r * factor;
        }
    }
    return acc.real();
}

// Full Hermiticity/trace/positivity audit; O(8^n), intended for tests and
// debug runs rather than hot paths.
inline void validate_density(const DensityOperator& rho, double tol = 1e-10) {
    if (rho.matrix.rows() != rho.matrix.cols() ||
        rho.matrix.rows() != (Eigen::Index(1) << rho.n_qubits)) {
        throw DimensionMismatchError("density matrix dimension mismatch");
    }
    if ((rho.matrix - rho.matrix.adjoint()).cwiseAbs().maxCoeff() > tol) {
        throw OutOfRangeError("density operator is not Hermitian");
    }
    if (std::abs(rho.matrix.trace() - complex(1, 0)) > tol) {
        throw OutOfRangeError("density operator trace differs from one");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho.matrix);
    if (solver.eigenvalues().minCoeff() < -tol) {
        throw OutOfRangeError("density operator has a negative eigenvalue");
    }
}

}  // namespace clocksync
