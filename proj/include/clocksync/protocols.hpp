#pragma once

// Fringe expectations for the four clock-synchronization protocols, computed
// two ways: closed forms and brute-force density-operator simulation.
//
// Protocol step orders:
//   Entangled    cat state on n qubits, one channel crossing per qubit,
//                Bob measures the X quadrature string.
//   Transport    single qubit; one exchange is channel, X_B, channel, X_A;
//                terminal Alice measures after r exchanges (2r channel uses),
//                terminal Bob takes one extra crossing (2r+1 uses).
//   Hybrid       cat state on size qubits; per qubit channel, X_B, channel;
//                Alice measures (2*size channel uses).
//   SqlBaseline  size independent plus-state qubits, one crossing each, Bob
//                measures per qubit; the outcome reports the per-qubit fringe.
//
// The Y "quadrature" of a multi-qubit protocol measures Y on the first qubit
// and X on the rest; for Hybrid the recorded product is negated.  With that
// convention every protocol satisfies e_X = V cos(arg), e_Y = -V sin(arg).

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "clocksync/channel.hpp"
#include "clocksync/errors.hpp"
#include "clocksync/state.hpp"

namespace clocksync {

enum class ProtocolKind { Entangled, Transport, Hybrid, SqlBaseline };
enum class Terminal { Alice, Bob };
enum class Basis { X, Y };

struct ProtocolSpec {
    ProtocolKind kind = ProtocolKind::Entangled;
    // Qubits for Entangled/SqlBaseline, exchanges for Transport, cat qubits
    // (half the channel uses) for Hybrid.
    int size = 1;
    Terminal terminal = Terminal::Bob;
    Basis basis = Basis::X;

    static ProtocolSpec entangled(int n, Basis basis = Basis::X) {
        return ProtocolSpec{ProtocolKind::Entangled, n, Terminal::Bob, basis};
    }
    static ProtocolSpec transport(int r, Terminal terminal = Terminal::Alice,
                                  Basis basis = Basis::X) {
        return ProtocolSpec{ProtocolKind::Transport, r, terminal, basis};
    }
    static ProtocolSpec hybrid_from_uses(int channel_uses, Basis basis = Basis::X) {
        if (channel_uses < 2 || channel_uses % 2 != 0) {
            throw MalformedSpecError("hybrid channel-use count must be a positive even number");
        }
        return ProtocolSpec{ProtocolKind::Hybrid, channel_uses / 2, Terminal::Alice, basis};
    }
    static ProtocolSpec sql_baseline(int n, Basis basis = Basis::X) {
        return ProtocolSpec{ProtocolKind::SqlBaseline, n, Terminal::Bob, basis};
    }

    void validate() const {
        if (size < 1) throw MalformedSpecError("protocol size must be positive");
        switch (kind) {
            case ProtocolKind::Entangled:
                if (terminal != Terminal::Bob) {
                    throw MalformedSpecError("entangled protocol terminates at Bob");
                }
                break;
            case ProtocolKind::Hybrid:
                if (terminal != Terminal::Alice) {
                    throw MalformedSpecError("hybrid protocol terminates at Alice");
                }
                break;
            case ProtocolKind::SqlBaseline:
                if (terminal != Terminal::Bob) {
                    throw MalformedSpecError("baseline protocol terminates at Bob");
                }
                break;
            case ProtocolKind::Transport:
                break;
        }
    }

    long long channel_uses() const {
        switch (kind) {
            case ProtocolKind::Entangled:
            case ProtocolKind::SqlBaseline:
                return size;
            case ProtocolKind::Transport:
                return terminal == Terminal::Alice ? 2LL * size : 2LL * size + 1;
            case ProtocolKind::Hybrid:
                return 2LL * size;
        }
        return 0;
    }
};

struct ProtocolOutcome {
    double expectation = 0.0;
    double visibility = 1.0;
    // Argument whose cosine (basis X) or negative sine (basis Y) the fringe
    // follows.
    double fringe_phase = 0.0;
    double p_plus = 0.5;
    double p_minus = 0.5;
    long long channel_uses = 0;
};

inline std::pair<double, double> fringe_probabilities(double expectation) {
    if (!(std::abs(expectation) <= 1 + 1e-12)) {
        throw OutOfRangeError("expectation outside [-1, 1]");
    }
    double p_plus = 0.5 * (1 + expectation);
    p_plus = std::min(1.0, std::max(0.0, p_plus));
    return {p_plus, 1 - p_plus};
}

namespace detail {

struct Fringe {
    double visibility;   // lambda^channel_uses (lambda alone for SqlBaseline)
    double phase;        // the fringe argument at phi
    double phase_rate;   // d(phase)/d(phi)
};

inline Fringe analytic_fringe(const ProtocolSpec& spec, const ChannelParams& ch, double phi) {
    const double lam = ch.lambda;
    switch (spec.kind) {
        case ProtocolKind::Entangled: {
            const double n = spec.size;
            return {std::pow(lam, n), n * (phi - ch.alpha), n};
        }
        case ProtocolKind::Transport: {
            if (spec.terminal == Terminal::Alice) {
                const double uses = 2.0 * spec.size;
                return {std::pow(lam, uses), uses * phi, uses};
            }
            // Odd-leg closed form validated against the dense oracle: the
            // final crossing contributes one lambda and a single alpha shift.
            const double uses = 2.0 * spec.size + 1;
            return {std::pow(lam, uses), uses * phi - ch.alpha, uses};
        }
        case ProtocolKind::Hybrid: {
            const double uses = 2.0 * spec.size;
            return {std::pow(lam, uses), uses * phi, uses};
        }
        case ProtocolKind::SqlBaseline:
            return {lam, phi - ch.alpha, 1.0};
    }
    throw MalformedSpecError("unknown protocol kind");
}

inline void require_cptp(const ChannelParams& ch) {
    if (!is_cptp(make_channel(ch)).cptp) {
        throw NotCptpError("channel parameters are not completely positive");
    }
}

inline ProtocolOutcome outcome_from(const ProtocolSpec& spec, const Fringe& fringe,
                                    double expectation) {
    ProtocolOutcome out;
    out.expectation = expectation;
    out.visibility = fringe.visibility;
    out.fringe_phase = fringe.phase;
    const auto [p_plus, p_minus] = fringe_probabilities(expectation);
    out.p_plus = p_plus;
    out.p_minus = p_minus;
    out.channel_uses = spec.channel_uses();
    return out;
}

}  // namespace detail

inline ProtocolOutcome analytic_expectation(const ProtocolSpec& spec, const ChannelParams& ch,
                                            double phi) {
    spec.validate();
    detail::require_cptp(ch);
    const detail::Fringe fringe = detail::analytic_fringe(spec, ch, phi);
    const double e = spec.basis == Basis::X ? fringe.visibility * std::cos(fringe.phase)
                                            : -fringe.visibility * std::sin(fringe.phase);
    return detail::outcome_from(spec, fringe, e);
}

// d(expectation)/d(phi) of the analytic fringe.
inline double fringe_slope(const ProtocolSpec& spec, const ChannelParams& ch, double phi) {
    spec.validate();
    detail::require_cptp(ch);
    const detail::Fringe f = detail::analytic_fringe(spec, ch, phi);
    return spec.basis == Basis::X ? -f.visibility * f.phase_rate * std::sin(f.phase)
                                  : -f.visibility * f.phase_rate * std::cos(f.phase);
}

inline ProtocolOutcome simulate_expectation(const ProtocolSpec& spec, const ChannelParams& ch,
                                            double phi) {
    spec.validate();
    detail::require_cptp(ch);
    const PauliTransferMatrix channel = make_channel(ch);

    auto quadrature_string = [&](int n, Frame frame) {
        PauliString string = PauliString::repeated(kPauliX, n, frame);
        if (spec.basis == Basis::Y) string.letters[0] = kPauliY;
        return string;
    };

    double e = 0.0;
    switch (spec.kind) {
        case ProtocolKind::Entangled: {
            if (spec.size > kMaxQubits) {
                throw TooManyQubitsError("entangled simulation beyond the qubit cap");
            }
            DensityOperator rho = cat_state(spec.size);
            for (int q = 0; q < spec.size; ++q) rho = apply_channel_at(rho, channel, q);
            e = pauli_expectation(rho, quadrature_string(spec.size, Frame::Bob), phi);
            break;
        }
        case ProtocolKind::Transport: {
            DensityOperator rho = plus_state();
            for (int exchange = 0; exchange < spec.size; ++exchange) {
                rho = apply_channel_at(rho, channel, 0);
                rho = apply_gate(rho, Gate::XFlip, 0, Frame::Bob, phi);
                rho = apply_channel_at(rho, channel, 0);
                rho = apply_gate(rho, Gate::XFlip, 0, Frame::Alice, phi);
            }
            Frame frame = Frame::Alice;
            if (spec.terminal == Terminal::Bob) {
                rho = apply_channel_at(rho, channel, 0);
                frame = Frame::Bob;
            }
            e = pauli_expectation(rho, quadrature_string(1, frame), phi);
            break;
        }
        case ProtocolKind::Hybrid: {
            if (spec.size > kMaxQubits) {
                throw TooManyQubitsError("hybrid simulation beyond the qubit cap");
            }
            DensityOperator rho = cat_state(spec.size);
            for (int q = 0; q < spec.size; ++q) {
                rho = apply_channel_at(rho, channel, q);
                rho = apply_gate(rho, Gate::XFlip, q, Frame::Bob, phi);
                rho = apply_channel_at(rho, channel, q);
            }
            e = pauli_expectation(rho, quadrature_string(spec.size, Frame::Alice), phi);
            // Alice records the negated product in the Y quadrature, keeping
            // e_Y = -V sin(arg) like the other protocols.
            if (spec.basis == Basis::Y) e = -e;
            break;
        }
        case ProtocolKind::SqlBaseline: {
            DensityOperator rho = plus_state();
            rho = apply_channel_at(rho, channel, 0);
            PauliString string = PauliString::repeated(
                spec.basis == Basis::X ? kPauliX : kPauliY, 1, Frame::Bob);
            e = pauli_expectation(rho, string, phi);
            break;
        }
    }
    return detail::outcome_from(spec, detail::analytic_fringe(spec, ch, phi), e);
}

// DeltaO / |d<O>/dphi| for the analytic fringe; +infinity at fringe extrema
// where the derivative vanishes.
inline double nominal_uncertainty(const ProtocolSpec& spec, const ChannelParams& ch, double phi) {
    const double e = analytic_expectation(spec, ch, phi).expectation;
    const double slope = fringe_slope(spec, ch, phi);
    const detail::Fringe f = detail::analytic_fringe(spec, ch, phi);
    if (std::abs(slope) <= 1e-12 * std::max(1.0, f.visibility * f.phase_rate)) {
        return std::numeric_limits<double>::infinity();
    }
    return std::sqrt(std::max(0.0, 1 - e * e)) / std::abs(slope);
}

inline std::string to_string(ProtocolKind kind) {
    switch (kind) {
        case ProtocolKind::Entangled: return "entangled";
        case ProtocolKind::Transport: return "transport";
        case ProtocolKind::Hybrid: return "hybrid";
        case ProtocolKind::SqlBaseline: return "sql-baseline";
    }
    return "?";
}

inline std::string to_string(Terminal terminal) {
    return terminal == Terminal::Alice ? "alice" : "bob";
}

inline std::string to_string(Basis basis) { return basis == Basis::X ? "x" : "y"; }

}  // namespace clocksync
