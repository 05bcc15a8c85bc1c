#pragma once

// Monte Carlo shot sampling on the protocol fringes, the extended bit-by-bit
// recovery of the dimensionless offset T (phi = pi T, T = 0.t1 t2 ...), and
// empirical uncertainty estimation.
//
// Bit decision: with n_j = 2^j channel uses, the known prefix contributes an
// even multiple of pi, so the fringe argument mod 2pi is
// pi*t_j + pi*0.t_{j+1}...  Sampling both quadratures gives
// theta_hat = atan2(-ybar, xbar) in [0, 2pi) and bit = [theta_hat >= pi].

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "clocksync/channel.hpp"
#include "clocksync/errors.hpp"
#include "clocksync/protocols.hpp"
#include "clocksync/sampler.hpp"

namespace clocksync {

struct BitEstimate {
    int j = 0;
    int bit = 0;
    double theta_hat = 0.0;  // estimated fringe phase in [0, 2pi)
    long shots_x = 0;
    long shots_y = 0;
    double margin = 0.0;  // distance of theta_hat from the nearest decision boundary
    bool degenerate_retry = false;
};

struct SyncEstimate {
    std::vector<BitEstimate> bits;
    double T_hat = 0.0;
    double phi_hat = 0.0;
    double delta_t = 0.0;  // time resolution pi / (2^k omega)
    long long channel_uses_total = 0;
    ProtocolKind protocol_kind = ProtocolKind::Entangled;
    std::uint64_t seed = 0;
    int k = 0;
    int nu = 0;
    double omega = 1.0;
};

namespace detail {

// The size-2^j instance of the extended protocol.
inline ProtocolSpec bit_spec(ProtocolKind kind, int j, Basis basis) {
    switch (kind) {
        case ProtocolKind::Entangled:
            return ProtocolSpec::entangled(1 << j, basis);
        case ProtocolKind::Transport:
            return ProtocolSpec::transport(1 << (j - 1), Terminal::Alice, basis);
        case ProtocolKind::Hybrid:
            return ProtocolSpec{ProtocolKind::Hybrid, 1 << (j - 1), Terminal::Alice, basis};
        case ProtocolKind::SqlBaseline:
            break;
    }
    throw MalformedSpecError("the extended protocol needs a coherent kind");
}

inline double sampled_mean(double expectation, long shots, ShotSampler& sampler) {
    const auto [p_plus, p_minus] = fringe_probabilities(expectation);
    const auto [plus, minus] = sample_shots(p_plus, shots, sampler);
    return static_cast<double>(plus - minus) / static_cast<double>(shots);
}

}  // namespace detail

inline BitEstimate estimate_bit(int j, int nu, ProtocolKind kind, const ChannelParams& ch,
                                double true_phi, ShotSampler& sampler) {
    if (j < 1 || j > 30) throw OutOfRangeError("bit index must be in [1, 30]");
    if (nu < 2) throw OutOfRangeError("need at least two shots per bit");
    const double e_x = analytic_expectation(detail::bit_spec(kind, j, Basis::X), ch, true_phi)
                           .expectation;
    const double e_y = analytic_expectation(detail::bit_spec(kind, j, Basis::Y), ch, true_phi)
                           .expectation;

    BitEstimate out;
    out.j = j;
    out.shots_x = (nu + 1) / 2;
    out.shots_y = nu / 2;
    double xbar = detail::sampled_mean(e_x, out.shots_x, sampler);
    double ybar = detail::sampled_mean(e_y, out.shots_y, sampler);
    if (xbar == 0.0 && ybar == 0.0) {
        out.degenerate_retry = true;
        xbar = detail::sampled_mean(e_x, out.shots_x, sampler);
        ybar = detail::sampled_mean(e_y, out.shots_y, sampler);
        if (xbar == 0.0 && ybar == 0.0) {
            throw DegenerateShotsError("bit " + std::to_string(j) +
                                       ": both quadrature means are zero");
        }
    }
    double theta = std::atan2(-ybar, xbar);
    if (theta < 0) theta += kTwoPi;
    if (theta >= kTwoPi || theta == 0.0) theta = 0.0;  // also flushes -0
    out.theta_hat = theta;
    out.bit = theta >= std::numbers::pi ? 1 : 0;
    out.margin = std::min({theta, std::abs(theta - std::numbers::pi), kTwoPi - theta});
    return out;
}

inline SyncEstimate estimate_offset(int k, int nu, ProtocolKind kind, const ChannelParams& ch,
                                    double true_T, double omega, ShotSampler& sampler) {
    if (k < 1 || k > 30) throw OutOfRangeError("bit count must be in [1, 30]");
    if (!(true_T >= 0 && true_T < 1)) throw OutOfRangeError("true_T must lie in [0, 1)");
    if (!(omega > 0)) throw OutOfRangeError("omega must be positive");
    const double phi = std::numbers::pi * true_T;

    SyncEstimate est;
    est.protocol_kind = kind;
    est.seed = sampler.seed();
    est.k = k;
    est.nu = nu;
    est.omega = omega;
    for (int j = 1; j <= k; ++j) {
        ShotSampler bit_sampler = sampler.substream(static_cast<std::uint64_t>(j));
        BitEstimate bit = estimate_bit(j, nu, kind, ch, phi, bit_sampler);
        est.T_hat += bit.bit * std::ldexp(1.0, -j);
        est.channel_uses_total += static_cast<long long>(nu) * (1LL << j);
        est.bits.push_back(bit);
    }
    est.phi_hat = std::numbers::pi * est.T_hat;
    est.delta_t = std::numbers::pi / (std::ldexp(1.0, k) * omega);
    return est;
}

struct UncertaintyEstimate {
    double mean_phi_hat = 0.0;
    double std_phi_hat = 0.0;
    Basis basis = Basis::X;  // the quadrature that was inverted
};

// Repeated single-fringe runs: each trial samples the steeper quadrature and
// inverts the mean through the analytic fringe to a local phase estimate.
inline UncertaintyEstimate empirical_uncertainty(ProtocolKind kind, int size,
                                                 const ChannelParams& ch, double phi, int nu,
                                                 int trials, ShotSampler& sampler) {
    if (nu < 1) throw OutOfRangeError("need at least one shot per trial");
    if (trials < 2) throw OutOfRangeError("need at least two trials");
    Terminal terminal = Terminal::Bob;
    if (kind == ProtocolKind::Transport || kind == ProtocolKind::Hybrid) {
        terminal = Terminal::Alice;
    }
    const ProtocolSpec spec_x{kind, size, terminal, Basis::X};
    const ProtocolSpec spec_y{kind, size, terminal, Basis::Y};
    const double slope_x = fringe_slope(spec_x, ch, phi);
    const double slope_y = fringe_slope(spec_y, ch, phi);
    if (std::abs(slope_x) < 1e-9 && std::abs(slope_y) < 1e-9) {
        throw FlatFringeError("both quadrature slopes vanish at this phase");
    }
    const bool use_x = std::abs(slope_x) >= std::abs(slope_y);
    const ProtocolSpec& spec = use_x ? spec_x : spec_y;
    const double slope = use_x ? slope_x : slope_y;
    const double e = analytic_expectation(spec, ch, phi).expectation;
    // Every individual qubit of the baseline contributes a shot.
    const long shots = kind == ProtocolKind::SqlBaseline
                           ? static_cast<long>(size) * nu
                           : static_cast<long>(nu);

    std::vector<double> estimates;
    estimates.reserve(static_cast<std::size_t>(trials));
    double sum = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        ShotSampler trial_sampler = sampler.substream(static_cast<std::uint64_t>(trial));
        const double mean = detail::sampled_mean(e, shots, trial_sampler);
        const double phi_hat = phi + (mean - e) / slope;
        estimates.push_back(phi_hat);
        sum += phi_hat;
    }
    UncertaintyEstimate out;
    out.basis = spec.basis;
    out.mean_phi_hat = sum / trials;
    double ss = 0.0;
    for (double v : estimates) ss += (v - out.mean_phi_hat) * (v - out.mean_phi_hat);
    out.std_phi_hat = std::sqrt(ss / (trials - 1));
    return out;
}

}  // namespace clocksync
