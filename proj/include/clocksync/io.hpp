#pragma once

// JSON/CSV serialization.  Floating-point values are printed with 17
// significant digits so that emitted numbers re-parse to the same double.
// Transfer matrices serialize row-major in the (I, Z, X, Y) basis order.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clocksync/channel.hpp"
#include "clocksync/errors.hpp"
#include "clocksync/estimation.hpp"
#include "clocksync/protocols.hpp"
#include "clocksync/state.hpp"

namespace clocksync {

using Json = nlohmann::ordered_json;

inline std::string format_double17(double value) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

// Compact JSON dump with %.17g floats (nlohmann's own dump uses
// shortest-round-trip formatting instead).
inline void dump_json17(const Json& j, std::string& out) {
    switch (j.type()) {
        case Json::value_t::number_float:
            out += format_double17(j.get<double>());
            break;
        case Json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& item : j) {
                if (!first) out += ',';
                first = false;
                dump_json17(item, out);
            }
            out += ']';
            break;
        }
        case Json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += Json(it.key()).dump();
                out += ':';
                dump_json17(it.value(), out);
            }
            out += '}';
            break;
        }
        default:
            out += j.dump();
            break;
    }
}

inline std::string dump_json17(const Json& j) {
    std::string out;
    dump_json17(j, out);
    out += '\n';
    return out;
}

inline Json channel_to_json(const ChannelParams& ch) {
    Json j;
    j["t"] = ch.t;
    j["s"] = ch.s;
    j["lambda"] = ch.lambda;
    j["alpha"] = ch.alpha;
    return j;
}

inline ChannelParams channel_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("channel must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key != "t" && key != "s" && key != "lambda" && key != "alpha") {
            throw ConfigError("unknown channel key \"" + key + "\"");
        }
        if (!it.value().is_number()) throw ConfigError("channel key \"" + key + "\" must be a number");
    }
    auto field = [&](const char* key, double fallback) {
        return j.contains(key) ? j.at(key).get<double>() : fallback;
    };
    return ChannelParams::canonical(field("t", 0.0), field("s", 1.0), field("lambda", 1.0),
                                    field("alpha", 0.0));
}

inline Json protocol_spec_to_json(const ProtocolSpec& spec) {
    Json j;
    j["kind"] = to_string(spec.kind);
    j["size"] = spec.size;
    j["terminal"] = to_string(spec.terminal);
    j["basis"] = to_string(spec.basis);
    return j;
}

inline ProtocolKind protocol_kind_from_string(const std::string& name);

inline ProtocolSpec protocol_spec_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("protocol spec must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key != "kind" && key != "size" && key != "terminal" && key != "basis") {
            throw ConfigError("unknown protocol spec key \"" + key + "\"");
        }
    }
    ProtocolSpec spec;
    spec.kind = protocol_kind_from_string(j.at("kind").get<std::string>());
    spec.size = j.at("size").get<int>();
    if (j.contains("terminal")) {
        const std::string terminal = j.at("terminal").get<std::string>();
        if (terminal == "alice") spec.terminal = Terminal::Alice;
        else if (terminal == "bob") spec.terminal = Terminal::Bob;
        else throw ConfigError("unknown terminal \"" + terminal + "\"");
    } else {
        spec.terminal = (spec.kind == ProtocolKind::Transport ||
                         spec.kind == ProtocolKind::Hybrid)
                            ? Terminal::Alice
                            : Terminal::Bob;
    }
    if (j.contains("basis")) {
        const std::string basis = j.at("basis").get<std::string>();
        if (basis == "x") spec.basis = Basis::X;
        else if (basis == "y") spec.basis = Basis::Y;
        else throw ConfigError("unknown basis \"" + basis + "\"");
    }
    spec.validate();
    return spec;
}

inline Json transfer_matrix_to_json(const PauliTransferMatrix& channel) {
    Json j;
    j["basis_order"] = "IZXY";
    Json entries = Json::array();
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) entries.push_back(channel.m(r, c));
    }
    j["matrix"] = std::move(entries);
    return j;
}

inline Json cptp_report_to_json(const CptpReport& report) {
    Json j;
    j["cptp"] = report.cptp;
    j["choi_eigenvalues"] = report.choi_eigenvalues;
    j["trace_preservation_residual"] = report.trace_preservation_residual;
    return j;
}

// Debug dump only; not a supported interchange format.
inline Json density_to_json(const DensityOperator& rho) {
    Json j;
    j["n_qubits"] = rho.n_qubits;
    Json entries = Json::array();
    for (Eigen::Index r = 0; r < rho.dim(); ++r) {
        for (Eigen::Index c = 0; c < rho.dim(); ++c) {
            entries.push_back(Json::array({rho.matrix(r, c).real(), rho.matrix(r, c).imag()}));
        }
    }
    j["matrix_row_major"] = std::move(entries);
    return j;
}

inline const char* outcome_csv_header() {
    return "kind,size,terminal,basis,t,s,lambda,alpha,phi,expectation,visibility,p_plus,"
           "channel_uses";
}

inline std::string outcome_csv_row(const ProtocolSpec& spec, const ChannelParams& ch, double phi,
                                   const ProtocolOutcome& outcome) {
    std::string row;
    row += to_string(spec.kind);
    row += ',' + std::to_string(spec.size);
    row += ',' + to_string(spec.terminal);
    row += ',' + to_string(spec.basis);
    for (double v : {ch.t, ch.s, ch.lambda, ch.alpha, phi, outcome.expectation,
                     outcome.visibility, outcome.p_plus}) {
        row += ',' + format_double17(v);
    }
    row += ',' + std::to_string(outcome.channel_uses);
    return row;
}

inline Json outcome_to_json(const ProtocolSpec& spec, const ChannelParams& ch, double phi,
                            const ProtocolOutcome& outcome) {
    Json j;
    j["kind"] = to_string(spec.kind);
    j["size"] = spec.size;
    j["terminal"] = to_string(spec.terminal);
    j["basis"] = to_string(spec.basis);
    j["t"] = ch.t;
    j["s"] = ch.s;
    j["lambda"] = ch.lambda;
    j["alpha"] = ch.alpha;
    j["phi"] = phi;
    j["expectation"] = outcome.expectation;
    j["visibility"] = outcome.visibility;
    j["p_plus"] = outcome.p_plus;
    j["channel_uses"] = outcome.channel_uses;
    return j;
}

inline Json sync_estimate_to_json(const SyncEstimate& est) {
    Json j;
    j["protocol_kind"] = to_string(est.protocol_kind);
    j["k"] = est.k;
    j["nu"] = est.nu;
    j["omega"] = est.omega;
    Json bits = Json::array();
    Json thetas = Json::array();
    Json margins = Json::array();
    Json shots_x = Json::array();
    Json shots_y = Json::array();
    for (const BitEstimate& b : est.bits) {
        bits.push_back(b.bit);
        thetas.push_back(b.theta_hat);
        margins.push_back(b.margin);
        shots_x.push_back(b.shots_x);
        shots_y.push_back(b.shots_y);
    }
    j["bits"] = std::move(bits);
    j["theta_hats"] = std::move(thetas);
    j["margins"] = std::move(margins);
    j["shots_x"] = std::move(shots_x);
    j["shots_y"] = std::move(shots_y);
    j["T_hat"] = est.T_hat;
    j["phi_hat"] = est.phi_hat;
    j["delta_t"] = est.delta_t;
    j["channel_uses_total"] = est.channel_uses_total;
    j["seed"] = est.seed;
    j["generator"] = ShotSampler::generator_name();
    return j;
}

inline ProtocolKind protocol_kind_from_string(const std::string& name) {
    if (name == "entangled") return ProtocolKind::Entangled;
    if (name == "transport") return ProtocolKind::Transport;
    if (name == "hybrid") return ProtocolKind::Hybrid;
    if (name == "sql-baseline") return ProtocolKind::SqlBaseline;
    throw ConfigError("unknown protocol kind \"" + name + "\"");
}

inline SyncEstimate sync_estimate_from_json(const Json& j) {
    SyncEstimate est;
    est.protocol_kind = protocol_kind_from_string(j.at("protocol_kind").get<std::string>());
    est.k = j.at("k").get<int>();
    est.nu = j.at("nu").get<int>();
    est.omega = j.at("omega").get<double>();
    const auto& bits = j.at("bits");
    for (std::size_t i = 0; i < bits.size(); ++i) {
        BitEstimate b;
        b.j = static_cast<int>(i) + 1;
        b.bit = bits[i].get<int>();
        b.theta_hat = j.at("theta_hats")[i].get<double>();
        b.margin = j.at("margins")[i].get<double>();
        b.shots_x = j.at("shots_x")[i].get<long>();
        b.shots_y = j.at("shots_y")[i].get<long>();
        est.bits.push_back(b);
    }
    est.T_hat = j.at("T_hat").get<double>();
    est.phi_hat = j.at("phi_hat").get<double>();
    est.delta_t = j.at("delta_t").get<double>();
    est.channel_uses_total = j.at("channel_uses_total").get<long long>();
    est.seed = j.at("seed").get<std::uint64_t>();
    return est;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open \"" + path + "\" for writing");
    out << content;
    if (!out) throw IoError("failed while writing \"" + path + "\"");
}

}  // namespace clocksync
