// Command-line front end: validate channels, run single protocol instances,
// sweep the phase, and execute end-to-end offset estimation.
//
// Exit codes: 0 success, 2 config error, 3 validation failure,
// 4 runtime/numeric error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clocksync/channel.hpp"
#include "clocksync/errors.hpp"
#include "clocksync/estimation.hpp"
#include "clocksync/io.hpp"
#include "clocksync/protocols.hpp"
#include "clocksync/sampler.hpp"

namespace {

using clocksync::Json;

struct ExperimentConfig {
    std::string command;
    double t = 0.0;
    double s = 1.0;
    double lambda = 1.0;
    double alpha = 0.0;
    std::string kind = "entangled";
    std::string terminal;  // defaulted per kind when empty
    std::string basis = "x";
    std::optional<int> n;
    std::optional<int> r;
    std::optional<double> phi;
    std::optional<double> true_T;
    std::optional<int> k;
    int nu = 64;
    std::optional<int> trials;
    double omega = 1.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string format;  // defaulted per command when empty
    bool no_timestamp = false;
    double tol = 1e-9;
    int points = 32;
    double phi_min = 0.0;
    double phi_max = clocksync::kTwoPi;
    bool degrees = false;
    bool simulate = false;
};

const char* const kTopLevelKeys[] = {
    "command", "channel", "protocol", "phi",    "true_T",       "k",       "nu",
    "trials",  "omega",   "seed",     "out",    "format",       "no_timestamp",
    "tol",     "points",  "phi_min",  "phi_max", "degrees",     "simulate"};
const char* const kProtocolKeys[] = {"kind", "n", "r", "terminal", "basis"};

void apply_config_file(const std::string& path, ExperimentConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw clocksync::ConfigError("cannot open config file \"" + path + "\"");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const std::exception& e) {
        throw clocksync::ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw clocksync::ConfigError("config root must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : kTopLevelKeys) known |= it.key() == key;
        if (!known) throw clocksync::ConfigError("unknown config key \"" + it.key() + "\"");
    }
    try {
        if (j.contains("command")) cfg.command = j["command"].get<std::string>();
        if (j.contains("channel")) {
            const Json& ch = j["channel"];
            if (!ch.is_object()) throw clocksync::ConfigError("channel must be an object");
            for (auto it = ch.begin(); it != ch.end(); ++it) {
                const std::string& key = it.key();
                if (key == "t") cfg.t = it.value().get<double>();
                else if (key == "s") cfg.s = it.value().get<double>();
                else if (key == "lambda") cfg.lambda = it.value().get<double>();
                else if (key == "alpha") cfg.alpha = it.value().get<double>();
                else throw clocksync::ConfigError("unknown config key \"" + key + "\"");
            }
        }
        if (j.contains("protocol")) {
            const Json& p = j["protocol"];
            if (!p.is_object()) throw clocksync::ConfigError("protocol must be an object");
            for (auto it = p.begin(); it != p.end(); ++it) {
                bool known = false;
                for (const char* key : kProtocolKeys) known |= it.key() == key;
                if (!known) throw clocksync::ConfigError("unknown config key \"" + it.key() + "\"");
            }
            if (p.contains("kind")) cfg.kind = p["kind"].get<std::string>();
            if (p.contains("n")) cfg.n = p["n"].get<int>();
            if (p.contains("r")) cfg.r = p["r"].get<int>();
            if (p.contains("terminal")) cfg.terminal = p["terminal"].get<std::string>();
            if (p.contains("basis")) cfg.basis = p["basis"].get<std::string>();
        }
        if (j.contains("phi")) cfg.phi = j["phi"].get<double>();
        if (j.contains("true_T")) cfg.true_T = j["true_T"].get<double>();
        if (j.contains("k")) cfg.k = j["k"].get<int>();
        if (j.contains("nu")) cfg.nu = j["nu"].get<int>();
        if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
        if (j.contains("omega")) cfg.omega = j["omega"].get<double>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("out")) cfg.out = j["out"].get<std::string>();
        if (j.contains("format")) cfg.format = j["format"].get<std::string>();
        if (j.contains("no_timestamp")) cfg.no_timestamp = j["no_timestamp"].get<bool>();
        if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
        if (j.contains("points")) cfg.points = j["points"].get<int>();
        if (j.contains("phi_min")) cfg.phi_min = j["phi_min"].get<double>();
        if (j.contains("phi_max")) cfg.phi_max = j["phi_max"].get<double>();
        if (j.contains("degrees")) cfg.degrees = j["degrees"].get<bool>();
        if (j.contains("simulate")) cfg.simulate = j["simulate"].get<bool>();
    } catch (const clocksync::ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw clocksync::ConfigError(std::string("config value error: ") + e.what());
    }
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_output(const ExperimentConfig& cfg, const std::string& content) {
    if (cfg.out.empty()) {
        std::cout << content;
    } else {
        clocksync::write_file(cfg.out, content);
    }
}

clocksync::Terminal parse_terminal(const std::string& name) {
    if (name == "alice") return clocksync::Terminal::Alice;
    if (name == "bob") return clocksync::Terminal::Bob;
    throw clocksync::ConfigError("unknown terminal \"" + name + "\" (use alice|bob)");
}

clocksync::Basis parse_basis(const std::string& name) {
    if (name == "x") return clocksync::Basis::X;
    if (name == "y") return clocksync::Basis::Y;
    throw clocksync::ConfigError("unknown basis \"" + name + "\" (use x|y)");
}

int require_size(const ExperimentConfig& cfg, clocksync::ProtocolKind kind) {
    using clocksync::ProtocolKind;
    if (kind == ProtocolKind::Transport) {
        if (!cfg.r) throw clocksync::ConfigError("missing field \"r\" (exchange count)");
        return *cfg.r;
    }
    if (!cfg.n) throw clocksync::ConfigError("missing field \"n\" (qubit / channel-use count)");
    return *cfg.n;
}

clocksync::ProtocolSpec build_spec(const ExperimentConfig& cfg) {
    using clocksync::ProtocolKind;
    const ProtocolKind kind = clocksync::protocol_kind_from_string(cfg.kind);
    const clocksync::Basis basis = parse_basis(cfg.basis);
    const int size = require_size(cfg, kind);
    switch (kind) {
        case ProtocolKind::Entangled:
            return clocksync::ProtocolSpec::entangled(size, basis);
        case ProtocolKind::Transport: {
            clocksync::Terminal terminal =
                cfg.terminal.empty() ? clocksync::Terminal::Alice : parse_terminal(cfg.terminal);
            return clocksync::ProtocolSpec::transport(size, terminal, basis);
        }
        case ProtocolKind::Hybrid:
            return clocksync::ProtocolSpec::hybrid_from_uses(size, basis);
        case ProtocolKind::SqlBaseline:
            return clocksync::ProtocolSpec::sql_baseline(size, basis);
    }
    throw clocksync::ConfigError("unknown protocol kind");
}

clocksync::ChannelParams build_channel(const ExperimentConfig& cfg) {
    return clocksync::ChannelParams::canonical(cfg.t, cfg.s, cfg.lambda, cfg.alpha);
}

std::string pick_format(const ExperimentConfig& cfg, const char* fallback) {
    const std::string format = cfg.format.empty() ? fallback : cfg.format;
    if (format != "csv" && format != "json") {
        throw clocksync::ConfigError("unknown format \"" + format + "\" (use csv|json)");
    }
    return format;
}

std::string emit_rows(const std::vector<std::pair<Json, std::string>>& rows,
                      const std::string& format) {
    if (format == "json") {
        Json arr = Json::array();
        for (const auto& [record, csv] : rows) arr.push_back(record);
        return clocksync::dump_json17(arr);
    }
    std::string out = clocksync::outcome_csv_header();
    out += '\n';
    for (const auto& [record, csv] : rows) {
        out += csv;
        out += '\n';
    }
    return out;
}

int run_validate_channel(const ExperimentConfig& cfg) {
    Json j;
    j["command"] = "validate-channel";
    if (!cfg.no_timestamp) j["timestamp"] = timestamp_utc();
    clocksync::ChannelParams params;
    try {
        params = build_channel(cfg);
    } catch (const clocksync::OutOfRangeError& e) {
        j["cptp"] = false;
        j["error"] = e.what();
        write_output(cfg, clocksync::dump_json17(j));
        return 3;
    }
    const auto channel = clocksync::make_channel(params);
    const auto report = clocksync::is_cptp(channel, cfg.tol);
    j["params"] = clocksync::channel_to_json(params);
    j.update(clocksync::cptp_report_to_json(report));
    j["phase_covariant"] = clocksync::is_phase_covariant(channel, cfg.tol);
    j["transfer_matrix"] = clocksync::transfer_matrix_to_json(channel);
    write_output(cfg, clocksync::dump_json17(j));
    return report.cptp ? 0 : 3;
}

int run_protocol(const ExperimentConfig& cfg) {
    const auto spec = build_spec(cfg);
    const auto channel = build_channel(cfg);
    if (!cfg.phi) throw clocksync::ConfigError("missing field \"phi\"");
    const auto outcome = cfg.simulate ? clocksync::simulate_expectation(spec, channel, *cfg.phi)
                                      : clocksync::analytic_expectation(spec, channel, *cfg.phi);
    std::vector<std::pair<Json, std::string>> rows;
    rows.emplace_back(clocksync::outcome_to_json(spec, channel, *cfg.phi, outcome),
                      clocksync::outcome_csv_row(spec, channel, *cfg.phi, outcome));
    write_output(cfg, emit_rows(rows, pick_format(cfg, "csv")));
    return 0;
}

int run_sweep(const ExperimentConfig& cfg) {
    const auto spec = build_spec(cfg);
    const auto channel = build_channel(cfg);
    if (cfg.points < 0) throw clocksync::ConfigError("points must be nonnegative");
    std::vector<std::pair<Json, std::string>> rows;
    for (int i = 0; i < cfg.points; ++i) {
        const double phi = cfg.phi_min + (cfg.phi_max - cfg.phi_min) * i / cfg.points;
        const auto outcome = cfg.simulate ? clocksync::simulate_expectation(spec, channel, phi)
                                          : clocksync::analytic_expectation(spec, channel, phi);
        rows.emplace_back(clocksync::outcome_to_json(spec, channel, phi, outcome),
                          clocksync::outcome_csv_row(spec, channel, phi, outcome));
    }
    write_output(cfg, emit_rows(rows, pick_format(cfg, "csv")));
    return 0;
}

int run_estimate(const ExperimentConfig& cfg) {
    if (pick_format(cfg, "json") != "json") {
        throw clocksync::ConfigError("estimate emits json only");
    }
    if (!cfg.k) throw clocksync::ConfigError("missing field \"k\"");
    if (!cfg.true_T) throw clocksync::ConfigError("missing field \"true_T\"");
    const auto channel = build_channel(cfg);
    const auto kind = clocksync::protocol_kind_from_string(cfg.kind);
    clocksync::ShotSampler sampler(cfg.seed);
    const auto estimate = clocksync::estimate_offset(*cfg.k, cfg.nu, kind, channel, *cfg.true_T,
                                                     cfg.omega, sampler);
    Json j = clocksync::sync_estimate_to_json(estimate);
    if (!cfg.no_timestamp) j["timestamp"] = timestamp_utc();
    write_output(cfg, clocksync::dump_json17(j));
    return 0;
}

int run_empirical_uncertainty(const ExperimentConfig& cfg) {
    const auto channel = build_channel(cfg);
    const auto kind = clocksync::protocol_kind_from_string(cfg.kind);
    const int size = require_size(cfg, kind);
    if (!cfg.phi) throw clocksync::ConfigError("missing field \"phi\"");
    if (!cfg.trials) throw clocksync::ConfigError("missing field \"trials\"");
    clocksync::ShotSampler sampler(cfg.seed);
    const auto result = clocksync::empirical_uncertainty(kind, size, channel, *cfg.phi, cfg.nu,
                                                         *cfg.trials, sampler);
    Json j;
    j["command"] = "empirical-uncertainty";
    if (!cfg.no_timestamp) j["timestamp"] = timestamp_utc();
    j["kind"] = cfg.kind;
    j["size"] = size;
    j.update(clocksync::channel_to_json(channel));
    j["phi"] = *cfg.phi;
    j["nu"] = cfg.nu;
    j["trials"] = *cfg.trials;
    j["seed"] = cfg.seed;
    j["quadrature"] = clocksync::to_string(result.basis);
    j["mean_phi_hat"] = result.mean_phi_hat;
    j["std_phi_hat"] = result.std_phi_hat;
    const std::string format = pick_format(cfg, "json");
    if (format == "json") {
        write_output(cfg, clocksync::dump_json17(j));
    } else {
        std::string out =
            "kind,size,t,s,lambda,alpha,phi,nu,trials,seed,quadrature,mean_phi_hat,std_phi_hat\n";
        out += cfg.kind + ',' + std::to_string(size);
        for (double v : {channel.t, channel.s, channel.lambda, channel.alpha, *cfg.phi}) {
            out += ',' + clocksync::format_double17(v);
        }
        out += ',' + std::to_string(cfg.nu) + ',' + std::to_string(*cfg.trials) + ',' +
               std::to_string(cfg.seed) + ',' + clocksync::to_string(result.basis) + ',' +
               clocksync::format_double17(result.mean_phi_hat) + ',' +
               clocksync::format_double17(result.std_phi_hat) + '\n';
        write_output(cfg, out);
    }
    return 0;
}

int dispatch(const ExperimentConfig& cfg) {
    if (cfg.command == "validate-channel") return run_validate_channel(cfg);
    if (cfg.command == "run-protocol") return run_protocol(cfg);
    if (cfg.command == "sweep") return run_sweep(cfg);
    if (cfg.command == "estimate") return run_estimate(cfg);
    if (cfg.command == "empirical-uncertainty") return run_empirical_uncertainty(cfg);
    if (cfg.command.empty()) throw clocksync::ConfigError("missing field \"command\"");
    throw clocksync::ConfigError("unknown command \"" + cfg.command + "\"");
}

void report_error(const std::string& kind, const std::string& message, int code) {
    Json j;
    j["error"] = message;
    j["kind"] = kind;
    j["exit"] = code;
    std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum clock-synchronization protocol simulator"};
    app.allow_extras(false);

    std::string config_path;
    ExperimentConfig flags;
    app.add_option("--config", config_path, "JSON config file; flags override file values");
    app.add_option("--command", flags.command,
                   "validate-channel|run-protocol|sweep|estimate|empirical-uncertainty");
    auto* o_t = app.add_option("--t", flags.t, "channel Z displacement");
    auto* o_s = app.add_option("--s", flags.s, "channel Z compression");
    auto* o_lambda = app.add_option("--lambda", flags.lambda, "channel equatorial compression");
    auto* o_alpha = app.add_option("--alpha", flags.alpha, "channel systematic Z rotation");
    auto* o_kind = app.add_option("--kind", flags.kind,
                                  "entangled|transport|hybrid|sql-baseline");
    auto* o_terminal = app.add_option("--terminal", flags.terminal, "alice|bob (transport)");
    auto* o_basis = app.add_option("--basis", flags.basis, "x|y measurement quadrature");
    int n_value = 0, r_value = 0, k_value = 0, trials_value = 0;
    auto* o_n = app.add_option("--n", n_value, "qubits (entangled/sql) or channel uses (hybrid)");
    auto* o_r = app.add_option("--r", r_value, "exchanges (transport)");
    double phi_value = 0.0, true_t_value = 0.0;
    auto* o_phi = app.add_option("--phi", phi_value, "phase offset");
    auto* o_true_t = app.add_option("--true-T", true_t_value, "dimensionless offset in [0,1)");
    auto* o_k = app.add_option("--k", k_value, "number of bits to estimate");
    auto* o_nu = app.add_option("--nu", flags.nu, "shots per bit / per trial");
    auto* o_trials = app.add_option("--trials", trials_value, "trials for empirical uncertainty");
    auto* o_omega = app.add_option("--omega", flags.omega, "transition frequency (rad/s)");
    auto* o_seed = app.add_option("--seed", flags.seed, "64-bit sampler seed");
    auto* o_out = app.add_option("--out", flags.out, "output path (default stdout)");
    auto* o_format = app.add_option("--format", flags.format, "csv|json");
    auto* o_no_ts = app.add_flag("--no-timestamp", flags.no_timestamp,
                                 "omit the timestamp field from JSON outputs");
    auto* o_tol = app.add_option("--tol", flags.tol, "CPTP tolerance");
    auto* o_points = app.add_option("--points", flags.points, "sweep grid size");
    auto* o_phi_min = app.add_option("--phi-min", flags.phi_min, "sweep start");
    auto* o_phi_max = app.add_option("--phi-max", flags.phi_max, "sweep end (exclusive)");
    auto* o_degrees = app.add_flag("--degrees", flags.degrees, "interpret angles as degrees");
    auto* o_simulate = app.add_flag("--simulate", flags.simulate,
                                    "use the dense simulator instead of the closed forms");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        report_error("config", e.what(), 2);
        return 2;
    }

    ExperimentConfig cfg;
    try {
        if (!config_path.empty()) apply_config_file(config_path, cfg);
        if (!flags.command.empty()) cfg.command = flags.command;
        if (o_t->count()) cfg.t = flags.t;
        if (o_s->count()) cfg.s = flags.s;
        if (o_lambda->count()) cfg.lambda = flags.lambda;
        if (o_alpha->count()) cfg.alpha = flags.alpha;
        if (o_kind->count()) cfg.kind = flags.kind;
        if (o_terminal->count()) cfg.terminal = flags.terminal;
        if (o_basis->count()) cfg.basis = flags.basis;
        if (o_n->count()) cfg.n = n_value;
        if (o_r->count()) cfg.r = r_value;
        if (o_phi->count()) cfg.phi = phi_value;
        if (o_true_t->count()) cfg.true_T = true_t_value;
        if (o_k->count()) cfg.k = k_value;
        if (o_nu->count()) cfg.nu = flags.nu;
        if (o_trials->count()) cfg.trials = trials_value;
        if (o_omega->count()) cfg.omega = flags.omega;
        if (o_seed->count()) cfg.seed = flags.seed;
        if (o_out->count()) cfg.out = flags.out;
        if (o_format->count()) cfg.format = flags.format;
        if (o_no_ts->count()) cfg.no_timestamp = flags.no_timestamp;
        if (o_tol->count()) cfg.tol = flags.tol;
        if (o_points->count()) cfg.points = flags.points;
        if (o_phi_min->count()) cfg.phi_min = flags.phi_min;
        if (o_phi_max->count()) cfg.phi_max = flags.phi_max;
        if (o_degrees->count()) cfg.degrees = flags.degrees;
        if (o_simulate->count()) cfg.simulate = flags.simulate;
        if (cfg.degrees) {
            constexpr double to_rad = std::numbers::pi / 180.0;
            cfg.alpha *= to_rad;
            if (cfg.phi) *cfg.phi *= to_rad;
            cfg.phi_min *= to_rad;
            cfg.phi_max *= to_rad;
        }
        return dispatch(cfg);
    } catch (const clocksync::ConfigError& e) {
        report_error("config", e.what(), 2);
        return 2;
    } catch (const clocksync::NotCptpError& e) {
        report_error("validation", e.what(), 3);
        return 3;
    } catch (const clocksync::OutOfRangeError& e) {
        report_error("validation", e.what(), 3);
        return 3;
    } catch (const clocksync::MalformedSpecError& e) {
        report_error("validation", e.what(), 3);
        return 3;
    } catch (const clocksync::Error& e) {
        report_error("runtime", e.what(), 4);
        return 4;
    } catch (const std::exception& e) {
        report_error("runtime", e.what(), 4);
        return 4;
    }
}
