#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "clocksync/io.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "clocksync_cli_test";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

CliResult run_cli(const std::string& args) {
    const fs::path out_path = scratch_dir() / "stdout.txt";
    const fs::path err_path = scratch_dir() / "stderr.txt";
    const std::string command = std::string(CLOCKSYNC_CLI_PATH) + " " + args + " > " +
                                out_path.string() + " 2> " + err_path.string();
    const int status = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

}  // namespace

TEST_CASE("validate-channel reports and exits by CPTP status", "[cli]") {
    SECTION("identity accepted") {
        const CliResult r = run_cli("--command validate-channel --no-timestamp");
        REQUIRE(r.exit_code == 0);
        const auto j = clocksync::Json::parse(r.out);
        CHECK(j.at("cptp") == true);
        CHECK(j.at("phase_covariant") == true);
    }
    SECTION("overdisplaced channel rejected with eigenvalues") {
        const CliResult r =
            run_cli("--command validate-channel --t 0.5 --s 1 --lambda 1 --alpha 0");
        REQUIRE(r.exit_code == 3);
        const auto j = clocksync::Json::parse(r.out);
        CHECK(j.at("cptp") == false);
        CHECK(j.at("choi_eigenvalues").size() == 4);
        double min_eig = 1;
        for (const auto& e : j.at("choi_eigenvalues")) {
            min_eig = std::min(min_eig, e.get<double>());
        }
        CHECK(min_eig < 0);
    }
}

TEST_CASE("run-protocol emits the documented CSV row", "[cli]") {
    const CliResult r = run_cli(
        "--command run-protocol --kind entangled --n 4 --lambda 1 "
        "--phi 0.19634954084936207");  // pi/16
    REQUIRE(r.exit_code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == clocksync::outcome_csv_header());
    const auto fields = split_csv(lines[1]);
    REQUIRE(fields.size() == 13);
    CHECK(std::strtod(fields[9].c_str(), nullptr) ==
          Catch::Approx(std::cos(std::numbers::pi / 4)).epsilon(1e-12));
}

TEST_CASE("sweep produces one row per grid point, header first", "[cli]") {
    const CliResult r =
        run_cli("--command sweep --kind transport --r 3 --points 32 --lambda 0.9");
    REQUIRE(r.exit_code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() == 33);
    CHECK(lines[0] == clocksync::outcome_csv_header());
    SECTION("an empty sweep is a header-only file") {
        const CliResult r0 =
            run_cli("--command sweep --kind transport --r 3 --points 0 --lambda 0.9");
        REQUIRE(r0.exit_code == 0);
        const auto lines0 = split_lines(r0.out);
        REQUIRE(lines0.size() == 1);
        CHECK(lines0[0] == clocksync::outcome_csv_header());
    }
    SECTION("json format is an array of records") {
        const CliResult rj = run_cli(
            "--command sweep --kind transport --r 3 --points 8 --lambda 0.9 --format json");
        REQUIRE(rj.exit_code == 0);
        const auto j = clocksync::Json::parse(rj.out);
        REQUIRE(j.is_array());
        CHECK(j.size() == 8);
        CHECK(j[0].at("kind") == "transport");
    }
}

TEST_CASE("config file with flag precedence", "[cli]") {
    const fs::path config = scratch_dir() / "config.json";
    {
        std::ofstream out(config);
        out << R"({"command":"run-protocol","channel":{"t":0,"s":1,"lambda":0.5,"alpha":0},)"
            << R"("protocol":{"kind":"entangled","n":2},"phi":0.4})";
    }
    SECTION("file alone fills the defaults") {
        const CliResult r = run_cli("--config " + config.string());
        REQUIRE(r.exit_code == 0);
        const auto fields = split_csv(split_lines(r.out).at(1));
        CHECK(std::strtod(fields[6].c_str(), nullptr) == 0.5);
    }
    SECTION("a flag overrides the file value") {
        const CliResult r = run_cli("--config " + config.string() + " --lambda 0.9");
        REQUIRE(r.exit_code == 0);
        const auto fields = split_csv(split_lines(r.out).at(1));
        CHECK(std::strtod(fields[6].c_str(), nullptr) == 0.9);
    }
    SECTION("unknown keys are named in the error") {
        const fs::path bad = scratch_dir() / "bad.json";
        {
            std::ofstream out(bad);
            out << R"({"command":"run-protocol","gamma":1})";
        }
        const CliResult r = run_cli("--config " + bad.string());
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("gamma") != std::string::npos);
    }
}

TEST_CASE("missing required fields are config errors", "[cli]") {
    CHECK(run_cli("--command estimate --true-T 0.3").exit_code == 2);
    CHECK(run_cli("--command estimate --k 4").exit_code == 2);
    CHECK(run_cli("--command run-protocol --kind entangled --phi 0.1").exit_code == 2);
    CHECK(run_cli("--command run-protocol --kind transport --n 4 --phi 0.1").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("--command frobnicate").exit_code == 2);
    CHECK(run_cli("--command run-protocol --kind entangled --n 2 --phi 0.1 --format yaml")
              .exit_code == 2);
}

TEST_CASE("estimate is deterministic and self-describing", "[cli]") {
    const fs::path f1 = scratch_dir() / "est1.json";
    const fs::path f2 = scratch_dir() / "est2.json";
    const std::string args =
        "--command estimate --kind entangled --k 4 --nu 64 --true-T 0.3 --seed 11 "
        "--no-timestamp --out ";
    REQUIRE(run_cli(args + f1.string()).exit_code == 0);
    REQUIRE(run_cli(args + f2.string()).exit_code == 0);
    const std::string body1 = slurp(f1);
    CHECK(body1 == slurp(f2));
    const auto j = clocksync::Json::parse(body1);
    CHECK(j.at("channel_uses_total") == 2 * 64 * 15);
    CHECK(j.at("generator") == "splitmix64");
    CHECK(j.at("seed") == 11);
    CHECK_FALSE(j.contains("timestamp"));

    SECTION("matches the library run with the same seed") {
        clocksync::ShotSampler sampler(11);
        const auto est = clocksync::estimate_offset(
            4, 64, clocksync::ProtocolKind::Entangled,
            clocksync::ChannelParams::canonical(0, 1, 1, 0), 0.3, 1.0, sampler);
        CHECK(j.at("T_hat").get<double>() == est.T_hat);
    }
    SECTION("timestamp appears unless disabled") {
        const CliResult r = run_cli(
            "--command estimate --kind entangled --k 2 --nu 8 --true-T 0.3 --seed 1");
        REQUIRE(r.exit_code == 0);
        CHECK(clocksync::Json::parse(r.out).contains("timestamp"));
    }
}

TEST_CASE("empirical-uncertainty runs end to end", "[cli]") {
    const CliResult r = run_cli(
        "--command empirical-uncertainty --kind entangled --n 4 --phi 0.39269908169872414 "
        "--nu 4096 --trials 100 --seed 3 --no-timestamp");
    REQUIRE(r.exit_code == 0);
    const auto j = clocksync::Json::parse(r.out);
    const double expected = 1.0 / (4 * std::sqrt(4096.0));
    CHECK(j.at("std_phi_hat").get<double>() == Catch::Approx(expected).epsilon(0.3));
}

TEST_CASE("angles can be supplied in degrees", "[cli]") {
    const CliResult r = run_cli(
        "--command run-protocol --kind entangled --n 4 --phi 11.25 --degrees --lambda 1");
    REQUIRE(r.exit_code == 0);
    const auto fields = split_csv(split_lines(r.out).at(1));
    CHECK(std::strtod(fields[9].c_str(), nullptr) ==
          Catch::Approx(std::cos(std::numbers::pi / 4)).epsilon(1e-12));
}

TEST_CASE("invalid physics fails protocol commands with exit 3", "[cli]") {
    const CliResult r = run_cli(
        "--command run-protocol --kind entangled --n 2 --phi 0.1 --s 0.2 --lambda 0.9");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("error") != std::string::npos);
    CHECK(run_cli("--command run-protocol --kind entangled --n 2 --phi 0.1 --lambda 1.5")
              .exit_code == 3);
    CHECK(run_cli("--command run-protocol --kind hybrid --n 5 --phi 0.1").exit_code == 3);
    CHECK(run_cli("--command estimate --k 3 --true-T 1.5").exit_code == 3);
}
