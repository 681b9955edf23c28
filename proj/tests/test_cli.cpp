// End-to-end checks of the command-line tool: table values, exit codes,
// reproducibility of emitted files, and the config echo round trip.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "spincorr/io.hpp"

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out_text;
};

std::string temp_dir() {
    static const std::string dir = [] {
        std::string d = "cli_test_tmp";
        std::error_code ec;
        std::filesystem::create_directories(d, ec);
        return d;
    }();
    return dir;
}

std::string write_config(const std::string& name, const nlohmann::json& doc) {
    const std::string path = temp_dir() + "/" + name;
    std::ofstream out(path);
    out << doc.dump(2);
    return path;
}

CliResult run_cli(const std::string& args, const std::string& out_path = "") {
    std::ostringstream cmd;
    cmd << SPINCORR_CLI_PATH << " " << args << " 2>/dev/null";
    CliResult r;
    const int raw = std::system(cmd.str().c_str());
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    if (!out_path.empty()) {
        std::ifstream in(out_path);
        std::ostringstream text;
        text << in.rdbuf();
        r.out_text = text.str();
    }
    return r;
}

std::vector<std::vector<std::string>> data_rows(const std::string& csv) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string comment_value(const std::string& csv, const std::string& key) {
    std::istringstream in(csv);
    std::string line;
    const std::string prefix = "# " + key + ": ";
    while (std::getline(in, line))
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    return "";
}

nlohmann::json base_config() {
    return nlohmann::json::parse(R"({
      "experiment": {"prime_analyzers": {"theta1p_deg": 0.0, "theta2p_deg": 90.0}},
      "run": {"trials": 100000, "seed": 11}
    })");
}

}  // namespace

TEST_CASE("analytic subcommand evaluates the coincidence grid") {
    nlohmann::json doc = base_config();
    doc["angles"] = {{"formula", "quad_coincidence"},
                     {"rows", nlohmann::json::array({
                          {0.0, 0.0, 0.0, 90.0},
                          {0.0, 45.0, 0.0, 90.0},
                          {0.0, 90.0, 0.0, 90.0},
                      })}};
    const std::string cfg = write_config("analytic.json", doc);
    const std::string out = temp_dir() + "/analytic.csv";
    const CliResult r = run_cli("analytic --config " + cfg + " --out " + out, out);
    REQUIRE(r.exit_code == 0);
    const auto rows = data_rows(r.out_text);
    REQUIRE(rows.size() == 4);  // header + 3 rows
    CHECK(std::stod(rows[1][5]) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::stod(rows[2][5]) == doctest::Approx(1.0 / 32.0).epsilon(1e-9));
    CHECK(std::stod(rows[3][5]) == doctest::Approx(1.0 / 16.0).epsilon(1e-9));
}

TEST_CASE("analytic subcommand tabulates visibility rows") {
    nlohmann::json doc = base_config();
    doc["angles"] = {{"formula", "visibility"},
                     {"rows", nlohmann::json::array({{0.0, 1.0}, {0.5, 1.0}, {1.0, 1.0}})}};
    const std::string cfg = write_config("vis.json", doc);
    const std::string out = temp_dir() + "/vis.csv";
    const CliResult r = run_cli("analytic --config " + cfg + " --out " + out, out);
    REQUIRE(r.exit_code == 0);
    const auto rows = data_rows(r.out_text);
    REQUIRE(rows.size() == 4);
    CHECK(std::stod(rows[1][5]) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::stod(rows[2][5]) == doctest::Approx(0.405285).epsilon(1e-5));
    CHECK(std::stod(rows[3][5]) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("analytic subcommand with an empty grid emits the header only") {
    nlohmann::json doc = base_config();
    doc["angles"] = {{"formula", "visibility"}, {"rows", nlohmann::json::array()}};
    const std::string cfg = write_config("empty.json", doc);
    const std::string out = temp_dir() + "/empty.csv";
    const CliResult r = run_cli("analytic --config " + cfg + " --out " + out, out);
    REQUIRE(r.exit_code == 0);
    const auto rows = data_rows(r.out_text);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0][0] == "formula");
}

TEST_CASE("simulate emits counts with estimators and embeds the manifest") {
    const std::string cfg = write_config("sim.json", base_config());
    const std::string out = temp_dir() + "/sim.csv";
    const CliResult r = run_cli("simulate --config " + cfg + " --out " + out, out);
    REQUIRE(r.exit_code == 0);

    const auto rows = data_rows(r.out_text);
    REQUIRE(rows.size() == 5);
    // Orthogonal prime analyzers: the plain-plain frequency sits near 1/2.
    CHECK(std::stod(rows[1][2]) == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::stod(rows[1][4]) == doctest::Approx(0.125).epsilon(0.02));

    CHECK(comment_value(r.out_text, "seed") == "11");
    CHECK(!comment_value(r.out_text, "config_hash").empty());

    // The embedded config echo reparses to the same normalized document.
    const auto echoed = nlohmann::json::parse(comment_value(r.out_text, "config"));
    const auto reparsed = spincorr::io::parse_config(echoed);
    CHECK(spincorr::io::config_hash_hex(reparsed.normalized) ==
          comment_value(r.out_text, "config_hash"));
}

TEST_CASE("simulate with reduced efficiency reports the expected gate rate") {
    nlohmann::json doc = base_config();
    doc["detectors"] = {{"efficiency", 0.9}, {"dark_count_prob", 0.0}};
    doc["run"]["trials"] = 200000;
    const std::string cfg = write_config("eta.json", doc);
    const std::string out = temp_dir() + "/eta.csv";
    const CliResult r = run_cli("simulate --config " + cfg + " --out " + out, out);
    REQUIRE(r.exit_code == 0);
    const double gate = std::stod(comment_value(r.out_text, "n_gate_opened"));
    const double trials = std::stod(comment_value(r.out_text, "n_trials"));
    const double expect = 0.9 * 0.9 * 0.25;
    const double se = std::sqrt(expect * (1.0 - expect) / trials);
    CHECK(std::abs(gate / trials - expect) < 5.0 * se);
}

TEST_CASE("seed repetition reproduces the counts; seed override changes them") {
    const std::string cfg = write_config("seeds.json", base_config());
    const std::string out1 = temp_dir() + "/s1.csv";
    const std::string out2 = temp_dir() + "/s2.csv";
    const std::string out3 = temp_dir() + "/s3.csv";
    const CliResult a = run_cli("simulate --config " + cfg + " --out " + out1, out1);
    const CliResult b = run_cli("simulate --config " + cfg + " --out " + out2, out2);
    const CliResult c =
        run_cli("simulate --config " + cfg + " --seed 99 --out " + out3, out3);
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    REQUIRE(c.exit_code == 0);
    CHECK(data_rows(a.out_text) == data_rows(b.out_text));
    CHECK(data_rows(a.out_text) != data_rows(c.out_text));
    CHECK(comment_value(c.out_text, "seed") == "99");
}

TEST_CASE("bell subcommand reports the optimized statistic") {
    nlohmann::json doc = base_config();
    doc["bell"] = {{"v_values", {1.0}},
                   {"convention", "fringe"},
                   {"grid_step_deg", 2.0}};
    const std::string cfg = write_config("bell.json", doc);
    const std::string out = temp_dir() + "/bell.csv";
    const CliResult r = run_cli("bell --config " + cfg + " --out " + out, out);
    REQUIRE(r.exit_code == 0);
    const auto rows = data_rows(r.out_text);
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(rows[1][2]) ==
          doctest::Approx((std::sqrt(2.0) - 1.0) / 2.0).epsilon(1e-6));
}

TEST_CASE("scan subcommand lists thresholds and the ratio table") {
    nlohmann::json doc = base_config();
    doc["scan"] = {{"v_values", {1.0, 0.87}},
                   {"conventions", {"fringe"}},
                   {"r_values", {1.0, 0.31}},
                   {"grid_step_deg", 2.0}};
    const std::string cfg = write_config("scan.json", doc);
    const std::string out = temp_dir() + "/scan.csv";
    const CliResult r = run_cli("scan --config " + cfg + " --out " + out, out);
    REQUIRE(r.exit_code == 0);
    const auto rows = data_rows(r.out_text);
    REQUIRE(rows.size() == 5);  // header + 2 thresholds + 2 ratio rows
    CHECK(rows[1][0] == "threshold");
    CHECK(std::stod(rows[1][6]) == doctest::Approx(0.828427).epsilon(1e-4));
    CHECK(std::stod(rows[2][6]) == doctest::Approx(0.896714).epsilon(1e-4));
    CHECK(rows[4][0] == "eberhard");
    CHECK(std::stod(rows[4][4]) == doctest::Approx(0.912326).epsilon(1e-5));
}

TEST_CASE("exit codes distinguish config errors from insufficient statistics") {
    // Missing config file.
    CHECK(run_cli("simulate --config does_not_exist.json --out x.csv").exit_code == 1);

    // Schema violation.
    nlohmann::json doc = base_config();
    doc["run"]["trials"] = -5;
    const std::string bad = write_config("bad.json", doc);
    CHECK(run_cli("simulate --config " + bad + " --out " + temp_dir() + "/x.csv")
              .exit_code == 1);

    // A gate that can never open: zero accepted events.
    nlohmann::json starved = base_config();
    starved["detectors"] = {{"efficiency", 0.0}, {"dark_count_prob", 0.0}};
    starved["run"]["trials"] = 100;
    const std::string cfg = write_config("starved.json", starved);
    CHECK(run_cli("simulate --config " + cfg + " --out " + temp_dir() + "/y.csv")
              .exit_code == 3);
}
