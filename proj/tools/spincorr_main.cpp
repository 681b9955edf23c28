// spincorr: batch front end over the analytic formulas, the exact engine,
// the Monte Carlo simulator, and the Bell/threshold analysis.
//
// Subcommands:
//   analytic  -- evaluate a closed-form formula over a parameter grid
//   simulate  -- run trials and report tallies, frequencies, estimators
//   bell      -- CH statistic at a fixed quadruple or angle optimum
//   scan      -- efficiency thresholds vs visibility and splitter ratio
//   selftest  -- closed-form vs exact-engine equivalence suite
//
// Exit codes: 0 ok, 1 config error, 2 runtime error, 3 insufficient statistics.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "spincorr/bell.hpp"
#include "spincorr/io.hpp"
#include "spincorr/montecarlo.hpp"
#include "spincorr/selftest.hpp"
#include "spincorr/version.hpp"

namespace {

using namespace spincorr;

constexpr double kDegToRad = M_PI / 180.0;

struct Options {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::uint64_t> trials_override;
    std::optional<int> threads_override;
};

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

io::AppConfig load(const Options& opt, const std::string& subcommand) {
    io::AppConfig cfg = io::load_config_file(opt.config_path);
    if (opt.seed_override) cfg.experiment.seed = *opt.seed_override;
    if (opt.trials_override) cfg.experiment.trials = *opt.trials_override;
    if (opt.threads_override) cfg.threads = *opt.threads_override;
    if (opt.seed_override) cfg.normalized["run"]["seed"] = *opt.seed_override;
    if (opt.trials_override) cfg.normalized["run"]["trials"] = *opt.trials_override;
    (void)subcommand;
    return cfg;
}

void write_manifest(io::CsvWriter& csv, const io::AppConfig& cfg, const Options& opt,
                    const std::string& subcommand) {
    csv.comment("tool", std::string("spincorr ") + kVersion);
    csv.comment("subcommand", subcommand);
    csv.comment("config_path", opt.config_path);
    csv.comment("out_path", opt.out_path);
    csv.comment("config_hash", io::config_hash_hex(cfg.normalized));
    csv.comment("seed", std::to_string(cfg.experiment.seed));
    csv.comment("config", cfg.normalized.dump());
    csv.comment("timestamp", timestamp_utc());
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    return out;
}

std::string cell_str(const io::Cell& c) {
    return c.removed ? "removed" : io::format_number(c.value);
}

AnalyzerSetting cell_setting(const io::Cell& c) {
    return c.removed ? AnalyzerSetting::removed()
                     : AnalyzerSetting::angle(c.value * kDegToRad);
}

int cmd_analytic(const Options& opt) {
    const io::AppConfig cfg = load(opt, "analytic");
    const io::AnalyticRequest& req = cfg.analytic;
    if (req.formula.empty())
        throw io::config_error("angles.formula: required for the analytic subcommand");

    struct FormulaSpec {
        const char* name;
        std::size_t arity;
        bool allow_removed;
    };
    static const FormulaSpec known[] = {
        {"pair_coincidence", 4, true},   {"pair_same_side", 2, false},
        {"pair_unpolarized_out", 3, false}, {"quad_coincidence", 4, true},
        {"quad_one_arm", 4, false},      {"quad_one_arm_nopol", 2, false},
        {"quad_triplet", 2, false},      {"eberhard", 2, false},
        {"visibility", 2, false},
    };
    const FormulaSpec* fs = nullptr;
    for (const auto& k : known)
        if (req.formula == k.name) fs = &k;
    if (!fs) throw io::config_error("angles.formula: unknown formula " + req.formula);

    const double phi = req.phi_deg * kDegToRad;
    const analytic::Visibility vis(req.v);
    const BeamSplitterSpec& bs = cfg.experiment.central_bs;

    auto out = open_out(opt.out_path);
    io::CsvWriter csv(out);
    write_manifest(csv, cfg, opt, "analytic");
    csv.header({"formula", "arg1", "arg2", "arg3", "arg4", "value"});

    for (std::size_t i = 0; i < req.rows.size(); ++i) {
        const auto& row = req.rows[i];
        if (row.size() != fs->arity)
            throw io::config_error("angles.rows[" + std::to_string(i) + "]: formula " +
                                   req.formula + " takes " + std::to_string(fs->arity) +
                                   " parameters");
        if (!fs->allow_removed)
            for (const auto& c : row)
                if (c.removed)
                    throw io::config_error("angles.rows[" + std::to_string(i) +
                                           "]: removed not supported here");
        auto ang = [&](std::size_t k) { return row[k].value * kDegToRad; };
        double value = 0.0;
        if (req.formula == "pair_coincidence")
            value = analytic::prob2(cell_setting(row[0]), cell_setting(row[1]),
                                    cell_setting(row[2]), cell_setting(row[3]), bs, phi);
        else if (req.formula == "pair_same_side")
            value = analytic::prob2_same_side(ang(0), ang(1));
        else if (req.formula == "pair_unpolarized_out")
            value = analytic::prob2_unpolarized_out(ang(0), ang(1), ang(2));
        else if (req.formula == "quad_coincidence")
            value = analytic::prob4(cell_setting(row[0]), cell_setting(row[1]),
                                    cell_setting(row[2]), cell_setting(row[3]), bs, phi,
                                    vis);
        else if (req.formula == "quad_one_arm")
            value = analytic::prob4_one_arm(ang(0), ang(1), ang(2), ang(3));
        else if (req.formula == "quad_one_arm_nopol")
            value = analytic::prob4_one_arm_nopol(ang(0), ang(1));
        else if (req.formula == "quad_triplet")
            value = analytic::prob4_triplet(ang(0), ang(1));
        else if (req.formula == "eberhard")
            value = analytic::eberhard_prob(ang(0), ang(1), req.r);
        else  // visibility: rows are (detector_width, fringe_spacing)
            value = analytic::visibility_from_geometry(row[0].value, row[1].value).v;

        std::vector<std::string> cells = {req.formula};
        for (std::size_t k = 0; k < 4; ++k)
            cells.push_back(k < row.size() ? cell_str(row[k]) : "");
        cells.push_back(io::format_number(value));
        csv.row(cells);
    }
    return 0;
}

int cmd_simulate(const Options& opt) {
    const io::AppConfig cfg = load(opt, "simulate");
    const Tally tally = run_trials(cfg.experiment, cfg.threads);

    auto out = open_out(opt.out_path);
    io::CsvWriter csv(out);
    write_manifest(csv, cfg, opt, "simulate");
    csv.comment("n_trials", std::to_string(tally.n_trials));
    csv.comment("n_gate_opened", std::to_string(tally.n_gate_opened));
    csv.comment("n_discarded", std::to_string(tally.n_discarded));
    csv.comment("n_accepted", std::to_string(tally.accepted_total()));
    csv.header({"pattern", "count", "frequency", "freq_std_error", "estimate_p"});
    for (int k = 0; k < 4; ++k) {
        const auto pattern = static_cast<PrimePattern>(k);
        csv.row({to_string(pattern), std::to_string(tally.accepted[k]),
                 io::format_number(frequency(tally, pattern)),
                 io::format_number(frequency_std_error(tally, pattern)),
                 io::format_number(estimate_P(tally, pattern))});
    }
    return 0;
}

int cmd_bell(const Options& opt) {
    const io::AppConfig cfg = load(opt, "bell");
    const io::BellRequest& req = cfg.bell;

    auto out = open_out(opt.out_path);
    io::CsvWriter csv(out);
    write_manifest(csv, cfg, opt, "bell");
    csv.header({"v", "convention", "s", "a_deg", "a_alt_deg", "b_deg", "b_alt_deg",
                "joint_ab", "joint_ab_alt", "joint_alt_alt", "joint_alt_b",
                "single_a_alt", "single_b"});
    for (double v : req.v_values) {
        const auto p = bell::visibility_predictor(v, req.convention);
        bell::BellResult res =
            req.quadruple ? bell::ch_statistic(p, *req.quadruple)
                          : bell::optimize_angles(p, req.grid_step_deg * kDegToRad,
                                                  req.refine, true);
        res.inputs.v = v;
        csv.row({io::format_number(v), bell::to_string(req.convention),
                 io::format_number(res.s), io::format_number(res.quadruple.a / kDegToRad),
                 io::format_number(res.quadruple.a_alt / kDegToRad),
                 io::format_number(res.quadruple.b / kDegToRad),
                 io::format_number(res.quadruple.b_alt / kDegToRad),
                 io::format_number(res.terms[0]), io::format_number(res.terms[1]),
                 io::format_number(res.terms[2]), io::format_number(res.terms[3]),
                 io::format_number(res.terms[4]), io::format_number(res.terms[5])});
    }
    return 0;
}

int cmd_scan(const Options& opt) {
    const io::AppConfig cfg = load(opt, "scan");
    const io::ScanRequest& req = cfg.scan;

    auto out = open_out(opt.out_path);
    io::CsvWriter csv(out);
    write_manifest(csv, cfg, opt, "scan");
    csv.header({"table", "v", "convention", "r", "t_x_sq", "s_max", "eta_min",
                "eta_min_paper"});
    const double step = req.grid_step_deg * kDegToRad;
    for (double v : req.v_values) {
        const double paper = bell::efficiency_threshold_paper(analytic::Visibility(v));
        for (auto conv : req.conventions) {
            const auto res =
                bell::efficiency_threshold_model(bell::visibility_predictor(v, conv), step);
            csv.row({"threshold", io::format_number(v), bell::to_string(conv), "", "",
                     io::format_number(res.at_unit_efficiency.s),
                     res.eta_min ? io::format_number(*res.eta_min) : "none",
                     io::format_number(paper)});
        }
    }
    const auto rows =
        bell::eberhard_scan(req.r_values, analytic::Visibility(req.eberhard_v), step);
    for (const auto& r : rows)
        csv.row({"eberhard", io::format_number(req.eberhard_v), "", io::format_number(r.r),
                 io::format_number(r.t_x_sq), io::format_number(r.s_max),
                 io::format_number(r.eta_min), ""});
    return 0;
}

int cmd_selftest() {
    const auto results = selftest::run();
    for (const auto& r : results)
        std::cout << (r.passed ? "ok   " : "FAIL ") << r.name << "  (worst "
                  << io::format_number(r.worst) << ", " << r.evaluations << " checks)\n";
    if (!selftest::all_passed(results)) {
        std::cerr << "selftest failed\n";
        return 2;
    }
    std::cout << "selftest passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fourth-order interferometry simulator and Bell-test analysis"};
    app.set_version_flag("--version", std::string("spincorr ") + kVersion);
    app.require_subcommand(1);

    Options opt;

    auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--config", opt.config_path, "JSON config path")->required();
        auto* o = sub->add_option("--out", opt.out_path, "output CSV path");
        if (needs_out) o->required();
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { opt.seed_override = v; },
            "override run.seed");
        sub->add_option_function<std::uint64_t>(
            "--trials", [&](std::uint64_t v) { opt.trials_override = v; },
            "override run.trials");
        sub->add_option_function<int>(
            "--threads", [&](int v) { opt.threads_override = v; },
            "worker threads (0 = auto); never changes results");
    };

    auto* analytic_cmd = app.add_subcommand("analytic", "closed-form table");
    add_common(analytic_cmd, true);
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo tallies");
    add_common(simulate_cmd, true);
    auto* bell_cmd = app.add_subcommand("bell", "CH statistic");
    add_common(bell_cmd, true);
    auto* scan_cmd = app.add_subcommand("scan", "efficiency thresholds");
    add_common(scan_cmd, true);
    app.add_subcommand("selftest", "closed form vs exact engine");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("analytic")) return cmd_analytic(opt);
        if (app.got_subcommand("simulate")) return cmd_simulate(opt);
        if (app.got_subcommand("bell")) return cmd_bell(opt);
        if (app.got_subcommand("scan")) return cmd_scan(opt);
        return cmd_selftest();
    } catch (const io::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const insufficient_statistics& e) {
        std::cerr << "insufficient statistics: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
