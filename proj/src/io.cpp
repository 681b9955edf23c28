#include "spincorr/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

namespace spincorr::io {

namespace {

using nlohmann::json;

constexpr double kDegToRad = M_PI / 180.0;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw config_error(path + ": " + what);
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

double get_number_or(const json& parent, const std::string& key,
                     const std::string& path, double fallback) {
    if (!parent.contains(key)) return fallback;
    return get_number(parent.at(key), path + "." + key);
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

AnalyzerSetting parse_setting(const json& j, const std::string& path) {
    if (j.is_string()) {
        if (j.get<std::string>() == "removed") return AnalyzerSetting::removed();
        fail(path, "expected an angle in degrees or \"removed\"");
    }
    return AnalyzerSetting::angle(get_number(j, path) * kDegToRad);
}

json setting_to_json(const AnalyzerSetting& s) {
    if (s.is_removed()) return "removed";
    return s.radians() / kDegToRad;
}

DetectorSpec parse_detector_spec(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    try {
        return DetectorSpec(get_number_or(j, "efficiency", path, 1.0),
                            get_number_or(j, "dark_count_prob", path, 0.0));
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
}

bell::VisibilityConvention parse_convention(const json& j, const std::string& path) {
    const std::string s = get_string(j, path);
    if (s == "fringe") return bell::VisibilityConvention::Fringe;
    if (s == "cos2") return bell::VisibilityConvention::CosSquared;
    fail(path, "expected \"fringe\" or \"cos2\"");
}

BeamSplitterSpec parse_beam_splitter(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    const std::string kind =
        j.contains("kind") ? get_string(j.at("kind"), path + ".kind") : "balanced";
    try {
        if (kind == "balanced") return BeamSplitterSpec::balanced();
        if (kind == "ratio")
            return BeamSplitterSpec::from_reflection_ratio(
                get_number(j.at("r"), path + ".r"));
        if (kind == "custom")
            return BeamSplitterSpec(get_number(j.at("t_x"), path + ".t_x"),
                                    get_number(j.at("t_y"), path + ".t_y"),
                                    get_number(j.at("r_x"), path + ".r_x"),
                                    get_number(j.at("r_y"), path + ".r_y"));
    } catch (const json::exception&) {
        fail(path, "missing fields for kind \"" + kind + "\"");
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "expected balanced, ratio, or custom");
}

PhaseModel parse_phase(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    const std::string model =
        j.contains("model") ? get_string(j.at("model"), path + ".model") : "fixed";
    PhaseModel out = FixedPhase{0.0};
    if (model == "fixed") {
        out = FixedPhase{get_number_or(j, "phi_deg", path, 0.0) * kDegToRad};
    } else if (model == "transverse_fringe") {
        TransverseFringePhase t;
        t.z1 = get_number_or(j, "z1", path, 0.0);
        t.z2 = get_number_or(j, "z2", path, 0.0);
        if (!j.contains("fringe_spacing")) fail(path, "missing fringe_spacing");
        t.fringe_l = get_number(j.at("fringe_spacing"), path + ".fringe_spacing");
        t.dz = get_number_or(j, "detector_width", path, 0.0);
        out = t;
    } else if (model == "beat") {
        BeatPhase b;
        if (!j.contains("delta_omega") || !j.contains("path_difference"))
            fail(path, "beat phase needs delta_omega and path_difference");
        b.d_omega = get_number(j.at("delta_omega"), path + ".delta_omega");
        b.path_diff = get_number(j.at("path_difference"), path + ".path_difference");
        b.c = get_number_or(j, "c", path, 299792458.0);
        out = b;
    } else {
        fail(path + ".model", "expected fixed, transverse_fringe, or beat");
    }
    try {
        validate(out);
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    return out;
}

json phase_to_json(const PhaseModel& p) {
    json j;
    if (const auto* f = std::get_if<FixedPhase>(&p)) {
        j["model"] = "fixed";
        j["phi_deg"] = f->phi / kDegToRad;
    } else if (const auto* t = std::get_if<TransverseFringePhase>(&p)) {
        j["model"] = "transverse_fringe";
        j["z1"] = t->z1;
        j["z2"] = t->z2;
        j["fringe_spacing"] = t->fringe_l;
        j["detector_width"] = t->dz;
    } else {
        const auto& b = std::get<BeatPhase>(p);
        j["model"] = "beat";
        j["delta_omega"] = b.d_omega;
        j["path_difference"] = b.path_diff;
        j["c"] = b.c;
    }
    return j;
}

Cell parse_cell(const json& j, const std::string& path) {
    if (j.is_string()) {
        if (j.get<std::string>() == "removed") return Cell::r();
        fail(path, "expected an angle in degrees or \"removed\"");
    }
    return Cell::angle_deg(get_number(j, path));
}

}  // namespace

AppConfig parse_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw config_error("config root must be an object");
    AppConfig cfg;

    if (doc.contains("experiment")) {
        const json& e = doc.at("experiment");
        if (!e.is_object()) fail("experiment", "expected an object");
        if (e.contains("source_model")) {
            const std::string s =
                get_string(e.at("source_model"), "experiment.source_model");
            if (s == "ideal_singlets")
                cfg.experiment.source_model = SourceModel::IdealSinglets;
            else if (s == "beam_splitter_sources")
                cfg.experiment.source_model = SourceModel::BeamSplitterSources;
            else
                fail("experiment.source_model",
                     "expected ideal_singlets or beam_splitter_sources");
        }
        if (e.contains("beam_splitter"))
            cfg.experiment.central_bs =
                parse_beam_splitter(e.at("beam_splitter"), "experiment.beam_splitter");
        if (e.contains("preselection") && !e.at("preselection").is_null()) {
            const json& p = e.at("preselection");
            if (!p.is_object()) fail("experiment.preselection", "expected object or null");
            PreselectionAnalyzers pre;
            pre.theta_1 = normalize_angle(
                get_number_or(p, "theta1_deg", "experiment.preselection", 0.0) *
                kDegToRad);
            pre.theta_2 = normalize_angle(
                get_number_or(p, "theta2_deg", "experiment.preselection", 0.0) *
                kDegToRad);
            cfg.experiment.preselection = pre;
        }
        if (e.contains("prime_analyzers")) {
            const json& p = e.at("prime_analyzers");
            if (!p.is_object()) fail("experiment.prime_analyzers", "expected an object");
            if (p.contains("theta1p_deg"))
                cfg.experiment.prime_1 = parse_setting(
                    p.at("theta1p_deg"), "experiment.prime_analyzers.theta1p_deg");
            if (p.contains("theta2p_deg"))
                cfg.experiment.prime_2 = parse_setting(
                    p.at("theta2p_deg"), "experiment.prime_analyzers.theta2p_deg");
        }
    }

    if (doc.contains("phase")) cfg.experiment.phase = parse_phase(doc.at("phase"), "phase");

    if (doc.contains("detectors")) {
        const json& d = doc.at("detectors");
        if (!d.is_object()) fail("detectors", "expected an object");
        if (d.contains("default") || d.contains("overrides")) {
            DetectorSpec base = d.contains("default")
                                    ? parse_detector_spec(d.at("default"), "detectors.default")
                                    : DetectorSpec{};
            cfg.experiment.set_all_detectors(base);
            if (d.contains("overrides")) {
                const json& o = d.at("overrides");
                if (!o.is_object()) fail("detectors.overrides", "expected an object");
                for (const auto& [label, spec] : o.items()) {
                    int idx = -1;
                    for (int k = 0; k < kNumDetectors; ++k)
                        if (kDetectorNames[k] == label) idx = k;
                    if (idx < 0) fail("detectors.overrides." + label, "unknown detector");
                    cfg.experiment.detectors[idx] =
                        parse_detector_spec(spec, "detectors.overrides." + label);
                }
            }
        } else {
            cfg.experiment.set_all_detectors(parse_detector_spec(d, "detectors"));
        }
    }

    if (doc.contains("run")) {
        const json& r = doc.at("run");
        if (!r.is_object()) fail("run", "expected an object");
        const double trials = get_number_or(r, "trials", "run", 1.0);
        if (!(trials >= 1.0) || trials != std::floor(trials))
            fail("run.trials", "expected a positive integer");
        cfg.experiment.trials = static_cast<std::uint64_t>(trials);
        const double seed = get_number_or(r, "seed", "run", 0.0);
        if (seed < 0.0 || seed != std::floor(seed))
            fail("run.seed", "expected a non-negative integer");
        cfg.experiment.seed = static_cast<std::uint64_t>(seed);
        const double threads = get_number_or(r, "threads", "run", 0.0);
        if (threads < 0.0 || threads != std::floor(threads))
            fail("run.threads", "expected a non-negative integer");
        cfg.threads = static_cast<int>(threads);
        cfg.experiment.pulse_period_ns =
            get_number_or(r, "pulse_period_ns", "run", 50.0);
        cfg.experiment.window_ns = get_number_or(r, "window_ns", "run", 10.0);
    }

    if (doc.contains("angles")) {
        const json& a = doc.at("angles");
        if (!a.is_object()) fail("angles", "expected an object");
        if (a.contains("formula"))
            cfg.analytic.formula = get_string(a.at("formula"), "angles.formula");
        if (a.contains("rows")) {
            const json& rows = a.at("rows");
            if (!rows.is_array()) fail("angles.rows", "expected an array");
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const json& row = rows[i];
                const std::string rp = "angles.rows[" + std::to_string(i) + "]";
                if (!row.is_array()) fail(rp, "expected an array");
                std::vector<Cell> cells;
                for (std::size_t k = 0; k < row.size(); ++k)
                    cells.push_back(parse_cell(row[k], rp + "[" + std::to_string(k) + "]"));
                cfg.analytic.rows.push_back(std::move(cells));
            }
        }
        cfg.analytic.v = get_number_or(a, "v", "angles", 1.0);
        cfg.analytic.r = get_number_or(a, "r", "angles", 1.0);
        cfg.analytic.phi_deg = get_number_or(a, "phi_deg", "angles", 0.0);
    }

    if (doc.contains("bell")) {
        const json& b = doc.at("bell");
        if (!b.is_object()) fail("bell", "expected an object");
        if (b.contains("v_values")) {
            cfg.bell.v_values.clear();
            for (const auto& v : b.at("v_values"))
                cfg.bell.v_values.push_back(get_number(v, "bell.v_values[]"));
        }
        if (b.contains("convention"))
            cfg.bell.convention = parse_convention(b.at("convention"), "bell.convention");
        if (b.contains("quadruple_deg")) {
            const json& q = b.at("quadruple_deg");
            if (!q.is_array() || q.size() != 4)
                fail("bell.quadruple_deg", "expected four angles in degrees");
            cfg.bell.quadruple = bell::AngleQuadruple(
                get_number(q[0], "bell.quadruple_deg[0]") * kDegToRad,
                get_number(q[1], "bell.quadruple_deg[1]") * kDegToRad,
                get_number(q[2], "bell.quadruple_deg[2]") * kDegToRad,
                get_number(q[3], "bell.quadruple_deg[3]") * kDegToRad);
        }
        cfg.bell.grid_step_deg = get_number_or(b, "grid_step_deg", "bell", 0.5);
        if (!(cfg.bell.grid_step_deg > 0.0)) fail("bell.grid_step_deg", "must be positive");
        if (b.contains("refine")) {
            if (!b.at("refine").is_boolean()) fail("bell.refine", "expected a boolean");
            cfg.bell.refine = b.at("refine").get<bool>();
        }
    }

    if (doc.contains("scan")) {
        const json& s = doc.at("scan");
        if (!s.is_object()) fail("scan", "expected an object");
        if (s.contains("v_values")) {
            cfg.scan.v_values.clear();
            for (const auto& v : s.at("v_values"))
                cfg.scan.v_values.push_back(get_number(v, "scan.v_values[]"));
        }
        if (s.contains("conventions")) {
            cfg.scan.conventions.clear();
            for (const auto& c : s.at("conventions"))
                cfg.scan.conventions.push_back(parse_convention(c, "scan.conventions[]"));
        }
        if (s.contains("r_values")) {
            cfg.scan.r_values.clear();
            for (const auto& r : s.at("r_values"))
                cfg.scan.r_values.push_back(get_number(r, "scan.r_values[]"));
        }
        cfg.scan.eberhard_v = get_number_or(s, "eberhard_v", "scan", 1.0);
        cfg.scan.grid_step_deg = get_number_or(s, "grid_step_deg", "scan", 0.5);
        if (!(cfg.scan.grid_step_deg > 0.0)) fail("scan.grid_step_deg", "must be positive");
    }

    try {
        cfg.experiment.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }

    // Canonical echo: defaults materialized, angles normalized, keys sorted.
    json n;
    n["experiment"]["source_model"] =
        cfg.experiment.source_model == SourceModel::IdealSinglets
            ? "ideal_singlets"
            : "beam_splitter_sources";
    n["experiment"]["beam_splitter"] = {{"kind", "custom"},
                                        {"t_x", cfg.experiment.central_bs.t_x},
                                        {"t_y", cfg.experiment.central_bs.t_y},
                                        {"r_x", cfg.experiment.central_bs.r_x},
                                        {"r_y", cfg.experiment.central_bs.r_y}};
    if (cfg.experiment.preselection)
        n["experiment"]["preselection"] = {
            {"theta1_deg", cfg.experiment.preselection->theta_1 / kDegToRad},
            {"theta2_deg", cfg.experiment.preselection->theta_2 / kDegToRad}};
    else
        n["experiment"]["preselection"] = nullptr;
    n["experiment"]["prime_analyzers"] = {
        {"theta1p_deg", setting_to_json(cfg.experiment.prime_1)},
        {"theta2p_deg", setting_to_json(cfg.experiment.prime_2)}};
    n["phase"] = phase_to_json(cfg.experiment.phase);
    n["detectors"]["default"] = {
        {"efficiency", cfg.experiment.detectors[0].efficiency},
        {"dark_count_prob", cfg.experiment.detectors[0].dark_count_prob}};
    json overrides = json::object();
    for (int k = 1; k < kNumDetectors; ++k) {
        const auto& d = cfg.experiment.detectors[k];
        const auto& base = cfg.experiment.detectors[0];
        if (d.efficiency != base.efficiency || d.dark_count_prob != base.dark_count_prob)
            overrides[kDetectorNames[k]] = {{"efficiency", d.efficiency},
                                            {"dark_count_prob", d.dark_count_prob}};
    }
    n["detectors"]["overrides"] = overrides;
    // threads is an execution detail that cannot affect results; it stays
    // out of the canonical echo so determinism checks hash identically.
    n["run"] = {{"trials", cfg.experiment.trials},
                {"seed", cfg.experiment.seed},
                {"pulse_period_ns", cfg.experiment.pulse_period_ns},
                {"window_ns", cfg.experiment.window_ns}};
    if (!cfg.analytic.formula.empty()) {
        json rows = json::array();
        for (const auto& row : cfg.analytic.rows) {
            json jr = json::array();
            for (const auto& c : row)
                jr.push_back(c.removed ? json("removed") : json(c.value));
            rows.push_back(jr);
        }
        n["angles"] = {{"formula", cfg.analytic.formula},
                       {"rows", rows},
                       {"v", cfg.analytic.v},
                       {"r", cfg.analytic.r},
                       {"phi_deg", cfg.analytic.phi_deg}};
    }
    {
        json b;
        b["v_values"] = cfg.bell.v_values;
        b["convention"] = to_string(cfg.bell.convention);
        if (cfg.bell.quadruple)
            b["quadruple_deg"] = {cfg.bell.quadruple->a / kDegToRad,
                                  cfg.bell.quadruple->a_alt / kDegToRad,
                                  cfg.bell.quadruple->b / kDegToRad,
                                  cfg.bell.quadruple->b_alt / kDegToRad};
        b["grid_step_deg"] = cfg.bell.grid_step_deg;
        b["refine"] = cfg.bell.refine;
        n["bell"] = b;
        json s;
        s["v_values"] = cfg.scan.v_values;
        json convs = json::array();
        for (auto c : cfg.scan.conventions) convs.push_back(to_string(c));
        s["conventions"] = convs;
        s["r_values"] = cfg.scan.r_values;
        s["eberhard_v"] = cfg.scan.eberhard_v;
        s["grid_step_deg"] = cfg.scan.grid_step_deg;
        n["scan"] = s;
    }
    cfg.normalized = std::move(n);
    return cfg;
}

AppConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    return parse_config(doc);
}

std::string config_hash_hex(const nlohmann::json& normalized) {
    const std::string dump = normalized.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_number(double value) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::general, 9);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

void CsvWriter::comment(const std::string& key, const std::string& value) {
    out_ << "# " << key << ": " << value << "\n";
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    row(columns);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ",";
        out_ << cells[i];
    }
    out_ << "\n";
}

}  // namespace spincorr::io
