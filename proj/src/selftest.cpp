#include "spincorr/selftest.hpp"

#include <cmath>

#include "spincorr/montecarlo.hpp"
#include "spincorr/rng.hpp"

namespace spincorr::selftest {

namespace {

constexpr double kHalfPi = M_PI / 2.0;

double pattern_prob(const std::map<DetectionPattern, double>& dist,
                    const DetectionPattern& pattern) {
    auto it = dist.find(pattern);
    return it == dist.end() ? 0.0 : it->second;
}

/// Expands removed preparation slots into both basis channels and sums.
template <typename F>
double sum_preparations(const AnalyzerSetting& a, const AnalyzerSetting& b, F&& f) {
    const bool ra = a.is_removed(), rb = b.is_removed();
    double total = 0.0;
    for (int i = 0; i < (ra ? 2 : 1); ++i) {
        for (int j = 0; j < (rb ? 2 : 1); ++j) {
            const double ta = ra ? (i ? kHalfPi : 0.0) : a.radians();
            const double tb = rb ? (j ? kHalfPi : 0.0) : b.radians();
            total += f(ta, tb);
        }
    }
    return total;
}

std::map<DetectionPattern, double> pair_distribution(double theta_10, double theta_20,
                                                     const AnalyzerSetting& theta_1,
                                                     const AnalyzerSetting& theta_2,
                                                     const BeamSplitterSpec& spec,
                                                     double phi) {
    FockState state = make_polarized_pair(AnalyzerSetting::angle(theta_10),
                                          AnalyzerSetting::angle(theta_20));
    state = apply_mode_map(state, beam_splitter_map(spec, "1", "2", "o1", "o2", phi));
    state = apply_mode_map(state, analyzer_map(theta_1, "o1", "D1", "D1X"));
    state = apply_mode_map(state, analyzer_map(theta_2, "o2", "D2", "D2X"));
    DetectorLayout layout;
    for (const auto& m : state.modes()) layout[m] = m.port;
    return detection_distribution(state, layout);
}

}  // namespace

double engine_prob2(const AnalyzerSetting& theta_10, const AnalyzerSetting& theta_20,
                    const AnalyzerSetting& theta_1, const AnalyzerSetting& theta_2,
                    const BeamSplitterSpec& spec, double phi) {
    return sum_preparations(theta_10, theta_20, [&](double t10, double t20) {
        const auto dist = pair_distribution(t10, t20, theta_1, theta_2, spec, phi);
        return pattern_prob(dist, {{"D1", 1}, {"D2", 1}});
    });
}

double engine_prob2_same_side_total(double theta_10, double theta_20) {
    const auto dist =
        pair_distribution(theta_10, theta_20, AnalyzerSetting::removed(),
                          AnalyzerSetting::removed(), BeamSplitterSpec::balanced(), 0.0);
    return pattern_prob(dist, {{"D1", 2}}) + pattern_prob(dist, {{"D2", 2}});
}

double engine_prob4(const AnalyzerSetting& theta_1p, const AnalyzerSetting& theta_2p,
                    const AnalyzerSetting& theta_1, const AnalyzerSetting& theta_2,
                    const BeamSplitterSpec& spec, double phi) {
    auto quad = [&](const AnalyzerSetting& p1, const AnalyzerSetting& p2) {
        FockState state =
            tensor_product(make_singlet("1p", "1"), make_singlet("2p", "2"));
        state = apply_mode_map(state, beam_splitter_map(spec, "1", "2", "o1", "o2", phi));
        state = apply_mode_map(state, analyzer_map(p1, "1p", "D1p", "D1pX"));
        state = apply_mode_map(state, analyzer_map(p2, "2p", "D2p", "D2pX"));
        state = apply_mode_map(state, analyzer_map(theta_1, "o1", "D1", "D1X"));
        state = apply_mode_map(state, analyzer_map(theta_2, "o2", "D2", "D2X"));
        DetectorLayout layout;
        for (const auto& m : state.modes()) layout[m] = m.port;
        const auto dist = detection_distribution(state, layout);
        return pattern_prob(dist, {{"D1p", 1}, {"D2p", 1}, {"D1", 1}, {"D2", 1}});
    };
    // Removed prime analyzers route both channels to one label already; the
    // summation is only needed when treating Removed as a channel sum of the
    // angle form, which the binning reproduces exactly.
    return quad(theta_1p, theta_2p);
}

double engine_eberhard(double theta_1p, double theta_2p, double r) {
    ExperimentConfig cfg;
    cfg.central_bs = BeamSplitterSpec::from_reflection_ratio(r);
    cfg.preselection = PreselectionAnalyzers{kHalfPi, 0.0};
    cfg.prime_1 = AnalyzerSetting::angle(theta_1p);
    cfg.prime_2 = AnalyzerSetting::angle(theta_2p);
    const CompiledExperiment compiled(cfg);
    const auto rates = compiled.exact_rates(cfg);
    const double total =
        rates.accepted[0] + rates.accepted[1] + rates.accepted[2] + rates.accepted[3];
    if (total <= 0.0) return 0.0;
    return rates.accepted[static_cast<int>(PrimePattern::D1pD2pX)] / total;
}

namespace {

struct Harness {
    std::vector<CheckResult> results;
    CheckResult current;

    void begin(const std::string& name) {
        current = CheckResult{name, true, 0.0, 0};
    }
    void observe(double a, double oracle, double tol = 1e-10) {
        const double d = std::abs(a - oracle);
        current.worst = std::max(current.worst, d);
        if (d > tol) current.passed = false;
        ++current.evaluations;
    }
    void end() { results.push_back(current); }
};

AnalyzerSetting random_setting(TrialRng& rng, double p_removed) {
    if (rng.next_double() < p_removed) return AnalyzerSetting::removed();
    return AnalyzerSetting::angle(rng.next_double() * M_PI);
}

BeamSplitterSpec random_spec(TrialRng& rng) {
    const double which = rng.next_double();
    if (which < 0.4) return BeamSplitterSpec::balanced();
    if (which < 0.7)
        return BeamSplitterSpec::from_reflection_ratio(0.1 + rng.next_double());
    const double tx = 0.2 + 0.75 * rng.next_double();
    const double ty = 0.2 + 0.75 * rng.next_double();
    return BeamSplitterSpec(tx, ty, std::sqrt(1.0 - tx * tx), std::sqrt(1.0 - ty * ty));
}

}  // namespace

std::vector<CheckResult> run(std::uint64_t seed, int tuples) {
    Harness h;
    TrialRng rng(seed, 0);
    const auto balanced = BeamSplitterSpec::balanced();

    h.begin("pair coincidence: closed form vs engine");
    for (int i = 0; i < tuples; ++i) {
        const auto t10 = random_setting(rng, 0.15);
        const auto t20 = random_setting(rng, 0.15);
        const auto t1 = random_setting(rng, 0.2);
        const auto t2 = random_setting(rng, 0.2);
        const auto spec = random_spec(rng);
        const double phi = rng.next_double() * 2.0 * M_PI;
        h.observe(analytic::prob2(t10, t20, t1, t2, spec, phi),
                  engine_prob2(t10, t20, t1, t2, spec, phi));
    }
    h.end();

    h.begin("pair side completeness: opposite + same side");
    for (int i = 0; i < tuples / 4; ++i) {
        const double t10 = rng.next_double() * M_PI;
        const double t20 = rng.next_double() * M_PI;
        const double opposite = analytic::prob2(
            AnalyzerSetting::angle(t10), AnalyzerSetting::angle(t20),
            AnalyzerSetting::removed(), AnalyzerSetting::removed(), balanced, 0.0);
        h.observe(opposite + analytic::prob2_same_side(t10, t20), 1.0, 1e-12);
        h.observe(engine_prob2_same_side_total(t10, t20),
                  analytic::prob2_same_side(t10, t20));
    }
    h.end();

    h.begin("quad coincidence: closed form vs engine");
    for (int i = 0; i < tuples; ++i) {
        const auto p1 = random_setting(rng, 0.2);
        const auto p2 = random_setting(rng, 0.2);
        const auto c1 = random_setting(rng, 0.25);
        const auto c2 = random_setting(rng, 0.25);
        const auto spec = random_spec(rng);
        const double phi = rng.next_double() * 2.0 * M_PI;
        h.observe(analytic::prob4(p1, p2, c1, c2, spec, phi, analytic::Visibility::ideal()),
                  engine_prob4(p1, p2, c1, c2, spec, phi));
    }
    h.end();

    h.begin("unequal superposition: closed form vs gated engine");
    for (int i = 0; i < tuples / 5; ++i) {
        const double a = rng.next_double() * M_PI;
        const double b = rng.next_double() * M_PI;
        const double r = 0.05 + 1.4 * rng.next_double();
        h.observe(analytic::eberhard_prob(a, b, r), engine_eberhard(a, b, r));
    }
    h.end();

    h.begin("fixed-point values");
    {
        const auto deg = [](double d) { return AnalyzerSetting::angle(d * M_PI / 180.0); };
        h.observe(analytic::prob2(deg(0), deg(90), deg(0), deg(90), balanced, 0.0), 0.25,
                  1e-12);
        h.observe(analytic::prob2(deg(0), deg(90), AnalyzerSetting::removed(),
                                  AnalyzerSetting::removed(), balanced, 0.0),
                  0.5, 1e-12);
        h.observe(analytic::prob4(deg(0), deg(90), deg(0), deg(90), balanced, 0.0,
                                  analytic::Visibility::ideal()),
                  1.0 / 16.0, 1e-12);
        h.observe(analytic::prob4(deg(0), deg(90), AnalyzerSetting::removed(),
                                  AnalyzerSetting::removed(), balanced, 0.0,
                                  analytic::Visibility::ideal()),
                  1.0 / 8.0, 1e-12);
        h.observe(analytic::visibility_from_geometry(0.5, 1.0).v,
                  4.0 / (M_PI * M_PI), 1e-12);
        h.observe(analytic::eberhard_prob(0.0, 0.0, 0.31), 1.0 / 1.0961, 1e-12);
    }
    h.end();

    return h.results;
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.passed) return false;
    return true;
}

}  // namespace spincorr::selftest
