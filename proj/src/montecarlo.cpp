#include "spincorr/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

namespace spincorr {

const std::array<std::string, kNumDetectors> kDetectorNames = {
    "D1p", "D1pX", "D2p", "D2pX", "D1", "D1X", "D2", "D2X"};

namespace {

const std::array<std::string, 4> kPatternNames = {
    "D1p+D2p", "D1p+D2pX", "D1pX+D2p", "D1pX+D2pX"};

int detector_index(const std::string& label) {
    for (int d = 0; d < kNumDetectors; ++d)
        if (kDetectorNames[d] == label) return d;
    throw std::logic_error("unknown detector label " + label);
}

/// Final state of one pulse: sources, central splitter at phase phi,
/// analyzers; mode ports equal detector labels afterwards.
FockState build_pipeline_state(const ExperimentConfig& cfg, double phi) {
    FockState state = [&] {
        if (cfg.source_model == SourceModel::IdealSinglets)
            return tensor_product(make_singlet("1p", "1"), make_singlet("2p", "2"));
        auto pair_through_splitter = [&](const std::string& in_a, const std::string& in_b,
                                         const std::string& out_prime,
                                         const std::string& out_central) {
            std::vector<ModeId> modes = {{in_a, Axis::X}, {in_a, Axis::Y},
                                         {in_b, Axis::X}, {in_b, Axis::Y}};
            std::map<OccVec, cplx> terms;
            terms[{1, 0, 0, 1}] = 1.0;  // x photon on in_a, y photon on in_b
            FockState pair(std::move(modes), std::move(terms));
            return apply_mode_map(pair, beam_splitter_map(BeamSplitterSpec::balanced(),
                                                          in_a, in_b, out_prime,
                                                          out_central, 0.0));
        };
        return tensor_product(pair_through_splitter("a1", "b1", "1p", "1"),
                              pair_through_splitter("a2", "b2", "2p", "2"));
    }();

    state = apply_mode_map(
        state, beam_splitter_map(cfg.central_bs, "1", "2", "o1", "o2", phi));
    state = apply_mode_map(state, analyzer_map(cfg.prime_1, "1p", "D1p", "D1pX"));
    state = apply_mode_map(state, analyzer_map(cfg.prime_2, "2p", "D2p", "D2pX"));
    const AnalyzerSetting central_1 = cfg.preselection
                                          ? AnalyzerSetting::angle(cfg.preselection->theta_1)
                                          : AnalyzerSetting::removed();
    const AnalyzerSetting central_2 = cfg.preselection
                                          ? AnalyzerSetting::angle(cfg.preselection->theta_2)
                                          : AnalyzerSetting::removed();
    state = apply_mode_map(state, analyzer_map(central_1, "o1", "D1", "D1X"));
    state = apply_mode_map(state, analyzer_map(central_2, "o2", "D2", "D2X"));
    return state;
}

struct PhaseSpread {
    double center = 0.0;
    double half_width = 0.0;  // of the phase difference support
    double dz_over_l = 0.0;
    bool random = false;
};

PhaseSpread phase_spread(const PhaseModel& model) {
    PhaseSpread s;
    s.center = phase_of(model);
    if (const auto* t = std::get_if<TransverseFringePhase>(&model)) {
        if (t->dz > 0.0) {
            s.random = true;
            s.dz_over_l = t->dz / t->fringe_l;
            s.half_width = 2.0 * M_PI * s.dz_over_l;
        }
    }
    return s;
}

double sinc_sq(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    const double s = std::sin(x) / x;
    return s * s;
}

}  // namespace

DetectorSpec::DetectorSpec(double eta, double dark)
    : efficiency(eta), dark_count_prob(dark) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("detector efficiency must lie in [0,1]");
    if (!(dark >= 0.0 && dark <= 1.0))
        throw std::invalid_argument("dark count probability must lie in [0,1]");
}

void ExperimentConfig::set_all_detectors(const DetectorSpec& spec) {
    detectors.fill(spec);
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw std::invalid_argument("trial count must be >= 1");
    if (!(window_ns < pulse_period_ns))
        throw std::invalid_argument(
            "coincidence window must be shorter than the pulse period");
    spincorr::validate(phase);
    for (const auto& d : detectors) DetectorSpec(d.efficiency, d.dark_count_prob);
}

int Clicks::count() const {
    int n = 0;
    for (int d = 0; d < kNumDetectors; ++d) n += (mask >> d) & 1;
    return n;
}

const std::string& to_string(PrimePattern p) {
    return kPatternNames[static_cast<int>(p)];
}

GateResult gate_event(const Clicks& clicks, const ExperimentConfig&) {
    GateResult r;
    const bool gate = clicks.has(kD1) && clicks.has(kD2) && !clicks.has(kD1X) &&
                      !clicks.has(kD2X);
    if (!gate) return r;
    const bool p1 = clicks.has(kD1p), p1x = clicks.has(kD1pX);
    const bool p2 = clicks.has(kD2p), p2x = clicks.has(kD2pX);
    if ((p1 != p1x) && (p2 != p2x)) {
        r.decision = GateDecision::Accepted;
        r.pattern = static_cast<PrimePattern>((p1x ? 2 : 0) + (p2x ? 1 : 0));
    } else {
        r.decision = GateDecision::DiscardedNoPrimePair;
    }
    return r;
}

double sample_phase(const PhaseModel& model, TrialRng& rng) {
    if (const auto* t = std::get_if<TransverseFringePhase>(&model)) {
        if (t->dz > 0.0) {
            const double z1 = t->z1 + (rng.next_double() - 0.5) * t->dz;
            const double z2 = t->z2 + (rng.next_double() - 0.5) * t->dz;
            return 2.0 * M_PI * (z2 - z1) / t->fringe_l;
        }
    }
    return phase_of(model);
}

std::uint64_t Tally::accepted_total() const {
    return accepted[0] + accepted[1] + accepted[2] + accepted[3];
}

Tally& Tally::operator+=(const Tally& other) {
    for (int i = 0; i < 4; ++i) accepted[i] += other.accepted[i];
    n_gate_opened += other.n_gate_opened;
    n_discarded += other.n_discarded;
    n_trials += other.n_trials;
    return *this;
}

TrigPoly TrigPoly::fit(const std::array<double, 5>& values) {
    TrigPoly p;
    for (int j = 0; j < 5; ++j) {
        const double phi = 2.0 * M_PI * j / 5.0;
        p.c0 += values[j] / 5.0;
        p.c1 += 2.0 / 5.0 * values[j] * std::cos(phi);
        p.s1 += 2.0 / 5.0 * values[j] * std::sin(phi);
        p.c2 += 2.0 / 5.0 * values[j] * std::cos(2.0 * phi);
        p.s2 += 2.0 / 5.0 * values[j] * std::sin(2.0 * phi);
    }
    return p;
}

CompiledExperiment::CompiledExperiment(const ExperimentConfig& config) {
    config.validate();

    const PhaseSpread spread = phase_spread(config.phase);
    deterministic_phase_ = !spread.random;
    fixed_phi_ = spread.center;

    auto counts_of = [](const DetectionPattern& pattern) {
        std::array<std::uint8_t, kNumDetectors> counts{};
        for (const auto& [label, n] : pattern)
            counts[detector_index(label)] = static_cast<std::uint8_t>(n);
        return counts;
    };

    if (deterministic_phase_) {
        // Single exact evaluation at the realized phase. Patterns whose
        // amplitudes cancel there are absent outright, keeping impossible
        // outcomes at probability exactly zero.
        const FockState state = build_pipeline_state(config, fixed_phi_);
        DetectorLayout layout;
        for (const auto& m : state.modes()) layout[m] = m.port;
        std::map<std::array<std::uint8_t, kNumDetectors>, double> table;
        for (const auto& [pattern, prob] : detection_distribution(state, layout))
            table[counts_of(pattern)] += prob;
        for (const auto& [counts, value] : table) {
            Outcome o;
            o.counts = counts;
            o.weight.c0 = value;
            outcomes_.push_back(std::move(o));
        }
    } else {
        std::map<std::array<std::uint8_t, kNumDetectors>, std::array<double, 5>> table;
        for (int j = 0; j < 5; ++j) {
            const double phi = 2.0 * M_PI * j / 5.0;
            const FockState state = build_pipeline_state(config, phi);
            DetectorLayout layout;
            for (const auto& m : state.modes()) layout[m] = m.port;
            for (const auto& [pattern, prob] : detection_distribution(state, layout))
                table[counts_of(pattern)][j] += prob;
        }
        for (const auto& [counts, values] : table) {
            Outcome o;
            o.counts = counts;
            o.weight = TrigPoly::fit(values);
            outcomes_.push_back(std::move(o));
        }
    }

    TrigPoly total;
    for (const auto& o : outcomes_) {
        total.c0 += o.weight.c0;
        total.c1 += o.weight.c1;
        total.s1 += o.weight.s1;
        total.c2 += o.weight.c2;
        total.s2 += o.weight.s2;
    }
    if (deterministic_phase_) {
        weight_ceiling_ = total.c0;
    } else {
        // Maximum of the total rate over the realizable phase interval, with
        // a small inflation so sampled weights never exceed the ceiling.
        double zmax = 0.0;
        const int n_scan = 20000;
        for (int k = 0; k <= n_scan; ++k) {
            const double phi = spread.center - spread.half_width +
                               2.0 * spread.half_width * k / n_scan;
            zmax = std::max(zmax, total.eval(phi));
        }
        weight_ceiling_ = zmax * (1.0 + 1e-9);
    }
    if (!(weight_ceiling_ > 0.0))
        throw std::logic_error("degenerate outcome distribution");
}

std::vector<double> CompiledExperiment::phase_averaged_weights(
    const ExperimentConfig& config) const {
    const PhaseSpread spread = phase_spread(config.phase);
    const double f1 = spread.random ? sinc_sq(M_PI * spread.dz_over_l) : 1.0;
    const double f2 = spread.random ? sinc_sq(2.0 * M_PI * spread.dz_over_l) : 1.0;
    const double c = spread.center;
    std::vector<double> w;
    w.reserve(outcomes_.size());
    for (const auto& o : outcomes_) {
        const TrigPoly& p = o.weight;
        w.push_back(p.c0 + f1 * (p.c1 * std::cos(c) + p.s1 * std::sin(c)) +
                    f2 * (p.c2 * std::cos(2.0 * c) + p.s2 * std::sin(2.0 * c)));
    }
    return w;
}

CompiledExperiment::ExactRates CompiledExperiment::exact_rates(
    const ExperimentConfig& config) const {
    ExactRates rates;
    std::vector<double> weights = phase_averaged_weights(config);
    double delivered_total = 0.0;
    for (double& w : weights) {
        w = std::max(0.0, w) / weight_ceiling_;
        delivered_total += w;
    }

    std::array<double, kNumDetectors> dark{};
    for (int d = 0; d < kNumDetectors; ++d) dark[d] = config.detectors[d].dark_count_prob;

    auto accumulate_outcome = [&](const std::array<std::uint8_t, kNumDetectors>& counts,
                                  double weight) {
        if (weight <= 0.0) return;
        std::array<double, kNumDetectors> p_click{};
        for (int d = 0; d < kNumDetectors; ++d) {
            const double miss = std::pow(1.0 - config.detectors[d].efficiency,
                                         static_cast<double>(counts[d]));
            p_click[d] = 1.0 - (1.0 - dark[d]) * miss;
        }
        for (int mask = 0; mask < 256; ++mask) {
            double pm = weight;
            for (int d = 0; d < kNumDetectors; ++d)
                pm *= (mask >> d & 1) ? p_click[d] : 1.0 - p_click[d];
            if (pm == 0.0) continue;
            Clicks c;
            c.mask = static_cast<std::uint8_t>(mask);
            const GateResult g = gate_event(c, config);
            if (g.decision == GateDecision::GateClosed) continue;
            rates.gate_opened += pm;
            if (g.decision == GateDecision::Accepted)
                rates.accepted[static_cast<int>(g.pattern)] += pm;
            else
                rates.discarded += pm;
        }
    };

    for (std::size_t i = 0; i < outcomes_.size(); ++i)
        accumulate_outcome(outcomes_[i].counts, weights[i]);
    const std::array<std::uint8_t, kNumDetectors> none{};
    accumulate_outcome(none, std::max(0.0, 1.0 - delivered_total));
    return rates;
}

namespace {

/// Flattened per-config sampling tables shared by all trial threads.
struct Sampler {
    bool random_phase = false;
    TransverseFringePhase fringe;
    double fixed_phi = 0.0;
    double ceiling = 1.0;

    struct OutcomeDraw {
        double c0, c1, s1, c2, s2;            // weight polynomial
        std::uint8_t certain_mask = 0;        // p == 1 clicks
        std::vector<std::pair<int, double>> bernoulli;  // (detector, p), 0 < p < 1
    };
    std::vector<OutcomeDraw> outcomes;
    std::vector<double> fixed_cdf;  // deterministic-phase cumulative weights
    OutcomeDraw miss;               // dark clicks only

    Sampler(const CompiledExperiment& compiled, const ExperimentConfig& cfg) {
        random_phase = !compiled.deterministic_phase();
        if (const auto* t = std::get_if<TransverseFringePhase>(&cfg.phase)) fringe = *t;
        fixed_phi = phase_of(cfg.phase);
        ceiling = compiled.weight_ceiling();

        auto make_draw = [&](const std::array<std::uint8_t, kNumDetectors>& counts) {
            OutcomeDraw d{};
            for (int det = 0; det < kNumDetectors; ++det) {
                const double miss_p = std::pow(1.0 - cfg.detectors[det].efficiency,
                                               static_cast<double>(counts[det]));
                const double p = 1.0 - (1.0 - cfg.detectors[det].dark_count_prob) * miss_p;
                if (p >= 1.0)
                    d.certain_mask |= std::uint8_t(1) << det;
                else if (p > 0.0)
                    d.bernoulli.emplace_back(det, p);
            }
            return d;
        };

        double cum = 0.0;
        for (const auto& o : compiled.outcomes()) {
            OutcomeDraw d = make_draw(o.counts);
            d.c0 = o.weight.c0;
            d.c1 = o.weight.c1;
            d.s1 = o.weight.s1;
            d.c2 = o.weight.c2;
            d.s2 = o.weight.s2;
            outcomes.push_back(std::move(d));
            if (!random_phase) {
                cum += std::max(0.0, o.weight.eval(fixed_phi)) / ceiling;
                fixed_cdf.push_back(cum);
            }
        }
        miss = make_draw({});
    }

    EventRecord run_trial(std::uint64_t seed, std::uint64_t trial,
                          const ExperimentConfig& cfg) const {
        TrialRng rng(seed, trial);
        int chosen = -1;  // -1: no delivery
        if (random_phase) {
            const double z1 = fringe.z1 + (rng.next_double() - 0.5) * fringe.dz;
            const double z2 = fringe.z2 + (rng.next_double() - 0.5) * fringe.dz;
            const double phi = 2.0 * M_PI * (z2 - z1) / fringe.fringe_l;
            const double cs = std::cos(phi), sn = std::sin(phi);
            const double cs2 = 2.0 * cs * cs - 1.0, sn2 = 2.0 * sn * cs;
            double u = rng.next_double() * ceiling;
            for (std::size_t i = 0; i < outcomes.size(); ++i) {
                const OutcomeDraw& o = outcomes[i];
                const double w =
                    o.c0 + o.c1 * cs + o.s1 * sn + o.c2 * cs2 + o.s2 * sn2;
                if (w > 0.0) {
                    u -= w;
                    if (u < 0.0) {
                        chosen = static_cast<int>(i);
                        break;
                    }
                }
            }
        } else {
            const double u = rng.next_double();
            const auto it = std::lower_bound(fixed_cdf.begin(), fixed_cdf.end(), u);
            if (it != fixed_cdf.end())
                chosen = static_cast<int>(it - fixed_cdf.begin());
        }

        const OutcomeDraw& o = chosen >= 0 ? outcomes[chosen] : miss;
        EventRecord rec;
        rec.trial = trial;
        rec.clicks.mask = o.certain_mask;
        for (const auto& [det, p] : o.bernoulli)
            if (rng.next_double() < p) rec.clicks.mask |= std::uint8_t(1) << det;
        rec.gate = gate_event(rec.clicks, cfg);
        return rec;
    }
};

void tally_range(const Sampler& sampler, const ExperimentConfig& cfg,
                 std::uint64_t begin, std::uint64_t end, Tally& out) {
    Tally t;
    for (std::uint64_t trial = begin; trial < end; ++trial) {
        const EventRecord rec = sampler.run_trial(cfg.seed, trial, cfg);
        ++t.n_trials;
        switch (rec.gate.decision) {
            case GateDecision::GateClosed:
                break;
            case GateDecision::DiscardedNoPrimePair:
                ++t.n_gate_opened;
                ++t.n_discarded;
                break;
            case GateDecision::Accepted:
                ++t.n_gate_opened;
                ++t.accepted[static_cast<int>(rec.gate.pattern)];
                break;
        }
    }
    out = t;
}

}  // namespace

EventRecord simulate_trial(const CompiledExperiment& compiled,
                           const ExperimentConfig& config, std::uint64_t trial) {
    return Sampler(compiled, config).run_trial(config.seed, trial, config);
}

Tally run_trials(const ExperimentConfig& config, int threads) {
    config.validate();
    const CompiledExperiment compiled(config);
    const Sampler sampler(compiled, config);

    unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(
        std::min<std::uint64_t>(n_threads, config.trials));

    std::vector<Tally> parts(n_threads);
    if (n_threads == 1) {
        tally_range(sampler, config, 0, config.trials, parts[0]);
    } else {
        std::vector<std::thread> workers;
        const std::uint64_t chunk = config.trials / n_threads;
        for (unsigned k = 0; k < n_threads; ++k) {
            const std::uint64_t begin = k * chunk;
            const std::uint64_t end = (k + 1 == n_threads) ? config.trials : begin + chunk;
            workers.emplace_back([&, begin, end, k] {
                tally_range(sampler, config, begin, end, parts[k]);
            });
        }
        for (auto& w : workers) w.join();
    }
    Tally total;
    for (const auto& p : parts) total += p;
    return total;
}

double frequency(const Tally& tally, PrimePattern pattern) {
    const std::uint64_t total = tally.accepted_total();
    if (total == 0)
        throw insufficient_statistics("no accepted coincidences in tally");
    return static_cast<double>(tally.accepted[static_cast<int>(pattern)]) /
           static_cast<double>(total);
}

double estimate_P(const Tally& tally, PrimePattern pattern) {
    return frequency(tally, pattern) / 4.0;
}

double frequency_std_error(const Tally& tally, PrimePattern pattern) {
    const double f = frequency(tally, pattern);
    const double n = static_cast<double>(tally.accepted_total());
    return std::sqrt(f * (1.0 - f) / n);
}

}  // namespace spincorr
