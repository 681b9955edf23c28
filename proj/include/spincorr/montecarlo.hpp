// Event-level simulation of the four-photon preselection experiment:
// pulsed pair sources, central beam-splitter interference, threshold
// detectors with finite efficiency, coincidence gating, and tallies.
//
// Detector labels: D1p/D1pX and D2p/D2pX are the two channels of the prime
// analyzers ("p" marks the prime side, "X" the perpendicular prism exit);
// D1/D1X and D2/D2X sit behind the central beam splitter (the X channels
// exist only when preselection analyzers are present).
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spincorr/analytic.hpp"
#include "spincorr/fock.hpp"
#include "spincorr/optics.hpp"
#include "spincorr/rng.hpp"

namespace spincorr {

/// Raised when an estimator is requested from a tally with no accepted events.
class insufficient_statistics : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Threshold detector: clicks with probability 1 - (1-eta)^n for n delivered
/// photons, plus an independent dark-click probability per gate window.
struct DetectorSpec {
    double efficiency = 1.0;
    double dark_count_prob = 0.0;

    DetectorSpec() = default;
    DetectorSpec(double eta, double dark);
};

enum class SourceModel { IdealSinglets, BeamSplitterSources };

/// Canonical detector indices.
enum Detector : int {
    kD1p = 0,
    kD1pX = 1,
    kD2p = 2,
    kD2pX = 3,
    kD1 = 4,
    kD1X = 5,
    kD2 = 6,
    kD2X = 7,
};
inline constexpr int kNumDetectors = 8;
extern const std::array<std::string, kNumDetectors> kDetectorNames;

/// Central-arm polarizers of the full (non-reduced) scheme.
struct PreselectionAnalyzers {
    double theta_1 = 0.0;  // radians, arm behind output 1
    double theta_2 = 0.0;  // radians, arm behind output 2
};

/// Full description of one run.
struct ExperimentConfig {
    SourceModel source_model = SourceModel::IdealSinglets;
    BeamSplitterSpec central_bs = BeamSplitterSpec::balanced();
    PhaseModel phase = FixedPhase{0.0};
    std::optional<PreselectionAnalyzers> preselection;  // nullopt: reduced scheme
    AnalyzerSetting prime_1 = AnalyzerSetting::angle(0.0);
    AnalyzerSetting prime_2 = AnalyzerSetting::angle(0.0);
    std::array<DetectorSpec, kNumDetectors> detectors{};
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    double pulse_period_ns = 50.0;
    double window_ns = 10.0;

    void set_all_detectors(const DetectorSpec& spec);
    void validate() const;
};

/// Per-detector click booleans, packed by Detector index.
struct Clicks {
    std::uint8_t mask = 0;
    bool has(Detector d) const { return (mask >> d) & 1; }
    void set(Detector d) { mask |= std::uint8_t(1) << d; }
    int count() const;
};

enum class GateDecision { GateClosed, DiscardedNoPrimePair, Accepted };

/// Accepted prime-side coincidence patterns.
enum class PrimePattern : int {
    D1pD2p = 0,    // D1' and D2'
    D1pD2pX = 1,   // D1' and D2'-perp
    D1pXD2p = 2,   // D1'-perp and D2'
    D1pXD2pX = 3,  // D1'-perp and D2'-perp
};
const std::string& to_string(PrimePattern p);

struct GateResult {
    GateDecision decision = GateDecision::GateClosed;
    PrimePattern pattern = PrimePattern::D1pD2p;  // valid when Accepted
};

/// Gating logic. The gate opens on the D1-D2 coincidence signature (with
/// preselection analyzers present this is specifically the D1 and D2
/// channels, the selection the unequal-superposition protocol relies on).
/// Given an open gate, an event is accepted when exactly one channel per
/// prime side clicked; otherwise it is discarded.
GateResult gate_event(const Clicks& clicks, const ExperimentConfig& config);

/// One realization of the fourth-order phase. Transverse-fringe models draw
/// both detector positions uniformly over the detector width; the sample
/// mean of cos(phi) then converges to v * cos(phi_center) with v the
/// geometric visibility. Fixed and beat models are deterministic.
double sample_phase(const PhaseModel& model, TrialRng& rng);

struct EventRecord {
    std::uint64_t trial = 0;
    Clicks clicks;
    GateResult gate;
};

/// Event counts of a run.
struct Tally {
    std::array<std::uint64_t, 4> accepted{};  // by PrimePattern index
    std::uint64_t n_gate_opened = 0;
    std::uint64_t n_discarded = 0;
    std::uint64_t n_trials = 0;

    std::uint64_t accepted_total() const;
    Tally& operator+=(const Tally& other);
};

/// Degree-2 trigonometric polynomial in phi.
struct TrigPoly {
    double c0 = 0.0, c1 = 0.0, s1 = 0.0, c2 = 0.0, s2 = 0.0;
    double eval(double phi) const {
        return c0 + c1 * std::cos(phi) + s1 * std::sin(phi) +
               c2 * std::cos(2.0 * phi) + s2 * std::sin(2.0 * phi);
    }
    /// Exact fit from values at the five nodes phi_j = 2*pi*j/5.
    static TrigPoly fit(const std::array<double, 5>& values);
};

/// Precomputed outcome model of a config: the exact Fock-pipeline outcome
/// distribution compiled to per-pattern phase polynomials. Every delivered
/// pattern's weight is exactly the engine value at the realized phase;
/// trials are drawn against the maximum total weight over the phase support,
/// with the shortfall recorded as a no-detection trial (the coincidence-rate
/// excess of displaced point detectors redistributes events off them).
class CompiledExperiment {
  public:
    explicit CompiledExperiment(const ExperimentConfig& config);

    struct Outcome {
        std::array<std::uint8_t, kNumDetectors> counts{};
        TrigPoly weight;
    };

    const std::vector<Outcome>& outcomes() const { return outcomes_; }
    double weight_ceiling() const { return weight_ceiling_; }
    bool deterministic_phase() const { return deterministic_phase_; }

    /// Exact per-trial probabilities of each accepted pattern, of an open
    /// gate, and of a discarded gated event, with detector response and
    /// phase averaging folded in. Serves as the estimator oracle.
    struct ExactRates {
        std::array<double, 4> accepted{};
        double gate_opened = 0.0;
        double discarded = 0.0;
    };
    ExactRates exact_rates(const ExperimentConfig& config) const;

    /// Expected outcome weights averaged over the phase distribution.
    std::vector<double> phase_averaged_weights(const ExperimentConfig& config) const;

  private:
    std::vector<Outcome> outcomes_;
    double weight_ceiling_ = 1.0;
    bool deterministic_phase_ = true;
    double fixed_phi_ = 0.0;
};

/// Runs the configured number of trials. Deterministic for a fixed
/// (config, seed) under any thread count; trials are independent streams
/// and tallies merge additively.
Tally run_trials(const ExperimentConfig& config, int threads = 0);

/// Single-trial record, for inspection and tests.
EventRecord simulate_trial(const CompiledExperiment& compiled,
                           const ExperimentConfig& config, std::uint64_t trial);

/// n(pattern) / n(all accepted). Throws insufficient_statistics when no
/// events were accepted.
double frequency(const Tally& tally, PrimePattern pattern);

/// frequency / 4: estimator of the no-central-analyzer coincidence
/// probability (the factor compensates for same-side pairs removed by the
/// gate). The frequency itself estimates the Bell-scaled probability.
double estimate_P(const Tally& tally, PrimePattern pattern);

/// Binomial standard error of frequency(tally, pattern).
double frequency_std_error(const Tally& tally, PrimePattern pattern);

}  // namespace spincorr
