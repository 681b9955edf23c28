// Oracle-equivalence suite: evaluates every closed-form probability against
// the exact Fock-propagation pipeline on randomized parameter tuples, plus
// fixed-point identities. Exposed so the CLI selftest subcommand and the
// acceptance suite share one implementation.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spincorr/analytic.hpp"
#include "spincorr/optics.hpp"

namespace spincorr::selftest {

// Exact-engine evaluations of the pipeline configurations. Removed settings
// sum the two orthogonal channels of that slot (preparations included).

/// Two-photon opposite-side coincidence through one splitter.
double engine_prob2(const AnalyzerSetting& theta_10, const AnalyzerSetting& theta_20,
                    const AnalyzerSetting& theta_1, const AnalyzerSetting& theta_2,
                    const BeamSplitterSpec& spec, double phi);

/// Two-photon probability of both photons on one side (no analyzers).
double engine_prob2_same_side_total(double theta_10, double theta_20);

/// Four-photon full coincidence D1',D2',D1,D2 (two singlet sources).
double engine_prob4(const AnalyzerSetting& theta_1p, const AnalyzerSetting& theta_2p,
                    const AnalyzerSetting& theta_1, const AnalyzerSetting& theta_2,
                    const BeamSplitterSpec& spec, double phi);

/// Conditional D1'-with-D2'perp frequency among gated events for the
/// unequal-superposition arrangement (preselection at pi/2 and 0).
double engine_eberhard(double theta_1p, double theta_2p, double r);

struct CheckResult {
    std::string name;
    bool passed = false;
    double worst = 0.0;   // largest absolute deviation observed
    int evaluations = 0;
};

/// Runs the full suite; `tuples` controls the random-tuple count per check.
std::vector<CheckResult> run(std::uint64_t seed = 71, int tuples = 550);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace spincorr::selftest
