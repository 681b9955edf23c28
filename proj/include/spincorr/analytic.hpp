// Closed forms for every coincidence probability of the two- and four-photon
// beam-splitter arrangements, the visibility integral, and the unequal-
// superposition (Eberhard) probability. Fast path; cross-checked against the
// exact Fock engine.
#pragma once

#include "spincorr/optics.hpp"

namespace spincorr::analytic {

/// Fringe contrast of the fourth-order coincidence counting.
struct Visibility {
    double v = 1.0;
    explicit Visibility(double value);
    static Visibility ideal() { return Visibility(1.0); }
};

/// S_ij = s_x cos(theta_i) cos(theta_j) + s_y sin(theta_i) sin(theta_j).
double s_coeff(double s_x, double s_y, double theta_i, double theta_j);

/// Q(q)_ij = q_x sin(theta_i) cos(theta_j) - q_y cos(theta_i) sin(theta_j).
double q_coeff(double q_x, double q_y, double theta_i, double theta_j);

/// Path amplitudes of the two-photon coincidence (transmit-transmit and
/// reflect-reflect) for polarized inputs at theta_10, theta_20 and analyzers
/// at theta_1, theta_2.
InterferenceTerms pair_terms(const BeamSplitterSpec& spec, double theta_10,
                             double theta_20, double theta_1, double theta_2,
                             double phi);

/// Path amplitudes of the four-photon coincidence: prime analyzers at
/// theta_1p, theta_2p, central-arm analyzers at theta_1, theta_2.
InterferenceTerms quad_terms(const BeamSplitterSpec& spec, double theta_1p,
                             double theta_2p, double theta_1, double theta_2,
                             double phi);

/// Two-photon opposite-side coincidence probability; Removed settings sum
/// the two orthogonal channels of that slot (preparations included).
double prob2(const AnalyzerSetting& theta_10, const AnalyzerSetting& theta_20,
             const AnalyzerSetting& theta_1, const AnalyzerSetting& theta_2,
             const BeamSplitterSpec& spec, double phi);

/// Both photons emerge on one side, balanced splitter, phi = 0.
double prob2_same_side(double theta_10, double theta_20);

/// One analyzer present: the outgoing beams carry no polarization,
/// balanced splitter, phi = 0.
double prob2_unpolarized_out(double theta_10, double theta_20, double theta_1);

/// Four-photon coincidence probability (two singlet sources, central beam
/// splitter), visibility-corrected cross term. Removed settings sum the two
/// orthogonal channels of that slot, prime or central.
double prob4(const AnalyzerSetting& theta_1p, const AnalyzerSetting& theta_2p,
             const AnalyzerSetting& theta_1, const AnalyzerSetting& theta_2,
             const BeamSplitterSpec& spec, double phi, const Visibility& vis);

/// Both central photons in one arm, polarizations found at theta_1 and
/// theta_2; balanced splitter, phi = 0.
double prob4_one_arm(double theta_1p, double theta_2p, double theta_1,
                     double theta_2);

/// Both central photons in one arm, no central analyzers.
double prob4_one_arm_nopol(double theta_1p, double theta_2p);

/// Prime coincidence on anti-aligned channels (D1' with D2'-perp),
/// no central analyzers: (1/8) cos^2(theta_1p - theta_2p).
double prob4_triplet(double theta_1p, double theta_2p);

/// v = [sin(pi dz / L) / (pi dz / L)]^2, with the dz -> 0 limit equal to 1.
Visibility visibility_from_geometry(double dz, double fringe_l);

/// Conditional probability of the D1' and D2'-perp coincidence among gated
/// events for the unequal-superposition arrangement (central splitter with
/// r = r_x/t_x, preselection analyzers at pi/2 and 0):
///   (cos t1p cos t2p + r sin t1p sin t2p)^2 / (1 + r^2).
double eberhard_prob(double theta_1p, double theta_2p, double r);

}  // namespace spincorr::analytic
