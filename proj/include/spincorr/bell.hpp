// CH-inequality evaluation over preselected coincidence probabilities,
// angle optimization, detector-efficiency thresholds, and the
// unequal-superposition efficiency scan.
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "spincorr/analytic.hpp"
#include "spincorr/optics.hpp"

namespace spincorr::bell {

/// Joint/single coincidence probability P(a, b); a Removed argument denotes
/// the singles term of that side. Works for closed-form predictors and for
/// tally-backed estimators alike.
using PairProb =
    std::function<double(const AnalyzerSetting&, const AnalyzerSetting&)>;

/// The two analyzer orientations per side entering the CH combination
/// (a, a_alt on the D1' side; b, b_alt on the D2' side), radians in [0, pi).
struct AngleQuadruple {
    double a = 0.0;
    double a_alt = 0.0;
    double b = 0.0;
    double b_alt = 0.0;

    AngleQuadruple() = default;
    AngleQuadruple(double a_, double a_alt_, double b_, double b_alt_);
};

/// S = P(a,b) - P(a,b') + P(a',b') + P(a',b) - P(a',inf) - P(inf,b), with the
/// six evaluated terms retained.
struct BellResult {
    double s = 0.0;
    AngleQuadruple quadruple;
    // joint_ab, joint_ab_alt, joint_alt_alt, joint_alt_b, single_a_alt, single_b
    std::array<double, 6> terms{};

    struct Inputs {
        double v = 1.0;
        double eta = 1.0;
        double r = 1.0;
    } inputs;
};

BellResult ch_statistic(const PairProb& p, const AngleQuadruple& q);

/// Exhaustive grid search for the maximal S, followed by optional local
/// refinement (coordinate descent with step halving down to 1e-6 rad).
/// With `covariant` set the search runs over the three free angle
/// differences (valid when P depends on orientation differences only and
/// its singles are orientation-free); ties resolve to the first maximum in
/// grid order.
BellResult optimize_angles(const PairProb& p, double grid_step_rad,
                           bool refine = true, bool covariant = true);

/// Fringe-contrast conventions for visibility-degraded predictors: the
/// 1/4*(1 - v cos 2d) fringe form underlying the quoted efficiency
/// thresholds, and the 1/2*(1 - v cos^2 d) form of the visibility-corrected
/// coincidence probability. They agree at v = 1 and differ below it; both
/// are provided and every threshold is labeled with its convention.
enum class VisibilityConvention { Fringe, CosSquared };

const char* to_string(VisibilityConvention c);

/// Ideal preselected-singlet predictor: joints (1/2) sin^2(a-b), singles 1/2.
PairProb ideal_singlet_predictor();

/// Visibility-degraded predictor under the given convention; singles 1/2.
PairProb visibility_predictor(double v, VisibilityConvention convention);

/// Closed-form threshold: the inequality can only be violated when
/// eta * (1 + v * sqrt(2)) > 2, i.e. eta_min = 2 / (1 + v sqrt(2)).
double efficiency_threshold_paper(const analytic::Visibility& v);

struct ThresholdResult {
    /// Efficiency above which S turns positive at the optimized angles. A
    /// value above 1 means no violation at physical efficiencies; empty means
    /// the joint combination never outweighs the singles at any efficiency.
    std::optional<double> eta_min;
    BellResult at_unit_efficiency;
};

/// Numerical threshold: scales joints by eta^2 and singles by eta
/// (independent detectors), optimizes angles, and bisects S(eta) = 0 to
/// 1e-6. Requires the optimal quadruple to be efficiency-independent, which
/// holds for predictors with orientation-free singles.
ThresholdResult efficiency_threshold_model(const PairProb& p,
                                           double grid_step_rad = M_PI / 360.0,
                                           bool covariant = true);

struct EberhardRow {
    double r = 0.0;
    double t_x_sq = 0.0;     // transmission 1 / (1 + r^2)
    double s_max = 0.0;      // CH maximum at unit efficiency
    double eta_min = 0.0;    // minimal efficiency admitting violation
    AngleQuadruple quadruple;  // ratio-optimal angles
};

/// Efficiency threshold of the unequal-superposition protocol per splitter
/// ratio r = r_x/t_x: minimizes the singles-to-joints ratio over analyzer
/// quadruples of the preselected r-state probabilities.
std::vector<EberhardRow> eberhard_scan(const std::vector<double>& r_values,
                                       const analytic::Visibility& v,
                                       double grid_step_rad = M_PI / 360.0);

}  // namespace spincorr::bell
