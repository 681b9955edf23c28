#include "spincorr/analytic.hpp"

#include <array>
#include <stdexcept>

namespace spincorr::analytic {

namespace {

constexpr double kHalfPi = M_PI / 2.0;

/// Expands Removed slots into both orthogonal channels and sums `f` over the
/// resulting angle tuples.
template <std::size_t N, typename F>
double sum_channels(const std::array<const AnalyzerSetting*, N>& settings, F&& f) {
    std::array<double, N> angles{};
    double total = 0.0;
    std::size_t removed_idx[N];
    std::size_t n_removed = 0;
    for (std::size_t i = 0; i < N; ++i) {
        if (settings[i]->is_removed())
            removed_idx[n_removed++] = i;
        else
            angles[i] = settings[i]->radians();
    }
    for (std::size_t mask = 0; mask < (std::size_t{1} << n_removed); ++mask) {
        for (std::size_t k = 0; k < n_removed; ++k)
            angles[removed_idx[k]] = (mask >> k & 1) ? kHalfPi : 0.0;
        total += f(angles);
    }
    return total;
}

}  // namespace

Visibility::Visibility(double value) : v(value) {
    if (!(value >= 0.0 && value <= 1.0))
        throw std::invalid_argument("visibility must lie in [0,1]");
}

double s_coeff(double s_x, double s_y, double theta_i, double theta_j) {
    return s_x * std::cos(theta_i) * std::cos(theta_j) +
           s_y * std::sin(theta_i) * std::sin(theta_j);
}

double q_coeff(double q_x, double q_y, double theta_i, double theta_j) {
    return q_x * std::sin(theta_i) * std::cos(theta_j) -
           q_y * std::cos(theta_i) * std::sin(theta_j);
}

InterferenceTerms pair_terms(const BeamSplitterSpec& spec, double theta_10,
                             double theta_20, double theta_1, double theta_2,
                             double phi) {
    InterferenceTerms t;
    t.a = s_coeff(spec.t_x, spec.t_y, theta_1, theta_10) *
          s_coeff(spec.t_x, spec.t_y, theta_2, theta_20);
    t.b = s_coeff(spec.r_x, spec.r_y, theta_1, theta_20) *
          s_coeff(spec.r_x, spec.r_y, theta_2, theta_10);
    t.phi = phi;
    return t;
}

InterferenceTerms quad_terms(const BeamSplitterSpec& spec, double theta_1p,
                             double theta_2p, double theta_1, double theta_2,
                             double phi) {
    InterferenceTerms t;
    t.a = q_coeff(spec.t_x, spec.t_y, theta_1p, theta_1) *
          q_coeff(spec.t_x, spec.t_y, theta_2p, theta_2);
    t.b = q_coeff(spec.r_x, spec.r_y, theta_1p, theta_2) *
          q_coeff(spec.r_x, spec.r_y, theta_2p, theta_1);
    t.phi = phi;
    return t;
}

double prob2(const AnalyzerSetting& theta_10, const AnalyzerSetting& theta_20,
             const AnalyzerSetting& theta_1, const AnalyzerSetting& theta_2,
             const BeamSplitterSpec& spec, double phi) {
    std::array<const AnalyzerSetting*, 4> s = {&theta_10, &theta_20, &theta_1,
                                               &theta_2};
    return sum_channels(s, [&](const std::array<double, 4>& a) {
        InterferenceTerms t = pair_terms(spec, a[0], a[1], a[2], a[3], phi);
        return t.a * t.a + t.b * t.b - 2.0 * t.a * t.b * std::cos(phi);
    });
}

double prob2_same_side(double theta_10, double theta_20) {
    const double c = std::cos(theta_10 - theta_20);
    return 0.5 * (1.0 + c * c);
}

double prob2_unpolarized_out(double theta_10, double theta_20, double /*theta_1*/) {
    const double s = std::sin(theta_10 - theta_20);
    return 0.25 * s * s;
}

double prob4(const AnalyzerSetting& theta_1p, const AnalyzerSetting& theta_2p,
             const AnalyzerSetting& theta_1, const AnalyzerSetting& theta_2,
             const BeamSplitterSpec& spec, double phi, const Visibility& vis) {
    std::array<const AnalyzerSetting*, 4> s = {&theta_1p, &theta_2p, &theta_1,
                                               &theta_2};
    return sum_channels(s, [&](const std::array<double, 4>& a) {
        InterferenceTerms t = quad_terms(spec, a[0], a[1], a[2], a[3], phi);
        return 0.25 * (t.a * t.a + t.b * t.b -
                       2.0 * vis.v * t.a * t.b * std::cos(phi));
    });
}

double prob4_one_arm(double theta_1p, double theta_2p, double theta_1,
                     double theta_2) {
    const double m = std::cos(theta_1p - theta_1) * std::cos(theta_2p - theta_2) +
                     std::cos(theta_1p - theta_2) * std::cos(theta_2p - theta_1);
    return m * m / 16.0;
}

double prob4_one_arm_nopol(double theta_1p, double theta_2p) {
    const double c = std::cos(theta_1p - theta_2p);
    return (1.0 + c * c) / 8.0;
}

double prob4_triplet(double theta_1p, double theta_2p) {
    const double c = std::cos(theta_1p - theta_2p);
    return c * c / 8.0;
}

Visibility visibility_from_geometry(double dz, double fringe_l) {
    if (!(fringe_l > 0.0))
        throw std::invalid_argument("fringe spacing must be positive");
    if (dz < 0.0) throw std::invalid_argument("detector width must be non-negative");
    const double x = M_PI * dz / fringe_l;
    if (x < 1e-8) return Visibility(1.0);
    const double s = std::sin(x) / x;
    return Visibility(s * s);
}

double eberhard_prob(double theta_1p, double theta_2p, double r) {
    if (!(r >= 0.0) || !std::isfinite(r))
        throw std::invalid_argument("superposition ratio must be finite and >= 0");
    const double m = std::cos(theta_1p) * std::cos(theta_2p) +
                     r * std::sin(theta_1p) * std::sin(theta_2p);
    return m * m / (1.0 + r * r);
}

}  // namespace spincorr::analytic
