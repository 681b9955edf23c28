// Optical elements and source states: polarization-dependent beam splitters,
// birefringent analyzers, photon-pair sources, and the fourth-order phase
// models that feed the fringe term.
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include "spincorr/fock.hpp"

namespace spincorr {

/// Lossless polarization-dependent beam splitter amplitudes.
/// t_p^2 + r_p^2 = 1 per axis p; reflection carries a fixed factor i.
struct BeamSplitterSpec {
    double t_x = 0.0, t_y = 0.0, r_x = 0.0, r_y = 0.0;

    BeamSplitterSpec(double tx, double ty, double rx, double ry);

    static BeamSplitterSpec balanced();
    /// t_y = r_y = 1/sqrt(2); x-axis split chosen so that r_x/t_x == ratio.
    static BeamSplitterSpec from_reflection_ratio(double ratio);

    double reflection_ratio_x() const { return r_x / t_x; }
    bool is_balanced(double tol = 1e-12) const;
};

/// Polarizer orientation, or Removed (both channels of the port summed).
class AnalyzerSetting {
  public:
    static AnalyzerSetting angle(double radians);
    static AnalyzerSetting removed();

    bool is_removed() const { return !angle_.has_value(); }
    /// Orientation in [0, pi); throws when removed.
    double radians() const;

  private:
    std::optional<double> angle_;
};

/// Reduces any polarizer angle to [0, pi).
double normalize_angle(double radians);

/// Fourth-order phase specifications.
struct FixedPhase {
    double phi = 0.0;
};
/// Transverse-fringe geometry: detectors of width dz displaced to z1, z2
/// against fringe spacing fringe_l. Center phase 2*pi*(z2-z1)/fringe_l.
struct TransverseFringePhase {
    double z1 = 0.0;
    double z2 = 0.0;
    double fringe_l = 1.0;
    double dz = 0.0;
};
/// Frequency-beat phase |phi| = d_omega * path_diff / c.
struct BeatPhase {
    double d_omega = 0.0;
    double path_diff = 0.0;
    double c = 299792458.0;
};

using PhaseModel = std::variant<FixedPhase, TransverseFringePhase, BeatPhase>;

/// Center (deterministic) value of the fourth-order phase.
double phase_of(const PhaseModel& model);

/// Validates model invariants (fringe spacing > 0, widths >= 0, c > 0).
void validate(const PhaseModel& model);

/// The two path amplitudes of a fourth-order coincidence plus their
/// relative phase; probability = A^2 + B^2 - 2*A*B*cos(phi) (times 1/4 for
/// the four-photon arrangement).
struct InterferenceTerms {
    double a = 0.0;
    double b = 0.0;
    double phi = 0.0;
};

// --- Source states -------------------------------------------------------

/// Product of two linearly polarized single photons in ports "1" and "2".
FockState make_polarized_pair(const AnalyzerSetting& theta_10,
                              const AnalyzerSetting& theta_20);

/// (|x>_A |y>_B - |y>_A |x>_B) / sqrt(2).
FockState make_singlet(const std::string& port_a, const std::string& port_b);

/// (|x>_A |y>_B + r |y>_A |x>_B) / sqrt(1 + r^2).
FockState make_r_state(const std::string& port_a, const std::string& port_b,
                       double r);

/// make_r_state with r = 1.
FockState make_triplet_like(const std::string& port_a, const std::string& port_b);

// --- Element maps ---------------------------------------------------------

/// Beam-splitter mode map: per axis p,
///   a^dag(in_a, p) -> t_p b^dag(out_a, p) + i r_p b^dag(out_b, p)
///   a^dag(in_b, p) -> t_p b^dag(out_b, p) + i r_p e^{i phi} b^dag(out_a, p)
/// The fringe phase rides on the in_b -> out_a reflection so a two-photon
/// coincidence cross term acquires exactly cos(phi).
ModeMap beam_splitter_map(const BeamSplitterSpec& spec, const std::string& in_a,
                          const std::string& in_b, const std::string& out_a,
                          const std::string& out_b, double phi = 0.0);

/// Birefringent analyzer on `port`: two detector channels, both kept.
/// Angle(theta): channel `label` absorbs cos(theta) x + sin(theta) y and
/// channel `label_perp` absorbs -sin(theta) x + cos(theta) y.
/// Removed: both polarization modes route to the single channel `label`
/// (identity map onto two modes that the layout bins together).
ModeMap analyzer_map(const AnalyzerSetting& setting, const std::string& port,
                     const std::string& label, const std::string& label_perp);

}  // namespace spincorr
