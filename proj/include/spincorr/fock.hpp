// Exact few-photon Fock-space engine: states over (port, polarization axis)
// modes, linear mode maps with bosonic bookkeeping, and Born-rule detection
// distributions. Serves as the ground truth the closed-form layer is checked
// against.
#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace spincorr {

using cplx = std::complex<double>;

/// Polarization axis of a mode.
enum class Axis : std::uint8_t { X, Y };

inline const char* to_string(Axis a) { return a == Axis::X ? "x" : "y"; }

/// One optical mode: a spatial port label plus a polarization axis.
struct ModeId {
    std::string port;
    Axis axis = Axis::X;

    friend bool operator==(const ModeId& a, const ModeId& b) {
        return a.port == b.port && a.axis == b.axis;
    }
    friend bool operator<(const ModeId& a, const ModeId& b) {
        if (a.port != b.port) return a.port < b.port;
        return a.axis < b.axis;
    }
    std::string str() const { return port + ":" + to_string(axis); }
};

/// Occupation numbers, one entry per mode of the owning state.
using OccVec = std::vector<std::uint8_t>;

/// Photons per build are small by construction; larger inputs are rejected.
inline constexpr int kMaxPhotons = 8;

/// Amplitudes below this magnitude are dropped during normalization.
inline constexpr double kAmplitudePruneTol = 1e-15;

/// Complex-amplitude superposition over occupation vectors of an ordered
/// mode list. Immutable once built; all operations return new states.
class FockState {
  public:
    FockState() = default;
    FockState(std::vector<ModeId> modes, std::map<OccVec, cplx> terms);

    /// Single-term state with one photon in each listed mode.
    static FockState single(std::vector<ModeId> occupied_modes, cplx amp = 1.0);
    /// Vacuum over an explicit (possibly empty) mode list.
    static FockState vacuum(std::vector<ModeId> modes = {});

    const std::vector<ModeId>& modes() const { return modes_; }
    const std::map<OccVec, cplx>& terms() const { return terms_; }

    std::size_t term_count() const { return terms_.size(); }
    double norm_sq() const;

    /// Total photon number, which must be uniform across terms ( throws
    /// otherwise). Source constructors guarantee uniformity.
    int photon_number() const;

    cplx amplitude(const OccVec& occ) const;

    /// Rescales so that norm_sq() == 1. Throws on (near-)zero states.
    FockState normalized() const;

    /// Drops |amp| < kAmplitudePruneTol terms.
    FockState pruned() const;

  private:
    std::vector<ModeId> modes_;
    std::map<OccVec, cplx> terms_;
};

/// Product state of two states on disjoint mode sets.
FockState tensor_product(const FockState& a, const FockState& b);

/// Linear map from input-mode creation operators to complex combinations of
/// output-mode creation operators. Modes of a state not listed as inputs
/// pass through unchanged.
///
/// The base matrix must be unitary (lossless optics). A fourth-order fringe
/// phase may additionally be declared on a single matrix entry: it models the
/// transverse displacement of a point detector, which lies outside the
/// unitary mode algebra (a lone lossless splitter cannot produce a fringe, as
/// unitarity forces the two-path phase difference to zero). Norm preservation
/// is only guaranteed when the fringe phase is zero; with a fringe the
/// resulting weights are the coincidence rates at the displaced detector
/// positions, normalized so the zero-phase point reproduces probabilities.
struct ModeMap {
    std::vector<ModeId> in_modes;
    std::vector<ModeId> out_modes;
    /// coeff[j][i]: coefficient of out_modes[j] in the image of in_modes[i].
    std::vector<std::vector<cplx>> coeff;
    /// Optional fringe phase applied multiplicatively to the listed
    /// (out, in) entries (one propagation direction, all its axes).
    std::vector<std::pair<int, int>> fringe_entries;
    double fringe_phase = 0.0;

    bool has_fringe() const { return !fringe_entries.empty() && fringe_phase != 0.0; }

    /// Frobenius deviation of coeff'*coeff from identity (base matrix,
    /// fringe excluded).
    double unitarity_deviation() const;

    /// Effective coefficient including the fringe phase.
    cplx entry(int out, int in) const;
};

/// Composes b after a (apply a first). Defined for fringe-free maps on
/// matching mode lists.
ModeMap compose(const ModeMap& a, const ModeMap& b);

/// Substitutes creation operators per the map and re-expands, applying
/// bosonic sqrt(n!) factors for multiply-occupied modes. The base matrix
/// must be unitary within `tol`.
FockState apply_mode_map(const FockState& state, const ModeMap& map,
                         double tol = 1e-9);

/// One measurement outcome: photons delivered per detector label.
using DetectionPattern = std::map<std::string, int>;

/// Assignment of every mode to a detector label. Modes sharing a label are
/// binned together (their occupation numbers add; distinct occupation
/// vectors contribute incoherently).
using DetectorLayout = std::map<ModeId, std::string>;

/// Born-rule outcome distribution of a state under a detector layout.
std::map<DetectionPattern, double> detection_distribution(
    const FockState& state, const DetectorLayout& layout);

}  // namespace spincorr
