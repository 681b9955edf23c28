#include "spincorr/optics.hpp"

#include <stdexcept>

namespace spincorr {

BeamSplitterSpec::BeamSplitterSpec(double tx, double ty, double rx, double ry)
    : t_x(tx), t_y(ty), r_x(rx), r_y(ry) {
    auto in_range = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_range(tx) || !in_range(ty) || !in_range(rx) || !in_range(ry))
        throw std::invalid_argument("beam splitter amplitudes must lie in [0,1]");
    if (std::abs(tx * tx + rx * rx - 1.0) > 1e-9 ||
        std::abs(ty * ty + ry * ry - 1.0) > 1e-9)
        throw std::invalid_argument(
            "beam splitter is lossy: t_p^2 + r_p^2 != 1 beyond 1e-9");
}

BeamSplitterSpec BeamSplitterSpec::balanced() {
    const double s = 1.0 / std::sqrt(2.0);
    return BeamSplitterSpec(s, s, s, s);
}

BeamSplitterSpec BeamSplitterSpec::from_reflection_ratio(double ratio) {
    if (!(ratio >= 0.0) || !std::isfinite(ratio))
        throw std::invalid_argument("reflection ratio must be finite and >= 0");
    const double s = 1.0 / std::sqrt(2.0);
    const double tx = 1.0 / std::sqrt(1.0 + ratio * ratio);
    return BeamSplitterSpec(tx, s, ratio * tx, s);
}

bool BeamSplitterSpec::is_balanced(double tol) const {
    const double s = 1.0 / std::sqrt(2.0);
    return std::abs(t_x - s) <= tol && std::abs(t_y - s) <= tol &&
           std::abs(r_x - s) <= tol && std::abs(r_y - s) <= tol;
}

double normalize_angle(double radians) {
    if (!std::isfinite(radians))
        throw std::invalid_argument("analyzer angle must be finite");
    double a = std::fmod(radians, M_PI);
    if (a < 0.0) a += M_PI;
    return a;
}

AnalyzerSetting AnalyzerSetting::angle(double radians) {
    AnalyzerSetting s;
    s.angle_ = normalize_angle(radians);
    return s;
}

AnalyzerSetting AnalyzerSetting::removed() { return AnalyzerSetting{}; }

double AnalyzerSetting::radians() const {
    if (!angle_) throw std::logic_error("removed analyzer has no angle");
    return *angle_;
}

void validate(const PhaseModel& model) {
    if (const auto* f = std::get_if<TransverseFringePhase>(&model)) {
        if (!(f->fringe_l > 0.0))
            throw std::invalid_argument("fringe spacing must be positive");
        if (f->dz < 0.0)
            throw std::invalid_argument("detector width must be non-negative");
    } else if (const auto* b = std::get_if<BeatPhase>(&model)) {
        if (!(b->c > 0.0)) throw std::invalid_argument("speed of light must be positive");
    }
}

double phase_of(const PhaseModel& model) {
    validate(model);
    if (const auto* f = std::get_if<FixedPhase>(&model)) return f->phi;
    if (const auto* t = std::get_if<TransverseFringePhase>(&model))
        return 2.0 * M_PI * (t->z2 - t->z1) / t->fringe_l;
    const auto& b = std::get<BeatPhase>(model);
    return b.d_omega * b.path_diff / b.c;
}

FockState make_polarized_pair(const AnalyzerSetting& theta_10,
                              const AnalyzerSetting& theta_20) {
    if (theta_10.is_removed() || theta_20.is_removed())
        throw std::invalid_argument("polarized pair requires angle settings");
    const double c1 = std::cos(theta_10.radians()), s1 = std::sin(theta_10.radians());
    const double c2 = std::cos(theta_20.radians()), s2 = std::sin(theta_20.radians());
    std::vector<ModeId> modes = {{"1", Axis::X}, {"1", Axis::Y},
                                 {"2", Axis::X}, {"2", Axis::Y}};
    std::map<OccVec, cplx> terms;
    terms[{1, 0, 1, 0}] = c1 * c2;
    terms[{1, 0, 0, 1}] = c1 * s2;
    terms[{0, 1, 1, 0}] = s1 * c2;
    terms[{0, 1, 0, 1}] = s1 * s2;
    return FockState(std::move(modes), std::move(terms)).pruned();
}

FockState make_r_state(const std::string& port_a, const std::string& port_b,
                       double r) {
    if (port_a == port_b)
        throw std::invalid_argument("pair source ports must differ");
    if (!(r >= 0.0) || !std::isfinite(r))
        throw std::invalid_argument("superposition ratio must be finite and >= 0");
    const double n = std::sqrt(1.0 + r * r);
    std::vector<ModeId> modes = {{port_a, Axis::X}, {port_a, Axis::Y},
                                 {port_b, Axis::X}, {port_b, Axis::Y}};
    std::map<OccVec, cplx> terms;
    terms[{1, 0, 0, 1}] = 1.0 / n;
    if (r > 0.0) terms[{0, 1, 1, 0}] = r / n;
    return FockState(std::move(modes), std::move(terms));
}

FockState make_triplet_like(const std::string& port_a, const std::string& port_b) {
    return make_r_state(port_a, port_b, 1.0);
}

FockState make_singlet(const std::string& port_a, const std::string& port_b) {
    if (port_a == port_b)
        throw std::invalid_argument("singlet ports must differ");
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<ModeId> modes = {{port_a, Axis::X}, {port_a, Axis::Y},
                                 {port_b, Axis::X}, {port_b, Axis::Y}};
    std::map<OccVec, cplx> terms;
    terms[{1, 0, 0, 1}] = s;
    terms[{0, 1, 1, 0}] = -s;
    return FockState(std::move(modes), std::move(terms));
}

ModeMap beam_splitter_map(const BeamSplitterSpec& spec, const std::string& in_a,
                          const std::string& in_b, const std::string& out_a,
                          const std::string& out_b, double phi) {
    ModeMap m;
    m.in_modes = {{in_a, Axis::X}, {in_a, Axis::Y}, {in_b, Axis::X}, {in_b, Axis::Y}};
    m.out_modes = {{out_a, Axis::X}, {out_a, Axis::Y}, {out_b, Axis::X}, {out_b, Axis::Y}};
    const cplx i_unit(0.0, 1.0);
    // Rows: out_a.x, out_a.y, out_b.x, out_b.y; columns likewise for inputs.
    m.coeff = {
        {spec.t_x, 0.0, i_unit * spec.r_x, 0.0},
        {0.0, spec.t_y, 0.0, i_unit * spec.r_y},
        {i_unit * spec.r_x, 0.0, spec.t_x, 0.0},
        {0.0, i_unit * spec.r_y, 0.0, spec.t_y},
    };
    if (phi != 0.0) {
        // The in_b -> out_a reflections (both axes) carry the fringe phase.
        m.fringe_entries = {{0, 2}, {1, 3}};
        m.fringe_phase = phi;
    }
    return m;
}

ModeMap analyzer_map(const AnalyzerSetting& setting, const std::string& port,
                     const std::string& label, const std::string& label_perp) {
    ModeMap m;
    m.in_modes = {{port, Axis::X}, {port, Axis::Y}};
    if (setting.is_removed()) {
        m.out_modes = {{label, Axis::X}, {label, Axis::Y}};
        m.coeff = {{1.0, 0.0}, {0.0, 1.0}};
        return m;
    }
    const double c = std::cos(setting.radians());
    const double s = std::sin(setting.radians());
    m.out_modes = {{label, Axis::X}, {label_perp, Axis::X}};
    m.coeff = {{c, s}, {-s, c}};
    return m;
}

}  // namespace spincorr
