#include "spincorr/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace spincorr {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

int total_photons(const OccVec& occ) {
    return std::accumulate(occ.begin(), occ.end(), 0);
}

void check_unique_modes(const std::vector<ModeId>& modes) {
    for (std::size_t i = 0; i < modes.size(); ++i)
        for (std::size_t j = i + 1; j < modes.size(); ++j)
            if (modes[i] == modes[j])
                throw std::invalid_argument("duplicate mode " + modes[i].str());
}

}  // namespace

FockState::FockState(std::vector<ModeId> modes, std::map<OccVec, cplx> terms)
    : modes_(std::move(modes)), terms_(std::move(terms)) {
    check_unique_modes(modes_);
    for (const auto& [occ, amp] : terms_) {
        if (occ.size() != modes_.size())
            throw std::invalid_argument("occupation vector length mismatch");
        if (total_photons(occ) > kMaxPhotons)
            throw std::invalid_argument("photon number exceeds supported bound of " +
                                        std::to_string(kMaxPhotons));
    }
}

FockState FockState::single(std::vector<ModeId> occupied_modes, cplx amp) {
    check_unique_modes(occupied_modes);
    OccVec occ(occupied_modes.size(), 1);
    std::map<OccVec, cplx> terms;
    terms[occ] = amp;
    return FockState(std::move(occupied_modes), std::move(terms));
}

FockState FockState::vacuum(std::vector<ModeId> modes) {
    std::map<OccVec, cplx> terms;
    terms[OccVec(modes.size(), 0)] = 1.0;
    return FockState(std::move(modes), std::move(terms));
}

double FockState::norm_sq() const {
    double s = 0.0;
    for (const auto& [occ, amp] : terms_) s += std::norm(amp);
    return s;
}

int FockState::photon_number() const {
    if (terms_.empty()) throw std::logic_error("photon_number of empty state");
    int n = total_photons(terms_.begin()->first);
    for (const auto& [occ, amp] : terms_)
        if (total_photons(occ) != n)
            throw std::logic_error("state mixes total photon numbers");
    return n;
}

cplx FockState::amplitude(const OccVec& occ) const {
    auto it = terms_.find(occ);
    return it == terms_.end() ? cplx(0.0) : it->second;
}

FockState FockState::normalized() const {
    double n = std::sqrt(norm_sq());
    if (n < 1e-12) throw std::logic_error("cannot normalize near-zero state");
    std::map<OccVec, cplx> terms;
    for (const auto& [occ, amp] : terms_)
        if (std::abs(amp) / n >= kAmplitudePruneTol) terms[occ] = amp / n;
    return FockState(modes_, std::move(terms));
}

FockState FockState::pruned() const {
    std::map<OccVec, cplx> terms;
    for (const auto& [occ, amp] : terms_)
        if (std::abs(amp) >= kAmplitudePruneTol) terms[occ] = amp;
    return FockState(modes_, std::move(terms));
}

FockState tensor_product(const FockState& a, const FockState& b) {
    for (const auto& ma : a.modes())
        for (const auto& mb : b.modes())
            if (ma == mb)
                throw std::invalid_argument("tensor_product: mode " + ma.str() +
                                            " appears in both factors");
    std::vector<ModeId> modes = a.modes();
    modes.insert(modes.end(), b.modes().begin(), b.modes().end());

    std::map<OccVec, cplx> terms;
    for (const auto& [oa, aa] : a.terms()) {
        for (const auto& [ob, ab] : b.terms()) {
            if (total_photons(oa) + total_photons(ob) > kMaxPhotons)
                throw std::invalid_argument(
                    "tensor_product: photon number exceeds supported bound");
            OccVec occ = oa;
            occ.insert(occ.end(), ob.begin(), ob.end());
            terms[occ] = aa * ab;
        }
    }
    return FockState(std::move(modes), std::move(terms)).pruned();
}

double ModeMap::unitarity_deviation() const {
    const std::size_t nin = in_modes.size();
    const std::size_t nout = out_modes.size();
    double dev_sq = 0.0;
    for (std::size_t i = 0; i < nin; ++i) {
        for (std::size_t j = 0; j < nin; ++j) {
            cplx g = 0.0;
            for (std::size_t k = 0; k < nout; ++k)
                g += std::conj(coeff[k][i]) * coeff[k][j];
            if (i == j) g -= 1.0;
            dev_sq += std::norm(g);
        }
    }
    return std::sqrt(dev_sq);
}

cplx ModeMap::entry(int out, int in) const {
    cplx c = coeff[out][in];
    if (fringe_phase != 0.0)
        for (const auto& [fo, fi] : fringe_entries)
            if (fo == out && fi == in) return c * std::polar(1.0, fringe_phase);
    return c;
}

ModeMap compose(const ModeMap& a, const ModeMap& b) {
    if (a.has_fringe() || b.has_fringe())
        throw std::invalid_argument("compose: fringe-carrying maps do not compose");
    if (b.in_modes != a.out_modes)
        throw std::invalid_argument("compose: mode lists do not chain");
    ModeMap m;
    m.in_modes = a.in_modes;
    m.out_modes = b.out_modes;
    m.coeff.assign(b.out_modes.size(), std::vector<cplx>(a.in_modes.size(), 0.0));
    for (std::size_t k = 0; k < b.out_modes.size(); ++k)
        for (std::size_t i = 0; i < a.in_modes.size(); ++i)
            for (std::size_t j = 0; j < a.out_modes.size(); ++j)
                m.coeff[k][i] += b.coeff[k][j] * a.coeff[j][i];
    return m;
}

FockState apply_mode_map(const FockState& state, const ModeMap& map, double tol) {
    const std::size_t nin = map.in_modes.size();
    const std::size_t nout = map.out_modes.size();
    if (map.coeff.size() != nout)
        throw std::invalid_argument("apply_mode_map: coefficient row count mismatch");
    for (const auto& row : map.coeff)
        if (row.size() != nin)
            throw std::invalid_argument("apply_mode_map: coefficient column count mismatch");

    double dev = map.unitarity_deviation();
    if (dev > tol) {
        std::ostringstream os;
        os << "apply_mode_map: non-unitary map, deviation " << dev;
        throw std::invalid_argument(os.str());
    }

    // Index of each input mode within the state; every in-mode must exist.
    std::vector<int> in_pos(nin);
    std::vector<bool> consumed(state.modes().size(), false);
    for (std::size_t i = 0; i < nin; ++i) {
        auto it = std::find(state.modes().begin(), state.modes().end(), map.in_modes[i]);
        if (it == state.modes().end())
            throw std::invalid_argument("apply_mode_map: state lacks input mode " +
                                        map.in_modes[i].str());
        in_pos[i] = static_cast<int>(it - state.modes().begin());
        consumed[in_pos[i]] = true;
    }

    // Output mode list: passthrough modes in original order, then map outputs.
    std::vector<ModeId> out_modes;
    std::vector<int> pass_pos;
    for (std::size_t k = 0; k < state.modes().size(); ++k) {
        if (!consumed[k]) {
            out_modes.push_back(state.modes()[k]);
            pass_pos.push_back(static_cast<int>(k));
        }
    }
    const std::size_t map_out_base = out_modes.size();
    for (const auto& m : map.out_modes) {
        if (std::find(out_modes.begin(), out_modes.end(), m) != out_modes.end())
            throw std::invalid_argument("apply_mode_map: output mode " + m.str() +
                                        " collides with a passthrough mode");
        out_modes.push_back(m);
    }

    std::map<OccVec, cplx> result;
    for (const auto& [occ, amp] : state.terms()) {
        // Seed: passthrough occupations, amplitude divided by sqrt(n!) of the
        // consumed modes (creation-operator polynomial normalization).
        OccVec seed(out_modes.size(), 0);
        for (std::size_t k = 0; k < pass_pos.size(); ++k) seed[k] = occ[pass_pos[k]];
        cplx c = amp;
        for (std::size_t i = 0; i < nin; ++i) c /= std::sqrt(factorial(occ[in_pos[i]]));

        std::map<OccVec, cplx> poly;
        poly[seed] = c;
        // Substitute each consumed photon: multiply by sum_j coeff * b_j^dag.
        for (std::size_t i = 0; i < nin; ++i) {
            for (int rep = 0; rep < occ[in_pos[i]]; ++rep) {
                std::map<OccVec, cplx> next;
                for (const auto& [mono, mc] : poly) {
                    for (std::size_t j = 0; j < nout; ++j) {
                        cplx cj = map.entry(static_cast<int>(j), static_cast<int>(i));
                        if (cj == cplx(0.0)) continue;
                        OccVec m2 = mono;
                        ++m2[map_out_base + j];
                        next[m2] += mc * cj;
                    }
                }
                poly = std::move(next);
            }
        }
        // Back to normalized kets: multiply by sqrt(m!) of map outputs.
        for (const auto& [mono, mc] : poly) {
            double f = 1.0;
            for (std::size_t j = 0; j < nout; ++j)
                f *= factorial(mono[map_out_base + j]);
            result[mono] += mc * std::sqrt(f);
        }
    }
    return FockState(std::move(out_modes), std::move(result)).pruned();
}

std::map<DetectionPattern, double> detection_distribution(
    const FockState& state, const DetectorLayout& layout) {
    std::vector<const std::string*> labels(state.modes().size());
    for (std::size_t k = 0; k < state.modes().size(); ++k) {
        auto it = layout.find(state.modes()[k]);
        if (it == layout.end())
            throw std::invalid_argument("detection_distribution: unassigned mode " +
                                        state.modes()[k].str());
        labels[k] = &it->second;
    }
    std::map<DetectionPattern, double> dist;
    for (const auto& [occ, amp] : state.terms()) {
        DetectionPattern pat;
        for (std::size_t k = 0; k < occ.size(); ++k)
            if (occ[k] > 0) pat[*labels[k]] += occ[k];
        dist[pat] += std::norm(amp);
    }
    return dist;
}

}  // namespace spincorr
