#include <cmath>

#include "doctest.h"
#include "spincorr/fock.hpp"
#include "spincorr/optics.hpp"
#include "spincorr/rng.hpp"

using namespace spincorr;

namespace {

double dist_prob(const std::map<DetectionPattern, double>& dist,
                 const DetectionPattern& p) {
    auto it = dist.find(p);
    return it == dist.end() ? 0.0 : it->second;
}

DetectorLayout port_layout(const FockState& s) {
    DetectorLayout layout;
    for (const auto& m : s.modes()) layout[m] = m.port;
    return layout;
}

}  // namespace

TEST_CASE("tensor product of two singlets yields the four-term pair state") {
    const FockState s = tensor_product(make_singlet("1p", "1"), make_singlet("2p", "2"));
    CHECK(s.term_count() == 4);
    CHECK(s.photon_number() == 4);
    CHECK(s.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& [occ, amp] : s.terms())
        CHECK(std::abs(std::abs(amp) - 0.5) < 1e-12);
    // Sign structure: the x,x / y,y prime combinations carry +1/2.
    const FockState a = make_singlet("1p", "1");
    CHECK(a.amplitude({1, 0, 0, 1}).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(a.amplitude({0, 1, 1, 0}).real() == doctest::Approx(-1.0 / std::sqrt(2.0)));
}

TEST_CASE("tensor product rejects overlapping modes and is identity on vacuum") {
    const FockState s = make_singlet("1", "2");
    CHECK_THROWS_AS(tensor_product(s, make_singlet("2", "3")), std::invalid_argument);
    const FockState v = FockState::vacuum({{"aux", Axis::X}});
    const FockState prod = tensor_product(v, s);
    CHECK(prod.term_count() == s.term_count());
    CHECK(prod.photon_number() == 2);
    CHECK(prod.modes().size() == 5);
}

TEST_CASE("photon bound is enforced") {
    std::vector<ModeId> modes = {{"a", Axis::X}};
    std::map<OccVec, cplx> terms;
    terms[OccVec{9}] = 1.0;
    CHECK_THROWS_AS(FockState(modes, terms), std::invalid_argument);
}

TEST_CASE("same-polarization photons never exit opposite sides of a balanced splitter") {
    FockState s = FockState::single({{"1", Axis::X}, {"2", Axis::X}});
    // Missing y modes are added explicitly: the map consumes all four.
    std::vector<ModeId> modes = {{"1", Axis::X}, {"1", Axis::Y}, {"2", Axis::X}, {"2", Axis::Y}};
    std::map<OccVec, cplx> terms;
    terms[{1, 0, 1, 0}] = 1.0;
    s = FockState(modes, terms);
    const FockState out = apply_mode_map(
        s, beam_splitter_map(BeamSplitterSpec::balanced(), "1", "2", "o1", "o2", 0.0));
    CHECK(out.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
    const auto dist = detection_distribution(out, port_layout(out));
    CHECK(dist_prob(dist, {{"o1", 1}, {"o2", 1}}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(dist_prob(dist, {{"o1", 2}}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(dist_prob(dist, {{"o2", 2}}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("identity map leaves a state unchanged") {
    const FockState s = make_singlet("1", "2");
    ModeMap id;
    id.in_modes = {{"1", Axis::X}, {"1", Axis::Y}};
    id.out_modes = {{"q", Axis::X}, {"q", Axis::Y}};
    id.coeff = {{1.0, 0.0}, {0.0, 1.0}};
    const FockState out = apply_mode_map(s, id);
    CHECK(out.term_count() == s.term_count());
    CHECK(out.norm_sq() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("orthogonally polarized photons split across sides half the time") {
    std::vector<ModeId> modes = {{"1", Axis::X}, {"1", Axis::Y}, {"2", Axis::X}, {"2", Axis::Y}};
    std::map<OccVec, cplx> terms;
    terms[{1, 0, 0, 1}] = 1.0;  // x on port 1, y on port 2
    const FockState s(modes, terms);
    const FockState out = apply_mode_map(
        s, beam_splitter_map(BeamSplitterSpec::balanced(), "1", "2", "o1", "o2", 0.0));
    const auto dist = detection_distribution(out, port_layout(out));
    CHECK(dist_prob(dist, {{"o1", 1}, {"o2", 1}}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("non-unitary maps are rejected with the deviation magnitude") {
    ModeMap bad;
    bad.in_modes = {{"1", Axis::X}};
    bad.out_modes = {{"q", Axis::X}};
    bad.coeff = {{0.7}};
    const FockState s = FockState::single({{"1", Axis::X}});
    std::vector<ModeId> modes = {{"1", Axis::X}};
    std::map<OccVec, cplx> terms;
    terms[OccVec{1}] = 1.0;
    CHECK_THROWS_WITH_AS(apply_mode_map(FockState(modes, terms), bad),
                         doctest::Contains("deviation"), std::invalid_argument);
}

TEST_CASE("bosonic bookkeeping: two photons into one mode bunch with n! weight") {
    // Two x photons, one per port, through a balanced splitter: |2,0> and
    // |0,2> each at probability 1/2 requires the sqrt(2!) factors.
    std::vector<ModeId> modes = {{"1", Axis::X}, {"2", Axis::X}};
    std::map<OccVec, cplx> terms;
    terms[{1, 1}] = 1.0;
    ModeMap m;
    m.in_modes = modes;
    m.out_modes = {{"o1", Axis::X}, {"o2", Axis::X}};
    const double s = 1.0 / std::sqrt(2.0);
    const cplx i_unit(0.0, 1.0);
    m.coeff = {{s, i_unit * s}, {i_unit * s, s}};
    const FockState out = apply_mode_map(FockState(modes, terms), m);
    CHECK(std::abs(out.amplitude({2, 0})) == doctest::Approx(s).epsilon(1e-12));
    CHECK(std::abs(out.amplitude({0, 2})) == doctest::Approx(s).epsilon(1e-12));
    CHECK(std::abs(out.amplitude({1, 1})) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("detection distributions are complete for fringe-free pipelines") {
    TrialRng rng(2024, 7);
    for (int trial = 0; trial < 25; ++trial) {
        const double t10 = rng.next_double() * M_PI;
        const double t20 = rng.next_double() * M_PI;
        FockState s = make_polarized_pair(AnalyzerSetting::angle(t10),
                                          AnalyzerSetting::angle(t20));
        s = apply_mode_map(s, beam_splitter_map(BeamSplitterSpec::balanced(), "1", "2",
                                                "o1", "o2", 0.0));
        s = apply_mode_map(s, analyzer_map(AnalyzerSetting::angle(t10), "o1", "D1", "D1X"));
        s = apply_mode_map(s, analyzer_map(AnalyzerSetting::removed(), "o2", "D2", "D2X"));
        const auto dist = detection_distribution(s, port_layout(s));
        double total = 0.0;
        for (const auto& [pat, p] : dist) total += p;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }

    // Trivial layout: everything to one detector.
    const FockState s = make_singlet("1", "2");
    DetectorLayout layout;
    for (const auto& m : s.modes()) layout[m] = "all";
    const auto dist = detection_distribution(s, layout);
    CHECK(dist.size() == 1);
    CHECK(dist_prob(dist, {{"all", 2}}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fringe-carrying maps renormalize totals as coincidence rates") {
    // With a fringe phase the two-path weights at displaced point detectors
    // total 1 + cos^2(t10-t20) * (1 - cos phi) / 2; the zero-phase point is
    // the probability normalization.
    TrialRng rng(2025, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const double t10 = rng.next_double() * M_PI;
        const double t20 = rng.next_double() * M_PI;
        const double phi = rng.next_double() * 2.0 * M_PI;
        FockState s = make_polarized_pair(AnalyzerSetting::angle(t10),
                                          AnalyzerSetting::angle(t20));
        s = apply_mode_map(s, beam_splitter_map(BeamSplitterSpec::balanced(), "1", "2",
                                                "o1", "o2", phi));
        const auto dist = detection_distribution(s, port_layout(s));
        double total = 0.0;
        for (const auto& [pat, p] : dist) total += p;
        const double c = std::cos(t10 - t20);
        CHECK(total ==
              doctest::Approx(1.0 + 0.5 * c * c * (1.0 - std::cos(phi))).epsilon(1e-10));
    }
}

TEST_CASE("unassigned modes are reported by name") {
    const FockState s = make_singlet("1", "2");
    DetectorLayout layout;
    layout[{ "1", Axis::X }] = "d";
    layout[{ "1", Axis::Y }] = "d";
    layout[{ "2", Axis::X }] = "d";
    CHECK_THROWS_WITH_AS(detection_distribution(s, layout), doctest::Contains("2:y"),
                         std::invalid_argument);
}

TEST_CASE("norm is preserved by unitary maps for random states") {
    TrialRng rng(11, 3);
    for (int trial = 0; trial < 40; ++trial) {
        // Random two-photon state over two ports.
        std::vector<ModeId> modes = {{"1", Axis::X}, {"1", Axis::Y}, {"2", Axis::X}, {"2", Axis::Y}};
        std::map<OccVec, cplx> terms;
        for (const OccVec& occ : std::vector<OccVec>{{1, 0, 1, 0}, {1, 0, 0, 1},
                                                     {0, 1, 1, 0}, {0, 1, 0, 1},
                                                     {2, 0, 0, 0}, {0, 0, 0, 2}})
            terms[occ] = cplx(rng.next_double() - 0.5, rng.next_double() - 0.5);
        FockState s = FockState(modes, terms).normalized();
        const double tx = 0.3 + 0.6 * rng.next_double();
        const double ty = 0.3 + 0.6 * rng.next_double();
        const BeamSplitterSpec spec(tx, ty, std::sqrt(1.0 - tx * tx),
                                    std::sqrt(1.0 - ty * ty));
        const FockState out =
            apply_mode_map(s, beam_splitter_map(spec, "1", "2", "o1", "o2", 0.0));
        CHECK(std::abs(out.norm_sq() - 1.0) < 1e-12);
    }
}

TEST_CASE("exchange symmetry: swapping source arms leaves coincidences unchanged") {
    TrialRng rng(5, 9);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = rng.next_double() * M_PI;
        const double b = rng.next_double() * M_PI;
        auto build = [&](const std::string& pa, const std::string& pb, double ta,
                         double tb) {
            FockState s = tensor_product(make_singlet(pa + "p", pa),
                                         make_singlet(pb + "p", pb));
            s = apply_mode_map(s, beam_splitter_map(BeamSplitterSpec::balanced(), "1",
                                                    "2", "o1", "o2", 0.0));
            s = apply_mode_map(s, analyzer_map(AnalyzerSetting::angle(ta), "1p", "A", "AX"));
            s = apply_mode_map(s, analyzer_map(AnalyzerSetting::angle(tb), "2p", "B", "BX"));
            DetectorLayout layout;
            for (const auto& m : s.modes()) layout[m] = m.port;
            return detection_distribution(s, layout);
        };
        const auto d1 = build("1", "2", a, b);
        const auto d2 = build("2", "1", b, a);
        const DetectionPattern opp = {{"A", 1}, {"B", 1}, {"o1", 1}, {"o2", 1}};
        CHECK(dist_prob(d1, opp) == doctest::Approx(dist_prob(d2, opp)).epsilon(1e-12));
    }
}
