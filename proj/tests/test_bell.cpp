#include <cmath>

#include "doctest.h"
#include "spincorr/bell.hpp"
#include "spincorr/rng.hpp"

using namespace spincorr;
using namespace spincorr::bell;

namespace {

constexpr double kPi = M_PI;
constexpr double kDeg = kPi / 180.0;
const double kChMax = (std::sqrt(2.0) - 1.0) / 2.0;

}  // namespace

TEST_CASE("CH statistic structure") {
    const PairProb p = ideal_singlet_predictor();
    SUBCASE("equal angles everywhere give minus one") {
        const BellResult r = ch_statistic(p, AngleQuadruple(0.3, 0.3, 0.3, 0.3));
        CHECK(r.s == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("the optimal quadruple reaches the quantum maximum") {
        const BellResult r = ch_statistic(
            p, AngleQuadruple(0.0, 135.0 * kDeg, 67.5 * kDeg, 22.5 * kDeg));
        CHECK(r.s == doctest::Approx(kChMax).epsilon(1e-12));
    }
    SUBCASE("the stored terms reassemble into S") {
        const BellResult r = ch_statistic(
            p, AngleQuadruple(0.1 * kPi, 0.7 * kPi, 0.4 * kPi, 0.9 * kPi));
        CHECK(r.s == doctest::Approx(r.terms[0] - r.terms[1] + r.terms[2] + r.terms[3] -
                                     r.terms[4] - r.terms[5])
                         .epsilon(1e-12));
    }
    SUBCASE("textbook-ordered CH angles land on minus one half") {
        // With anti-correlated joints the (0, 45, 67.5, 22.5) arrangement sits
        // at the degenerate point S = -1/2 for any sign pattern; the true
        // optimum needs the 135-degree alternate orientation.
        const BellResult r = ch_statistic(
            p, AngleQuadruple(0.0, 45.0 * kDeg, 67.5 * kDeg, 22.5 * kDeg));
        CHECK(r.s == doctest::Approx(-0.5).epsilon(1e-12));
    }
}

TEST_CASE("angle optimization finds the quantum maximum") {
    const PairProb p = ideal_singlet_predictor();
    const BellResult r = optimize_angles(p, 1.5 * kDeg, true, true);
    CHECK(r.s == doctest::Approx(kChMax).epsilon(1e-7));
    const BellResult grid_only = optimize_angles(p, 1.5 * kDeg, false, true);
    CHECK(grid_only.s <= r.s + 1e-15);
    CHECK(grid_only.s == doctest::Approx(kChMax).epsilon(1e-3));
}

TEST_CASE("optimization of a null predictor settles at the first grid point") {
    const PairProb p = [](const AnalyzerSetting& a, const AnalyzerSetting& b) {
        if (a.is_removed() || b.is_removed()) return 0.5;
        return 0.0;
    };
    const BellResult r = optimize_angles(p, 15.0 * kDeg, false, true);
    CHECK(r.s == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.quadruple.a == doctest::Approx(0.0));
    CHECK(r.quadruple.b == doctest::Approx(0.0));
}

TEST_CASE("visibility-degraded maxima") {
    SUBCASE("fringe convention scales the reachable maximum") {
        const BellResult r =
            optimize_angles(visibility_predictor(0.9, VisibilityConvention::Fringe),
                            1.5 * kDeg, true, true);
        CHECK(r.s == doctest::Approx(-0.5 + 0.9 * std::sqrt(2.0) / 2.0).epsilon(1e-6));
    }
    SUBCASE("the boundary visibility just closes the violation") {
        const BellResult r = optimize_angles(
            visibility_predictor(1.0 / std::sqrt(2.0), VisibilityConvention::Fringe),
            1.5 * kDeg, true, true);
        CHECK(r.s <= 1e-9);
        CHECK(r.s == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("the squared-cosine convention stays positive at the boundary") {
        const BellResult r = optimize_angles(
            visibility_predictor(1.0 / std::sqrt(2.0), VisibilityConvention::CosSquared),
            1.5 * kDeg, true, true);
        CHECK(r.s == doctest::Approx((std::sqrt(2.0) - 1.0) / (2.0 * std::sqrt(2.0)))
                         .epsilon(1e-6));
    }
}

TEST_CASE("closed-form efficiency threshold") {
    CHECK(efficiency_threshold_paper(analytic::Visibility(1.0)) ==
          doctest::Approx(0.82843).epsilon(1e-5));
    CHECK(efficiency_threshold_paper(analytic::Visibility(0.87)) ==
          doctest::Approx(2.0 / (1.0 + 0.87 * std::sqrt(2.0))).epsilon(1e-12));
    CHECK(efficiency_threshold_paper(analytic::Visibility(0.87)) ==
          doctest::Approx(0.89674).epsilon(1e-4));
    CHECK(efficiency_threshold_paper(analytic::Visibility(0.8)) ==
          doctest::Approx(0.93832).epsilon(1e-4));
    CHECK_THROWS_AS(efficiency_threshold_paper(analytic::Visibility(0.0)),
                    std::invalid_argument);
}

TEST_CASE("numerical threshold matches the closed form under the fringe convention") {
    for (double v : {0.7, 0.8, 0.87, 1.0}) {
        const auto res = efficiency_threshold_model(
            visibility_predictor(v, VisibilityConvention::Fringe), 1.5 * kDeg);
        REQUIRE(res.eta_min.has_value());
        CHECK(*res.eta_min ==
              doctest::Approx(efficiency_threshold_paper(analytic::Visibility(v)))
                  .epsilon(1e-5));
    }
}

TEST_CASE("numerical threshold under the squared-cosine convention") {
    const double v = 0.87;
    const auto res = efficiency_threshold_model(
        visibility_predictor(v, VisibilityConvention::CosSquared), 1.5 * kDeg);
    REQUIRE(res.eta_min.has_value());
    CHECK(*res.eta_min ==
          doctest::Approx(2.0 / (2.0 + v * (std::sqrt(2.0) - 1.0))).epsilon(1e-5));
}

TEST_CASE("sub-boundary visibility pushes the threshold beyond physical range") {
    const auto res = efficiency_threshold_model(
        visibility_predictor(0.5, VisibilityConvention::Fringe), 3.0 * kDeg);
    REQUIRE(res.eta_min.has_value());
    CHECK(*res.eta_min ==
          doctest::Approx(2.0 / (1.0 + 0.5 * std::sqrt(2.0))).epsilon(1e-5));
    CHECK(*res.eta_min > 1.0);
    CHECK(res.at_unit_efficiency.s <= 0.0);
}

TEST_CASE("product-form local predictors never violate the inequality") {
    TrialRng rng(99, 0);
    for (int trial = 0; trial < 6; ++trial) {
        const double a0 = 0.5 * rng.next_double();
        const double a1 = rng.next_double() * (1.0 - a0);
        const double pa = rng.next_double() * kPi;
        const double b0 = 0.5 * rng.next_double();
        const double b1 = rng.next_double() * (1.0 - b0);
        const double pb = rng.next_double() * kPi;
        auto g = [a0, a1, pa](double t) {
            return a0 + a1 * 0.5 * (1.0 + std::cos(2.0 * (t - pa)));
        };
        auto h = [b0, b1, pb](double t) {
            return b0 + b1 * 0.5 * (1.0 + std::cos(2.0 * (t - pb)));
        };
        const PairProb local = [g, h](const AnalyzerSetting& a, const AnalyzerSetting& b) {
            if (a.is_removed()) return h(b.radians());
            if (b.is_removed()) return g(a.radians());
            return g(a.radians()) * h(b.radians());
        };
        const BellResult r = optimize_angles(local, 6.0 * kDeg, true, false);
        CHECK(r.s <= 1e-9);
    }
}

TEST_CASE("unequal-superposition efficiency scan") {
    const std::vector<double> rs = {1.0, 0.8, 0.6, 0.45, 0.31};
    const auto rows = eberhard_scan(rs, analytic::Visibility(1.0), 2.0 * kDeg);
    REQUIRE(rows.size() == rs.size());

    CHECK(rows[0].eta_min == doctest::Approx(2.0 / (1.0 + std::sqrt(2.0))).epsilon(1e-4));
    CHECK(rows[0].t_x_sq == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rows[0].s_max == doctest::Approx(kChMax).epsilon(1e-4));

    const auto& last = rows.back();
    CHECK(last.r == doctest::Approx(0.31));
    CHECK(last.t_x_sq == doctest::Approx(0.912326).epsilon(1e-6));
    CHECK(last.eta_min < 0.72);
    CHECK(last.eta_min > 2.0 / 3.0 - 1e-6);  // the unequal-superposition floor

    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].eta_min <= rows[i - 1].eta_min + 1e-9);
}
