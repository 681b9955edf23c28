#include "spincorr/bell.hpp"

#include <cmath>
#include <stdexcept>

namespace spincorr::bell {

namespace {

constexpr double kRefineStop = 1e-6;

double joint(const PairProb& p, double a, double b) {
    return p(AnalyzerSetting::angle(a), AnalyzerSetting::angle(b));
}

double single_left(const PairProb& p, double a) {
    return p(AnalyzerSetting::angle(a), AnalyzerSetting::removed());
}

double single_right(const PairProb& p, double b) {
    return p(AnalyzerSetting::removed(), AnalyzerSetting::angle(b));
}

double evaluate_s(const PairProb& p, const AngleQuadruple& q) {
    return joint(p, q.a, q.b) - joint(p, q.a, q.b_alt) +
           joint(p, q.a_alt, q.b_alt) + joint(p, q.a_alt, q.b) -
           single_left(p, q.a_alt) - single_right(p, q.b);
}

/// Coordinate descent with step halving, maximizing S.
AngleQuadruple refine_quadruple(const PairProb& p, AngleQuadruple q,
                                double step) {
    double best = evaluate_s(p, q);
    while (step > kRefineStop) {
        bool improved = false;
        for (int coord = 0; coord < 4; ++coord) {
            double* v = coord == 0   ? &q.a
                        : coord == 1 ? &q.a_alt
                        : coord == 2 ? &q.b
                                     : &q.b_alt;
            for (double delta : {step, -step}) {
                const double saved = *v;
                *v = normalize_angle(saved + delta);
                const double s = evaluate_s(p, q);
                if (s > best) {
                    best = s;
                    improved = true;
                } else {
                    *v = saved;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return q;
}

}  // namespace

AngleQuadruple::AngleQuadruple(double a_, double a_alt_, double b_, double b_alt_)
    : a(normalize_angle(a_)),
      a_alt(normalize_angle(a_alt_)),
      b(normalize_angle(b_)),
      b_alt(normalize_angle(b_alt_)) {}

BellResult ch_statistic(const PairProb& p, const AngleQuadruple& q) {
    BellResult r;
    r.quadruple = q;
    r.terms = {joint(p, q.a, q.b),         joint(p, q.a, q.b_alt),
               joint(p, q.a_alt, q.b_alt), joint(p, q.a_alt, q.b),
               single_left(p, q.a_alt),    single_right(p, q.b)};
    r.s = r.terms[0] - r.terms[1] + r.terms[2] + r.terms[3] - r.terms[4] -
          r.terms[5];
    return r;
}

BellResult optimize_angles(const PairProb& p, double grid_step_rad, bool refine,
                           bool covariant) {
    if (!(grid_step_rad > 0.0))
        throw std::invalid_argument("grid step must be positive");
    const int n = std::max(1, static_cast<int>(std::lround(M_PI / grid_step_rad)));
    const double step = M_PI / n;

    AngleQuadruple best_q;
    double best_s = -std::numeric_limits<double>::infinity();

    if (covariant) {
        // P(a,b) = J(a-b); tabulate over one period and search the three
        // free differences x = a-b, y = a-b', z = a'-b (then a'-b' = z+y-x).
        std::vector<double> table(n);
        for (int k = 0; k < n; ++k)
            table[k] = joint(p, 0.0, normalize_angle(-k * step));
        const double singles =
            single_left(p, 0.0) + single_right(p, 0.0);
        for (int x = 0; x < n; ++x) {
            for (int y = 0; y < n; ++y) {
                for (int z = 0; z < n; ++z) {
                    const int w = ((z + y - x) % n + n) % n;
                    const double s =
                        table[x] - table[y] + table[w] + table[z] - singles;
                    if (s > best_s) {
                        best_s = s;
                        best_q = AngleQuadruple(0.0, z * step - x * step,
                                                -x * step, -y * step);
                    }
                }
            }
        }
    } else {
        if (n > 120)
            throw std::invalid_argument(
                "full four-angle search needs a grid step of 1.5 degrees or coarser");
        for (int ia = 0; ia < n; ++ia)
            for (int iaa = 0; iaa < n; ++iaa)
                for (int ib = 0; ib < n; ++ib)
                    for (int ibb = 0; ibb < n; ++ibb) {
                        const AngleQuadruple q(ia * step, iaa * step, ib * step,
                                               ibb * step);
                        const double s = evaluate_s(p, q);
                        if (s > best_s) {
                            best_s = s;
                            best_q = q;
                        }
                    }
    }

    if (refine) best_q = refine_quadruple(p, best_q, step * 0.5);
    return ch_statistic(p, best_q);
}

const char* to_string(VisibilityConvention c) {
    return c == VisibilityConvention::Fringe ? "fringe" : "cos2";
}

PairProb ideal_singlet_predictor() {
    return visibility_predictor(1.0, VisibilityConvention::Fringe);
}

PairProb visibility_predictor(double v, VisibilityConvention convention) {
    analytic::Visibility checked(v);
    return [v = checked.v, convention](const AnalyzerSetting& a,
                                       const AnalyzerSetting& b) {
        if (a.is_removed() && b.is_removed())
            throw std::invalid_argument("at most one side may be removed");
        if (a.is_removed() || b.is_removed()) return 0.5;
        const double d = a.radians() - b.radians();
        if (convention == VisibilityConvention::Fringe)
            return 0.25 * (1.0 - v * std::cos(2.0 * d));
        const double c = std::cos(d);
        return 0.5 * (1.0 - v * c * c);
    };
}

double efficiency_threshold_paper(const analytic::Visibility& v) {
    if (!(v.v > 0.0))
        throw std::invalid_argument("threshold undefined at zero visibility");
    return 2.0 / (1.0 + v.v * std::sqrt(2.0));
}

ThresholdResult efficiency_threshold_model(const PairProb& p,
                                           double grid_step_rad, bool covariant) {
    ThresholdResult result;
    result.at_unit_efficiency = optimize_angles(p, grid_step_rad, true, covariant);
    const BellResult& b = result.at_unit_efficiency;
    const double t_joint = b.terms[0] - b.terms[1] + b.terms[2] + b.terms[3];
    const double t_singles = b.terms[4] + b.terms[5];

    // S(eta) = eta^2 * joints - eta * singles turns positive above the root
    // singles/joints only when the joint combination is positive at all; a
    // root above 1 means no violation at physical efficiencies but is still
    // reported for comparison against the closed form.
    if (t_joint <= 0.0 || t_singles <= 0.0) return result;
    auto s_of_eta = [&](double eta) {
        return eta * eta * t_joint - eta * t_singles;
    };
    double lo = 1e-9, hi = 1.0;
    while (s_of_eta(hi) <= 0.0) {
        hi *= 2.0;
        if (hi > 64.0) return result;
    }
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        (s_of_eta(mid) > 0.0 ? hi : lo) = mid;
    }
    result.eta_min = 0.5 * (lo + hi);
    return result;
}

std::vector<EberhardRow> eberhard_scan(const std::vector<double>& r_values,
                                       const analytic::Visibility& v,
                                       double grid_step_rad) {
    std::vector<EberhardRow> rows;
    const int n = std::max(2, static_cast<int>(std::lround(M_PI / grid_step_rad)));
    const double step = M_PI / n;

    for (double r : r_values) {
        if (!(r >= 0.0) || !std::isfinite(r))
            throw std::invalid_argument("superposition ratio must be finite and >= 0");
        const double norm = 1.0 + r * r;

        // Preselected r-state probabilities: joints on the aligned prime
        // channels, singles as the accepted-ensemble marginals; visibility
        // degrades the interference cross term.
        auto joint_rv = [r, norm, vv = v.v](double a, double b) {
            const double ca = std::cos(a), sa = std::sin(a);
            const double cb = std::cos(b), sb = std::sin(b);
            const double direct = ca * sb, exchanged = sa * cb;
            return (direct * direct + r * r * exchanged * exchanged -
                    2.0 * vv * r * direct * exchanged) /
                   norm;
        };
        auto single_1 = [r, norm](double a) {
            const double ca = std::cos(a), sa = std::sin(a);
            return (ca * ca + r * r * sa * sa) / norm;
        };
        auto single_2 = [r, norm](double b) {
            const double cb = std::cos(b), sb = std::sin(b);
            return (sb * sb + r * r * cb * cb) / norm;
        };

        PairProb prob = [&](const AnalyzerSetting& a, const AnalyzerSetting& b) {
            if (a.is_removed() && b.is_removed())
                throw std::invalid_argument("at most one side may be removed");
            if (b.is_removed()) return single_1(a.radians());
            if (a.is_removed()) return single_2(b.radians());
            return joint_rv(a.radians(), b.radians());
        };

        // Tables over the angle grid.
        std::vector<std::vector<double>> jt(n, std::vector<double>(n));
        std::vector<double> s1(n), s2(n);
        for (int i = 0; i < n; ++i) {
            s1[i] = single_1(i * step);
            s2[i] = single_2(i * step);
            for (int k = 0; k < n; ++k) jt[i][k] = joint_rv(i * step, k * step);
        }
        // For each (a, a'): the b' maximizing J(a',b') - J(a,b').
        std::vector<std::vector<double>> gain(n, std::vector<double>(n));
        std::vector<std::vector<int>> gain_arg(n, std::vector<int>(n));
        for (int ia = 0; ia < n; ++ia) {
            for (int iaa = 0; iaa < n; ++iaa) {
                double g = -1e300;
                int arg = 0;
                for (int k = 0; k < n; ++k) {
                    const double c = jt[iaa][k] - jt[ia][k];
                    if (c > g) {
                        g = c;
                        arg = k;
                    }
                }
                gain[ia][iaa] = g;
                gain_arg[ia][iaa] = arg;
            }
        }

        double best_ratio = 1e300, best_s = -1e300;
        AngleQuadruple ratio_q, s_q;
        for (int ia = 0; ia < n; ++ia) {
            for (int iaa = 0; iaa < n; ++iaa) {
                for (int ib = 0; ib < n; ++ib) {
                    const double t_joint =
                        jt[ia][ib] + jt[iaa][ib] + gain[ia][iaa];
                    const double t_singles = s1[iaa] + s2[ib];
                    const double s = t_joint - t_singles;
                    const int ibb = gain_arg[ia][iaa];
                    if (s > best_s) {
                        best_s = s;
                        s_q = AngleQuadruple(ia * step, iaa * step, ib * step,
                                             ibb * step);
                    }
                    if (t_joint > 1e-12) {
                        const double ratio = t_singles / t_joint;
                        if (ratio < best_ratio) {
                            best_ratio = ratio;
                            ratio_q = AngleQuadruple(ia * step, iaa * step,
                                                     ib * step, ibb * step);
                        }
                    }
                }
            }
        }

        // Refine the ratio minimum in the continuum.
        auto ratio_of = [&](const AngleQuadruple& q) {
            const double t_joint = joint_rv(q.a, q.b) - joint_rv(q.a, q.b_alt) +
                                   joint_rv(q.a_alt, q.b_alt) +
                                   joint_rv(q.a_alt, q.b);
            if (t_joint <= 1e-12) return 1e300;
            return (single_1(q.a_alt) + single_2(q.b)) / t_joint;
        };
        double rstep = step * 0.5;
        double cur = ratio_of(ratio_q);
        while (rstep > kRefineStop) {
            bool improved = false;
            for (int coord = 0; coord < 4; ++coord) {
                double* vv = coord == 0   ? &ratio_q.a
                             : coord == 1 ? &ratio_q.a_alt
                             : coord == 2 ? &ratio_q.b
                                          : &ratio_q.b_alt;
                for (double delta : {rstep, -rstep}) {
                    const double saved = *vv;
                    *vv = normalize_angle(saved + delta);
                    const double c = ratio_of(ratio_q);
                    if (c < cur) {
                        cur = c;
                        improved = true;
                    } else {
                        *vv = saved;
                    }
                }
            }
            if (!improved) rstep *= 0.5;
        }

        EberhardRow row;
        row.r = r;
        row.t_x_sq = 1.0 / norm;
        row.s_max = ch_statistic(prob, refine_quadruple(prob, s_q, step * 0.5)).s;
        row.eta_min = cur;
        row.quadruple = ratio_q;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace spincorr::bell
