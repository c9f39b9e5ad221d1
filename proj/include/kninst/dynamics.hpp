#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kninst/errors.hpp"
#include "kninst/horizons.hpp"
#include "kninst/integrals.hpp"
#include "kninst/params.hpp"

namespace kninst {

inline constexpr double kThetaMargin = 1e-6;   // exclusion margin at poles/theta-horizons
inline constexpr double kThetaRootTol = 1e-10; // bisection tolerance for roots/extrema

/// chi = L (Lz - a E)^2 - E^2 (theta-independent) and
/// Psi = chi + Lz^2 / (a^2 S^2). For Lambda < 0, chi <= 0 with equality iff
/// Lz = a E and E = 0. The Lz term is omitted exactly when Lz = 0 so the
/// a = 0 limit stays finite.
struct PsiChi {
    double Psi = 0.0;
    double chi = 0.0;
};

inline PsiChi psi_chi(const InstantonParams& p, const MotionConstants& c, double theta) {
    PsiChi pc;
    const double la = c.Lz - p.a * c.E;
    pc.chi = p.L * la * la - c.E * c.E;
    if (c.Lz == 0.0) {
        pc.Psi = pc.chi;
    } else {
        const double S = std::sin(theta);
        pc.Psi = pc.chi + c.Lz * c.Lz / (p.a * p.a * S * S);
    }
    return pc;
}

namespace detail {

inline void check_potential_domain(const MotionConstants& c, double S2, double Dth) {
    if (std::abs(Dth) < 1e-12)
        throw ThetaHorizonEvaluation("potential: Delta_theta ~ 0");
    if (S2 < 1e-300 && c.Lz != 0.0)
        throw PoleEvaluation("potential: pole with Lz != 0");
}

}  // namespace detail

/// Rotational potential
///   V(theta) = a^2 C^2 [ q + (Xi^2/Dth)(L(Lz-aE)^2 + Lz^2/(a^2 S^2) - E^2) ],
/// written with the Lz^2 term as Xi^2 C^2 Lz^2 / (S^2 Dth) so a = 0 reduces
/// to Lz^2 C^2 / S^2. For Lz = 0 this is a^2 C^2 (q - Xi^3 E^2 / Dth).
inline double potential_V(const InstantonParams& p, const MotionConstants& c, double theta) {
    const double S = std::sin(theta), C = std::cos(theta);
    const double S2 = S * S, C2 = C * C;
    const double a2 = p.a * p.a;
    const double Dth = 1.0 - p.L * a2 * C2;
    detail::check_potential_domain(c, S2, Dth);
    const double Xi2 = p.Xi * p.Xi;
    const double la = c.Lz - p.a * c.E;
    const double chi = p.L * la * la - c.E * c.E;
    double v = a2 * C2 * (c.q_mass + Xi2 * chi / Dth);
    if (c.Lz != 0.0) v += Xi2 * C2 * c.Lz * c.Lz / (S2 * Dth);
    return v;
}

/// Rotational kinetic energy T = Sigma^2 theta'^2 / Delta_theta.
inline double kinetic_T(const InstantonParams& p, const MotionConstants& /*c*/, double theta,
                        double vtheta, double r) {
    const double C = std::cos(theta);
    const double a2 = p.a * p.a;
    const double Dth = 1.0 - p.L * a2 * C * C;
    if (std::abs(Dth) < 1e-12)
        throw ThetaHorizonEvaluation("kinetic_T: Delta_theta ~ 0");
    const double Sigma = r * r - a2 * C * C;
    return Sigma * Sigma * vtheta * vtheta / Dth;
}

/// Closed-form dV/dtheta:
///   -2 a^2 C S [ q + (Xi^2/Dth^2)(chi + Lz^2/(a^2 S^2)) + C^2 Xi^2 Lz^2/(Dth a^2 S^4) ],
/// with the Lz^2 pieces factored to stay finite at a = 0.
inline double potential_derivative(const InstantonParams& p, const MotionConstants& c,
                                   double theta) {
    const double S = std::sin(theta), C = std::cos(theta);
    const double S2 = S * S, C2 = C * C;
    const double a2 = p.a * p.a;
    const double Dth = 1.0 - p.L * a2 * C2;
    detail::check_potential_domain(c, S2, Dth);
    const double Xi2 = p.Xi * p.Xi;
    const double la = c.Lz - p.a * c.E;
    const double chi = p.L * la * la - c.E * c.E;
    double d = -2.0 * a2 * C * S * (c.q_mass + Xi2 * chi / (Dth * Dth));
    if (c.Lz != 0.0) {
        const double lz2 = c.Lz * c.Lz;
        d += -2.0 * Xi2 * lz2 * C / (S * Dth * Dth) - 2.0 * Xi2 * lz2 * C2 * C / (S2 * S * Dth);
    }
    return d;
}

enum class LimitKind { PlusInf, MinusInf, Finite };

struct Limit {
    LimitKind kind = LimitKind::Finite;
    double value = 0.0;
};

inline const char* to_string(LimitKind k) {
    switch (k) {
        case LimitKind::PlusInf: return "+inf";
        case LimitKind::MinusInf: return "-inf";
        case LimitKind::Finite: return "finite";
    }
    return "?";
}

enum class ExtremumKind { Min, Max };

struct Extremum {
    double theta = 0.0;
    double V = 0.0;
    ExtremumKind kind = ExtremumKind::Min;
};

struct ThetaInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Limits of V on both sides of each theta-horizon.
struct ConeLimits {
    Limit minus_inside;   // theta -> theta_- from below (inside north cone)
    Limit minus_outside;  // theta -> theta_- from above
    Limit plus_outside;   // theta -> theta_+ from below
    Limit plus_inside;    // theta -> theta_+ from above (inside south cone)
};

/// Sampled profile of V over one or more theta intervals, with refined roots
/// and extrema and the limiting behaviour at the excluded endpoints.
struct PotentialProfile {
    std::vector<std::pair<double, double>> samples;  // (theta, V)
    std::vector<double> roots;                       // ascending
    std::vector<Extremum> extrema;
    Limit pole_limit_north;  // theta -> 0+
    Limit pole_limit_south;  // theta -> pi-
    std::optional<ConeLimits> cone_limits;
    std::vector<ThetaInterval> domains;
};

namespace detail {

/// Limit of V approaching `target` with Delta_theta -> dth_limit. The
/// dominant term of the closed form decides; evaluated, not table-driven.
inline Limit v_limit(const InstantonParams& p, const MotionConstants& c, double target,
                     bool from_above_theta) {
    // Probe just inside the domain; the sign of the diverging term is stable
    // once the excluded point is close.
    const double step = 1e-9;
    const double th = from_above_theta ? target + step : target - step;
    const double S = std::sin(th), C = std::cos(th);
    const double a2 = p.a * p.a;
    const double Dth = 1.0 - p.L * a2 * C * C;
    const bool at_pole = target < 0.5 * M_PI ? target < 1e-12 : target > M_PI - 1e-12;
    Limit lim;
    if (at_pole && c.Lz == 0.0) {
        // Finite pole value a^2 (q - Xi^2 E^2); Dth(pole) = Xi.
        lim.kind = LimitKind::Finite;
        lim.value = a2 * (c.q_mass - p.Xi * p.Xi * c.E * c.E);
        return lim;
    }
    double dominant;
    if (at_pole) {
        // Xi^2 C^2 Lz^2 / (S^2 Dth) with S^2 -> 0.
        dominant = p.Xi * p.Xi * c.Lz * c.Lz / (S * S * Dth);
    } else {
        // Theta-horizon: a^2 C^2 Xi^2 (chi + Lz-term) / Dth with Dth -> 0.
        const PsiChi pc = psi_chi(p, c, th);
        dominant = a2 * C * C * p.Xi * p.Xi * pc.Psi / Dth;
        if (c.Lz == 0.0) dominant = a2 * C * C * p.Xi * p.Xi * pc.chi / Dth;
        if (dominant == 0.0) {
            lim.kind = LimitKind::Finite;
            lim.value = potential_V(p, c, th);
            return lim;
        }
    }
    lim.kind = dominant > 0.0 ? LimitKind::PlusInf : LimitKind::MinusInf;
    return lim;
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi, double flo) {
    for (int it = 0; it < 200 && hi - lo > kThetaRootTol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Analysis intervals: (0, pi) shrunk by the pole margin and split at
/// theta-horizons (each excluded by the margin as well).
inline std::vector<ThetaInterval> default_theta_domains(const InstantonParams& p) {
    const ThetaHorizons th = theta_horizons(p);
    std::vector<ThetaInterval> out;
    if (!th.angles) {
        out.push_back({kThetaMargin, M_PI - kThetaMargin});
    } else {
        const double tm = th.angles->first, tp = th.angles->second;
        out.push_back({kThetaMargin, tm - kThetaMargin});
        out.push_back({tm + kThetaMargin, tp - kThetaMargin});
        out.push_back({tp + kThetaMargin, M_PI - kThetaMargin});
    }
    return out;
}

/// Dense sampling of V with bisection refinement of roots (sign changes of
/// V) and extrema (sign changes of dV/dtheta). The scan density doubles
/// until the root count stabilizes.
inline PotentialProfile potential_profile(const InstantonParams& p, const MotionConstants& c,
                                          std::vector<ThetaInterval> domains = {}) {
    if (domains.empty()) domains = default_theta_domains(p);
    for (const auto& d : domains)
        if (!(d.lo < d.hi)) throw DomainEmpty("potential_profile: empty theta interval");

    PotentialProfile prof;
    prof.domains = domains;

    auto fV = [&](double th) { return potential_V(p, c, th); };
    auto fdV = [&](double th) { return potential_derivative(p, c, th); };

    for (const auto& dom : domains) {
        std::vector<double> roots_prev;
        for (int n = 2048; n <= 16384; n *= 2) {
            std::vector<double> roots_now;
            const double h = (dom.hi - dom.lo) / n;
            double th0 = dom.lo, v0 = fV(th0);
            for (int i = 1; i <= n; ++i) {
                const double th1 = dom.lo + i * h;
                const double v1 = fV(th1);
                if (v0 == 0.0) {
                    // Count exact grid zeros only when isolated, so an
                    // identically vanishing potential does not flood the list.
                    if (v1 != 0.0) roots_now.push_back(th0);
                } else if ((v0 > 0.0) != (v1 > 0.0)) {
                    roots_now.push_back(detail::bisect(fV, th0, th1, v0));
                }
                th0 = th1;
                v0 = v1;
            }
            if (roots_now.size() == roots_prev.size() && n > 2048) {
                roots_prev = std::move(roots_now);
                break;
            }
            roots_prev = std::move(roots_now);
        }
        for (double r : roots_prev) prof.roots.push_back(r);

        // The equator is always a root (C^2 factor); the scan can miss it
        // when V does not change sign there (even-order zero).
        if (dom.lo < 0.5 * M_PI && 0.5 * M_PI < dom.hi) {
            const bool have = std::any_of(prof.roots.begin(), prof.roots.end(), [](double r) {
                return std::abs(r - 0.5 * M_PI) < 1e-9;
            });
            if (!have) prof.roots.push_back(0.5 * M_PI);
        }

        const int n_ext = 4096;
        const double h = (dom.hi - dom.lo) / n_ext;
        double th0 = dom.lo, d0 = fdV(th0);
        for (int i = 1; i <= n_ext; ++i) {
            const double th1 = dom.lo + i * h;
            const double d1 = fdV(th1);
            if ((d0 > 0.0) != (d1 > 0.0)) {
                const double the = detail::bisect(fdV, th0, th1, d0);
                Extremum ex;
                ex.theta = the;
                ex.V = fV(the);
                ex.kind = d0 < 0.0 ? ExtremumKind::Min : ExtremumKind::Max;
                prof.extrema.push_back(ex);
            }
            th0 = th1;
            d0 = d1;
        }

        const int n_samp = 256;
        for (int i = 0; i <= n_samp; ++i) {
            const double th = dom.lo + (dom.hi - dom.lo) * i / n_samp;
            prof.samples.emplace_back(th, fV(th));
        }
    }
    std::sort(prof.roots.begin(), prof.roots.end());
    std::sort(prof.extrema.begin(), prof.extrema.end(),
              [](const Extremum& x, const Extremum& y) { return x.theta < y.theta; });

    prof.pole_limit_north = detail::v_limit(p, c, 0.0, true);
    prof.pole_limit_south = detail::v_limit(p, c, M_PI, false);
    const ThetaHorizons th = theta_horizons(p);
    if (th.angles) {
        ConeLimits cl;
        cl.minus_inside = detail::v_limit(p, c, th.angles->first, false);
        cl.minus_outside = detail::v_limit(p, c, th.angles->first, true);
        cl.plus_outside = detail::v_limit(p, c, th.angles->second, false);
        cl.plus_inside = detail::v_limit(p, c, th.angles->second, true);
        prof.cone_limits = cl;
    }
    return prof;
}

enum class OrbitTag {
    EquatorialStableEquilibrium,
    EquatorialUnstableEquilibrium,
    SymmetricOscillation,
    OffEquatorWellOscillation,
    OffEquatorStableEquilibrium,
    AsymptoticToEquator,
    FullRangePoleToPole,
    PoleReaching,
    ConeConfined,
    HorizonAsymptotic,
    Forbidden
};

inline const char* to_string(OrbitTag t) {
    switch (t) {
        case OrbitTag::EquatorialStableEquilibrium: return "EquatorialStableEquilibrium";
        case OrbitTag::EquatorialUnstableEquilibrium: return "EquatorialUnstableEquilibrium";
        case OrbitTag::SymmetricOscillation: return "SymmetricOscillation";
        case OrbitTag::OffEquatorWellOscillation: return "OffEquatorWellOscillation";
        case OrbitTag::OffEquatorStableEquilibrium: return "OffEquatorStableEquilibrium";
        case OrbitTag::AsymptoticToEquator: return "AsymptoticToEquator";
        case OrbitTag::FullRangePoleToPole: return "FullRangePoleToPole";
        case OrbitTag::PoleReaching: return "PoleReaching";
        case OrbitTag::ConeConfined: return "ConeConfined";
        case OrbitTag::HorizonAsymptotic: return "HorizonAsymptotic";
        case OrbitTag::Forbidden: return "Forbidden";
    }
    return "?";
}

/// One connected component of the allowed colatitude set, with the
/// Q-versus-V comparisons that justified the tag.
struct OrbitClass {
    OrbitTag tag = OrbitTag::Forbidden;
    double theta_lo = 0.0;
    double theta_hi = 0.0;  // == theta_lo for point components
    double Q = 0.0;
    double V_min = 0.0, V_max = 0.0;  // over the analysis domain
    int root_count = 0;
    std::string matched_reference_case;
};

struct Equilibrium {
    double theta = 0.0;
    double Q_required = 0.0;  // = V(theta*)
    bool stable = false;
};

/// Zeros of dV/dtheta refined by bisection; stability from the sign of the
/// second difference; Q_required = V(theta*).
inline std::vector<Equilibrium> equilibria(const InstantonParams& p, const MotionConstants& c,
                                           std::vector<ThetaInterval> domains = {}) {
    const PotentialProfile prof = potential_profile(p, c, std::move(domains));
    std::vector<Equilibrium> out;
    for (const auto& ex : prof.extrema) {
        Equilibrium eq;
        eq.theta = ex.theta;
        eq.Q_required = ex.V;
        eq.stable = ex.kind == ExtremumKind::Min;
        out.push_back(eq);
    }
    return out;
}

namespace detail {

/// Allowed-theta indicator: motion is real iff Theta(theta) >= 0,
/// equivalently sign(Delta_theta) * (Q - V(theta)) >= 0.
inline double theta_indicator(const InstantonParams& p, const MotionConstants& c, double th) {
    return colat_Theta(p, c, th);
}

}  // namespace detail

/// Classify colatitude motion per connected component of the allowed set
/// {theta : Theta(theta) >= 0} within each analysis domain. An empty overall
/// set yields one Forbidden entry.
inline std::vector<OrbitClass> classify_motion(const InstantonParams& p, const MotionConstants& c,
                                               std::vector<ThetaInterval> domains = {}) {
    if (domains.empty()) domains = default_theta_domains(p);
    const double tie = 1e-9 * (1.0 + std::abs(c.Q));
    std::vector<OrbitClass> out;

    for (const auto& dom : domains) {
        const bool has_equator = dom.lo < 0.5 * M_PI && 0.5 * M_PI < dom.hi;
        const double mid_dth = 1.0 - p.L * p.a * p.a *
                                         std::cos(0.5 * (dom.lo + dom.hi)) *
                                         std::cos(0.5 * (dom.lo + dom.hi));
        const bool inside_cone = mid_dth < 0.0;

        // Profile statistics over this domain.
        const PotentialProfile prof = potential_profile(p, c, {dom});
        double vmin = HUGE_VAL, vmax = -HUGE_VAL;
        for (const auto& sp : prof.samples) {
            vmin = std::min(vmin, sp.second);
            vmax = std::max(vmax, sp.second);
        }
        for (const auto& ex : prof.extrema) {
            vmin = std::min(vmin, ex.V);
            vmax = std::max(vmax, ex.V);
        }

        // Scan Theta for sign structure. Edges are refined with a
        // predicate bisection so exact grid zeros cannot skew them.
        const int n = 8192;
        const double cell = (dom.hi - dom.lo) / n;
        auto fT = [&](double th) { return detail::theta_indicator(p, c, th); };
        auto edge_between = [&](double th_in, double th_out) {
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (th_in + th_out);
                (fT(mid) >= 0.0 ? th_in : th_out) = mid;
            }
            return 0.5 * (th_in + th_out);
        };
        std::vector<std::pair<double, double>> comps;  // allowed intervals
        double lo = NAN;
        double th0 = dom.lo, T0 = fT(th0);
        if (T0 >= 0.0) lo = th0;
        for (int i = 1; i <= n; ++i) {
            const double th1 = dom.lo + (dom.hi - dom.lo) * i / n;
            const double T1 = fT(th1);
            if (T0 >= 0.0 && T1 < 0.0) {
                comps.emplace_back(lo, edge_between(th0, th1));
                lo = NAN;
            } else if (T0 < 0.0 && T1 >= 0.0) {
                lo = edge_between(th1, th0);
            }
            th0 = th1;
            T0 = T1;
        }
        if (!std::isnan(lo)) comps.emplace_back(lo, dom.hi);

        // Components no wider than a few grid cells are equilibrium points
        // at this resolution.
        const double width_floor = 4.0 * cell;

        // Tie handling: Q equal to an extremal V marks an equilibrium
        // point; a wide allowed component through a maximum keeps the
        // unstable point alongside it.
        for (const auto& ex : prof.extrema) {
            if (std::abs(c.Q - ex.V) < tie) {
                const bool wide_cover = std::any_of(
                    comps.begin(), comps.end(), [&](const std::pair<double, double>& cc) {
                        return cc.first - cell <= ex.theta && ex.theta <= cc.second + cell &&
                               cc.second - cc.first > width_floor;
                    });
                OrbitClass oc;
                oc.Q = c.Q;
                oc.V_min = vmin;
                oc.V_max = vmax;
                oc.root_count = int(prof.roots.size());
                oc.theta_lo = oc.theta_hi = ex.theta;
                const bool equatorial = std::abs(ex.theta - 0.5 * M_PI) < 1e-7;
                if (ex.kind == ExtremumKind::Min) {
                    oc.tag = equatorial ? OrbitTag::EquatorialStableEquilibrium
                                        : OrbitTag::OffEquatorStableEquilibrium;
                    oc.matched_reference_case = equatorial ? "Q = 0, single-root: stable at pi/2"
                                                       : "Q = Q_min: stable at theta*";
                    if (!wide_cover) out.push_back(oc);
                } else {
                    oc.tag = equatorial ? OrbitTag::EquatorialUnstableEquilibrium
                                        : OrbitTag::HorizonAsymptotic;
                    oc.matched_reference_case =
                        equatorial ? "Q = 0, multi-root: unstable at pi/2" : "Q at local max";
                    out.push_back(oc);
                }
            }
        }

        for (const auto& cc : comps) {
            OrbitClass oc;
            oc.theta_lo = cc.first;
            oc.theta_hi = cc.second;
            oc.Q = c.Q;
            oc.V_min = vmin;
            oc.V_max = vmax;
            oc.root_count = int(prof.roots.size());
            const bool touches_lo = cc.first <= dom.lo + 2e-6;
            const bool touches_hi = cc.second >= dom.hi - 2e-6;
            const bool lo_is_pole = touches_lo && dom.lo <= kThetaMargin + 1e-12;
            const bool hi_is_pole = touches_hi && dom.hi >= M_PI - kThetaMargin - 1e-12;
            const bool lo_is_cone = touches_lo && !lo_is_pole;
            const bool hi_is_cone = touches_hi && !hi_is_pole;
            const bool contains_equator =
                has_equator && cc.first <= 0.5 * M_PI && 0.5 * M_PI <= cc.second;
            const bool point = cc.second - cc.first <= width_floor;

            if (point) {
                // Collapsed to a point at this resolution; skip when the tie
                // handling already recorded the equilibrium.
                const double mid = 0.5 * (cc.first + cc.second);
                bool dup = std::any_of(out.begin(), out.end(), [&](const OrbitClass& o) {
                    return std::abs(o.theta_lo - mid) < 2.0 * width_floor &&
                           o.theta_lo == o.theta_hi;
                });
                if (dup) continue;
                oc.theta_lo = oc.theta_hi = mid;
                const bool equatorial = std::abs(mid - 0.5 * M_PI) < 1e-6;
                oc.tag = equatorial ? OrbitTag::EquatorialStableEquilibrium
                                    : OrbitTag::OffEquatorStableEquilibrium;
                oc.matched_reference_case = "Q equals extremal V (point component)";
                out.push_back(oc);
                continue;
            }

            if (lo_is_pole && hi_is_pole) {
                oc.tag = OrbitTag::FullRangePoleToPole;
                oc.matched_reference_case = "Q >= V_max with reachable poles: full range";
            } else if (lo_is_pole || hi_is_pole) {
                oc.tag = OrbitTag::PoleReaching;
                oc.matched_reference_case = "component touches one pole";
            } else if (lo_is_cone || hi_is_cone) {
                oc.tag = inside_cone ? OrbitTag::ConeConfined : OrbitTag::HorizonAsymptotic;
                oc.matched_reference_case = inside_cone
                                            ? "inside cone, bounded by V = Q"
                                            : "approaches theta-horizon (D(theta_h) ~ 0)";
            } else if (inside_cone) {
                oc.tag = OrbitTag::ConeConfined;
                oc.matched_reference_case = "inside cone, V >= Q between bounds";
            } else if (contains_equator) {
                const bool asympt = std::abs(c.Q) < tie && prof.roots.size() >= 3;
                oc.tag = asympt ? OrbitTag::AsymptoticToEquator : OrbitTag::SymmetricOscillation;
                oc.matched_reference_case = asympt
                                            ? "Q = 0, multi-root: asymptotic approach to equator"
                                            : "Q > 0: oscillates symmetrically about pi/2";
            } else {
                oc.tag = OrbitTag::OffEquatorWellOscillation;
                oc.matched_reference_case = "Q_min < Q < 0: oscillates in an off-equator well";
            }
            out.push_back(oc);
        }
    }

    if (out.empty()) {
        OrbitClass oc;
        oc.tag = OrbitTag::Forbidden;
        oc.Q = c.Q;
        oc.matched_reference_case = "no real colatitude motion";
        out.push_back(oc);
    }
    std::sort(out.begin(), out.end(),
              [](const OrbitClass& x, const OrbitClass& y) { return x.theta_lo < y.theta_lo; });
    return out;
}

/// Signs of the lazy-particle (E = Lz = 0) rates, Eqs. of the form
///   t'   = -(r^2 - a^2) q e r Xi / (Sigma Delta_r)
///   phi' =  Xi a q e r / (Sigma Delta_r),
/// reduced to sign factors. sign_qe is the sign of q_charge * e.
struct LazySigns {
    int sign_t = 0;
    int sign_phi = 0;
};

inline LazySigns lazy_signs(const InstantonParams& p, int sign_qe, double r, double theta) {
    const ScalarBundle s = eval_scalars(p, r, theta);
    const double eps = kEpsChart * chart_scale(r);
    if (std::abs(s.Delta_r) < eps) throw ChartFailure("lazy_signs: on an r-horizon");
    if (std::abs(s.Sigma) < eps) throw ChartFailure("lazy_signs: on the singularity");
    auto sgn = [](double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); };
    LazySigns ls;
    const int common = sgn(p.Xi) * sign_qe * sgn(r) * sgn(s.Sigma) * sgn(s.Delta_r);
    ls.sign_phi = common * sgn(p.a);
    ls.sign_t = -common * sgn(r * r - p.a * p.a);
    return ls;
}

}  // namespace kninst
