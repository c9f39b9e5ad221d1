#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kninst/errors.hpp"
#include "kninst/geometry.hpp"
#include "kninst/integrals.hpp"
#include "kninst/params.hpp"
#include "kninst/rk45.hpp"

namespace kninst {

enum class IntegratorMode { MinoFirstIntegral, CanonicalHamiltonian };

inline const char* to_string(IntegratorMode m) {
    return m == IntegratorMode::MinoFirstIntegral ? "mino" : "hamiltonian";
}

struct IntegratorOptions {
    IntegratorMode mode = IntegratorMode::MinoFirstIntegral;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    long max_steps = 500000;
    double s_span = 100.0;   // affine-parameter span; Mino mode co-integrates s
    double r_escape = 1e6;   // |r| beyond this is a DomainExit
    bool detect_turnings = true;
    // Stop bands keyed to the chart-breaking loci.
    double horizon_band = 1e-6;      // |Delta_r| < band * scale
    double singularity_band = 1e-8;  // |Sigma|  < band * scale
    double theta_horizon_band = 1e-6;
    double pole_band = 1e-6;         // theta within band of 0 or pi
};

enum class EventKind {
    RTurning,
    ThetaTurning,
    HorizonApproach,
    ThetaHorizonApproach,
    SingularityApproach,
    DomainExit
};

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::RTurning: return "RTurning";
        case EventKind::ThetaTurning: return "ThetaTurning";
        case EventKind::HorizonApproach: return "HorizonApproach";
        case EventKind::ThetaHorizonApproach: return "ThetaHorizonApproach";
        case EventKind::SingularityApproach: return "SingularityApproach";
        case EventKind::DomainExit: return "DomainExit";
    }
    return "?";
}

struct TrajectoryEvent {
    double param = 0.0;  // integration-parameter value
    EventKind kind = EventKind::RTurning;
    double r = 0.0;
    double theta = 0.0;
};

enum class TrajectoryStatus { Completed, EventStop, MaxSteps, StepFailure };

inline const char* to_string(TrajectoryStatus s) {
    switch (s) {
        case TrajectoryStatus::Completed: return "Completed";
        case TrajectoryStatus::EventStop: return "EventStop";
        case TrajectoryStatus::MaxSteps: return "MaxSteps";
        case TrajectoryStatus::StepFailure: return "StepFailure";
    }
    return "?";
}

struct TrajectorySample {
    double param = 0.0;  // lambda (Mino) or s (Hamiltonian)
    double s = 0.0;      // affine parameter
    double r = 0.0, theta = 0.0, phi = 0.0, t = 0.0;
    double vr = 0.0, vtheta = 0.0, vphi = 0.0, vt = 0.0;
    std::array<double, 4> drift{};   // relative deviation of (q, E, Lz, K)
    double constraint_resid = 0.0;   // Mino: first-integral constraint residual
};

struct TrajectoryRecord {
    IntegratorMode mode = IntegratorMode::MinoFirstIntegral;
    MotionConstants initial_constants;
    std::vector<TrajectorySample> samples;
    std::vector<TrajectoryEvent> events;
    TrajectoryStatus status = TrajectoryStatus::Completed;
    std::optional<EventKind> stop_event;
    long steps_taken = 0;
};

namespace detail {

struct RadialDeriv {
    double R = 0.0, dR = 0.0;
};

inline RadialDeriv radial_R_and_derivative(const InstantonParams& p, const MotionConstants& c,
                                           double r) {
    const double Dr = delta_r_value(p, r);
    const double dDr = -4.0 * p.L * r * r * r + 2.0 * (p.L * p.a * p.a + 1.0) * r - 2.0 * p.M;
    const double P = P_of_r(p, c, r);
    const double dP = c.q_charge * p.e / p.Xi + 2.0 * r * c.E;
    const double Xi2 = p.Xi * p.Xi;
    RadialDeriv out;
    out.R = Dr * (c.q_mass * r * r - c.K) - Xi2 * P * P;
    out.dR = dDr * (c.q_mass * r * r - c.K) + Dr * 2.0 * c.q_mass * r - 2.0 * Xi2 * P * dP;
    return out;
}

struct ColatDeriv {
    double Th = 0.0, dTh = 0.0;
};

inline ColatDeriv colat_Theta_and_derivative(const InstantonParams& p, const MotionConstants& c,
                                             double th) {
    const double S = std::sin(th), C = std::cos(th);
    const double S2 = S * S, C2 = C * C;
    const double a2 = p.a * p.a;
    const double Dth = 1.0 - p.L * a2 * C2;
    const double dDth = 2.0 * p.L * a2 * C * S;
    const double Xi2 = p.Xi * p.Xi;
    ColatDeriv out;
    // D^2/S^2 and its theta-derivative, with the Lz = 0 limit analytic.
    double DDS, dDDS;
    if (c.Lz == 0.0) {
        DDS = a2 * c.E * c.E * S2;
        dDDS = 2.0 * a2 * c.E * c.E * S * C;
    } else {
        const double D = c.Lz - p.a * c.E * S2;
        DDS = D * D / S2;
        dDDS = -2.0 * D * C * (c.Lz + p.a * c.E * S2) / (S2 * S);
    }
    out.Th = Dth * (c.K - c.q_mass * a2 * C2) - Xi2 * DDS;
    out.dTh = dDth * (c.K - c.q_mass * a2 * C2) + Dth * 2.0 * c.q_mass * a2 * C * S - Xi2 * dDDS;
    return out;
}

/// Contravariant metric components, the Maxwell covector, and their
/// r- and theta-partials, in closed form.
struct InvMetricDerivs {
    double rr = 0, thth = 0, tt = 0, tphi = 0, phiphi = 0;
    double rr_r = 0, thth_r = 0, tt_r = 0, tphi_r = 0, phiphi_r = 0;
    double rr_th = 0, thth_th = 0, tt_th = 0, tphi_th = 0, phiphi_th = 0;
    double At = 0, Aphi = 0;
    double At_r = 0, Aphi_r = 0, At_th = 0, Aphi_th = 0;
};

inline InvMetricDerivs inv_metric_derivs(const InstantonParams& p, double r, double th) {
    const double S = std::sin(th), C = std::cos(th);
    const double S2 = S * S, C2 = C * C;
    const double a = p.a, a2 = a * a, Xi2 = p.Xi * p.Xi;
    const double r2 = r * r;
    const double Sig = r2 - a2 * C2;
    const double Sig_r = 2.0 * r;
    const double Sig_th = 2.0 * a2 * C * S;
    const double Dr = (r2 - a2) * (1.0 - p.L * r2) - 2.0 * p.M * r - p.e * p.e;
    const double Dr_r = -4.0 * p.L * r * r2 + 2.0 * (p.L * a2 + 1.0) * r - 2.0 * p.M;
    const double Dth = 1.0 - p.L * a2 * C2;
    const double Dth_th = 2.0 * p.L * a2 * C * S;
    const double ra = r2 - a2;

    InvMetricDerivs g;
    const double Sig2 = Sig * Sig;
    g.rr = Dr / Sig;
    g.rr_r = (Dr_r * Sig - Dr * Sig_r) / Sig2;
    g.rr_th = -Dr * Sig_th / Sig2;
    g.thth = Dth / Sig;
    g.thth_r = -Dth * Sig_r / Sig2;
    g.thth_th = (Dth_th * Sig - Dth * Sig_th) / Sig2;

    const double G1 = ra * ra / Dr + a2 * S2 / Dth;
    const double G1_r = (4.0 * ra * r * Dr - ra * ra * Dr_r) / (Dr * Dr);
    const double G1_th = a2 * (2.0 * S * C * Dth - S2 * Dth_th) / (Dth * Dth);
    const double G2 = ra / Dr - 1.0 / Dth;
    const double G2_r = (2.0 * r * Dr - ra * Dr_r) / (Dr * Dr);
    const double G2_th = Dth_th / (Dth * Dth);
    const double G3 = a2 / Dr + 1.0 / (S2 * Dth);
    const double G3_r = -a2 * Dr_r / (Dr * Dr);
    const double G3_th = -(2.0 * S * C * Dth + S2 * Dth_th) / (S2 * S2 * Dth * Dth);

    g.tt = Xi2 * G1 / Sig;
    g.tt_r = Xi2 * (G1_r * Sig - G1 * Sig_r) / Sig2;
    g.tt_th = Xi2 * (G1_th * Sig - G1 * Sig_th) / Sig2;
    g.tphi = -a * Xi2 * G2 / Sig;
    g.tphi_r = -a * Xi2 * (G2_r * Sig - G2 * Sig_r) / Sig2;
    g.tphi_th = -a * Xi2 * (G2_th * Sig - G2 * Sig_th) / Sig2;
    g.phiphi = Xi2 * G3 / Sig;
    g.phiphi_r = Xi2 * (G3_r * Sig - G3 * Sig_r) / Sig2;
    g.phiphi_th = Xi2 * (G3_th * Sig - G3 * Sig_th) / Sig2;

    g.At = -p.e * r / (Sig * p.Xi);
    g.Aphi = p.e * r * a * S2 / (Sig * p.Xi);
    const double r2aC = r2 + a2 * C2;  // = 2 r^2 - Sigma
    g.At_r = p.e * r2aC / (Sig2 * p.Xi);
    g.At_th = 2.0 * p.e * r * a2 * C * S / (Sig2 * p.Xi);
    g.Aphi_r = -p.e * a * S2 * r2aC / (Sig2 * p.Xi);
    g.Aphi_th = 2.0 * p.e * r * a * S * C * ra / (Sig2 * p.Xi);
    return g;
}

/// Refine a dense-output zero crossing of state component `idx` within
/// (0, u_hi]; returns the located event with position filled in.
template <class Stepper>
inline TrajectoryEvent locate_component_zero(const Stepper& st, std::size_t idx, double u_hi,
                                             double x, double h, EventKind kind) {
    double lo = 0.0, hi = u_hi;
    double flo = st.interpolate(0.0)[idx];
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = st.interpolate(mid)[idx];
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    const double u = 0.5 * (lo + hi);
    const auto y = st.interpolate(u);
    return TrajectoryEvent{x + u * h, kind, y[0], y[1]};
}

/// Snap a turning event onto the exact zero of its first-integral function;
/// the dense-output location is already accurate, Newton just removes the
/// interpolation error. Kept only when the correction is small.
inline TrajectoryEvent polish_turning(const InstantonParams& p, const MotionConstants& c,
                                      TrajectoryEvent ev) {
    if (ev.kind == EventKind::RTurning) {
        double r = ev.r;
        for (int it = 0; it < 4; ++it) {
            const RadialDeriv rd = radial_R_and_derivative(p, c, r);
            if (rd.dR == 0.0) break;
            r -= rd.R / rd.dR;
        }
        if (std::abs(r - ev.r) < 1e-5 * (1.0 + std::abs(ev.r))) ev.r = r;
    } else if (ev.kind == EventKind::ThetaTurning) {
        double th = ev.theta;
        for (int it = 0; it < 4; ++it) {
            const ColatDeriv cd = colat_Theta_and_derivative(p, c, th);
            if (cd.dTh == 0.0) break;
            th -= cd.Th / cd.dTh;
        }
        if (std::abs(th - ev.theta) < 1e-5) ev.theta = th;
    }
    return ev;
}

/// Check the chart stop bands at (r, theta); nullopt when clear.
inline std::optional<EventKind> band_hit(const InstantonParams& p, const IntegratorOptions& o,
                                         double r, double th) {
    const double scale = delta_r_magnitude(p, r);
    if (std::abs(delta_r_value(p, r)) < o.horizon_band * scale) return EventKind::HorizonApproach;
    const double C = std::cos(th);
    const double sig = r * r - p.a * p.a * C * C;
    if (std::abs(sig) < o.singularity_band * std::max(1.0, r * r + p.a * p.a))
        return EventKind::SingularityApproach;
    if (std::abs(1.0 - p.L * p.a * p.a * C * C) < o.theta_horizon_band)
        return EventKind::ThetaHorizonApproach;
    if (th < o.pole_band || th > M_PI - o.pole_band) return EventKind::DomainExit;
    if (std::abs(r) > o.r_escape) return EventKind::DomainExit;
    return std::nullopt;
}

/// Scan the dense output of the last accepted step for the first stop-band
/// hit. Besides band membership at the probe points, sign changes of
/// Delta_r and Sigma between probes are caught (a fast step can tunnel
/// through a thin band) and resolved to the near edge of the band.
template <class Stepper>
inline std::optional<std::pair<EventKind, double>> scan_stop_bands(const InstantonParams& p,
                                                                   const IntegratorOptions& o,
                                                                   const Stepper& st) {
    constexpr int kProbe = 16;
    auto sigma_of = [&p](const auto& y) {
        const double C = std::cos(y[1]);
        return y[0] * y[0] - p.a * p.a * C * C;
    };
    auto locate = [&st](double lo, double hi, auto&& inside) {
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (inside(st.interpolate(mid)) ? hi : lo) = mid;
        }
        return hi;
    };
    auto y_prev = st.interpolate(0.0);
    double u_prev = 0.0;
    for (int i = 1; i <= kProbe; ++i) {
        const double u = double(i) / kProbe;
        const auto y = st.interpolate(u);
        const auto hit = band_hit(p, o, y[0], y[1]);
        if (hit) {
            const double ue = locate(u_prev, u, [&](const auto& ym) {
                return bool(band_hit(p, o, ym[0], ym[1]));
            });
            return std::make_pair(*hit, ue);
        }
        // Band tunnelling: the locus was crossed between probes.
        if ((detail::delta_r_value(p, y_prev[0]) > 0.0) !=
            (detail::delta_r_value(p, y[0]) > 0.0)) {
            const double ue = locate(u_prev, u, [&](const auto& ym) {
                const double dr = detail::delta_r_value(p, ym[0]);
                return std::abs(dr) < o.horizon_band * delta_r_magnitude(p, ym[0]) ||
                       (dr > 0.0) != (detail::delta_r_value(p, y_prev[0]) > 0.0);
            });
            return std::make_pair(EventKind::HorizonApproach, ue);
        }
        if ((sigma_of(y_prev) > 0.0) != (sigma_of(y) > 0.0)) {
            const double ue = locate(u_prev, u, [&](const auto& ym) {
                const double sig = sigma_of(ym);
                return std::abs(sig) <
                           o.singularity_band * std::max(1.0, ym[0] * ym[0] + p.a * p.a) ||
                       (sig > 0.0) != (sigma_of(y_prev) > 0.0);
            });
            return std::make_pair(EventKind::SingularityApproach, ue);
        }
        y_prev = y;
        u_prev = u;
    }
    return std::nullopt;
}

}  // namespace detail

/// Hamiltonian value H = (1/2) g^{ab} (p_a + q A_a)(p_b + q A_b).
inline double hamiltonian_value(const InstantonParams& p, double q_charge, double r, double th,
                                double p_r, double p_th, double p_t, double p_phi) {
    const auto g = detail::inv_metric_derivs(p, r, th);
    const double pit = p_t + q_charge * g.At;
    const double pip = p_phi + q_charge * g.Aphi;
    return 0.5 * (g.rr * p_r * p_r + g.thth * p_th * p_th + g.tt * pit * pit +
                  2.0 * g.tphi * pit * pip + g.phiphi * pip * pip);
}

/// Integrate in the Mino-reparameterized first-integral form:
///   d2r/dl2 = R'(r)/2,  d2th/dl2 = Theta'(th)/2,
///   dt/dl = Sigma t',   dphi/dl = Sigma phi',   ds/dl = Sigma,
/// seeded with dr/dl = Sigma vr, dth/dl = Sigma vtheta. Terminates at
/// |s| >= s_span (localized on the dense output) or at a stop event.
inline TrajectoryRecord integrate_mino(const InstantonParams& p, double q_charge,
                                       const TangentState& init, const IntegratorOptions& opts) {
    TrajectoryRecord rec;
    rec.mode = IntegratorMode::MinoFirstIntegral;
    const ConstantsResult cr = constants_from_state(p, q_charge, init);
    const MotionConstants c = cr.constants;
    rec.initial_constants = c;

    using Stepper = ode::DormandPrince<7>;
    using State = Stepper::State;

    auto rhs = [&p, c](double /*l*/, const State& y, State& dy) {
        const double r = y[0], th = y[1];
        const double S = std::sin(th);
        const double S2 = S * S;
        const double a2 = p.a * p.a;
        const double C = std::cos(th);
        const double Sig = r * r - a2 * C * C;
        const double Dr = detail::delta_r_value(p, r);
        const double Dth = 1.0 - p.L * a2 * C * C;
        const double Xi2 = p.Xi * p.Xi;
        const double P = P_of_r(p, c, r);
        const double DoverS2 = (c.Lz == 0.0) ? -p.a * c.E : (c.Lz / S2 - p.a * c.E);
        const double D = c.Lz - p.a * c.E * S2;
        dy[0] = y[4];
        dy[1] = y[5];
        dy[4] = 0.5 * detail::radial_R_and_derivative(p, c, r).dR;
        dy[5] = 0.5 * detail::colat_Theta_and_derivative(p, c, th).dTh;
        dy[3] = Xi2 * (-(r * r - a2) * P / Dr + D * p.a / Dth);
        dy[2] = Xi2 * (p.a * P / Dr + DoverS2 / Dth);
        dy[6] = Sig;
    };

    const ScalarBundle s0 = eval_scalars(p, init.r, init.theta);
    State y{init.r, init.theta, init.phi, init.t,
            s0.Sigma * init.vr, s0.Sigma * init.vtheta, 0.0};

    // Local violation of the quadrature constraints, scaled.
    auto constraint_resid = [&p, &c](const State& y_) {
        const auto rd = detail::radial_R_and_derivative(p, c, y_[0]);
        const auto cd = detail::colat_Theta_and_derivative(p, c, y_[1]);
        return std::abs(y_[4] * y_[4] - rd.R) / (1.0 + std::abs(rd.R)) +
               std::abs(y_[5] * y_[5] - cd.Th) / (1.0 + std::abs(cd.Th));
    };
    // Projection onto the first-integral manifold: the magnitudes of dr/dl
    // and dth/dl are pinned by R and Theta, the integrated signs are kept.
    // Off-manifold error otherwise grows exponentially on inbound legs.
    auto project = [&p, &c](State& y_) {
        const auto rd = detail::radial_R_and_derivative(p, c, y_[0]);
        if (rd.R >= 0.0) y_[4] = std::copysign(std::sqrt(rd.R), y_[4]);
        const auto cd = detail::colat_Theta_and_derivative(p, c, y_[1]);
        if (cd.Th >= 0.0) y_[5] = std::copysign(std::sqrt(cd.Th), y_[5]);
    };
    auto sample_of = [&p, &c, &cr](double x_, const State& y_, double resid) {
        TrajectorySample sm;
        sm.param = x_;
        sm.r = y_[0];
        sm.theta = y_[1];
        sm.phi = y_[2];
        sm.t = y_[3];
        sm.s = y_[6];
        const double C = std::cos(y_[1]);
        const double Sig = y_[0] * y_[0] - p.a * p.a * C * C;
        sm.vr = y_[4] / Sig;
        sm.vtheta = y_[5] / Sig;
        const CoordinateRates rates = coordinate_rates(p, c, y_[0], y_[1]);
        sm.vt = rates.t_rate;
        sm.vphi = rates.phi_rate;
        sm.constraint_resid = resid;
        TangentState ts{sm.r, sm.theta, sm.phi, sm.t, sm.vr, sm.vtheta, sm.vphi, sm.vt};
        const ConstantsResult now = constants_from_state(p, c.q_charge, ts);
        const double refs[4] = {cr.constants.q_mass, cr.constants.E, cr.constants.Lz,
                                cr.constants.K};
        const double vals[4] = {now.constants.q_mass, now.constants.E, now.constants.Lz,
                                now.constants.K};
        for (int i = 0; i < 4; ++i)
            sm.drift[i] = std::abs(vals[i] - refs[i]) / std::max(1.0, std::abs(refs[i]));
        return sm;
    };

    Stepper stepper(rhs, opts.rel_tol, opts.abs_tol);
    stepper.prime(0.0, y);
    rec.samples.push_back(sample_of(0.0, y, constraint_resid(y)));

    double h = 1e-3 * opts.s_span / std::max(1.0, std::abs(s0.Sigma));
    double x = 0.0;

    for (long step = 0; step < opts.max_steps; ++step) {
        State y1;
        const auto sr = stepper.step(x, y, h, y1);
        if (!sr.accepted) {
            h = sr.h_next;
            if (std::abs(h) < 1e-14 * (1.0 + std::abs(x))) {
                rec.status = TrajectoryStatus::StepFailure;
                return rec;
            }
            continue;
        }
        rec.steps_taken++;

        const auto stop = detail::scan_stop_bands(p, opts, stepper);
        if (stop) {
            State yf = stepper.interpolate(stop->second);
            const double resid = constraint_resid(yf);
            project(yf);
            rec.samples.push_back(sample_of(x + stop->second * h, yf, resid));
            rec.events.push_back({x + stop->second * h, stop->first, yf[0], yf[1]});
            rec.status = TrajectoryStatus::EventStop;
            rec.stop_event = stop->first;
            return rec;
        }

        if (std::abs(y1[6]) >= opts.s_span) {
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (std::abs(stepper.interpolate(mid)[6]) >= opts.s_span)
                    hi = mid;
                else
                    lo = mid;
            }
            State yf = stepper.interpolate(hi);
            const double xf = x + hi * h;
            if (opts.detect_turnings) {
                if ((y[4] > 0.0) != (yf[4] > 0.0))
                    rec.events.push_back(detail::polish_turning(
                        p, c, detail::locate_component_zero(stepper, 4, hi, x, h,
                                                            EventKind::RTurning)));
                if ((y[5] > 0.0) != (yf[5] > 0.0))
                    rec.events.push_back(detail::polish_turning(
                        p, c, detail::locate_component_zero(stepper, 5, hi, x, h,
                                                            EventKind::ThetaTurning)));
            }
            const double resid = constraint_resid(yf);
            project(yf);
            rec.samples.push_back(sample_of(xf, yf, resid));
            rec.status = TrajectoryStatus::Completed;
            return rec;
        }

        if (opts.detect_turnings) {
            if ((y[4] > 0.0) != (y1[4] > 0.0))
                rec.events.push_back(detail::polish_turning(
                    p, c, detail::locate_component_zero(stepper, 4, 1.0, x, h,
                                                        EventKind::RTurning)));
            if ((y[5] > 0.0) != (y1[5] > 0.0))
                rec.events.push_back(detail::polish_turning(
                    p, c, detail::locate_component_zero(stepper, 5, 1.0, x, h,
                                                        EventKind::ThetaTurning)));
        }

        x += h;
        const double resid = constraint_resid(y1);
        project(y1);
        y = y1;
        stepper.reseed(x, y);
        h = sr.h_next;
        rec.samples.push_back(sample_of(x, y, resid));
    }
    rec.status = TrajectoryStatus::MaxSteps;
    return rec;
}

/// Integrate the canonical equations of H = (1/2) g^{ab}(p_a+qA_a)(p_b+qA_b)
/// in the affine parameter s, using closed-form partials of the contravariant
/// metric and the Maxwell covector. p_t and p_phi are cyclic: their exact
/// derivatives vanish, so the integrator holds them constant to round-off.
inline TrajectoryRecord integrate_hamiltonian(const InstantonParams& p, double q_charge,
                                              const TangentState& init,
                                              const IntegratorOptions& opts) {
    TrajectoryRecord rec;
    rec.mode = IntegratorMode::CanonicalHamiltonian;
    const ConstantsResult cr = constants_from_state(p, q_charge, init);
    rec.initial_constants = cr.constants;

    using Stepper = ode::DormandPrince<8>;
    using State = Stepper::State;

    auto rhs = [&p, q_charge](double /*s*/, const State& y, State& dy) {
        const auto g = detail::inv_metric_derivs(p, y[0], y[1]);
        const double p_r = y[4], p_th = y[5], p_t = y[6], p_phi = y[7];
        const double pit = p_t + q_charge * g.At;
        const double pip = p_phi + q_charge * g.Aphi;
        dy[0] = g.rr * p_r;
        dy[1] = g.thth * p_th;
        dy[3] = g.tt * pit + g.tphi * pip;
        dy[2] = g.tphi * pit + g.phiphi * pip;
        const double dH_r = 0.5 * (g.rr_r * p_r * p_r + g.thth_r * p_th * p_th +
                                   g.tt_r * pit * pit + 2.0 * g.tphi_r * pit * pip +
                                   g.phiphi_r * pip * pip) +
                            (g.tt * pit + g.tphi * pip) * q_charge * g.At_r +
                            (g.tphi * pit + g.phiphi * pip) * q_charge * g.Aphi_r;
        const double dH_th = 0.5 * (g.rr_th * p_r * p_r + g.thth_th * p_th * p_th +
                                    g.tt_th * pit * pit + 2.0 * g.tphi_th * pit * pip +
                                    g.phiphi_th * pip * pip) +
                             (g.tt * pit + g.tphi * pip) * q_charge * g.At_th +
                             (g.tphi * pit + g.phiphi * pip) * q_charge * g.Aphi_th;
        dy[4] = -dH_r;
        dy[5] = -dH_th;
        dy[6] = 0.0;
        dy[7] = 0.0;
    };

    const MetricBundle m0 = metric_covariant(p, init.r, init.theta);
    const PotentialBundle A0 = maxwell_potential(p, init.r, init.theta);
    State y{init.r,
            init.theta,
            init.phi,
            init.t,
            m0.g_rr * init.vr,
            m0.g_thth * init.vtheta,
            m0.g_tt * init.vt + m0.g_tphi * init.vphi - q_charge * A0.A_t,
            m0.g_tphi * init.vt + m0.g_phiphi * init.vphi - q_charge * A0.A_phi};

    auto sample_of = [&p, &cr, q_charge](double x_, const State& y_) {
        TrajectorySample sm;
        sm.param = x_;
        sm.s = x_;
        sm.r = y_[0];
        sm.theta = y_[1];
        sm.phi = y_[2];
        sm.t = y_[3];
        const auto g = detail::inv_metric_derivs(p, y_[0], y_[1]);
        const double pit = y_[6] + q_charge * g.At;
        const double pip = y_[7] + q_charge * g.Aphi;
        sm.vr = g.rr * y_[4];
        sm.vtheta = g.thth * y_[5];
        sm.vt = g.tt * pit + g.tphi * pip;
        sm.vphi = g.tphi * pit + g.phiphi * pip;
        TangentState ts{sm.r, sm.theta, sm.phi, sm.t, sm.vr, sm.vtheta, sm.vphi, sm.vt};
        const ConstantsResult now = constants_from_state(p, q_charge, ts);
        const double refs[4] = {cr.constants.q_mass, cr.constants.E, cr.constants.Lz,
                                cr.constants.K};
        const double vals[4] = {now.constants.q_mass, now.constants.E, now.constants.Lz,
                                now.constants.K};
        for (int i = 0; i < 4; ++i)
            sm.drift[i] = std::abs(vals[i] - refs[i]) / std::max(1.0, std::abs(refs[i]));
        return sm;
    };

    Stepper stepper(rhs, opts.rel_tol, opts.abs_tol);
    stepper.prime(0.0, y);
    rec.samples.push_back(sample_of(0.0, y));

    double h = 1e-3 * opts.s_span;
    double x = 0.0;

    for (long step = 0; step < opts.max_steps; ++step) {
        bool final_step = false;
        if (x + h >= opts.s_span) {
            h = opts.s_span - x;
            final_step = true;
        }
        State y1;
        const auto sr = stepper.step(x, y, h, y1);
        if (!sr.accepted) {
            h = sr.h_next;
            if (std::abs(h) < 1e-14 * (1.0 + std::abs(x))) {
                rec.status = TrajectoryStatus::StepFailure;
                return rec;
            }
            continue;
        }
        rec.steps_taken++;

        const auto stop = detail::scan_stop_bands(p, opts, stepper);
        if (stop) {
            const State yf = stepper.interpolate(stop->second);
            rec.samples.push_back(sample_of(x + stop->second * h, yf));
            rec.events.push_back({x + stop->second * h, stop->first, yf[0], yf[1]});
            rec.status = TrajectoryStatus::EventStop;
            rec.stop_event = stop->first;
            return rec;
        }

        if (opts.detect_turnings) {
            if ((y[4] > 0.0) != (y1[4] > 0.0))
                rec.events.push_back(detail::polish_turning(
                    p, rec.initial_constants, detail::locate_component_zero(stepper, 4, 1.0, x, h,
                                                        EventKind::RTurning)));
            if ((y[5] > 0.0) != (y1[5] > 0.0))
                rec.events.push_back(detail::polish_turning(
                    p, rec.initial_constants, detail::locate_component_zero(stepper, 5, 1.0, x, h,
                                                        EventKind::ThetaTurning)));
        }

        x += h;
        y = y1;
        rec.samples.push_back(sample_of(x, y));
        if (final_step) {
            rec.status = TrajectoryStatus::Completed;
            return rec;
        }
        h = sr.h_next;
    }
    rec.status = TrajectoryStatus::MaxSteps;
    return rec;
}

inline TrajectoryRecord integrate(const InstantonParams& p, double q_charge,
                                  const TangentState& init, const IntegratorOptions& opts) {
    return opts.mode == IntegratorMode::MinoFirstIntegral
               ? integrate_mino(p, q_charge, init, opts)
               : integrate_hamiltonian(p, q_charge, init, opts);
}

/// Final state of a record as a TangentState (velocities in d/ds form).
inline TangentState final_state(const TrajectoryRecord& rec) {
    const TrajectorySample& sm = rec.samples.back();
    return TangentState{sm.r, sm.theta, sm.phi, sm.t, sm.vr, sm.vtheta, sm.vphi, sm.vt};
}

/// Velocity reversal for forward-backward checks. The reversed curve
/// satisfies the same equation of motion only with the charge coupling
/// negated (the A-coupling force is odd in the velocity), so callers must
/// integrate the reversed state with -q_charge.
inline TangentState reversed(const TangentState& st) {
    TangentState r = st;
    r.vr = -r.vr;
    r.vtheta = -r.vtheta;
    r.vphi = -r.vphi;
    r.vt = -r.vt;
    return r;
}

/// Post-hoc annotation pass: re-derive events from the recorded samples by
/// sign changes of vr, vtheta (turnings) and of the chart functions between
/// consecutive samples, refined on a linear interpolation of the path.
inline std::vector<TrajectoryEvent> event_scan(const TrajectoryRecord& rec,
                                               const InstantonParams& p) {
    std::vector<TrajectoryEvent> out;
    const auto& s = rec.samples;
    auto refine = [&](std::size_t i, EventKind kind, auto&& f) {
        double lo = s[i].param, hi = s[i + 1].param;
        double flo = f(s[i]);
        const TrajectorySample &a = s[i], &b = s[i + 1];
        auto at = [&](double param) {
            const double w = (param - a.param) / (b.param - a.param);
            TrajectorySample m;
            m.param = param;
            m.r = a.r + w * (b.r - a.r);
            m.theta = a.theta + w * (b.theta - a.theta);
            m.vr = a.vr + w * (b.vr - a.vr);
            m.vtheta = a.vtheta + w * (b.vtheta - a.vtheta);
            return m;
        };
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f(at(mid));
            if ((fm > 0.0) == (flo > 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        const TrajectorySample m = at(0.5 * (lo + hi));
        return TrajectoryEvent{m.param, kind, m.r, m.theta};
    };
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if ((s[i].vr > 0.0) != (s[i + 1].vr > 0.0))
            out.push_back(refine(i, EventKind::RTurning,
                                 [](const TrajectorySample& x) { return x.vr; }));
        if ((s[i].vtheta > 0.0) != (s[i + 1].vtheta > 0.0))
            out.push_back(refine(i, EventKind::ThetaTurning,
                                 [](const TrajectorySample& x) { return x.vtheta; }));
        auto dr = [&p](const TrajectorySample& x) { return detail::delta_r_value(p, x.r); };
        if ((dr(s[i]) > 0.0) != (dr(s[i + 1]) > 0.0))
            out.push_back(refine(i, EventKind::HorizonApproach, dr));
        auto sig = [&p](const TrajectorySample& x) {
            const double C = std::cos(x.theta);
            return x.r * x.r - p.a * p.a * C * C;
        };
        if ((sig(s[i]) > 0.0) != (sig(s[i + 1]) > 0.0))
            out.push_back(refine(i, EventKind::SingularityApproach, sig));
        auto dth = [&p](const TrajectorySample& x) {
            const double C = std::cos(x.theta);
            return 1.0 - p.L * p.a * p.a * C * C;
        };
        if ((dth(s[i]) > 0.0) != (dth(s[i + 1]) > 0.0))
            out.push_back(refine(i, EventKind::ThetaHorizonApproach, dth));
    }
    // Band stops never produce a sign change, so carry them over from the
    // in-flight event list.
    for (const auto& ev : rec.events)
        if (ev.kind != EventKind::RTurning && ev.kind != EventKind::ThetaTurning)
            out.push_back(ev);
    std::sort(out.begin(), out.end(),
              [](const TrajectoryEvent& a, const TrajectoryEvent& b) { return a.param < b.param; });
    return out;
}

}  // namespace kninst
