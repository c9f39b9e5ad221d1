#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "kninst/errors.hpp"
#include "kninst/geometry.hpp"
#include "kninst/params.hpp"

namespace kninst {

/// First integrals of a geodesic. Rest mass and test-particle charge are
/// both conventionally written "q"; they are kept strictly apart here as
/// q_mass and q_charge.
struct MotionConstants {
    double q_mass = 0.0;   // 2H = <gamma', gamma'>; sign varies with signature
    double E = 0.0;        // -p_t
    double Lz = 0.0;       // p_phi
    double K = 0.0;        // Carter constant
    double Q = 0.0;        // shifted form: K = Q + Xi^2 (Lz - a E)^2
    double q_charge = 0.0; // charge coupling in the Lagrangian
};

/// Position and coordinate velocities d/ds along the affine parameter.
struct TangentState {
    double r = 0.0, theta = 0.0, phi = 0.0, t = 0.0;
    double vr = 0.0, vtheta = 0.0, vphi = 0.0, vt = 0.0;
};

namespace detail {

inline double delta_r_value(const InstantonParams& p, double r) {
    return (r * r - p.a * p.a) * (1.0 - p.L * r * r) - 2.0 * p.M * r - p.e * p.e;
}

inline double delta_r_magnitude(const InstantonParams& p, double r) {
    const double r2 = r * r;
    return 1.0 + std::abs(p.L) * r2 * r2 + std::abs(2.0 * p.M * r) + p.a * p.a + p.e * p.e;
}

inline MetricBundle covariant_from_scalars(const InstantonParams& p, const ScalarBundle& s) {
    const double a = p.a, Xi2 = p.Xi * p.Xi;
    const double S2 = s.S * s.S;
    const double rr_a2 = s.r * s.r - a * a;
    MetricBundle m;
    m.g_rr = s.Sigma / s.Delta_r;
    m.g_thth = s.Sigma / s.Delta_theta;
    const double den = Xi2 * s.Sigma;
    m.g_tt = (S2 * s.Delta_theta * a * a + s.Delta_r) / den;
    m.g_tphi = a * S2 * (rr_a2 * s.Delta_theta - s.Delta_r) / den;
    m.g_phiphi = S2 * (rr_a2 * rr_a2 * s.Delta_theta + a * a * S2 * s.Delta_r) / den;
    m.det_tphi = m.g_tt * m.g_phiphi - m.g_tphi * m.g_tphi;
    return m;
}

}  // namespace detail

/// P(r) = q_c e r / Xi + a Lz + (r^2 - a^2) E; equals -<gamma', V>.
inline double P_of_r(const InstantonParams& p, const MotionConstants& c, double r) {
    return c.q_charge * p.e * r / p.Xi + p.a * c.Lz + (r * r - p.a * p.a) * c.E;
}

/// D(theta) = Lz - a E sin^2(theta); equals <gamma', W>.
inline double D_of_theta(const InstantonParams& p, const MotionConstants& c, double theta) {
    const double S = std::sin(theta);
    return c.Lz - p.a * c.E * S * S;
}

/// Radial first-integral function R(r) = Sigma^2 r'^2
///                                     = Delta_r (q r^2 - K) - Xi^2 P^2.
inline double radial_R(const InstantonParams& p, const MotionConstants& c, double r) {
    const double Dr = detail::delta_r_value(p, r);
    const double P = P_of_r(p, c, r);
    return Dr * (c.q_mass * r * r - c.K) - p.Xi * p.Xi * P * P;
}

/// Colatitude first-integral function
/// Theta(theta) = Delta_theta (K - q a^2 C^2) - Xi^2 D^2 / S^2.
/// At a pole this diverges unless Lz = 0, in which case the analytic limit
/// (the D^2/S^2 term = a^2 E^2 S^2 -> 0) is returned.
inline double colat_Theta(const InstantonParams& p, const MotionConstants& c, double theta) {
    const double S = std::sin(theta), C = std::cos(theta);
    const double S2 = S * S, C2 = C * C;
    const double Dth = 1.0 - p.L * p.a * p.a * C2;
    const double base = Dth * (c.K - c.q_mass * p.a * p.a * C2);
    if (S2 < 1e-300) {
        if (c.Lz != 0.0)
            throw PoleEvaluation("colat_Theta: divergent D^2/S^2 at pole with Lz != 0");
        return base;
    }
    const double D = D_of_theta(p, c, theta);
    return base - p.Xi * p.Xi * D * D / S2;
}

struct CoordinateRates {
    double t_rate = 0.0;
    double phi_rate = 0.0;
};

/// t' and phi' from the first-integral equations
///   t'   = (Xi^2/Sigma) ( -(r^2-a^2) P / Dr + a D / Dth )
///   phi' = (Xi^2/Sigma) (  a P / Dr + D / (S^2 Dth) ).
/// Diverges at horizons; flagged as ChartFailure rather than clamped.
inline CoordinateRates coordinate_rates(const InstantonParams& p, const MotionConstants& c,
                                        double r, double theta) {
    const ScalarBundle s = eval_scalars(p, r, theta);
    detail::require_chart(p, s, "coordinate_rates");
    const double P = P_of_r(p, c, r);
    const double D = D_of_theta(p, c, theta);
    const double Xi2 = p.Xi * p.Xi;
    CoordinateRates out;
    out.t_rate = Xi2 / s.Sigma *
                 (-(r * r - p.a * p.a) * P / s.Delta_r + D * p.a / s.Delta_theta);
    out.phi_rate = Xi2 / s.Sigma * (p.a * P / s.Delta_r + D / (s.S * s.S * s.Delta_theta));
    return out;
}

/// Result of computing first integrals from a tangent state. K is taken
/// from the radial quadrature unless Delta_r is near zero, in which case
/// the colatitude quadrature is used; both are reported when computable.
struct ConstantsResult {
    MotionConstants constants;
    std::optional<double> K_radial;
    std::optional<double> K_colat;
    std::optional<double> dual_rel_discrepancy;
};

inline ConstantsResult constants_from_state(const InstantonParams& p, double q_charge,
                                            const TangentState& st) {
    const ScalarBundle s = eval_scalars(p, st.r, st.theta);
    if (s.pole != Pole::None) throw ChartFailure("constants_from_state: coordinate pole");
    if (std::abs(s.Sigma) < kEpsChart * chart_scale(st.r))
        throw ChartFailure("constants_from_state: Sigma ~ 0");
    const double horizon_tol = 1e-8 * detail::delta_r_magnitude(p, st.r);
    const bool have_r = std::abs(s.Delta_r) >= horizon_tol;
    const bool have_th = std::abs(s.Delta_theta) >= 1e-8;
    if (!have_r && !have_th)
        throw BothHorizons("constants_from_state: Delta_r and Delta_theta both ~ 0");
    const MetricBundle m = detail::covariant_from_scalars(p, s);
    const PotentialBundle A = maxwell_potential(p, st.r, st.theta);

    MotionConstants c;
    c.q_charge = q_charge;
    const double p_t = m.g_tt * st.vt + m.g_tphi * st.vphi - q_charge * A.A_t;
    const double p_phi = m.g_tphi * st.vt + m.g_phiphi * st.vphi - q_charge * A.A_phi;
    c.E = -p_t;
    c.Lz = p_phi;
    c.q_mass = m.g_rr * st.vr * st.vr + m.g_thth * st.vtheta * st.vtheta +
               m.g_tt * st.vt * st.vt + 2.0 * m.g_tphi * st.vt * st.vphi +
               m.g_phiphi * st.vphi * st.vphi;

    const double P = P_of_r(p, c, st.r);
    const double D = D_of_theta(p, c, st.theta);
    const double Xi2 = p.Xi * p.Xi;
    const double Sig2 = s.Sigma * s.Sigma;
    const double S2 = s.S * s.S;

    ConstantsResult out;
    if (have_r)
        out.K_radial = c.q_mass * st.r * st.r -
                       (Sig2 * st.vr * st.vr + Xi2 * P * P) / s.Delta_r;
    if (have_th)
        out.K_colat = c.q_mass * p.a * p.a * s.C * s.C +
                      (Sig2 * st.vtheta * st.vtheta + Xi2 * D * D / S2) / s.Delta_theta;
    c.K = out.K_radial ? *out.K_radial : *out.K_colat;
    if (out.K_radial && out.K_colat) {
        const double scale = std::max({1.0, std::abs(*out.K_radial), std::abs(*out.K_colat)});
        out.dual_rel_discrepancy = std::abs(*out.K_radial - *out.K_colat) / scale;
    }
    const double la = c.Lz - p.a * c.E;
    c.Q = c.K - Xi2 * la * la;
    out.constants = c;
    return out;
}

/// Residuals of the Hamilton-Jacobi separation at a state, evaluated with
/// canonical momenta: |H_r + H_theta - 2 Sigma H| and |K - (q U_r - H_r)|,
/// both relative.
struct SeparationReport {
    double H = 0.0;       // Hamiltonian via the contravariant metric
    double H_r = 0.0;     // p_r^2 Dr + (Xi^2/Dr) P^2
    double H_theta = 0.0; // p_th^2 Dth + (Xi^2/(S^2 Dth)) D^2
    double resid_split = 0.0;
    double resid_carter = 0.0;
};

inline SeparationReport separation_check(const InstantonParams& p, double q_charge,
                                         const TangentState& st) {
    const ScalarBundle s = eval_scalars(p, st.r, st.theta);
    detail::require_chart(p, s, "separation_check");
    const ConstantsResult cr = constants_from_state(p, q_charge, st);
    const MotionConstants& c = cr.constants;
    const MetricBundle m = metric_contravariant(p, st.r, st.theta);
    const PotentialBundle A = maxwell_potential(p, st.r, st.theta);

    const double p_r = m.g_rr * st.vr;
    const double p_th = m.g_thth * st.vtheta;
    const double p_t = -c.E;
    const double p_phi = c.Lz;
    const double pi_t = p_t + q_charge * A.A_t;
    const double pi_phi = p_phi + q_charge * A.A_phi;

    SeparationReport rep;
    rep.H = 0.5 * (m.inv_rr * p_r * p_r + m.inv_thth * p_th * p_th + m.inv_tt * pi_t * pi_t +
                   2.0 * m.inv_tphi * pi_t * pi_phi + m.inv_phiphi * pi_phi * pi_phi);

    const double Xi2 = p.Xi * p.Xi;
    const double P = q_charge * p.e * st.r / p.Xi + p.a * p_phi - (st.r * st.r - p.a * p.a) * p_t;
    const double D = p_phi + p.a * s.S * s.S * p_t;
    rep.H_r = p_r * p_r * s.Delta_r + Xi2 * P * P / s.Delta_r;
    rep.H_theta = p_th * p_th * s.Delta_theta + Xi2 * D * D / (s.S * s.S * s.Delta_theta);

    const double two_sigma_H = 2.0 * s.Sigma * rep.H;
    const double scale1 =
        std::max({1.0, std::abs(rep.H_r), std::abs(rep.H_theta), std::abs(two_sigma_H)});
    rep.resid_split = std::abs(rep.H_r + rep.H_theta - two_sigma_H) / scale1;

    const double k_from_sep = c.q_mass * st.r * st.r - rep.H_r;
    const double scale2 = std::max({1.0, std::abs(c.K), std::abs(k_from_sep)});
    rep.resid_carter = std::abs(c.K - k_from_sep) / scale2;
    return rep;
}

/// Admissibility of radius r for the given constants: R(r) >= 0. The value
/// q r^2 - K equals Sigma <gamma'_Pi, gamma'_Pi>.
struct Admissibility {
    bool admissible = false;
    double gamma_pi_norm_scaled = 0.0;
};

inline Admissibility admissibility(const InstantonParams& p, const MotionConstants& c, double r) {
    Admissibility ad;
    ad.gamma_pi_norm_scaled = c.q_mass * r * r - c.K;
    ad.admissible = radial_R(p, c, r) >= 0.0;
    return ad;
}

}  // namespace kninst
