#pragma once

#include <algorithm>
#include <cmath>

#include "kninst/errors.hpp"
#include "kninst/params.hpp"

namespace kninst {

enum class Pole { None, North, South };

/// Pointwise metric scalars at (r, theta).
struct ScalarBundle {
    double r = 0.0;
    double theta = 0.0;
    double S = 0.0;  // sin(theta), exactly 0 at poles
    double C = 0.0;  // cos(theta), exactly +-1 at poles
    double Sigma = 0.0;        // r^2 - a^2 cos^2(theta)
    double Delta_r = 0.0;      // (r^2 - a^2)(1 - L r^2) - 2 M r - e^2
    double Delta_theta = 0.0;  // 1 - L a^2 cos^2(theta)
    Pole pole = Pole::None;
};

/// Covariant and contravariant metric components in the (r, theta, t, phi)
/// chart. The metric is block diagonal: diag(g_rr, g_thth) plus a symmetric
/// 2x2 block on (t, phi) with determinant det_tphi.
struct MetricBundle {
    double g_rr = 0.0, g_thth = 0.0;
    double g_tt = 0.0, g_tphi = 0.0, g_phiphi = 0.0;
    double inv_rr = 0.0, inv_thth = 0.0;
    double inv_tt = 0.0, inv_tphi = 0.0, inv_phiphi = 0.0;
    double det_tphi = 0.0;  // g_tt g_phiphi - g_tphi^2 = S^2 Dth Dr / Xi^4
};

enum class SignatureClass { Riemannian, Lorentzian, TwoTwo, Degenerate };

inline const char* to_string(SignatureClass c) {
    switch (c) {
        case SignatureClass::Riemannian: return "Riemannian";
        case SignatureClass::Lorentzian: return "Lorentzian";
        case SignatureClass::TwoTwo: return "TwoTwo";
        case SignatureClass::Degenerate: return "Degenerate";
    }
    return "?";
}

/// Metric eigenvalues and the signature class they imply.
///
/// lambda1 = g_thth and lambda2 = g_rr; lambda3/lambda4 are the eigenvalues
/// of the (t, phi) block. The class is read off the signs alone: definite
/// (all four of one sign) -> Riemannian, 3-1 split -> Lorentzian, 2-2 split
/// -> TwoTwo. Since det g = Sigma^2 S^2 / Xi^4 > 0 off the degeneracy loci,
/// the 3-1 split cannot occur exactly; it is kept for completeness.
struct SignatureReport {
    double lambda1 = 0.0, lambda2 = 0.0, lambda3 = 0.0, lambda4 = 0.0;
    SignatureClass cls = SignatureClass::Degenerate;
    bool inside_omega = false;  // Sigma < 0
    bool inside_cone = false;   // Delta_theta < 0
};

/// The only nonzero Maxwell covector components,
/// A = e r / (Sigma Xi) (-dt + a sin^2(theta) dphi).
struct PotentialBundle {
    double A_t = 0.0;
    double A_phi = 0.0;
};

/// Inner products of the canonical frame fields
/// V = (r^2 - a^2) d_t - a d_phi and W = d_phi + a S^2 d_t.
/// Values are the closed forms; max_rel_err is the largest relative
/// discrepancy against direct metric contraction over all six entries.
struct FrameInnerProducts {
    double v_phi = 0.0;  // <V, d_phi> = -a S^2 Delta_r / Xi^2
    double v_t = 0.0;    // <V, d_t>   =  Delta_r / Xi^2
    double w_phi = 0.0;  // <W, d_phi> =  S^2 (r^2 - a^2) Delta_theta / Xi^2
    double w_t = 0.0;    // <W, d_t>   =  a S^2 Delta_theta / Xi^2
    double v_v = 0.0;    // <V, V>     =  Delta_r Sigma / Xi^2
    double w_w = 0.0;    // <W, W>     =  S^2 Delta_theta Sigma / Xi^2
    double max_rel_err = 0.0;
};

/// Evaluate the pointwise scalars. Total on theta in [0, pi]; poles are
/// tagged exactly rather than approximated.
inline ScalarBundle eval_scalars(const InstantonParams& p, double r, double theta) {
    if (!(theta >= 0.0 && theta <= M_PI))
        throw std::invalid_argument("eval_scalars: theta outside [0, pi]");
    ScalarBundle s;
    s.r = r;
    s.theta = theta;
    if (theta == 0.0) {
        s.pole = Pole::North;
        s.S = 0.0;
        s.C = 1.0;
    } else if (theta == M_PI) {
        s.pole = Pole::South;
        s.S = 0.0;
        s.C = -1.0;
    } else {
        s.S = std::sin(theta);
        s.C = std::cos(theta);
    }
    const double a2 = p.a * p.a;
    const double C2 = s.C * s.C;
    s.Sigma = r * r - a2 * C2;
    s.Delta_r = (r * r - a2) * (1.0 - p.L * r * r) - 2.0 * p.M * r - p.e * p.e;
    s.Delta_theta = 1.0 - p.L * a2 * C2;
    return s;
}

namespace detail {

inline void require_chart(const InstantonParams& p, const ScalarBundle& s, const char* who) {
    // Each quantity is tested against its own magnitude scale; Delta_theta
    // is O(1 + |L| a^2) regardless of radius.
    const double eps = kEpsChart * chart_scale(s.r);
    const double eps_th = kEpsChart * (1.0 + std::abs(p.L) * p.a * p.a);
    if (s.pole != Pole::None)
        throw ChartFailure(std::string(who) + ": coordinate pole");
    if (std::abs(s.Delta_r) < eps)
        throw ChartFailure(std::string(who) + ": Delta_r ~ 0 (r-horizon)");
    if (std::abs(s.Delta_theta) < eps_th)
        throw ChartFailure(std::string(who) + ": Delta_theta ~ 0 (theta-horizon)");
    if (std::abs(s.Sigma) < eps)
        throw ChartFailure(std::string(who) + ": Sigma ~ 0 (singularity)");
}

}  // namespace detail

/// Covariant components from the line element
///   ds^2 = (Sigma/Dr) dr^2 + (Sigma/Dth) dth^2
///        + (S^2 Dth / (Xi^2 Sigma)) (a dt + (r^2-a^2) dphi)^2
///        + (Dr / (Xi^2 Sigma)) (dt - a S^2 dphi)^2.
inline MetricBundle metric_covariant(const InstantonParams& p, double r, double theta) {
    const ScalarBundle s = eval_scalars(p, r, theta);
    detail::require_chart(p, s, "metric_covariant");
    const double a = p.a, Xi2 = p.Xi * p.Xi;
    const double S2 = s.S * s.S;
    const double rr_a2 = r * r - a * a;
    MetricBundle m;
    m.g_rr = s.Sigma / s.Delta_r;
    m.g_thth = s.Sigma / s.Delta_theta;
    const double den = Xi2 * s.Sigma;
    m.g_tt = (S2 * s.Delta_theta * a * a + s.Delta_r) / den;
    m.g_tphi = a * S2 * (rr_a2 * s.Delta_theta - s.Delta_r) / den;
    m.g_phiphi = S2 * (rr_a2 * rr_a2 * s.Delta_theta + a * a * S2 * s.Delta_r) / den;
    // Computed from the components; the closed form S^2 Dth Dr / Xi^4 is an
    // independent identity checked by the verification suite.
    m.det_tphi = m.g_tt * m.g_phiphi - m.g_tphi * m.g_tphi;
    return m;
}

/// Contravariant components: reciprocal diagonal entries plus the 2x2
/// inverse of the (t, phi) block.
inline MetricBundle metric_contravariant(const InstantonParams& p, double r, double theta) {
    MetricBundle m = metric_covariant(p, r, theta);
    const double eps = kEpsChart * chart_scale(r);
    if (std::abs(m.det_tphi) < eps * eps)
        throw ChartFailure("metric_contravariant: det of (t,phi) block ~ 0");
    m.inv_rr = 1.0 / m.g_rr;
    m.inv_thth = 1.0 / m.g_thth;
    m.inv_tt = m.g_phiphi / m.det_tphi;
    m.inv_tphi = -m.g_tphi / m.det_tphi;
    m.inv_phiphi = m.g_tt / m.det_tphi;
    return m;
}

/// Maxwell covector A = e r / (Sigma Xi) (-dt + a S^2 dphi).
inline PotentialBundle maxwell_potential(const InstantonParams& p, double r, double theta) {
    const ScalarBundle s = eval_scalars(p, r, theta);
    const double scale = std::max(1.0, r * r + p.a * p.a);
    if (std::abs(s.Sigma) < kEpsSingularity * scale)
        throw SingularityHit("maxwell_potential: Sigma ~ 0");
    PotentialBundle A;
    const double f = p.e * r / (s.Sigma * p.Xi);
    A.A_t = -f;
    A.A_phi = f * p.a * s.S * s.S;
    return A;
}

/// Metric eigenvalues and signature class at (r, theta).
inline SignatureReport signature_at(const InstantonParams& p, double r, double theta) {
    const MetricBundle m = metric_covariant(p, r, theta);
    const ScalarBundle s = eval_scalars(p, r, theta);
    SignatureReport rep;
    rep.lambda1 = m.g_thth;
    rep.lambda2 = m.g_rr;
    const double half_tr = 0.5 * (m.g_phiphi + m.g_tt);
    const double diff = m.g_phiphi - m.g_tt;
    const double disc = std::sqrt(diff * diff + 4.0 * m.g_tphi * m.g_tphi);
    rep.lambda3 = half_tr + 0.5 * disc;
    rep.lambda4 = half_tr - 0.5 * disc;
    rep.inside_omega = s.Sigma < 0.0;
    rep.inside_cone = s.Delta_theta < 0.0;

    const double lams[4] = {rep.lambda1, rep.lambda2, rep.lambda3, rep.lambda4};
    double scale = 0.0;
    for (double l : lams) scale = std::max(scale, std::abs(l));
    int pos = 0;
    bool degenerate = scale == 0.0;
    for (double l : lams) {
        if (std::abs(l) < kEpsDegenerate * scale) degenerate = true;
        if (l > 0.0) ++pos;
    }
    if (degenerate)
        rep.cls = SignatureClass::Degenerate;
    else if (pos == 4 || pos == 0)
        rep.cls = SignatureClass::Riemannian;
    else if (pos == 2)
        rep.cls = SignatureClass::TwoTwo;
    else
        rep.cls = SignatureClass::Lorentzian;
    return rep;
}

/// The six frame inner products, closed forms cross-checked against direct
/// contraction of V and W with the covariant metric.
inline FrameInnerProducts frame_inner_products(const InstantonParams& p, double r, double theta) {
    const ScalarBundle s = eval_scalars(p, r, theta);
    const MetricBundle m = metric_covariant(p, r, theta);
    const double a = p.a, Xi2 = p.Xi * p.Xi;
    const double S2 = s.S * s.S;
    const double rr_a2 = r * r - a * a;

    FrameInnerProducts f;
    f.v_phi = -a * S2 * s.Delta_r / Xi2;
    f.v_t = s.Delta_r / Xi2;
    f.w_phi = S2 * rr_a2 * s.Delta_theta / Xi2;
    f.w_t = a * S2 * s.Delta_theta / Xi2;
    f.v_v = s.Delta_r * s.Sigma / Xi2;
    f.w_w = S2 * s.Delta_theta * s.Sigma / Xi2;

    // Contractions with V = (r^2-a^2) d_t - a d_phi, W = d_phi + a S^2 d_t.
    // Each comparison is scaled by the magnitude of the contraction's
    // operands, so cancellation does not masquerade as identity failure.
    const double c_v_phi = rr_a2 * m.g_tphi - a * m.g_phiphi;
    const double s_v_phi = std::abs(rr_a2 * m.g_tphi) + std::abs(a * m.g_phiphi);
    const double c_v_t = rr_a2 * m.g_tt - a * m.g_tphi;
    const double s_v_t = std::abs(rr_a2 * m.g_tt) + std::abs(a * m.g_tphi);
    const double c_w_phi = m.g_phiphi + a * S2 * m.g_tphi;
    const double s_w_phi = std::abs(m.g_phiphi) + std::abs(a * S2 * m.g_tphi);
    const double c_w_t = m.g_tphi + a * S2 * m.g_tt;
    const double s_w_t = std::abs(m.g_tphi) + std::abs(a * S2 * m.g_tt);
    const double c_v_v = rr_a2 * c_v_t - a * c_v_phi;
    const double s_v_v = std::abs(rr_a2 * c_v_t) + std::abs(a * c_v_phi);
    const double c_w_w = c_w_phi + a * S2 * c_w_t;
    const double s_w_w = std::abs(c_w_phi) + std::abs(a * S2 * c_w_t);

    const double triples[6][3] = {{f.v_phi, c_v_phi, s_v_phi}, {f.v_t, c_v_t, s_v_t},
                                  {f.w_phi, c_w_phi, s_w_phi}, {f.w_t, c_w_t, s_w_t},
                                  {f.v_v, c_v_v, s_v_v},       {f.w_w, c_w_w, s_w_w}};
    double err = 0.0;
    for (auto& tr : triples) {
        const double scale = std::max({1e-300, std::abs(tr[0]), tr[2]});
        err = std::max(err, std::abs(tr[0] - tr[1]) / scale);
    }
    f.max_rel_err = err;
    return f;
}

}  // namespace kninst
