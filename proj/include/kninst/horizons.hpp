#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kninst/errors.hpp"
#include "kninst/params.hpp"
#include "kninst/polyroot.hpp"

namespace kninst {

/// Ascending coefficients of Delta_r as a polynomial in r:
///   -L r^4 + (L a^2 + 1) r^2 - 2 M r - (a^2 + e^2).
inline std::vector<double> delta_r_coefficients(const InstantonParams& p) {
    return {-(p.a * p.a + p.e * p.e), -2.0 * p.M, p.L * p.a * p.a + 1.0, 0.0, -p.L};
}

inline double delta_r_at(const InstantonParams& p, double r) {
    return (r * r - p.a * p.a) * (1.0 - p.L * r * r) - 2.0 * p.M * r - p.e * p.e;
}

inline double delta_r_derivative_at(const InstantonParams& p, double r) {
    return -4.0 * p.L * r * r * r + 2.0 * (p.L * p.a * p.a + 1.0) * r - 2.0 * p.M;
}

/// Natural magnitude of Delta_r's terms at radius r; used for residual and
/// degeneracy tolerances.
inline double delta_r_scale(const InstantonParams& p, double r) {
    const double r2 = r * r;
    return 1.0 + std::abs(p.L) * r2 * r2 + std::abs(2.0 * p.M * r) + p.a * p.a + p.e * p.e;
}

/// The three sign-determining quantities of the quartic, with D3 the
/// discriminant proper. Real-root count prediction:
///   D3 < 0                          -> 2 real roots
///   D3 > 0 and D1 > 0 and D2 > 0    -> 4 real roots
///   D3 > 0 otherwise                -> 0 real roots
struct DiscriminantTriple {
    double D1 = 0.0;
    double D2 = 0.0;
    double D3 = 0.0;
    int predicted_real_count = 0;
    double d3_scale = 0.0;  // sum of |terms| of D3, for guard-band tests
};

inline DiscriminantTriple discriminants(const InstantonParams& p) {
    if (p.L == 0.0)
        throw QuarticDegenerate("discriminants: L = 0 degenerates Delta_r to a quadratic");
    const double L = p.L;
    const double P = L * p.a * p.a + 1.0;
    const double E = -(p.a * p.a + p.e * p.e);
    const double M2 = p.M * p.M;
    DiscriminantTriple d;
    d.D1 = 8.0 * L * P;
    d.D2 = 16.0 * L * L * P * E - 72.0 * L * L * M2 + 4.0 * L * P * P * P;
    const double t1 = -256.0 * L * L * L * E * E * E;
    const double t2 = -128.0 * L * L * P * P * E * E;
    const double t3 = 576.0 * L * L * P * M2 * E;
    const double t4 = -432.0 * L * L * M2 * M2;
    const double t5 = -16.0 * L * P * P * P * P * E;
    const double t6 = 16.0 * L * P * P * P * M2;
    d.D3 = t1 + t2 + t3 + t4 + t5 + t6;
    d.d3_scale = std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4) + std::abs(t5) +
                 std::abs(t6);
    if (d.D3 < 0.0)
        d.predicted_real_count = 2;
    else if (d.D3 > 0.0 && d.D1 > 0.0 && d.D2 > 0.0)
        d.predicted_real_count = 4;
    else
        d.predicted_real_count = 0;
    return d;
}

enum class RootTag { FourReal, TwoRealTwoComplex, NoReal, Degenerate, QuadraticCase };

inline const char* to_string(RootTag t) {
    switch (t) {
        case RootTag::FourReal: return "FourReal";
        case RootTag::TwoRealTwoComplex: return "TwoRealTwoComplex";
        case RootTag::NoReal: return "NoReal";
        case RootTag::Degenerate: return "Degenerate";
        case RootTag::QuadraticCase: return "QuadraticCase";
    }
    return "?";
}

struct RealRoot {
    double r = 0.0;
    int multiplicity = 1;
    double residual = 0.0;  // |Delta_r(r)| / delta_r_scale(r)
};

struct RootStructure {
    RootTag tag = RootTag::NoReal;
    std::vector<RealRoot> roots;  // ascending
};

/// Real roots of Delta_r: companion-matrix eigenvalues polished by Newton on
/// Delta_r itself. L = 0 is the explicit quadratic special case.
inline RootStructure delta_r_roots(const InstantonParams& p) {
    RootStructure rs;
    const auto coeffs = delta_r_coefficients(p);
    auto zs = poly::roots(coeffs);

    std::vector<double> reals;
    for (const auto& z : zs) {
        if (std::abs(z.imag()) <= 1e-8 * (1.0 + std::abs(z.real()))) reals.push_back(z.real());
    }
    std::sort(reals.begin(), reals.end());

    // Newton polish against Delta_r directly.
    for (double& r : reals) {
        for (int it = 0; it < 12; ++it) {
            const double f = delta_r_at(p, r);
            const double df = delta_r_derivative_at(p, r);
            if (df == 0.0) break;
            const double step = f / df;
            r -= step;
            if (std::abs(step) < 1e-14 * (1.0 + std::abs(r))) break;
        }
    }
    std::sort(reals.begin(), reals.end());

    // Cluster near-coincident roots into multiplicities.
    bool multiple = false;
    for (std::size_t i = 0; i < reals.size();) {
        std::size_t j = i + 1;
        while (j < reals.size() && std::abs(reals[j] - reals[i]) <= 1e-7 * (1.0 + std::abs(reals[i])))
            ++j;
        RealRoot rr;
        rr.r = 0.0;
        for (std::size_t k = i; k < j; ++k) rr.r += reals[k];
        rr.r /= double(j - i);
        rr.multiplicity = int(j - i);
        rr.residual = std::abs(delta_r_at(p, rr.r)) / delta_r_scale(p, rr.r);
        if (rr.multiplicity > 1) multiple = true;
        rs.roots.push_back(rr);
        i = j;
    }

    int count = 0;
    for (const auto& rr : rs.roots) count += rr.multiplicity;
    if (p.L == 0.0)
        rs.tag = RootTag::QuadraticCase;
    else if (multiple)
        rs.tag = RootTag::Degenerate;
    else if (count == 4)
        rs.tag = RootTag::FourReal;
    else if (count == 2)
        rs.tag = RootTag::TwoRealTwoComplex;
    else
        rs.tag = RootTag::NoReal;
    return rs;
}

enum class BlockLabel { AdS, I, II, III, dSMinus, dSPlus, Unlabeled };

inline const char* to_string(BlockLabel b) {
    switch (b) {
        case BlockLabel::AdS: return "AdS";
        case BlockLabel::I: return "I";
        case BlockLabel::II: return "II";
        case BlockLabel::III: return "III";
        case BlockLabel::dSMinus: return "dS-";
        case BlockLabel::dSPlus: return "dS+";
        case BlockLabel::Unlabeled: return "Unlabeled";
    }
    return "?";
}

struct Block {
    double lo = 0.0;  // -inf encoded as -HUGE_VAL
    double hi = 0.0;  // +inf encoded as +HUGE_VAL
    BlockLabel label = BlockLabel::Unlabeled;
};

struct ThetaHorizons {
    std::optional<double> a_crit;                       // sqrt(3/Lambda), Lambda > 0 only
    std::optional<std::pair<double, double>> angles;    // (theta_-, theta_+)
};

/// a_crit and the theta-horizon pair. Horizons exist iff Lambda > 0 and
/// a > a_crit, with cos(theta_-+) = +-1/(a sqrt(L)); none for Lambda <= 0.
inline ThetaHorizons theta_horizons(const InstantonParams& p) {
    ThetaHorizons th;
    if (p.Lambda <= 0.0) return th;
    th.a_crit = std::sqrt(3.0 / p.Lambda);
    if (p.a > *th.a_crit) {
        const double c = 1.0 / (p.a * std::sqrt(p.L));
        th.angles = std::make_pair(std::acos(c), std::acos(-c));
    }
    return th;
}

struct BlockChart {
    RootStructure roots;
    std::vector<Block> blocks;  // descending in r, outermost first
    ThetaHorizons theta;
    bool uncharted = false;
    std::string note;
};

/// Radial block chart. Labels are purely positional among the sorted simple
/// roots: 2 roots with Lambda <= 0 -> {AdS, I, II} top-down; 4 roots with
/// Lambda > 0 -> {dS+, I, II, III, dS-}. Any other structure is returned
/// uncharted with the raw roots listed.
inline BlockChart block_chart(const InstantonParams& p) {
    BlockChart bc;
    bc.roots = delta_r_roots(p);
    bc.theta = theta_horizons(p);

    std::vector<double> rs;
    for (const auto& rr : bc.roots.roots) rs.push_back(rr.r);
    const std::size_t n = rs.size();
    const bool simple =
        std::all_of(bc.roots.roots.begin(), bc.roots.roots.end(),
                    [](const RealRoot& r) { return r.multiplicity == 1; });

    auto push = [&bc](double lo, double hi, BlockLabel l) { bc.blocks.push_back({lo, hi, l}); };

    if (simple && n == 2 && p.Lambda <= 0.0) {
        push(rs[1], HUGE_VAL, BlockLabel::AdS);
        push(rs[0], rs[1], BlockLabel::I);
        push(-HUGE_VAL, rs[0], BlockLabel::II);
    } else if (simple && n == 4 && p.Lambda > 0.0) {
        push(rs[3], HUGE_VAL, BlockLabel::dSPlus);
        push(rs[2], rs[3], BlockLabel::I);
        push(rs[1], rs[2], BlockLabel::II);
        push(rs[0], rs[1], BlockLabel::III);
        push(-HUGE_VAL, rs[0], BlockLabel::dSMinus);
    } else {
        bc.uncharted = true;
        if (n == 0) {
            push(-HUGE_VAL, HUGE_VAL, BlockLabel::Unlabeled);
            bc.note = "no horizons";
        } else {
            double prev = HUGE_VAL;
            for (std::size_t i = n; i-- > 0;) {
                push(rs[i], prev, BlockLabel::Unlabeled);
                prev = rs[i];
            }
            push(-HUGE_VAL, prev, BlockLabel::Unlabeled);
            bc.note = "root structure matches neither block table";
        }
    }
    return bc;
}

/// Which block contains radius r, by label. Returns Unlabeled if r sits on
/// a root to within tolerance or the chart is uncharted.
inline BlockLabel block_of(const BlockChart& bc, double r) {
    for (const auto& b : bc.blocks)
        if (r > b.lo && r < b.hi) return b.label;
    return BlockLabel::Unlabeled;
}

enum class OmegaPosition { Inside, On, Outside };

inline const char* to_string(OmegaPosition o) {
    switch (o) {
        case OmegaPosition::Inside: return "Inside";
        case OmegaPosition::On: return "On";
        case OmegaPosition::Outside: return "Outside";
    }
    return "?";
}

struct SingularityReport {
    OmegaPosition position = OmegaPosition::Outside;
    double r_min = 0.0;  // radial extent of Omega: [-a, a]
    double r_max = 0.0;
};

/// Position of (r, theta) relative to the singularity region Omega
/// (Sigma < 0), with the locus Sigma = 0 at r = a cos(theta).
inline SingularityReport singularity_test(const InstantonParams& p, double r, double theta) {
    SingularityReport rep;
    rep.r_min = -p.a;
    rep.r_max = p.a;
    const double C = std::cos(theta);
    const double sigma = r * r - p.a * p.a * C * C;
    const double scale = std::max(1.0, r * r + p.a * p.a);
    if (sigma < -kEpsSingularity * scale)
        rep.position = OmegaPosition::Inside;
    else if (sigma <= kEpsSingularity * scale)
        rep.position = OmegaPosition::On;
    else
        rep.position = OmegaPosition::Outside;
    return rep;
}

}  // namespace kninst
