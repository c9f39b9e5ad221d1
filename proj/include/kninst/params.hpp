#pragma once

#include <cmath>
#include <stdexcept>

namespace kninst {

/// Solution parameters of the Kerr-Newman-(anti-)de Sitter instanton.
///
/// Units G = c = 1. Lambda is the cosmological constant as the user supplies
/// it; L = Lambda/3 and Xi = 1 - L a^2 are derived once at construction and
/// used everywhere downstream.
struct InstantonParams {
    double M = 1.0;       // mass
    double a = 0.0;       // angular momentum per unit mass, >= 0
    double e = 0.0;       // charge per unit mass
    double Lambda = 0.0;  // cosmological constant
    double L = 0.0;       // Lambda / 3
    double Xi = 1.0;      // 1 - L a^2

    InstantonParams() = default;

    InstantonParams(double M_, double a_, double e_, double Lambda_)
        : M(M_), a(a_), e(e_), Lambda(Lambda_), L(Lambda_ / 3.0), Xi(1.0 - L * a_ * a_) {
        if (!(std::isfinite(M) && std::isfinite(a) && std::isfinite(e) && std::isfinite(Lambda)))
            throw std::invalid_argument("InstantonParams: non-finite parameter");
        // The metric depends on a only through a^2 and odd factors handled by
        // phi-reflection, so negative a is rejected rather than normalized.
        if (a < 0.0)
            throw std::invalid_argument("InstantonParams: a must be >= 0");
    }
};

/// Scale-aware tolerance base for chart validity tests at radius r.
inline double chart_scale(double r) { return std::max(1.0, r * r); }

inline constexpr double kEpsChart = 1e-10;  // chart validity, times chart_scale
inline constexpr double kEpsDegenerate = 1e-9;  // eigenvalue degeneracy, relative
inline constexpr double kEpsSingularity = 1e-9; // Sigma ~ 0 test, relative

}  // namespace kninst
