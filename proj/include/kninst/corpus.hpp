#pragma once

#include <string>
#include <vector>

#include "kninst/integrals.hpp"
#include "kninst/params.hpp"
#include "kninst/rng.hpp"

namespace kninst {

/// Bundled parameter sets covering the regimes that exercise different
/// branches: AdS, slowly rotating dS, fast-rotating dS (theta-horizons
/// present), and a near-degenerate dS draw where two Delta_r roots almost
/// merge.
struct CorpusParams {
    std::string name;
    InstantonParams params;
};

inline std::vector<CorpusParams> parameter_corpus() {
    return {
        {"flat_schwarzschild", InstantonParams(1.0, 0.0, 0.0, 0.0)},
        {"ads_slow", InstantonParams(1.0, 0.3, 0.2, -0.3)},
        {"ads_unit", InstantonParams(1.0, 0.5, 0.5, -3.0)},
        {"ds_slow", InstantonParams(1.0, 0.1, 0.1, 0.03)},
        {"ds_fast", InstantonParams(0.01, 12.0, 0.01, 0.03)},
        // Mass just below the value where the outer positive root pair of
        // Delta_r merges (~1.9230579 for these a, e, Lambda).
        {"near_degenerate", InstantonParams(1.923, 0.1, 0.1, 0.03)},
    };
}

/// Trajectory seeds for the integrator suites. Span is the affine-parameter
/// length, sized as 10^3 characteristic times (the mass scale, G = c = 1)
/// for each background.
struct CorpusSeed {
    std::string name;
    InstantonParams params;
    double q_charge;
    TangentState state;
    double s_span;
};

inline std::vector<CorpusSeed> seed_corpus() {
    std::vector<CorpusSeed> out;
    // Radial principal seed on a flat-Lambda background; theta stays pinned
    // at the equator (Q = 0).
    out.push_back({"flat_radial",
                   InstantonParams(1.0, 0.0, 0.0, 0.0),
                   0.0,
                   TangentState{4.0, M_PI / 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0},
                   1000.0});
    // AdS Block-I seed: radial oscillation between turning points inside
    // (r_-, r_+), with the motion staying clear of the Sigma = 0 locus.
    out.push_back({"ads_block1_bound",
                   InstantonParams(1.0, 0.3, 0.2, -0.3),
                   0.466568,
                   TangentState{1.0, M_PI / 2.0, 0.0, 0.0, -0.059329, -0.000791, -0.009607,
                                0.086995},
                   1000.0});
    // Slow dS seed in Block I (between r_+ and r_++), radially bounded with
    // turning points well away from both horizons.
    out.push_back({"ds_slow_bound",
                   InstantonParams(1.0, 0.1, 0.1, 0.03),
                   -0.044930,
                   TangentState{4.0, 1.2, 0.0, 0.0, -0.031975, -0.016896, -0.009259, -0.067132},
                   1000.0});
    // Fast-rotating dS seed outside the cones in Block I; the background
    // mass is 0.01, so 10^3 mass-times is a span of 10.
    out.push_back({"ds_fast_equatorial",
                   InstantonParams(0.01, 12.0, 0.01, 0.03),
                   0.0,
                   TangentState{11.0, 1.3, 0.0, 0.0, 0.02, 0.05, 0.01, 0.05},
                   10.0});
    return out;
}

/// Random parameter draw guarded away from Xi = 0 and (for valid-point
/// draws) the chart-breaking loci. Regime mixes AdS and dS.
inline InstantonParams draw_params(Rng& rng) {
    for (;;) {
        const double M = rng.uniform(0.05, 2.0);
        const double a = rng.uniform(0.0, 1.5);
        const double e = rng.uniform(0.0, 1.5);
        const double Lambda = rng.uniform(-3.0, 3.0);
        InstantonParams p(M, a, e, Lambda);
        if (std::abs(p.Xi) < 0.05) continue;
        return p;
    }
}

/// A point where the chart is comfortably valid for the given parameters.
inline void draw_valid_point(Rng& rng, const InstantonParams& p, double& r, double& theta) {
    for (;;) {
        r = rng.sign() * rng.uniform(0.05, 8.0);
        theta = rng.uniform(0.05, M_PI - 0.05);
        const ScalarBundle s = eval_scalars(p, r, theta);
        const double eps = 1e-4 * chart_scale(r);
        if (std::abs(s.Delta_r) < eps) continue;
        if (std::abs(s.Delta_theta) < 1e-4) continue;
        if (std::abs(s.Sigma) < eps) continue;
        return;
    }
}

/// A random tangent state at a valid point.
inline TangentState draw_state(Rng& rng, const InstantonParams& p) {
    TangentState st;
    draw_valid_point(rng, p, st.r, st.theta);
    st.phi = rng.uniform(0.0, 2.0 * M_PI);
    st.t = 0.0;
    st.vr = rng.uniform(-1.0, 1.0);
    st.vtheta = rng.uniform(-1.0, 1.0);
    st.vphi = rng.uniform(-1.0, 1.0);
    st.vt = rng.uniform(-1.0, 1.0);
    return st;
}

}  // namespace kninst
