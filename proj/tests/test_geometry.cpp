#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kninst/corpus.hpp"
#include "kninst/geometry.hpp"
#include "kninst/rng.hpp"

using namespace kninst;

namespace {

// Line-element oracle: assemble g_ab by summing the four weighted squared
// one-forms, indexing (r, theta, t, phi) = (0, 1, 2, 3).
struct MetricOracle {
    double g[4][4] = {};
};

MetricOracle line_element_oracle(const InstantonParams& p, double r, double theta) {
    const double S = std::sin(theta), C = std::cos(theta);
    const double Sigma = r * r - p.a * p.a * C * C;
    const double Dr = (r * r - p.a * p.a) * (1.0 - p.L * r * r) - 2.0 * p.M * r - p.e * p.e;
    const double Dth = 1.0 - p.L * p.a * p.a * C * C;
    const double Xi2 = p.Xi * p.Xi;
    // (weight, covector components)
    const double weights[4] = {Sigma / Dr, Sigma / Dth, S * S * Dth / (Xi2 * Sigma),
                               Dr / (Xi2 * Sigma)};
    const double forms[4][4] = {
        {1.0, 0.0, 0.0, 0.0},
        {0.0, 1.0, 0.0, 0.0},
        {0.0, 0.0, p.a, r * r - p.a * p.a},
        {0.0, 0.0, 1.0, -p.a * S * S},
    };
    MetricOracle m;
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m.g[i][j] += weights[k] * forms[k][i] * forms[k][j];
    return m;
}

double rel(double x, double y) {
    return std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace

TEST_CASE("scalars: Schwarzschild-like reduction") {
    const InstantonParams p(1.0, 0.0, 0.0, 0.0);
    const ScalarBundle s = eval_scalars(p, 4.0, M_PI / 2.0);
    CHECK(s.Sigma == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(s.Delta_r == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(s.Delta_theta == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.Xi == 1.0);
}

TEST_CASE("scalars: pole values and flags") {
    const InstantonParams p(1.0, 1.0, 0.0, -3.0);  // L = -1
    CHECK(p.Xi == doctest::Approx(2.0));
    const ScalarBundle s = eval_scalars(p, 0.5, 0.0);
    CHECK(s.pole == Pole::North);
    CHECK(s.S == 0.0);
    CHECK(s.C == 1.0);
    CHECK(s.Delta_theta == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS((void)eval_scalars(p, 1.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS((void)metric_covariant(p, 1.0, 0.0), ChartFailure);
}

TEST_CASE("scalars: Delta_r at r = 0 is -(a^2+e^2)") {
    const InstantonParams p(1.0, 0.1, 0.1, 0.03);
    const ScalarBundle s = eval_scalars(p, 0.0, 1.0);
    CHECK(s.Delta_r == doctest::Approx(-0.02).epsilon(1e-14));
}

TEST_CASE("covariant metric: Euclidean-Schwarzschild point") {
    const InstantonParams p(1.0, 0.0, 0.0, 0.0);
    const MetricBundle m = metric_covariant(p, 4.0, M_PI / 2.0);
    CHECK(m.g_rr == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(m.g_thth == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(m.g_phiphi == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(m.g_tt == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(m.g_tphi == doctest::Approx(0.0));
}

TEST_CASE("covariant metric: g_tphi vanishes with S^2 toward the pole") {
    const InstantonParams p(1.0, 0.7, 0.3, -0.6);
    double prev = HUGE_VAL;
    for (double th : {0.1, 0.01, 0.001}) {
        const MetricBundle m = metric_covariant(p, 3.0, th);
        CHECK(std::abs(m.g_tphi) < prev);
        prev = std::abs(m.g_tphi);
    }
    CHECK(prev < 1e-5);
}

TEST_CASE("covariant metric matches line-element oracle at a generic point") {
    const InstantonParams p(1.0, 0.3, 0.2, -0.3);
    const double r = 2.0, th = 1.0;
    const MetricBundle m = metric_covariant(p, r, th);
    const MetricOracle o = line_element_oracle(p, r, th);
    CHECK(rel(m.g_rr, o.g[0][0]) < 1e-13);
    CHECK(rel(m.g_thth, o.g[1][1]) < 1e-13);
    CHECK(rel(m.g_tt, o.g[2][2]) < 1e-13);
    CHECK(rel(m.g_tphi, o.g[2][3]) < 1e-13);
    CHECK(rel(m.g_phiphi, o.g[3][3]) < 1e-13);
    // Off-block entries of the oracle are zero.
    CHECK(o.g[0][1] == 0.0);
    CHECK(o.g[0][2] == 0.0);
    CHECK(o.g[1][3] == 0.0);
}

TEST_CASE("contravariant metric: block inverse and determinant identity") {
    const InstantonParams p(1.0, 0.3, 0.2, -0.3);
    const double r = 2.0, th = 1.0;
    const ScalarBundle s = eval_scalars(p, r, th);
    const MetricBundle m = metric_contravariant(p, r, th);

    CHECK(rel(m.inv_rr, 1.0 / m.g_rr) < 1e-14);
    CHECK(rel(m.inv_thth, 1.0 / m.g_thth) < 1e-14);
    CHECK(std::abs(m.g_tt * m.inv_tt + m.g_tphi * m.inv_tphi - 1.0) < 1e-13);
    CHECK(std::abs(m.g_tt * m.inv_tphi + m.g_tphi * m.inv_phiphi) < 1e-13);
    CHECK(std::abs(m.g_tphi * m.inv_tphi + m.g_phiphi * m.inv_phiphi - 1.0) < 1e-13);

    const double closed =
        s.S * s.S * s.Delta_theta * s.Delta_r / (p.Xi * p.Xi * p.Xi * p.Xi);
    CHECK(std::abs(m.det_tphi - closed) / std::abs(closed) < 1e-12);
}

TEST_CASE("contravariant metric: diagonal case a = 0") {
    const InstantonParams p(1.0, 0.0, 0.3, 0.0);
    const MetricBundle m = metric_contravariant(p, 3.0, 0.9);
    CHECK(rel(m.inv_tt, 1.0 / m.g_tt) < 1e-14);
    CHECK(m.inv_tphi == doctest::Approx(0.0));
}

TEST_CASE("maxwell potential: zero charge and algebraic identities") {
    const InstantonParams p0(1.0, 0.5, 0.0, -0.3);
    const PotentialBundle A0 = maxwell_potential(p0, 2.0, 1.1);
    CHECK(A0.A_t == 0.0);
    CHECK(A0.A_phi == 0.0);

    const InstantonParams p(1.0, 0.5, 0.4, 0.03);
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        double r, th;
        draw_valid_point(rng, p, r, th);
        const ScalarBundle s = eval_scalars(p, r, th);
        const PotentialBundle A = maxwell_potential(p, r, th);
        const double c1 = p.e * r / p.Xi - p.a * A.A_phi + (r * r - p.a * p.a) * A.A_t;
        CHECK(std::abs(c1) / std::max(1.0, std::abs(p.e * r / p.Xi)) < 1e-12);
        const double c2 = A.A_phi + p.a * s.S * s.S * A.A_t;
        CHECK(std::abs(c2) < 1e-12 * std::max(1.0, std::abs(A.A_t)));
    }
    CHECK_THROWS_AS((void)maxwell_potential(p, p.a * std::cos(0.3), 0.3), SingularityHit);
}

TEST_CASE("signature: AdS block classes from eigenvalue signs") {
    const InstantonParams p(1.0, 0.3, 0.2, -0.3);
    // r = 2 lies outside the outer root (Delta_r > 0), Sigma > 0.
    const SignatureReport ads = signature_at(p, 2.0, 1.0);
    CHECK(ads.cls == SignatureClass::Riemannian);
    CHECK(!ads.inside_omega);
    CHECK(!ads.inside_cone);

    // r = 1.5 lies between the roots (Delta_r < 0): the eigenvalue signs
    // give a 2-2 split (the published list labels this region Lorentzian;
    // the verification suite reports that comparison).
    const SignatureReport blk1 = signature_at(p, 1.5, 1.0);
    CHECK(blk1.cls == SignatureClass::TwoTwo);
    CHECK(blk1.lambda1 > 0.0);
    CHECK(blk1.lambda2 < 0.0);

    // Inside Omega with Delta_r > 0: definite with all eigenvalues negative.
    const SignatureReport om = signature_at(p, -0.25, 0.2);
    CHECK(om.inside_omega);
    CHECK(om.cls == SignatureClass::Riemannian);
    CHECK(om.lambda1 < 0.0);
    CHECK(om.lambda4 < 0.0);
}

TEST_CASE("signature: a = 0 collapses the (t,phi) block to its diagonal") {
    const InstantonParams p(1.0, 0.0, 0.2, -0.3);
    const MetricBundle m = metric_covariant(p, 3.0, 1.0);
    const SignatureReport rep = signature_at(p, 3.0, 1.0);
    CHECK(rep.lambda3 == doctest::Approx(std::max(m.g_tt, m.g_phiphi)).epsilon(1e-13));
    CHECK(rep.lambda4 == doctest::Approx(std::min(m.g_tt, m.g_phiphi)).epsilon(1e-13));
}

TEST_CASE("frame inner products: a = 0 reductions and sign relations") {
    const InstantonParams p(1.0, 0.0, 0.1, -0.3);
    const FrameInnerProducts f = frame_inner_products(p, 3.0, 1.1);
    CHECK(f.v_phi == doctest::Approx(0.0));
    CHECK(f.w_t == doctest::Approx(0.0));

    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        const InstantonParams q = draw_params(rng);
        double r, th;
        draw_valid_point(rng, q, r, th);
        const ScalarBundle s = eval_scalars(q, r, th);
        const FrameInnerProducts g = frame_inner_products(q, r, th);
        CHECK(g.max_rel_err < 1e-12);
        CHECK((g.v_v > 0.0) == (s.Delta_r * s.Sigma > 0.0));
        CHECK((g.w_w > 0.0) == (s.Delta_theta * s.Sigma > 0.0));
    }
}

TEST_CASE("property: frame identity suite on random draws") {
    Rng rng(123456);
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const InstantonParams p = draw_params(rng);
        double r, th;
        draw_valid_point(rng, p, r, th);
        worst = std::max(worst, frame_inner_products(p, r, th).max_rel_err);
    }
    CHECK(worst <= 1e-11);
}

TEST_CASE("positivity combination equals Sigma^2/(a^2 S^2)") {
    Rng rng(31);
    for (int i = 0; i < 500; ++i) {
        InstantonParams p = draw_params(rng);
        if (p.a < 0.05) continue;
        double r, th;
        draw_valid_point(rng, p, r, th);
        const ScalarBundle s = eval_scalars(p, r, th);
        if (s.S < 0.05) continue;
        const double as2 = p.a * p.a * s.S * s.S;
        const double ra = r * r - p.a * p.a;
        const double comb = ra * ra / as2 + as2 + 2.0 * ra;
        CHECK(rel(comb, s.Sigma * s.Sigma / as2) < 1e-11);
    }
}

TEST_CASE("params: negative spin rejected, derived fields exact") {
    CHECK_THROWS_AS(InstantonParams(1.0, -0.1, 0.0, 0.0), std::invalid_argument);
    const InstantonParams p(1.0, 0.5, 0.2, 1.5);
    CHECK(p.L == 0.5);
    CHECK(p.Xi == 1.0 - 0.5 * 0.25);
}
