#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kninst/corpus.hpp"
#include "kninst/integrator.hpp"
#include "kninst/rng.hpp"

using namespace kninst;

namespace {

double worst_drift(const TrajectoryRecord& rec) {
    double w = 0.0;
    for (const auto& sm : rec.samples)
        for (double d : sm.drift) w = std::max(w, d);
    return w;
}

IntegratorOptions tight_opts(IntegratorMode mode, double span) {
    IntegratorOptions o;
    o.mode = mode;
    o.rel_tol = 1e-10;
    o.abs_tol = 1e-12;
    o.s_span = span;
    return o;
}

}  // namespace

TEST_CASE("contravariant-metric partials agree with finite differences") {
    Rng rng(12);
    for (int i = 0; i < 300; ++i) {
        const InstantonParams p = draw_params(rng);
        double r, th;
        draw_valid_point(rng, p, r, th);
        const double h = 1e-6;
        const auto g = detail::inv_metric_derivs(p, r, th);
        const auto gpr = detail::inv_metric_derivs(p, r + h, th);
        const auto gmr = detail::inv_metric_derivs(p, r - h, th);
        const auto gpt = detail::inv_metric_derivs(p, r, th + h);
        const auto gmt = detail::inv_metric_derivs(p, r, th - h);
        auto fd_ok = [&](double exact, double plus, double minus) {
            const double fd = (plus - minus) / (2.0 * h);
            return std::abs(exact - fd) <= 1e-4 * std::max({1.0, std::abs(exact), std::abs(fd)});
        };
        CHECK(fd_ok(g.rr_r, gpr.rr, gmr.rr));
        CHECK(fd_ok(g.thth_r, gpr.thth, gmr.thth));
        CHECK(fd_ok(g.tt_r, gpr.tt, gmr.tt));
        CHECK(fd_ok(g.tphi_r, gpr.tphi, gmr.tphi));
        CHECK(fd_ok(g.phiphi_r, gpr.phiphi, gmr.phiphi));
        CHECK(fd_ok(g.At_r, gpr.At, gmr.At));
        CHECK(fd_ok(g.Aphi_r, gpr.Aphi, gmr.Aphi));
        CHECK(fd_ok(g.rr_th, gpt.rr, gmt.rr));
        CHECK(fd_ok(g.thth_th, gpt.thth, gmt.thth));
        CHECK(fd_ok(g.tt_th, gpt.tt, gmt.tt));
        CHECK(fd_ok(g.tphi_th, gpt.tphi, gmt.tphi));
        CHECK(fd_ok(g.phiphi_th, gpt.phiphi, gmt.phiphi));
        CHECK(fd_ok(g.At_th, gpt.At, gmt.At));
        CHECK(fd_ok(g.Aphi_th, gpt.Aphi, gmt.Aphi));
    }
}

TEST_CASE("equatorial principal seed stays on the equator in both modes") {
    const InstantonParams p(1.0, 0.0, 0.0, 0.0);
    const TangentState st{4.0, M_PI / 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
    for (auto mode : {IntegratorMode::MinoFirstIntegral, IntegratorMode::CanonicalHamiltonian}) {
        const TrajectoryRecord rec = integrate(p, 0.0, st, tight_opts(mode, 200.0));
        CHECK(rec.status == TrajectoryStatus::Completed);
        double worst = 0.0;
        for (const auto& sm : rec.samples)
            worst = std::max(worst, std::abs(sm.theta - M_PI / 2.0));
        CHECK(worst <= 1e-9);
        CHECK(worst_drift(rec) <= 1e-9);
    }
}

TEST_CASE("Mino mode: radial seed conserves K and the quadrature constraint") {
    const InstantonParams p(1.0, 0.0, 0.0, 0.0);
    const TangentState st{4.0, M_PI / 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
    const TrajectoryRecord rec =
        integrate(p, 0.0, st, tight_opts(IntegratorMode::MinoFirstIntegral, 500.0));
    CHECK(rec.status == TrajectoryStatus::Completed);
    CHECK(worst_drift(rec) <= 1e-9);
    double cworst = 0.0;
    for (const auto& sm : rec.samples) cworst = std::max(cworst, sm.constraint_resid);
    CHECK(cworst <= 1e-8);
    // Affine span reached exactly.
    CHECK(std::abs(std::abs(rec.samples.back().s) - 500.0) < 1e-6);
}

TEST_CASE("radial turning point: RTurning event with R ~ 0 at the event radius") {
    const InstantonParams p(1.0, 0.1, 0.1, 0.03);  // dS slow, Block I = (2.10, 8.79)
    const TangentState st{5.0, M_PI / 2.0, 0.0, 0.0, -0.5, 0.0, 0.05, 0.3};
    const ConstantsResult cr = constants_from_state(p, 0.0, st);
    IntegratorOptions o = tight_opts(IntegratorMode::MinoFirstIntegral, 100.0);
    const TrajectoryRecord rec = integrate_mino(p, 0.0, st, o);
    bool found = false;
    for (const auto& ev : rec.events) {
        if (ev.kind != EventKind::RTurning) continue;
        found = true;
        const double R = radial_R(p, cr.constants, ev.r);
        const double scale = 1.0 +
                             std::abs(detail::delta_r_value(p, ev.r) *
                                      (cr.constants.q_mass * ev.r * ev.r - cr.constants.K)) +
                             std::abs(p.Xi * p.Xi * P_of_r(p, cr.constants, ev.r) *
                                      P_of_r(p, cr.constants, ev.r));
        CHECK(std::abs(R) <= 1e-8 * scale);
        // Root-polish oracle: Newton from the event radius converges to a
        // genuine simple root nearby.
        double rr = ev.r;
        for (int it = 0; it < 30; ++it) {
            const auto rd = detail::radial_R_and_derivative(p, cr.constants, rr);
            if (rd.dR == 0.0) break;
            rr -= rd.R / rd.dR;
        }
        CHECK(std::abs(rr - ev.r) <= 1e-8 * (1.0 + std::abs(rr)));
    }
    CHECK(found);
    // The trajectory reverses: vr changes sign across the record.
    bool pos = false, neg = false;
    for (const auto& sm : rec.samples) {
        pos = pos || sm.vr > 1e-6;
        neg = neg || sm.vr < -1e-6;
    }
    CHECK(pos);
    CHECK(neg);
}

TEST_CASE("theta turning points appear and event_scan re-derives them") {
    const InstantonParams p(1.0, 0.3, 0.2, -0.3);
    const TangentState st{1.0, M_PI / 2.0, 0.0, 0.0, -0.059329, -0.000791, -0.009607, 0.086995};
    const TrajectoryRecord rec =
        integrate_mino(p, 0.466568, st, tight_opts(IntegratorMode::MinoFirstIntegral, 400.0));
    CHECK(rec.status == TrajectoryStatus::Completed);
    long n_theta = 0;
    for (const auto& ev : rec.events)
        if (ev.kind == EventKind::ThetaTurning) ++n_theta;
    CHECK(n_theta >= 1);
    const auto scanned = event_scan(rec, p);
    long n_scan = 0;
    for (const auto& ev : scanned)
        if (ev.kind == EventKind::ThetaTurning) ++n_scan;
    CHECK(n_scan == n_theta);
}

TEST_CASE("horizon approach stops the integration before chart failure") {
    const InstantonParams p(1.0, 0.0, 0.0, 0.0);
    const TangentState st{4.0, M_PI / 2.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0};
    const TrajectoryRecord rec =
        integrate_mino(p, 0.0, st, tight_opts(IntegratorMode::MinoFirstIntegral, 500.0));
    CHECK(rec.status == TrajectoryStatus::EventStop);
    REQUIRE(rec.stop_event);
    CHECK(*rec.stop_event == EventKind::HorizonApproach);
    // Stopped outside the horizon with Delta_r inside the band.
    const double rf = rec.samples.back().r;
    CHECK(rf > 2.0);
    CHECK(std::abs(detail::delta_r_value(p, rf)) <= 2e-6 * detail::delta_r_magnitude(p, rf));
}

TEST_CASE("no horizon events for a trajectory confined to one block") {
    // Block-I orbit bounded by turning points: never nears a horizon.
    const InstantonParams p(1.0, 0.3, 0.2, -0.3);
    const TangentState st{1.0, M_PI / 2.0, 0.0, 0.0, -0.059329, -0.000791, -0.009607, 0.086995};
    const TrajectoryRecord rec =
        integrate_mino(p, 0.466568, st, tight_opts(IntegratorMode::MinoFirstIntegral, 200.0));
    CHECK(rec.status == TrajectoryStatus::Completed);
    for (const auto& ev : rec.events) {
        CHECK(ev.kind != EventKind::HorizonApproach);
        CHECK(ev.kind != EventKind::SingularityApproach);
    }
}

TEST_CASE("dual-mode agreement on a generic AdS trajectory") {
    const InstantonParams p(1.0, 0.3, 0.2, -0.3);
    const TangentState st{1.0, M_PI / 2.0, 0.0, 0.0, -0.059329, -0.000791, -0.009607, 0.086995};
    const TrajectoryRecord mino =
        integrate(p, 0.466568, st, tight_opts(IntegratorMode::MinoFirstIntegral, 300.0));
    const TrajectoryRecord ham =
        integrate(p, 0.466568, st, tight_opts(IntegratorMode::CanonicalHamiltonian, 300.0));
    REQUIRE(mino.status == TrajectoryStatus::Completed);
    REQUIRE(ham.status == TrajectoryStatus::Completed);
    const TangentState fm = final_state(mino);
    const TangentState fh = final_state(ham);
    auto close = [](double x, double y) {
        return std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)}) < 1e-6;
    };
    CHECK(close(fm.r, fh.r));
    CHECK(close(fm.theta, fh.theta));
    CHECK(close(fm.phi, fh.phi));
    CHECK(close(fm.t, fh.t));
    CHECK(worst_drift(mino) <= 1e-8);
    CHECK(worst_drift(ham) <= 1e-8);
}

TEST_CASE("Hamiltonian mode: cyclic momenta drift at round-off only") {
    const InstantonParams p(1.0, 0.3, 0.2, -0.3);
    const TangentState st{1.0, M_PI / 2.0, 0.0, 0.0, -0.059329, -0.000791, -0.009607, 0.086995};
    const TrajectoryRecord ham =
        integrate(p, 0.466568, st, tight_opts(IntegratorMode::CanonicalHamiltonian, 300.0));
    double worst = 0.0;
    for (const auto& sm : ham.samples) worst = std::max({worst, sm.drift[1], sm.drift[2]});
    CHECK(worst <= 1e-12);
}

TEST_CASE("time reversal returns to the seed") {
    const InstantonParams p(1.0, 0.3, 0.2, -0.3);
    const TangentState st{1.0, M_PI / 2.0, 0.0, 0.0, -0.059329, -0.000791, -0.009607, 0.086995};
    for (auto mode : {IntegratorMode::MinoFirstIntegral, IntegratorMode::CanonicalHamiltonian}) {
        const TrajectoryRecord fwd = integrate(p, 0.466568, st, tight_opts(mode, 150.0));
        REQUIRE(fwd.status == TrajectoryStatus::Completed);
        // Retracing a charged trajectory needs the charge negated.
        const TrajectoryRecord back =
            integrate(p, -0.466568, reversed(final_state(fwd)), tight_opts(mode, 150.0));
        REQUIRE(back.status == TrajectoryStatus::Completed);
        const TangentState fb = final_state(back);
        auto close = [](double x, double y) {
            return std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)}) < 1e-6;
        };
        CHECK(close(fb.r, st.r));
        CHECK(close(fb.theta, st.theta));
        CHECK(close(fb.phi, st.phi));
        CHECK(close(fb.t, st.t));
    }
}

TEST_CASE("halving tolerances does not increase drift") {
    const InstantonParams p(1.0, 0.1, 0.1, 0.03);
    const TangentState st{4.0, 1.2, 0.0, 0.0, -0.031975, -0.016896, -0.009259, -0.067132};
    IntegratorOptions loose = tight_opts(IntegratorMode::MinoFirstIntegral, 500.0);
    loose.rel_tol = 1e-6;
    loose.abs_tol = 1e-8;
    const double dl = worst_drift(integrate(p, -0.044930, st, loose));
    const double dt = worst_drift(
        integrate(p, -0.044930, st, tight_opts(IntegratorMode::MinoFirstIntegral, 500.0)));
    CHECK(dt <= dl);
}

TEST_CASE("samples are strictly ordered and drift entries nonnegative") {
    const InstantonParams p(1.0, 0.1, 0.1, 0.03);
    const TangentState st{5.0, 1.1, 0.0, 0.0, 0.3, 0.1, 0.02, 0.2};
    const TrajectoryRecord rec =
        integrate_mino(p, 0.05, st, tight_opts(IntegratorMode::MinoFirstIntegral, 100.0));
    for (std::size_t i = 1; i < rec.samples.size(); ++i)
        CHECK(rec.samples[i].param > rec.samples[i - 1].param);
    for (const auto& sm : rec.samples)
        for (double d : sm.drift) CHECK(d >= 0.0);
}
