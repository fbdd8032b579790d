#include "doctest.h"
#include "l1ofc/harness.hpp"
#include "l1ofc/runtime.hpp"

#include <cmath>
#include <random>

using namespace l1ofc;
using lti::Matrix;
using lti::Vector;
using runtime::ProjectionBounds;

TEST_CASE("projection passes updates through strictly inside the set") {
    ProjectionBounds b{2.0, 0.1};
    Vector th(2), up(2);
    th << 0.3, -0.4;
    up << 5.0, -7.0;
    const Vector out = runtime::proj(th, up, b);
    CHECK((out - up).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("projection removes only the outward radial component at the boundary") {
    ProjectionBounds b{1.0, 0.1};
    Vector th(2), up(2);
    th << 1.0, 0.0;  // on the outer sphere of the transition band
    up << 3.0, 2.0;  // points outward
    const Vector out = runtime::proj(th, up, b);
    // radial (outward) part must be fully cancelled, tangential part kept
    CHECK(out(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out(1) == doctest::Approx(2.0).epsilon(1e-12));
    // inward updates pass untouched even at the boundary
    Vector inward(2);
    inward << -3.0, 2.0;
    const Vector kept = runtime::proj(th, inward, b);
    CHECK((kept - inward).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("projected flow never leaves the bounding ball") {
    ProjectionBounds b{1.5, 0.1};
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);

    // On or outside the outer shell the projected update must point inward
    // (or tangentially): no radial growth is possible there.
    const double r_out = b.theta_max;
    for (int k = 0; k < 2000; ++k) {
        Vector dir(3);
        dir << u(rng), u(rng), u(rng);
        if (dir.norm() < 1e-9) continue;
        const Vector th = r_out * dir.normalized();
        Vector up(3);
        up << u(rng), u(rng), u(rng);
        CHECK(th.dot(runtime::proj(th, up, b)) <= 1e-9);
    }

    // A forward-Euler trajectory can overshoot the shell by at most one step
    // of the raw update; beyond that the inward projection pulls it back.
    Vector th = Vector::Zero(3);
    const double h = 1e-2;
    const double up_max = std::sqrt(3.0) * 10.0;
    bool ok = true;
    for (int k = 0; k < 20000; ++k) {
        Vector up(3);
        up << u(rng), u(rng), u(rng);
        th += h * runtime::proj(th, up, b);
        ok = ok && th.norm() <= r_out + h * up_max + 1e-9;
    }
    CHECK(ok);
}

TEST_CASE("closed loop tracks the desired DC output with no uncertainty") {
    // f == 0 and a known unit input gain: the loop must settle on the desired
    // model's DC response M(0) Kg r.
    auto sc = harness::academic_scenario();
    sc.uncertainty = harness::Uncertainty::None;
    sc.true_omega = 1.0;
    sc.reference.type = harness::ReferenceSignal::Type::Const;
    sc.reference.offset = 2.0;
    sc.reference.sins.clear();
    sc.x0 = Vector::Zero(3);
    sc.horizon = 12.0;

    const auto res = harness::run_closed_loop(sc);
    const Vector y_end = res.trace.y.back();
    const Matrix M0 = sc.plant.Cm * (-sc.plant.Am).inverse() * sc.plant.Bm;
    const Vector expected = M0 * res.artifacts.Kg * Vector::Constant(1, 2.0);
    CHECK((y_end - expected).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("reference system settles on the same DC output") {
    auto sc = harness::academic_scenario();
    const auto art = design::synthesize(sc.plant, sc.options, 500.0);
    runtime::ReferenceSystem ref(sc.plant, art, 1.0, nullptr);
    Vector r = Vector::Constant(1, 2.0);
    for (double t = 0.0; t < 12.0; t += 1e-3) ref.step(r, t, 1e-3);
    const Matrix M0 = sc.plant.Cm * (-sc.plant.Am).inverse() * sc.plant.Bm;
    const Vector expected = M0 * art.Kg * r;
    CHECK((ref.y() - expected).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("gain estimate stays inside the declared interval") {
    const auto sc = harness::academic_scenario();
    const auto res = harness::run_closed_loop(sc);
    for (double w : res.trace.omega_hat) {
        CHECK(w >= sc.plant.omega_l - 1e-9);
        CHECK(w <= sc.plant.omega_u + 1e-9);
    }
}

TEST_CASE("disturbance estimates respect the projection radii") {
    const auto sc = harness::academic_scenario();
    const auto res = harness::run_closed_loop(sc);
    const double dbar = res.artifacts.d_bar;
    const double bbar = res.artifacts.b_bar;
    const double eps = res.artifacts.eps_proj;
    for (const auto& th : res.trace.theta_hat) CHECK(th.norm() <= dbar * (1.0 + eps) + 1e-9);
    for (const auto& sg : res.trace.sigma_hat) CHECK(sg.norm() <= bbar * (1.0 + eps) + 1e-9);
}

TEST_CASE("output-estimation error stays below the reported envelope") {
    const auto sc = harness::academic_scenario();
    const auto res = harness::run_closed_loop(sc);
    for (size_t k = 0; k < res.trace.t.size(); ++k) {
        CHECK(res.trace.ytilde_norm[k] <= res.trace.envelope[k]);
    }
}

TEST_CASE("controller state resets cleanly between runs") {
    const auto sc = harness::academic_scenario();
    const auto art = design::synthesize(sc.plant, sc.options, 500.0);
    runtime::Controller ctl(sc.plant, art, {500.0, 500.0, 500.0});
    Vector y0 = Vector::Zero(2);
    ctl.reset(y0);
    const auto s0 = ctl.state();
    CHECK(s0.omega_hat == doctest::Approx(0.5 * (sc.plant.omega_l + sc.plant.omega_u)));
    CHECK(s0.theta_hat.cwiseAbs().maxCoeff() == 0.0);
    CHECK(s0.sigma_hat.cwiseAbs().maxCoeff() == 0.0);

    Vector r = Vector::Constant(1, 1.0);
    for (int k = 0; k < 100; ++k) ctl.step(y0, r, 1e-4);
    ctl.reset(y0);
    const auto s1 = ctl.state();
    CHECK(s1.vhat.cwiseAbs().maxCoeff() == s0.vhat.cwiseAbs().maxCoeff());
    CHECK(s1.xc.cwiseAbs().maxCoeff() == 0.0);
}
