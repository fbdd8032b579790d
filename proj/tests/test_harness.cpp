#include "doctest.h"
#include "l1ofc/errors.hpp"
#include "l1ofc/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace l1ofc;
using lti::Matrix;
using lti::Vector;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    const std::string path = "/tmp/" + name;
    std::ofstream out(path);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("reference signals evaluate and bound themselves") {
    harness::ReferenceSignal sig;
    sig.type = harness::ReferenceSignal::Type::SinSum;
    sig.offset = 2.0;
    sig.sins = {{2.0, 3.0, 0.0}};
    CHECK(sig.eval(0.0) == doctest::Approx(2.0));
    CHECK(sig.eval(M_PI / 6.0) == doctest::Approx(2.0 + 2.0 * std::sin(M_PI / 2.0)));
    CHECK(sig.sup() == doctest::Approx(4.0));

    harness::ReferenceSignal st;
    st.type = harness::ReferenceSignal::Type::Steps;
    st.offset = 0.0;
    st.steps = {{2.0, 0.5}, {10.0, -0.25}};
    CHECK(st.eval(0.0) == doctest::Approx(0.0));
    CHECK(st.eval(2.0) == doctest::Approx(0.5));
    CHECK(st.eval(11.0) == doctest::Approx(-0.25));
    CHECK(st.sup() == doctest::Approx(0.5));
}

TEST_CASE("scenario files round-trip to the built-in fixtures") {
    const auto file = harness::load_scenario("scenarios/academic.json");
    const auto code = harness::academic_scenario();
    CHECK((file.plant.Am - code.plant.Am).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((file.plant.Bm - code.plant.Bm).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(file.plant.omega_l == doctest::Approx(code.plant.omega_l));
    CHECK((file.options.Kg - code.options.Kg).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(file.true_omega == doctest::Approx(code.true_omega));
    CHECK(file.gamma.omega == doctest::Approx(code.gamma.omega));

    const auto p2 = harness::load_scenario("scenarios/pendulum2.json");
    const auto c2 = harness::pendulum_scenario(2);
    CHECK((p2.x0 - c2.x0).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(p2.pendulum.perturbed == c2.pendulum.perturbed);
    CHECK(p2.pendulum.friction == c2.pendulum.friction);
    CHECK(p2.pendulum.disturbance_amp == doctest::Approx(c2.pendulum.disturbance_amp));
    REQUIRE(p2.baseline.has_value());
    CHECK((*p2.baseline - *c2.baseline).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("scenario ingestion rejects malformed documents") {
    CHECK_THROWS_AS(harness::load_scenario("/nonexistent/file.json"), ConfigError);
    const auto bad = write_temp("bad_scenario.json", "{ not json");
    CHECK_THROWS_AS(harness::load_scenario(bad), ConfigError);
    const auto missing = write_temp("missing_keys.json", "{\"plant\": {}}");
    CHECK_THROWS_AS(harness::load_scenario(missing), ConfigError);
}

TEST_CASE("initial condition must respect the declared ball") {
    std::ifstream in("scenarios/academic.json");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string body = ss.str();
    const auto pos = body.find("\"x0\"");
    REQUIRE(pos != std::string::npos);
    body.replace(pos, body.find(']', pos) - pos + 1, "\"x0\": [50, 0, 0]");
    const auto path = write_temp("big_x0.json", body);
    CHECK_THROWS_AS(harness::load_scenario(path), ConfigError);
}

TEST_CASE("perturbed pendulum parameters scale the nominal set") {
    const auto nom = harness::pendulum_params({false, false, 0.0, std::nullopt});
    const auto pert = harness::pendulum_params({true, false, 0.0, std::nullopt});
    CHECK(pert.M == doctest::Approx(1.2 * nom.M));
    CHECK(pert.m == doctest::Approx(0.8 * nom.m));
    CHECK(pert.l == doctest::Approx(1.2 * nom.l));
    CHECK(pert.omega == doctest::Approx(1.2 * nom.omega));
    CHECK(pert.nu == doctest::Approx(1.5 * nom.nu));
    // default rotational inertia of a uniform rod about its center
    CHECK(nom.I == doctest::Approx(nom.m * nom.l * nom.l / 12.0));
}

TEST_CASE("pendulum at rest stays at the unstable equilibrium, perturbed falls") {
    const auto par = harness::pendulum_params({false, false, 0.0, std::nullopt});
    harness::PendulumSim still(par);
    still.set_state(Vector::Zero(4));
    for (int k = 0; k < 1000; ++k) still.step(0.0, k * 1e-3, 1e-3);
    CHECK(still.x4().cwiseAbs().maxCoeff() < 1e-12);

    harness::PendulumSim tip(par);
    Vector x0 = Vector::Zero(4);
    x0(2) = 0.01;
    tip.set_state(x0);
    for (int k = 0; k < 1000; ++k) tip.step(0.0, k * 1e-3, 1e-3);
    CHECK(std::abs(tip.x4()(2)) > 0.02);  // angle diverges from upright
}

TEST_CASE("friction force opposes motion and vanishes at rest") {
    const auto par = harness::pendulum_params({true, true, 0.0, std::nullopt});
    harness::PendulumSim sim(par);
    CHECK(sim.friction_force(0.0, 0.0) == doctest::Approx(0.0));
    CHECK(sim.friction_force(0.5, 0.001) < 0.0);
    CHECK(sim.friction_force(-0.5, -0.001) > 0.0);
}

TEST_CASE("static baseline control law") {
    Matrix K(1, 4);
    K << -7.0711, -14.4505, -43.7667, -7.6739;
    Vector x(4);
    x << 0.1, -0.2, 0.05, 0.3;
    const double u = harness::lqr_baseline_step(K, x, 0.5);
    const double expected = (-K * x)(0) + K(0, 0) * 0.5;
    CHECK(u == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("trace serialization produces a parsable table") {
    harness::SimTrace tr;
    tr.dt = 0.5;
    for (int k = 0; k < 3; ++k) {
        tr.t.push_back(0.5 * k);
        tr.x.push_back(Vector::Constant(2, k));
        tr.y.push_back(Vector::Constant(1, 2.0 * k));
        tr.u.push_back(Vector::Constant(1, -1.0 * k));
        tr.yref.push_back(Vector::Constant(1, 0.0));
        tr.xref.push_back(Vector::Constant(2, 0.0));
        tr.uref.push_back(Vector::Constant(1, 0.0));
        tr.ytilde_norm.push_back(0.1 * k);
        tr.envelope.push_back(1.0);
        tr.omega_hat.push_back(1.0);
        tr.theta_hat.push_back(Vector::Constant(1, 0.0));
        tr.sigma_hat.push_back(Vector::Constant(1, 0.0));
    }
    const std::string path = "/tmp/trace_test.csv";
    harness::write_csv(tr, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("t,x1,x2,y1,u1", 0) == 0);
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
    std::remove(path.c_str());
}

TEST_CASE("gamma sweep reports rows for every requested gain") {
    auto sc = harness::academic_scenario();
    sc.horizon = 1.0;  // keep the unit test fast
    const auto rows = harness::gamma_sweep(sc, {50.0, 500.0});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].gamma == doctest::Approx(50.0));
    CHECK(rows[1].gamma == doctest::Approx(500.0));
    for (const auto& r : rows) {
        CHECK(r.error.empty());
        CHECK(std::isfinite(r.steady_tracking));
        CHECK(std::isfinite(r.steady_estimation));
    }
}

TEST_CASE("zero delay reproduces the nominal run") {
    auto sc = harness::academic_scenario();
    sc.horizon = 2.0;
    const auto nominal = harness::run_closed_loop(sc);
    const auto delayed = harness::run_closed_loop(sc, {}, 0.0);
    REQUIRE(nominal.trace.t.size() == delayed.trace.t.size());
    double worst = 0.0;
    for (size_t k = 0; k < nominal.trace.t.size(); ++k)
        worst = std::max(worst, (nominal.trace.x[k] - delayed.trace.x[k]).cwiseAbs().maxCoeff());
    CHECK(worst == 0.0);
}
