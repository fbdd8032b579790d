#include "l1ofc/harness.hpp"

#include <cmath>
#include <fstream>
#include "json.hpp"
#include <sstream>

namespace l1ofc::harness {

double ReferenceSignal::eval(double t) const {
    switch (type) {
        case Type::Const:
            return offset;
        case Type::SinSum: {
            double v = offset;
            for (const auto& s : sins) v += s.amp * std::sin(s.freq * t + s.phase);
            return v;
        }
        case Type::Steps: {
            double v = offset;
            for (const auto& s : steps) {
                if (t >= s.time) v = s.value;
            }
            return v;
        }
    }
    return 0.0;
}

double ReferenceSignal::sup() const {
    switch (type) {
        case Type::Const:
            return std::abs(offset);
        case Type::SinSum: {
            double v = std::abs(offset);
            for (const auto& s : sins) v += std::abs(s.amp);
            return v;
        }
        case Type::Steps: {
            double v = std::abs(offset);
            for (const auto& s : steps) v = std::max(v, std::abs(s.value));
            return v;
        }
    }
    return 0.0;
}

namespace {

Vector scalar_vec(double v) {
    Vector out(1);
    out << v;
    return out;
}

Vector f1_academic(const Vector& x, double t) {
    const double v = 0.11 * x.squaredNorm() + 0.23 * x(0) * std::tanh(0.5 * x(0)) * x(0) +
                     1.24 * x(1) * x(2) + 0.8 * (1.0 - std::exp(-0.7 * t)) + 2.0;
    return scalar_vec(v);
}

Vector f2_academic(const Vector& x, double t) {
    const double v = 0.15 * x.squaredNorm() + 0.22 * x(0) * std::tanh(0.2 * x(0)) * x(0) +
                     1.34 * x(1) * x(2) + 0.5 * (1.0 - std::exp(-1.1 * t)) + 1.8;
    return scalar_vec(v);
}

}  // namespace

design::PlantSpec academic_plant() {
    design::PlantSpec p;
    p.Am.resize(3, 3);
    p.Am << -2, 0, 1, 1, -5, 2, 1, 0, -5.5;
    p.Bm.resize(3, 1);
    p.Bm << 2, 2.5, -3;
    p.Cm.resize(2, 3);
    p.Cm << -5, 10, 5, 1.25, -1, 0;
    p.omega_l = 0.7;
    p.omega_u = 1.2;
    p.f = f1_academic;
    // declared Lipschitz rate: a constant bound representative of the
    // uncertainty over the expected operating envelope
    p.b0 = 2.8;
    p.d_of_delta = [](double) { return 1.0; };
    p.b_of_delta = [](double) { return 0.56; };
    p.rho0 = 1.0;
    p.gamma_bar = 0.5;
    p.r_linf = 4.0;
    return p;
}

Scenario academic_scenario() {
    Scenario sc;
    sc.name = "academic";
    sc.plant = academic_plant();
    sc.options.filter = design::FilterSpec{5.0, {-11.0}, 1};
    sc.options.interactor.poles = {-4.0};
    sc.options.interactor.dc_gain = 1.0;
    sc.options.Kg = -0.05 * Matrix::Identity(1, 1);
    sc.options.overrides.Q = 2000.0 * Matrix::Identity(3, 3);
    sc.options.overrides.alpha = 25.0;
    sc.reference.type = ReferenceSignal::Type::SinSum;
    sc.reference.offset = 2.0;
    sc.reference.sins = {{2.0, 3.0, 0.0}};
    sc.x0.resize(3);
    sc.x0 << -0.6, 0.6, -0.9;
    sc.horizon = 10.0;
    sc.step = 1e-4;
    sc.gamma = {500.0, 500.0, 500.0};
    sc.uncertainty = Uncertainty::F1;
    sc.true_omega = 0.8;
    return sc;
}

PendulumParams pendulum_params(const PendulumConfig& cfg) {
    PendulumParams par;
    if (cfg.perturbed) {
        par.M *= 1.2;
        par.m *= 0.8;
        par.l *= 1.2;
        par.omega *= 1.2;
        par.nu *= 1.5;
    }
    par.I = cfg.inertia.value_or(par.m * par.l * par.l / 12.0);
    par.friction = cfg.friction;
    par.disturbance_amp = cfg.disturbance_amp;
    // the friction law divides by the Stribeck curve h(pdot); it must stay positive
    // so the bristle state z has stable dynamics (the model reduces to the LuGre
    // form F = -(121 z + 70 zdot + 3 pdot))
    const double h0 = (0.04287 + 0.0432) * (par.m + par.M) * par.g;
    if (h0 <= 0.0) throw Error("pendulum_params: friction denominator not positive");
    return par;
}

Scenario pendulum_scenario(int which) {
    if (which != 1 && which != 2) throw ConfigError("pendulum_scenario: expected 1 or 2");
    Scenario sc;
    sc.name = which == 1 ? "pendulum-1" : "pendulum-2";
    design::PlantSpec& p = sc.plant;
    p.Am.resize(4, 4);
    p.Am << 0, 1, 0, 0,
            14.62, 20.64, 88.23, 15.87,
            0, 0, 0, 1,
            -44.26, -62.47, -237.34, -48.04;
    p.Bm.resize(4, 1);
    p.Bm << 0, 2.07, 0, -6.26;
    p.Cm.resize(2, 4);
    p.Cm << 1, 0, 0, 0, 0, 0, 1, 0;
    p.omega_l = 0.5;
    p.omega_u = 2.0;
    // the matched residual collects linearization error, parameter variation,
    // friction and disturbance; conservative affine growth model
    p.b0 = 10.0;
    p.d_of_delta = [](double) { return 1.0; };
    p.b_of_delta = [](double) { return 20.0; };
    p.rho0 = 1.2;
    p.gamma_bar = 0.5;
    p.r_linf = 0.5;

    sc.options.filter = design::FilterSpec{30.0, {-70.0, -100.0}, 1};
    sc.options.interactor.poles = {-30.0};
    sc.options.interactor.dc_gain = 0.47 / 30.0;
    sc.options.Kg = -7.07 * Matrix::Identity(1, 1);
    Matrix Kv(4, 2);
    Kv << -4.51, -1.56,
          -22.087, -22.91,
          -1.56, -2.87,
          36.98, 40.55;
    sc.options.overrides.Kv = Kv;
    sc.options.overrides.Q = Matrix(100.0 * Matrix::Identity(4, 4));
    sc.options.overrides.Py = Matrix(Matrix::Identity(2, 2));
    sc.options.overrides.alpha = 25.0;

    sc.reference.type = ReferenceSignal::Type::Steps;
    sc.reference.offset = 0.0;
    sc.reference.steps = {{2.0, 0.5}};
    sc.horizon = 40.0;
    sc.step = 1e-4;
    sc.gamma = {500.0, 500.0, 500.0};
    sc.uncertainty = Uncertainty::Pendulum;
    Matrix K(1, 4);
    K << -7.0711, -14.4505, -43.7667, -7.6739;
    sc.baseline = K;

    if (which == 1) {
        sc.x0 = Vector::Zero(4);
        sc.true_omega = 1.0;
        sc.pendulum = {false, false, 0.0, std::nullopt};
    } else {
        sc.x0.resize(4);
        sc.x0 << -0.5, -1.0, 0.1745, 0.0;
        sc.true_omega = 1.2;
        sc.pendulum = {true, true, 3.0, std::nullopt};
    }
    return sc;
}

PendulumSim::PendulumSim(const PendulumParams& par) : par_(par), s_(Vector::Zero(5)) {}

void PendulumSim::set_state(const Vector& x4) {
    if (x4.size() != 4) throw DimensionMismatch("PendulumSim::set_state: expected 4 states");
    s_.head(4) = x4;
    s_(4) = 0.0;
}

Vector PendulumSim::outputs() const {
    Vector y(2);
    y << s_(0), s_(2);
    return y;
}

double PendulumSim::friction_force(double pdot, double z) const {
    const double h = (0.04287 + 0.0432 * std::exp(-(pdot / 0.105) * (pdot / 0.105))) *
                     (par_.m + par_.M) * par_.g;
    return -73.0 * pdot - 121.0 * z * (1.0 - 70.0 * std::abs(pdot) / h);
}

Vector PendulumSim::deriv(const Vector& s, double u, double t) const {
    const double pdot = s(1), th = s(2), thdot = s(3), z = s(4);
    const double d = par_.disturbance_amp * std::sin(t);
    double force = par_.omega * u - par_.nu * pdot + d;
    double zdot = 0.0;
    if (par_.friction) {
        const double h = (0.04287 + 0.0432 * std::exp(-(pdot / 0.105) * (pdot / 0.105))) *
                         (par_.m + par_.M) * par_.g;
        force += friction_force(pdot, z);
        zdot = pdot - 121.0 * std::abs(pdot) / h * z;
    }
    Matrix Mass(2, 2);
    const double mlc = par_.m * par_.l * std::cos(th);
    Mass << par_.M + par_.m, mlc, mlc, par_.I + par_.m * par_.l * par_.l;
    const double det = Mass(0, 0) * Mass(1, 1) - Mass(0, 1) * Mass(1, 0);
    if (std::abs(det) < 1e-12) throw MassMatrixSingular("PendulumSim: mass matrix singular");
    Vector rhs(2);
    rhs << force + par_.m * par_.l * std::sin(th) * thdot * thdot,
           par_.m * par_.g * par_.l * std::sin(th);
    Vector acc = Mass.inverse() * rhs;
    Vector ds(5);
    ds << pdot, acc(0), thdot, acc(1), zdot;
    return ds;
}

void PendulumSim::step(double u, double t, double h) {
    const Vector k1 = deriv(s_, u, t);
    const Vector k2 = deriv(s_ + 0.5 * h * k1, u, t + 0.5 * h);
    const Vector k3 = deriv(s_ + 0.5 * h * k2, u, t + 0.5 * h);
    const Vector k4 = deriv(s_ + h * k3, u, t + h);
    s_ += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!s_.allFinite()) throw NonFiniteState("PendulumSim::step: non-finite state");
}

double lqr_baseline_step(const Matrix& K, const Vector& x, double r) {
    return (-K * x)(0) + K(0, 0) * r;
}

namespace {

design::UncertaintyFn true_uncertainty(const Scenario& sc) {
    switch (sc.uncertainty) {
        case Uncertainty::F1:
            return f1_academic;
        case Uncertainty::F2:
            return f2_academic;
        default:
            return nullptr;
    }
}

struct LinearPlant {
    Matrix Am, Bm;
    double omega;
    design::UncertaintyFn f;
    Vector x;

    void step(const Vector& u, double t, double h) {
        auto deriv = [&](const Vector& s, double tau) -> Vector {
            Vector w = omega * u;
            if (f) w += f(s, tau);
            return Am * s + Bm * w;
        };
        const Vector k1 = deriv(x, t);
        const Vector k2 = deriv(x + 0.5 * h * k1, t + 0.5 * h);
        const Vector k3 = deriv(x + 0.5 * h * k2, t + 0.5 * h);
        const Vector k4 = deriv(x + h * k3, t + h);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) throw NonFiniteState("LinearPlant::step: non-finite state");
    }
};

SimTrace run_with(const Scenario& sc, const design::DesignArtifacts& art,
                  const runtime::GammaGains& gains, double input_delay) {
    const double h = sc.step;
    const long steps = std::lround(sc.horizon / h);
    const long decim = std::max(1L, std::lround(1e-3 / h));
    const bool pendulum = sc.uncertainty == Uncertainty::Pendulum;
    const double x0_norm = sc.x0.cwiseAbs().maxCoeff();
    const double blowup = 1e3 * std::max(art.rho_x, 1.0);

    runtime::Controller ctl(sc.plant, art, gains, sc.yhat_zero_init);
    runtime::ReferenceSystem ref(sc.plant, art, sc.true_omega,
                                 pendulum ? nullptr : true_uncertainty(sc));
    ref.set_state(sc.x0);  // the ideal loop shares the plant's initial state

    PendulumSim pend(pendulum_params(sc.pendulum));
    LinearPlant lin{sc.plant.Am, sc.plant.Bm, sc.true_omega, true_uncertainty(sc), sc.x0};
    if (pendulum) pend.set_state(sc.x0);

    auto plant_x = [&]() -> Vector { return pendulum ? pend.x4() : lin.x; };
    auto plant_y = [&]() -> Vector { return pendulum ? pend.outputs() : Vector(sc.plant.Cm * lin.x); };

    ctl.reset(plant_y());

    const long delay_samples = std::lround(input_delay / h);
    std::vector<Vector> ring(static_cast<size_t>(std::max(delay_samples, 1L)),
                             Vector::Zero(sc.plant.m()));

    SimTrace tr;
    tr.dt = decim * h;
    for (long k = 0; k < steps; ++k) {
        const double t = k * h;
        const Vector y = plant_y();
        const Vector x = plant_x();
        const Vector r = scalar_vec(sc.reference.eval(t));
        const Vector u_cmd = ctl.step(y, r, h);

        Vector u_plant = u_cmd;
        if (delay_samples > 0) {
            const size_t slot = static_cast<size_t>(k % delay_samples);
            u_plant = ring[slot];
            ring[slot] = u_cmd;
        }

        if (k % decim == 0) {
            tr.t.push_back(t);
            tr.x.push_back(x);
            tr.y.push_back(y);
            tr.u.push_back(u_plant);
            tr.yref.push_back(ref.y());
            tr.xref.push_back(ref.x());
            tr.uref.push_back(ref.u(r, t));
            tr.ytilde_norm.push_back(ctl.ytilde(y).cwiseAbs().maxCoeff());
            tr.envelope.push_back(art.envelope(t, x0_norm, gains.omega));
            tr.omega_hat.push_back(ctl.state().omega_hat);
            tr.theta_hat.push_back(ctl.state().theta_hat);
            tr.sigma_hat.push_back(ctl.state().sigma_hat);
        }

        if (pendulum) {
            double u_total = u_plant(0);
            if (sc.baseline) u_total += (-(*sc.baseline) * pend.x4())(0);
            pend.step(u_total, t, h);
        } else {
            lin.step(u_plant, t, h);
        }
        ref.step(r, t, h);

        if (plant_x().cwiseAbs().maxCoeff() > blowup) {
            std::ostringstream oss;
            oss << "run_closed_loop: state escaped at t = " << t + h;
            throw Unstable(oss.str());
        }
    }
    return tr;
}

}  // namespace

RunResult run_closed_loop(const Scenario& sc, std::optional<double> gamma_override,
                          double input_delay) {
    runtime::GammaGains gains = sc.gamma;
    if (gamma_override) gains = {*gamma_override, *gamma_override, *gamma_override};
    RunResult out;
    out.artifacts = design::synthesize(sc.plant, sc.options, gains.omega);
    out.trace = run_with(sc, out.artifacts, gains, input_delay);
    return out;
}

SimTrace run_pendulum_baseline(const Scenario& sc) {
    if (!sc.baseline) throw ConfigError("run_pendulum_baseline: scenario has no baseline gain");
    const double h = sc.step;
    const long steps = std::lround(sc.horizon / h);
    const long decim = std::max(1L, std::lround(1e-3 / h));
    PendulumSim pend(pendulum_params(sc.pendulum));
    pend.set_state(sc.x0);
    SimTrace tr;
    tr.dt = decim * h;
    for (long k = 0; k < steps; ++k) {
        const double t = k * h;
        const double u = lqr_baseline_step(*sc.baseline, pend.x4(), sc.reference.eval(t));
        if (k % decim == 0) {
            tr.t.push_back(t);
            tr.x.push_back(pend.x4());
            tr.y.push_back(pend.outputs());
            tr.u.push_back(scalar_vec(u));
        }
        pend.step(u, t, h);
        if (pend.x4().cwiseAbs().maxCoeff() > 1e6) {
            throw Unstable("run_pendulum_baseline: state escaped");
        }
    }
    return tr;
}

DelayMargin delay_margin_search(const Scenario& sc, double max_delay, double bracket_width) {
    const design::DesignArtifacts art = design::synthesize(sc.plant, sc.options, sc.gamma.omega);
    auto stable_at = [&](double delay) {
        try {
            run_with(sc, art, sc.gamma, delay);
            return true;
        } catch (const Unstable&) {
            return false;
        } catch (const NonFiniteState&) {
            return false;
        }
    };
    if (!stable_at(0.0)) throw Unstable("delay_margin_search: baseline run unstable");
    if (stable_at(max_delay)) return {max_delay, max_delay, false};
    double lo = 0.0, hi = max_delay;
    while (hi - lo > bracket_width) {
        const double mid = 0.5 * (lo + hi);
        (stable_at(mid) ? lo : hi) = mid;
    }
    return {lo, hi, true};
}

std::vector<SweepRow> gamma_sweep(const Scenario& sc, const std::vector<double>& gammas) {
    std::vector<SweepRow> rows;
    for (double g : gammas) {
        SweepRow row;
        row.gamma = g;
        try {
            RunResult rr = run_closed_loop(sc, g);
            row.gamma_ok = rr.artifacts.gamma_ok;
            const size_t n = rr.trace.samples();
            const size_t start = n - n / 5;
            double track = 0.0, est = 0.0;
            for (size_t k = start; k < n; ++k) {
                track = std::max(track,
                                 (rr.trace.xref[k] - rr.trace.x[k]).cwiseAbs().maxCoeff());
                est = std::max(est, rr.trace.ytilde_norm[k]);
            }
            row.steady_tracking = track;
            row.steady_estimation = est;
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

void write_csv(const SimTrace& tr, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("write_csv: cannot open " + path);
    const Eigen::Index n = tr.x.empty() ? 0 : tr.x.front().size();
    const Eigen::Index p = tr.y.empty() ? 0 : tr.y.front().size();
    const Eigen::Index m = tr.u.empty() ? 0 : tr.u.front().size();
    const bool full = !tr.yref.empty();
    out << "t";
    for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i;
    for (Eigen::Index i = 1; i <= p; ++i) out << ",y" << i;
    for (Eigen::Index i = 1; i <= m; ++i) out << ",u" << i;
    if (full) {
        for (Eigen::Index i = 1; i <= p; ++i) out << ",yref" << i;
        for (Eigen::Index i = 1; i <= n; ++i) out << ",xref" << i;
        out << ",ytilde_norm,envelope,omega_hat";
        for (Eigen::Index i = 1; i <= m; ++i) out << ",theta_hat" << i;
        for (Eigen::Index i = 1; i <= m; ++i) out << ",sigma_hat" << i;
    }
    out << "\n";
    out.precision(12);
    for (size_t k = 0; k < tr.samples(); ++k) {
        out << tr.t[k];
        for (Eigen::Index i = 0; i < n; ++i) out << "," << tr.x[k](i);
        for (Eigen::Index i = 0; i < p; ++i) out << "," << tr.y[k](i);
        for (Eigen::Index i = 0; i < m; ++i) out << "," << tr.u[k](i);
        if (full) {
            for (Eigen::Index i = 0; i < p; ++i) out << "," << tr.yref[k](i);
            for (Eigen::Index i = 0; i < n; ++i) out << "," << tr.xref[k](i);
            out << "," << tr.ytilde_norm[k] << "," << tr.envelope[k] << "," << tr.omega_hat[k];
            for (Eigen::Index i = 0; i < m; ++i) out << "," << tr.theta_hat[k](i);
            for (Eigen::Index i = 0; i < m; ++i) out << "," << tr.sigma_hat[k](i);
        }
        out << "\n";
    }
}

void write_plot_script(const std::string& csv_path, const std::string& script_path) {
    std::ofstream out(script_path);
    if (!out) throw ConfigError("write_plot_script: cannot open " + script_path);
    out << R"(#!/usr/bin/env python3
"""Plots a simulation trace CSV: outputs vs reference, control, errors, estimates."""
import sys
import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else ")" << csv_path << R"("
data = np.genfromtxt(path, delimiter=",", names=True)
names = data.dtype.names
t = data["t"]

fig, axes = plt.subplots(4, 1, figsize=(9, 12), sharex=True)

ax = axes[0]
for nm in names:
    if nm.startswith("y") and not nm.startswith("yref") and nm != "ytilde_norm":
        ax.plot(t, data[nm], label=nm)
    if nm.startswith("yref"):
        ax.plot(t, data[nm], "--", label=nm)
ax.set_ylabel("outputs")
ax.legend(loc="best", fontsize=8)

ax = axes[1]
for nm in names:
    if nm.startswith("u") and nm[1:].isdigit():
        ax.plot(t, data[nm], label=nm)
ax.set_ylabel("control")
ax.legend(loc="best", fontsize=8)

ax = axes[2]
if "ytilde_norm" in names:
    ax.plot(t, data["ytilde_norm"], label="||ytilde||")
if "envelope" in names:
    ax.plot(t, data["envelope"], "--", label="envelope")
xerr = None
for nm in names:
    if nm.startswith("xref"):
        i = nm[4:]
        e = np.abs(data[nm] - data["x" + i])
        xerr = e if xerr is None else np.maximum(xerr, e)
if xerr is not None:
    ax.plot(t, xerr, label="||xref - x||")
ax.set_ylabel("errors")
ax.legend(loc="best", fontsize=8)

ax = axes[3]
for nm in names:
    if nm.startswith(("omega_hat", "theta_hat", "sigma_hat")):
        ax.plot(t, data[nm], label=nm)
ax.set_ylabel("estimates")
ax.set_xlabel("t [s]")
ax.legend(loc="best", fontsize=8)

fig.tight_layout()
outpath = path.rsplit(".", 1)[0] + ".png"
fig.savefig(outpath, dpi=130)
print(outpath)
)";
}

namespace {

using nlohmann::json;

Matrix parse_matrix(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("scenario: expected matrix (array of rows)");
    if (!j[0].is_array()) {
        Matrix row(1, j.size());
        for (size_t c = 0; c < j.size(); ++c) row(0, c) = j[c].get<double>();
        return row;
    }
    Matrix M(j.size(), j[0].size());
    for (size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != static_cast<size_t>(M.cols())) {
            throw ConfigError("scenario: ragged matrix rows");
        }
        for (size_t c = 0; c < j[r].size(); ++c) M(r, c) = j[r][c].get<double>();
    }
    return M;
}

Vector parse_vector(const json& j) {
    Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

design::ScalarMap parse_poly_map(const json& j) {
    std::vector<double> coeffs = j.get<std::vector<double>>();
    return [coeffs](double d) {
        double acc = 0.0, pw = 1.0;
        for (double c : coeffs) {
            acc += c * pw;
            pw *= d;
        }
        return acc;
    };
}

}  // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_scenario: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("load_scenario: bad JSON: ") + e.what());
    }
    try {
        Scenario sc;
        sc.name = j.value("name", path);

        const json& jp = j.at("plant");
        sc.plant.Am = parse_matrix(jp.at("Am"));
        sc.plant.Bm = parse_matrix(jp.at("Bm"));
        sc.plant.Cm = parse_matrix(jp.at("Cm"));
        if (sc.plant.Bm.cols() > sc.plant.Bm.rows()) sc.plant.Bm.transposeInPlace();
        sc.plant.omega_l = jp.at("omega").at(0).get<double>();
        sc.plant.omega_u = jp.at("omega").at(1).get<double>();
        sc.plant.b0 = jp.value("b0", 0.0);
        if (jp.contains("d_delta")) sc.plant.d_of_delta = parse_poly_map(jp.at("d_delta"));
        if (jp.contains("b_delta")) sc.plant.b_of_delta = parse_poly_map(jp.at("b_delta"));
        sc.plant.rho0 = jp.value("rho0", 1.0);
        sc.plant.gamma_bar = jp.value("gamma_bar", 0.5);

        const json& ji = j.at("interactor");
        if (ji.contains("explicit")) {
            const json& je = ji.at("explicit");
            sc.options.interactor.explicit_Z = lti::StateSpaceSystem(
                parse_matrix(je.at("Az")), parse_matrix(je.at("Bz")), parse_matrix(je.at("Cz")),
                parse_matrix(je.at("Dz")));
        } else {
            sc.options.interactor.poles = ji.value("poles", std::vector<double>{});
            sc.options.interactor.dc_gain = ji.value("dc_gain", 1.0);
        }

        const json& jf = j.at("filter");
        sc.options.filter.gain = jf.at("gain").get<double>();
        sc.options.filter.poles = jf.value("poles", std::vector<double>{});
        sc.options.filter.integrators = jf.value("integrators", 1);

        if (j.at("kg").is_number()) {
            sc.options.Kg = j.at("kg").get<double>() * Matrix::Identity(1, 1);
        } else {
            sc.options.Kg = parse_matrix(j.at("kg"));
        }

        const json& jr = j.at("reference");
        const std::string rt = jr.at("type").get<std::string>();
        if (rt == "const") {
            sc.reference.type = ReferenceSignal::Type::Const;
            sc.reference.offset = jr.at("value").get<double>();
        } else if (rt == "sin_sum") {
            sc.reference.type = ReferenceSignal::Type::SinSum;
            sc.reference.offset = jr.value("offset", 0.0);
            for (const auto& s : jr.at("sins")) {
                sc.reference.sins.push_back(
                    {s.at("amp").get<double>(), s.at("freq").get<double>(), s.value("phase", 0.0)});
            }
        } else if (rt == "steps") {
            sc.reference.type = ReferenceSignal::Type::Steps;
            sc.reference.offset = jr.value("offset", 0.0);
            for (const auto& s : jr.at("steps")) {
                sc.reference.steps.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
            }
        } else {
            throw ConfigError("scenario: unknown reference type " + rt);
        }
        sc.plant.r_linf = jp.value("r_linf", sc.reference.sup());

        sc.x0 = parse_vector(j.at("x0"));
        sc.horizon = j.at("horizon_s").get<double>();
        sc.step = j.at("step_s").get<double>();
        const json& jg = j.at("gamma");
        sc.gamma = {jg.at("omega").get<double>(), jg.at("theta").get<double>(),
                    jg.at("sigma").get<double>()};

        const std::string unc = j.value("uncertainty", "none");
        if (unc == "none") {
            sc.uncertainty = Uncertainty::None;
        } else if (unc == "f1") {
            sc.uncertainty = Uncertainty::F1;
        } else if (unc == "f2") {
            sc.uncertainty = Uncertainty::F2;
        } else if (unc == "pendulum") {
            sc.uncertainty = Uncertainty::Pendulum;
        } else {
            throw ConfigError("scenario: unknown uncertainty " + unc);
        }
        sc.true_omega = j.value("true_omega", 1.0);

        if (j.contains("baseline")) sc.baseline = parse_matrix(j.at("baseline"));

        if (j.contains("pendulum")) {
            const json& jd = j.at("pendulum");
            sc.pendulum.perturbed = jd.value("perturbed", false);
            sc.pendulum.friction = jd.value("friction", false);
            sc.pendulum.disturbance_amp = jd.value("disturbance_amp", 0.0);
        }

        if (j.contains("overrides")) {
            const json& jo = j.at("overrides");
            auto& ov = sc.options.overrides;
            if (jo.contains("K_v")) ov.Kv = parse_matrix(jo.at("K_v"));
            if (jo.contains("Q")) ov.Q = parse_matrix(jo.at("Q"));
            if (jo.contains("P_y")) ov.Py = parse_matrix(jo.at("P_y"));
            if (jo.contains("alpha")) ov.alpha = jo.at("alpha").get<double>();
            if (jo.contains("eps_proj")) ov.eps_proj = jo.at("eps_proj").get<double>();
            if (jo.contains("l_theta")) ov.l_theta = jo.at("l_theta").get<double>();
            if (jo.contains("l_sigma")) ov.l_sigma = jo.at("l_sigma").get<double>();
            if (jo.contains("inertia_I")) sc.pendulum.inertia = jo.at("inertia_I").get<double>();
        }

        if (sc.horizon <= 0 || sc.step <= 0) throw ConfigError("scenario: horizon/step must be positive");
        if (sc.x0.cwiseAbs().maxCoeff() > sc.plant.rho0 + 1e-12) {
            throw ConfigError("scenario: ||x0|| exceeds the declared rho0");
        }
        return sc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("load_scenario: ") + e.what());
    }
}

}  // namespace l1ofc::harness
