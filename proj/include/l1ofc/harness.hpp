#pragma once

#include <optional>
#include <string>
#include <vector>

#include "l1ofc/design.hpp"
#include "l1ofc/runtime.hpp"

// Scenario fixtures, plant simulation (linear and pendulum), baseline LQR,
// gamma sweeps, delay-margin search, and file emission for the CLI.
namespace l1ofc::harness {

using lti::Matrix;
using lti::Vector;

struct ReferenceSignal {
    enum class Type { Const, SinSum, Steps } type = Type::Const;
    double offset = 0.0;
    struct Sin {
        double amp = 0.0, freq = 0.0, phase = 0.0;
    };
    std::vector<Sin> sins;
    struct Step {
        double time = 0.0, value = 0.0;  // value holds from `time` onward
    };
    std::vector<Step> steps;

    double eval(double t) const;
    double sup() const;  // amplitude bound used by the design stage
};

enum class Uncertainty { None, F1, F2, Pendulum };

struct PendulumConfig {
    bool perturbed = false;        // parameter variations on top of nominal
    bool friction = false;
    double disturbance_amp = 0.0;  // d(t) = amp * sin(t)
    std::optional<double> inertia; // overrides the rotational inertia
};

struct Scenario {
    std::string name;
    design::PlantSpec plant;
    design::DesignOptions options;
    ReferenceSignal reference;
    Vector x0;
    double horizon = 10.0;
    double step = 1e-4;
    runtime::GammaGains gamma;
    Uncertainty uncertainty = Uncertainty::None;
    double true_omega = 1.0;          // plant-side input gain (linear plants)
    std::optional<Matrix> baseline;   // static state-feedback row gain
    PendulumConfig pendulum;
    bool yhat_zero_init = false;
};

Scenario load_scenario(const std::string& path);

design::PlantSpec academic_plant();
Scenario academic_scenario();
Scenario pendulum_scenario(int which);  // 1 = nominal, 2 = perturbed/friction/disturbance

struct PendulumParams {
    double M = 0.815, m = 0.210, l = 0.305, I = 0.0, g = 9.81;
    double omega = 1.719, nu = 7.682;
    bool friction = false;
    double disturbance_amp = 0.0;
};
PendulumParams pendulum_params(const PendulumConfig& cfg);

/// Nonlinear cart-pendulum with dynamic friction; state [p, pdot, th, thdot, z].
class PendulumSim {
public:
    explicit PendulumSim(const PendulumParams& par);
    void set_state(const Vector& x4);  // friction state z starts at 0
    void step(double u, double t, double h);
    Vector x4() const { return s_.head(4); }
    Vector outputs() const;  // [p, theta]
    double friction_force(double pdot, double z) const;

private:
    Vector deriv(const Vector& s, double u, double t) const;
    PendulumParams par_;
    Vector s_;
};

struct SimTrace {
    double dt = 1e-3;  // output decimation
    std::vector<double> t;
    std::vector<Vector> x, y, u, yref, xref, uref;
    std::vector<double> ytilde_norm, envelope;
    std::vector<double> omega_hat;
    std::vector<Vector> theta_hat, sigma_hat;
    size_t samples() const { return t.size(); }
};

struct RunResult {
    design::DesignArtifacts artifacts;
    SimTrace trace;
};

/// Co-simulates plant, controller, and reference system on one clock.
/// input_delay inserts a transport delay on the plant input.
RunResult run_closed_loop(const Scenario& sc, std::optional<double> gamma_override = {},
                          double input_delay = 0.0);

/// Pendulum run under the static baseline gain (u = -K x + K[0] r).
SimTrace run_pendulum_baseline(const Scenario& sc);

double lqr_baseline_step(const Matrix& K, const Vector& x, double r);

struct DelayMargin {
    double lower = 0.0, upper = 0.0;
    bool found = false;  // false: stable through the whole range (lower = range max)
    double margin() const { return 0.5 * (lower + upper); }
};
DelayMargin delay_margin_search(const Scenario& sc, double max_delay,
                                double bracket_width = 0.01);

struct SweepRow {
    double gamma = 0.0;
    double steady_tracking = 0.0;    // max ||x_ref - x|| over the final 20%
    double steady_estimation = 0.0;  // max ||ytilde|| over the final 20%
    bool gamma_ok = true;
    std::string error;
};
std::vector<SweepRow> gamma_sweep(const Scenario& sc, const std::vector<double>& gammas);

void write_csv(const SimTrace& trace, const std::string& path);
void write_plot_script(const std::string& csv_path, const std::string& script_path);

}  // namespace l1ofc::harness
