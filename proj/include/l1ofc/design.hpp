#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "l1ofc/interactor.hpp"
#include "l1ofc/lti.hpp"

// Offline synthesis: gains, Lyapunov solutions, filters, the L1-norm filter
// condition and every scalar constant of the performance-bound report.
namespace l1ofc::design {

using interactor::InteractorRealization;
using lti::Matrix;
using lti::RationalTF;
using lti::StateSpaceSystem;
using lti::Vector;

using UncertaintyFn = std::function<Vector(const Vector&, double)>;
using ScalarMap = std::function<double(double)>;

struct PlantSpec {
    Matrix Am, Bm, Cm;
    double omega_l = 0.0, omega_u = 0.0;  // input-gain interval
    UncertaintyFn f;                      // null means f == 0
    double b0 = 0.0;                      // bound on ||f(0,t)||
    ScalarMap d_of_delta;                 // delta -> Lipschitz bound in x
    ScalarMap b_of_delta;                 // delta -> bound on df/dt
    double rho0 = 0.0;                    // bound on ||x0||
    double gamma_bar = 0.1;               // small slack
    double r_linf = 0.0;                  // declared reference-amplitude bound

    Eigen::Index n() const { return Am.rows(); }
    Eigen::Index m() const { return Bm.cols(); }
    Eigen::Index p() const { return Cm.rows(); }
};

/// D(s) = gain / (s^integrators * prod_i (s/a_i + 1)) per channel,
/// poles holds the -a_i (strictly negative).
struct FilterSpec {
    double gain = 1.0;
    std::vector<double> poles;
    int integrators = 1;

    RationalTF to_tf() const;
};

struct InteractorConfig {
    std::vector<double> poles;  // scalar first-order chain; empty => Z = dc_gain * I
    double dc_gain = 1.0;
    std::optional<StateSpaceSystem> explicit_Z;  // user-supplied Z overrides the chain
};

struct Overrides {
    std::optional<Matrix> Kv;
    std::optional<Matrix> Q;    // Lyapunov right-hand side, default 10*I
    std::optional<Matrix> Py;   // default I
    std::optional<double> alpha;
    std::optional<double> eps_proj;   // default 0.1
    std::optional<double> l_theta;    // rate bound on theta(t)
    std::optional<double> l_sigma;    // rate bound on sigma(t)
};

struct DesignOptions {
    FilterSpec filter;
    InteractorConfig interactor;
    Matrix Kg;
    Overrides overrides;
    double predictor_rate = 1.0;  // desired margin handed to place_output_injection
};

/// Frequency-domain composites and their induced L1 norms at one omega.
struct OmegaSet {
    double omega = 0.0;
    StateSpaceSystem C0, C, G, Hr, H1, H2, C1, C2;
    double l1_G = 0, l1_Hr = 0, l1_H1 = 0, l1_H2 = 0;
    double l1_C0 = 0, l1_C0Kg = 0, l1_C1 = 0, l1_C2 = 0;
    double kappa_x = 0, rho_ext = 0;
};

struct DesignArtifacts {
    // structure
    InteractorRealization Z;
    Matrix H, A_H, A_v, K_v, P_v, P_y, Q, Pbar_v;
    Matrix CmBbar, CmBbar_dagger;
    Matrix Kg;
    RationalTF D_tf, Z_tf;         // per-channel rationals (diagonal replication for m > 1)
    StateSpaceSystem D_filter;      // realization of D(s)
    StateSpaceSystem ctrl_filter;   // joint strictly-proper realization of D(s) Z^{-1}(s)
    double eps_q = 0, alpha = 0, alpha_phi = 0, alpha_y = 0;
    double eps_proj = 0.1;

    // kappa constants
    double kappa_m = 0, kappa_y = 0, kappa_v = 0, kappa_x = 0;

    // omega-sampled composites; `binding` indexes the worst-case entry
    std::vector<OmegaSet> omega_sets;
    size_t binding = 0;

    // feasibility + performance constants (binding omega)
    double rho_r = 0, feasibility_margin = 0, L_rho_r = 0;
    double rho_x = 0, rho_ext = 0, rho_int = 0;
    double d_bar = 0, b_bar = 0, l_theta = 0, l_sigma = 0;
    double rho_rx = 0, rho_ru = 0, rho_u = 0, rho_dx = 0, rho_du = 0;
    double gamma_x0 = 0, gamma_u0 = 0, gamma_x = 0, gamma_u = 0, eps_gamma = 0;
    double lambda1 = 0, theta0 = 0, theta1 = 0, gamma_min = 0;
    double lambda_min_Py = 0, lambda_min_Pv = 0;
    double gamma = 0;       // adaptation gain the design was asked to certify
    bool gamma_ok = true;   // false when gamma sits below the derived floor

    const OmegaSet& worst() const { return omega_sets[binding]; }

    /// Output-estimation error envelope (Lemma-5-style bound).
    double envelope(double t, double x0_norm, double Gamma) const;

    std::string to_json() const;
    std::string report_text() const;
};

// Pipeline stages (exposed individually for testing).

struct HAndAH {
    Matrix H, A_H;
};
HAndAH compute_H_and_AH(const Matrix& Am, const Matrix& Cm, const Matrix& Bbar);

struct PredictorGain {
    Matrix K_v, A_v, P_v;
};
PredictorGain synthesize_predictor_gain(const Matrix& A_H, const Matrix& Cm,
                                        const std::optional<Matrix>& override_Kv,
                                        const Matrix& Q, double desired_rate);

struct KappaConstants {
    double kappa_m, kappa_y, kappa_v;
    Matrix Pbar_v;
};
KappaConstants kappa_constants(const Matrix& Am, const Matrix& H, const Matrix& Cm,
                               const Matrix& Pv, const Matrix& Py);

struct GrowthBounds {
    double d_bar, b_bar;
};
GrowthBounds uncertainty_growth_bounds(const PlantSpec& plant, const InteractorRealization& Z,
                                       double rho_x);

struct Feasibility {
    double rho_r, margin;  // margin = RHS of the filter condition minus ||G||_L1
};
Feasibility filter_feasibility(const PlantSpec& plant, const std::vector<OmegaSet>& sets,
                               double kappa_m, double rho_lo_scale = 1.001,
                               double rho_hi_scale = 1e3, int grid_points = 200);

struct AlphaSplit {
    double alpha_phi, alpha_y;
};
AlphaSplit alpha_condition(const Matrix& Py, const Matrix& CmBbar, double d_bar, double eps_q,
                           double alpha, Eigen::Index m);

/// Fills in every section-V constant of `art` (rho_rx ... gamma_min). Throws
/// GammaTooSmall when the supplied adaptation gain is below the derived floor.
void performance_bounds(const PlantSpec& plant, DesignArtifacts& art, double Gamma);

/// Full synthesis pipeline.
DesignArtifacts synthesize(const PlantSpec& plant, const DesignOptions& options, double Gamma);

}  // namespace l1ofc::design
