#pragma once

#include "l1ofc/design.hpp"

// Online controller: u_z filter, output predictor, projection-based adaptive
// laws, the filtered control law, and the (analysis-only) reference system.
namespace l1ofc::runtime {

using design::DesignArtifacts;
using design::PlantSpec;
using lti::Matrix;
using lti::StateSpaceSystem;
using lti::Vector;

struct ProjectionBounds {
    double theta_max = 1.0;  // outer-ball radius (full deflection at the boundary)
    double eps_proj = 0.1;   // boundary-layer fraction
};

/// Smooth projection: returns the update unchanged inside the boundary layer
/// or when it points inward, otherwise deflects the radial component so the
/// estimate never exits the ball of radius theta_max.
Vector proj(const Vector& estimate, const Vector& update, const ProjectionBounds& bounds);

struct GammaGains {
    double omega = 500.0, theta = 500.0, sigma = 500.0;
};

struct AdaptiveState {
    Vector vhat;       // predictor state v̂ (n)
    Vector yhat;       // predicted output ŷ (p)
    double omega_hat = 1.0;
    Vector theta_hat;  // (m)
    Vector sigma_hat;  // (m)
    Vector xc;         // state of the joint D(s)Z^{-1}(s) realization
    Vector xrz;        // state of the Z(s)Kg reference filter
    Vector xu;         // state of the u_z filter
};

class Controller {
public:
    /// yhat_zero_init: start the predictor output at zero instead of the first
    /// measurement (measurement-free initialization variant).
    Controller(const PlantSpec& plant, const DesignArtifacts& art, const GammaGains& gains,
               bool yhat_zero_init = false);

    void reset(const Vector& y0);

    /// Advances every controller ODE by one step with y and r held, and
    /// returns the control to apply over that step.
    Vector step(const Vector& y, const Vector& r, double h);

    Vector control() const;                  // u = -Cc xc (strictly proper)
    Vector uz() const;                       // u_z filter output
    Vector ytilde(const Vector& y) const { return st_.yhat - y; }
    Vector xg_hat(const Vector& y) const;    // [x̂_v; x_u]
    Vector eta_hat(const Vector& y) const;   // ω̂ u_z + θ̂ ||x̂_g|| + σ̂

    const AdaptiveState& state() const { return st_; }
    const ProjectionBounds& omega_bounds() const { return bnd_omega_; }
    const ProjectionBounds& theta_bounds() const { return bnd_theta_; }
    const ProjectionBounds& sigma_bounds() const { return bnd_sigma_; }

private:
    Vector pack() const;
    void unpack(const Vector& s);
    Vector deriv(const Vector& s, const Vector& y, const Vector& r) const;

    AdaptiveState st_;
    GammaGains gains_;
    bool yhat_zero_init_;
    double omega_c_ = 1.0;  // interval midpoint for the ω̂ projection

    Matrix Am_, Cm_, Bbar_, H_, Av_, Kv_, CmAm_, CmBbar_;
    Matrix L_;      // P_v^{-1} A_m^T C_m^T P_y
    Matrix Ey_;     // B̄^T C_m^T P_y
    Matrix Kg_;
    double alpha_ = 0.0;
    StateSpaceSystem ctrl_, zsys_;
    ProjectionBounds bnd_omega_, bnd_theta_, bnd_sigma_;
    Eigen::Index n_ = 0, m_ = 0, p_ = 0;
};

/// Ideal closed loop driven by the true ω and f; not implementable, used as
/// the performance yardstick.
class ReferenceSystem {
public:
    ReferenceSystem(const PlantSpec& plant, const DesignArtifacts& art, double true_omega,
                    design::UncertaintyFn f);

    void step(const Vector& r, double t, double h);
    void set_state(const Vector& x0) { x_ = x0; }

    const Vector& x() const { return x_; }
    Vector y() const { return Cm_ * x_; }
    Vector u(const Vector& r, double t) const;

private:
    Vector f_of(const Vector& x, double t) const;
    Vector u_of(const Vector& xf, const Vector& x, const Vector& r, double t) const;

    Matrix Am_, Bm_, Cm_, Kg_;
    StateSpaceSystem C0_;
    double omega_ = 1.0;
    design::UncertaintyFn f_;
    Vector x_, xf_;
};

}  // namespace l1ofc::runtime
