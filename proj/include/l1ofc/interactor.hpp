#pragma once

#include "l1ofc/lti.hpp"

// Right-interactor handling: build or accept Z(s), solve the coupling
// matrices (Tz, Bbar) from the linear identity system, and expose the
// cascade decomposition.
namespace l1ofc::interactor {

using lti::Matrix;
using lti::SignalTrace;
using lti::StateSpaceSystem;
using lti::Vector;

struct InteractorRealization {
    Matrix Az, Bz, Cz, Dz;  // realization of Z(s)
    Matrix Tz;              // n x nz, full column rank (empty when nz = 0)
    Matrix Bbar;            // n x m

    Eigen::Index nz() const { return Az.rows(); }
    Eigen::Index m() const { return Dz.rows(); }

    StateSpaceSystem z_system() const { return StateSpaceSystem(Az, Bz, Cz, Dz); }
};

struct RankReport {
    Eigen::Index rank_CmBm = 0;
    bool needs_interactor = false;
    int first_nonzero_markov = 0;  // smallest k with Cm Am^k Bm of full rank (diagnostic)
};

/// Z(s) = dc_gain * prod_i a_i/(s + a_i) for poles {-a_i}, in controllable
/// canonical form. An empty pole list returns the identity interactor.
StateSpaceSystem build_scalar_interactor(const std::vector<double>& poles, double dc_gain);

/// Solves Am Tz - Tz Az - Bbar Cz = 0, Tz Bz + Bbar Dz = Bm, Cm Tz = 0 in the
/// unknowns (Tz, Bbar) by vectorized least squares, then verifies every
/// identity block and the full column rank of Cm Bbar.
InteractorRealization solve_coupling(const Matrix& Am, const Matrix& Bm, const Matrix& Cm,
                                     const StateSpaceSystem& Z);

RankReport check_interactor_need(const Matrix& Am, const Matrix& Bm, const Matrix& Cm);

struct CascadeTraces {
    SignalTrace xz, xv, yv;
};

/// Simulates the cascade: xz' = Az xz + Bz u, uv = Cz xz + Dz u,
/// xv' = Am xv + Bbar uv with xv(0) = x0, xz(0) = 0.
CascadeTraces cascade_decompose(const Matrix& Am, const Matrix& Bm, const Matrix& Cm,
                                const InteractorRealization& Z, const SignalTrace& input,
                                const Vector& x0);

}  // namespace l1ofc::interactor
