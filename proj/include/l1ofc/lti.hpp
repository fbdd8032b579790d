#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "l1ofc/matlib.hpp"

// LTI system algebra: realizations, interconnection, impulse-response
// integration (induced L1 norms), structural tests, fixed-step simulation.
namespace l1ofc::lti {

using matlib::Matrix;
using matlib::Vector;
using Complex = std::complex<double>;

struct StateSpaceSystem {
    Matrix A, B, C, D;

    StateSpaceSystem() = default;
    StateSpaceSystem(Matrix A_, Matrix B_, Matrix C_, Matrix D_);

    Eigen::Index order() const { return A.rows(); }
    Eigen::Index inputs() const { return B.cols(); }
    Eigen::Index outputs() const { return C.rows(); }

    /// Pure gain (order-zero) system.
    static StateSpaceSystem gain(const Matrix& K);
    static StateSpaceSystem identity(Eigen::Index m) { return gain(Matrix::Identity(m, m)); }

    /// C (sI - A)^{-1} B + D at a complex frequency.
    Eigen::MatrixXcd eval(Complex s) const;

    /// Left/right multiplication by constant matrices (absorbed into C/D, B/D).
    StateSpaceSystem premultiply(const Matrix& K) const;   // K * G(s)
    StateSpaceSystem postmultiply(const Matrix& K) const;  // G(s) * K
};

struct SignalTrace {
    double step = 0.0;
    std::vector<Vector> values;

    Eigen::Index samples() const { return static_cast<Eigen::Index>(values.size()); }
    double time(Eigen::Index k) const { return step * static_cast<double>(k); }
};

/// Cascade G2 * G1 (G1 feeds G2).
StateSpaceSystem series(const StateSpaceSystem& G2, const StateSpaceSystem& G1);

/// Parallel sum G1 + G2.
StateSpaceSystem parallel(const StateSpaceSystem& G1, const StateSpaceSystem& G2);

StateSpaceSystem negate(const StateSpaceSystem& G);

/// C0(s) = D(s) (I + omega D(s))^{-1}: unity-gain feedback loop around D with
/// loop gain omega.
StateSpaceSystem feedback_unity_gain(const StateSpaceSystem& Ds, double omega);

/// Induced L-infinity -> L-infinity norm (max row sum of the impulse-response
/// integral plus |D| row sums). Requires all poles strictly stable.
double l1_norm(const StateSpaceSystem& G);

/// Transmission zeros of a p >= m system with full normal column rank, via
/// random squaring-down of the Rosenbrock pencil with rank confirmation.
std::vector<Complex> transmission_zeros(const StateSpaceSystem& G, unsigned seed = 12345);

bool is_controllable(const Matrix& A, const Matrix& B);
bool is_observable(const Matrix& A, const Matrix& C);

/// Fixed-step RK4 propagation of xdot = Ax + Bu, y = Cx + Du with the input
/// held zero-order between samples. Output trace has the same grid.
SignalTrace simulate_lti(const StateSpaceSystem& G, const SignalTrace& input, const Vector& x0);

// ---- SISO rational helpers (used for joint C0 Z^{-1} style realizations) ----

/// Polynomial with ascending coefficients: c[0] + c[1] s + ...
using Poly = std::vector<double>;

Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_from_roots(const std::vector<double>& roots);  // monic
double poly_eval(const Poly& p, double s);
Complex poly_eval(const Poly& p, Complex s);
int poly_degree(const Poly& p);

/// SISO transfer function num(s)/den(s).
struct RationalTF {
    Poly num, den;

    RationalTF mul(const RationalTF& other) const;
    Complex eval(Complex s) const;
    int relative_degree() const { return poly_degree(den) - poly_degree(num); }
    bool proper() const { return relative_degree() >= 0; }
    bool strictly_proper() const { return relative_degree() >= 1; }
};

/// Controllable-canonical realization of a proper SISO transfer function.
/// Throws ImproperRealization when deg(num) > deg(den).
StateSpaceSystem tf_to_ss(const RationalTF& tf);

}  // namespace l1ofc::lti
