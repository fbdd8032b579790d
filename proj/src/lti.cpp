#include "l1ofc/lti.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

namespace l1ofc::lti {

StateSpaceSystem::StateSpaceSystem(Matrix A_, Matrix B_, Matrix C_, Matrix D_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.rows() != n || C.cols() != n ||
        D.rows() != C.rows() || D.cols() != B.cols()) {
        throw DimensionMismatch("StateSpaceSystem: inconsistent dimensions");
    }
    matlib::require_finite(A, "A");
    matlib::require_finite(B, "B");
    matlib::require_finite(C, "C");
    matlib::require_finite(D, "D");
}

StateSpaceSystem StateSpaceSystem::gain(const Matrix& K) {
    return StateSpaceSystem(Matrix::Zero(0, 0), Matrix::Zero(0, K.cols()),
                            Matrix::Zero(K.rows(), 0), K);
}

Eigen::MatrixXcd StateSpaceSystem::eval(Complex s) const {
    if (order() == 0) return D.cast<Complex>();
    Eigen::MatrixXcd M = s * Eigen::MatrixXcd::Identity(order(), order()) - A.cast<Complex>();
    return C.cast<Complex>() * M.partialPivLu().solve(B.cast<Complex>()) + D.cast<Complex>();
}

StateSpaceSystem StateSpaceSystem::premultiply(const Matrix& K) const {
    return StateSpaceSystem(A, B, K * C, K * D);
}

StateSpaceSystem StateSpaceSystem::postmultiply(const Matrix& K) const {
    return StateSpaceSystem(A, B * K, C, D * K);
}

StateSpaceSystem series(const StateSpaceSystem& G2, const StateSpaceSystem& G1) {
    if (G2.inputs() != G1.outputs()) throw DimensionMismatch("series: G2 inputs != G1 outputs");
    const Eigen::Index n1 = G1.order(), n2 = G2.order();
    Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = G1.A;
    A.bottomLeftCorner(n2, n1) = G2.B * G1.C;
    A.bottomRightCorner(n2, n2) = G2.A;
    Matrix B(n1 + n2, G1.inputs());
    B.topRows(n1) = G1.B;
    B.bottomRows(n2) = G2.B * G1.D;
    Matrix C(G2.outputs(), n1 + n2);
    C.leftCols(n1) = G2.D * G1.C;
    C.rightCols(n2) = G2.C;
    return StateSpaceSystem(A, B, C, G2.D * G1.D);
}

StateSpaceSystem parallel(const StateSpaceSystem& G1, const StateSpaceSystem& G2) {
    if (G1.inputs() != G2.inputs() || G1.outputs() != G2.outputs()) {
        throw DimensionMismatch("parallel: dimension mismatch");
    }
    const Eigen::Index n1 = G1.order(), n2 = G2.order();
    Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = G1.A;
    A.bottomRightCorner(n2, n2) = G2.A;
    Matrix B(n1 + n2, G1.inputs());
    B.topRows(n1) = G1.B;
    B.bottomRows(n2) = G2.B;
    Matrix C(G1.outputs(), n1 + n2);
    C.leftCols(n1) = G1.C;
    C.rightCols(n2) = G2.C;
    return StateSpaceSystem(A, B, C, G1.D + G2.D);
}

StateSpaceSystem negate(const StateSpaceSystem& G) {
    return StateSpaceSystem(G.A, G.B, -G.C, -G.D);
}

StateSpaceSystem feedback_unity_gain(const StateSpaceSystem& Ds, double omega) {
    if (Ds.inputs() != Ds.outputs()) throw DimensionMismatch("feedback_unity_gain: square system required");
    const Eigen::Index m = Ds.inputs();
    Matrix loop = Matrix::Identity(m, m) + omega * Ds.D;
    Eigen::FullPivLU<Matrix> lu(loop);
    if (!lu.isInvertible()) throw AlgebraicLoop("feedback_unity_gain: I + omega*D(inf) singular");
    Matrix S = lu.inverse();
    // y = D(s)(u - omega y)
    Matrix Acl = Ds.A - omega * Ds.B * S * Ds.C;
    Matrix Bcl = Ds.B * (Matrix::Identity(m, m) - omega * S * Ds.D);
    return StateSpaceSystem(Acl, Bcl, S * Ds.C, S * Ds.D);
}

double l1_norm(const StateSpaceSystem& G) {
    Vector d_rows = G.D.cwiseAbs().rowwise().sum();
    if (G.order() == 0) return d_rows.size() ? d_rows.maxCoeff() : 0.0;

    const double abscissa = matlib::spectral_abscissa(G.A);
    if (abscissa >= 0.0) throw Unstable("l1_norm: system has a pole with Re >= 0");
    const double lambda = -abscissa;

    const double eig_scale = matlib::eigenvalues(G.A).cwiseAbs().maxCoeff();
    const double h = std::min(1e-3, 0.05 / std::max(eig_scale, 1e-6));
    const Matrix Phi = matlib::expm(G.A, h);

    Matrix X = G.B;                 // columns of e^{At} B
    Matrix g_prev = (G.C * X).cwiseAbs();
    Matrix acc = Matrix::Zero(G.outputs(), G.inputs());

    // Decay envelope ||C e^{At} B|| <= kappa e^{-lambda_hat t} certifies the tail.
    const double lambda_hat = 0.5 * lambda;
    double kappa = g_prev.rowwise().sum().maxCoeff();
    const double t_min = 3.0 / lambda;
    const double t_cap = 500.0 / lambda;

    double t = 0.0;
    while (true) {
        X = Phi * X;
        t += h;
        Matrix g = (G.C * X).cwiseAbs();
        acc += 0.5 * h * (g_prev + g);
        g_prev = g;

        const double gnorm = g.rowwise().sum().maxCoeff();
        kappa = std::max(kappa, gnorm * std::exp(lambda_hat * t));
        if (t >= t_min) {
            const double total = acc.rowwise().sum().maxCoeff();
            const double tail = gnorm / lambda_hat;  // envelope integral from t on
            if (tail < 1e-6 * std::max(1.0, total)) break;
        }
        if (t > t_cap) throw NoDecay("l1_norm: envelope did not certify tail within horizon cap");
        if (!X.allFinite()) throw NoDecay("l1_norm: propagation diverged");
    }
    return acc.rowwise().sum().maxCoeff() + (d_rows.size() ? d_rows.maxCoeff() : 0.0);
}

bool is_controllable(const Matrix& A, const Matrix& B) {
    const Eigen::Index n = A.rows();
    if (n == 0) return true;
    const double scale = std::max(1.0, std::max(A.cwiseAbs().maxCoeff(), B.cwiseAbs().maxCoeff()));
    auto eigs = matlib::eigenvalues(A);
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
        Eigen::MatrixXcd pbh(n, n + B.cols());
        pbh.leftCols(n) = eigs(i) * Eigen::MatrixXcd::Identity(n, n) - A.cast<Complex>();
        pbh.rightCols(B.cols()) = B.cast<Complex>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
        if (svd.singularValues()(n - 1) <= 1e-8 * scale) return false;
    }
    return true;
}

bool is_observable(const Matrix& A, const Matrix& C) {
    return is_controllable(A.transpose(), C.transpose());
}

namespace {

// Smallest singular value of the Rosenbrock matrix [[A - sI, B], [C, D]].
double rosenbrock_sigma(const StateSpaceSystem& G, Complex s, Eigen::Index which) {
    const Eigen::Index n = G.order();
    Eigen::MatrixXcd R(n + G.outputs(), n + G.inputs());
    R.topLeftCorner(n, n) = G.A.cast<Complex>() - s * Eigen::MatrixXcd::Identity(n, n);
    R.topRightCorner(n, G.inputs()) = G.B.cast<Complex>();
    R.bottomLeftCorner(G.outputs(), n) = G.C.cast<Complex>();
    R.bottomRightCorner(G.outputs(), G.inputs()) = G.D.cast<Complex>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(R);
    return svd.singularValues()(which);
}

std::vector<Complex> squared_down_candidates(const StateSpaceSystem& G, const Matrix& W) {
    const Eigen::Index n = G.order(), m = G.inputs();
    Matrix M(n + m, n + m), N = Matrix::Zero(n + m, n + m);
    M.topLeftCorner(n, n) = G.A;
    M.topRightCorner(n, m) = G.B;
    M.bottomLeftCorner(m, n) = W * G.C;
    M.bottomRightCorner(m, m) = W * G.D;
    N.topLeftCorner(n, n) = Matrix::Identity(n, n);
    Eigen::GeneralizedEigenSolver<Matrix> ges(M, N);
    std::vector<Complex> out;
    for (Eigen::Index i = 0; i < ges.alphas().size(); ++i) {
        const Complex a = ges.alphas()(i);
        const double b = ges.betas()(i);
        if (std::abs(b) > 1e-8 * (1.0 + std::abs(a))) out.push_back(a / b);
    }
    return out;
}

}  // namespace

std::vector<Complex> transmission_zeros(const StateSpaceSystem& G, unsigned seed) {
    if (G.outputs() < G.inputs()) throw DimensionMismatch("transmission_zeros: p >= m required");
    if (!is_controllable(G.A, G.B) || !is_observable(G.A, G.C)) {
        throw NotMinimal("transmission_zeros: realization not minimal");
    }
    const Eigen::Index n = G.order();

    // Normal-rank index of the Rosenbrock matrix from random probe points.
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Eigen::Index rk = std::min(n + G.inputs(), n + G.outputs());
    double sigma_normal = 0.0;
    for (int k = 0; k < 4; ++k) {
        Complex probe(gauss(rng) * 3.0, gauss(rng) * 3.0);
        sigma_normal = std::max(sigma_normal, rosenbrock_sigma(G, probe, rk - 1));
    }

    auto confirmed = [&](const std::vector<Complex>& cands) {
        std::vector<Complex> out;
        for (Complex z : cands) {
            if (rosenbrock_sigma(G, z, rk - 1) < 1e-6 * std::max(sigma_normal, 1e-12)) {
                out.push_back(z);
            }
        }
        std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
            return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        });
        return out;
    };

    auto draw_w = [&]() {
        Matrix W(G.inputs(), G.outputs());
        for (Eigen::Index i = 0; i < W.size(); ++i) W(i) = gauss(rng);
        return W;
    };

    std::vector<Complex> z1 = confirmed(squared_down_candidates(G, draw_w()));
    std::vector<Complex> z2 = confirmed(squared_down_candidates(G, draw_w()));
    if (z1.size() != z2.size()) throw RankAmbiguous("transmission_zeros: W-draws disagree on count");
    for (size_t i = 0; i < z1.size(); ++i) {
        if (std::abs(z1[i] - z2[i]) > 1e-5 * (1.0 + std::abs(z1[i]))) {
            throw RankAmbiguous("transmission_zeros: W-draws disagree on location");
        }
        z1[i] = 0.5 * (z1[i] + z2[i]);
    }
    return z1;
}

SignalTrace simulate_lti(const StateSpaceSystem& G, const SignalTrace& input, const Vector& x0) {
    if (x0.size() != G.order()) throw DimensionMismatch("simulate_lti: x0 size");
    const double h = input.step;
    Vector x = x0;
    SignalTrace out;
    out.step = h;
    out.values.reserve(input.values.size());
    for (Eigen::Index k = 0; k < input.samples(); ++k) {
        const Vector& u = input.values[static_cast<size_t>(k)];
        out.values.push_back(G.C * x + G.D * u);
        if (k + 1 == input.samples()) break;
        auto f = [&](const Vector& xs) -> Vector { return G.A * xs + G.B * u; };
        Vector k1 = f(x);
        Vector k2 = f(x + 0.5 * h * k1);
        Vector k3 = f(x + 0.5 * h * k2);
        Vector k4 = f(x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) throw NonFiniteState("simulate_lti: state diverged");
    }
    return out;
}

// ---- SISO rational helpers ----

int poly_degree(const Poly& p) {
    for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i) {
        if (p[static_cast<size_t>(i)] != 0.0) return i;
    }
    return 0;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i) {
        for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

Poly poly_from_roots(const std::vector<double>& roots) {
    Poly p{1.0};
    for (double r : roots) p = poly_mul(p, Poly{-r, 1.0});
    return p;
}

double poly_eval(const Poly& p, double s) {
    double v = 0.0;
    for (size_t i = p.size(); i-- > 0;) v = v * s + p[i];
    return v;
}

Complex poly_eval(const Poly& p, Complex s) {
    Complex v = 0.0;
    for (size_t i = p.size(); i-- > 0;) v = v * s + p[i];
    return v;
}

RationalTF RationalTF::mul(const RationalTF& other) const {
    return RationalTF{poly_mul(num, other.num), poly_mul(den, other.den)};
}

Complex RationalTF::eval(Complex s) const {
    return poly_eval(num, s) / poly_eval(den, s);
}

StateSpaceSystem tf_to_ss(const RationalTF& tf) {
    const int dn = poly_degree(tf.den);
    const int dm = poly_degree(tf.num);
    if (dm > dn) throw ImproperRealization("tf_to_ss: numerator degree exceeds denominator");
    const double lead = tf.den[static_cast<size_t>(dn)];
    if (lead == 0.0) throw ImproperRealization("tf_to_ss: zero leading denominator coefficient");

    Poly den(tf.den.begin(), tf.den.begin() + dn + 1);
    for (auto& c : den) c /= lead;
    Poly num(static_cast<size_t>(dn) + 1, 0.0);
    for (int i = 0; i <= dm; ++i) num[static_cast<size_t>(i)] = tf.num[static_cast<size_t>(i)] / lead;

    double d_term = 0.0;
    if (dm == dn) {  // split off the feedthrough
        d_term = num[static_cast<size_t>(dn)];
        for (int i = 0; i <= dn; ++i) num[static_cast<size_t>(i)] -= d_term * den[static_cast<size_t>(i)];
    }

    const Eigen::Index n = dn;
    Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, 1), C = Matrix::Zero(1, n);
    Matrix D = Matrix::Constant(1, 1, d_term);
    if (n > 0) {
        A.topRightCorner(n - 1, n - 1) = Matrix::Identity(n - 1, n - 1);
        for (Eigen::Index i = 0; i < n; ++i) A(n - 1, i) = -den[static_cast<size_t>(i)];
        B(n - 1, 0) = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) C(0, i) = num[static_cast<size_t>(i)];
    }
    return StateSpaceSystem(A, B, C, D);
}

}  // namespace l1ofc::lti
