#include "l1ofc/matlib.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

namespace l1ofc::matlib {

void require_finite(const Matrix& M, const char* what) {
    if (!M.allFinite()) {
        throw NonFiniteState(std::string("non-finite entries in ") + what);
    }
}

ComplexVector eigenvalues(const Matrix& A) {
    if (A.rows() != A.cols()) throw DimensionMismatch("eigenvalues: square matrix required");
    require_finite(A, "eigenvalues input");
    if (A.rows() == 0) return ComplexVector(0);
    Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NoConvergence("eigenvalue iteration did not converge");
    return es.eigenvalues();
}

double spectral_abscissa(const Matrix& A) {
    if (A.rows() == 0) return -std::numeric_limits<double>::infinity();
    return eigenvalues(A).real().maxCoeff();
}

bool is_hurwitz(const Matrix& A, double margin) {
    return spectral_abscissa(A) < -margin;
}

Eigen::Index numerical_rank(const Matrix& M, double rel_tol) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > rel_tol * sv(0)) ++r;
    }
    return r;
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || Q.rows() != n || Q.cols() != n) {
        throw DimensionMismatch("solve_lyapunov: dimension mismatch");
    }
    require_finite(A, "Lyapunov A");
    require_finite(Q, "Lyapunov Q");
    if (!is_hurwitz(A)) throw NotHurwitz("solve_lyapunov: A is not Hurwitz");
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
        throw NotPositiveDefinite("solve_lyapunov: Q not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> qes(Q);
    if (qes.eigenvalues().minCoeff() <= 0.0) {
        throw NotPositiveDefinite("solve_lyapunov: Q not positive-definite");
    }

    // (I (x) A' + A' (x) I) vec(P) = -vec(Q), row-major-agnostic since P, Q symmetric.
    const Matrix At = A.transpose();
    Matrix K = Eigen::kroneckerProduct(Matrix::Identity(n, n), At).eval()
             + Eigen::kroneckerProduct(At, Matrix::Identity(n, n)).eval();
    Eigen::ColPivHouseholderQR<Matrix> qr(K);
    if (qr.rank() < n * n) throw SingularSolve("solve_lyapunov: vectorized system rank-deficient");
    Vector vecQ = Eigen::Map<const Vector>(Q.data(), n * n);
    Vector vecP = qr.solve(-vecQ);
    Matrix P = Eigen::Map<Matrix>(vecP.data(), n, n);
    P = 0.5 * (P + P.transpose()).eval();

    const double resid = (A.transpose() * P + P * A + Q).cwiseAbs().maxCoeff();
    if (resid > 1e-9 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
        throw SingularSolve("solve_lyapunov: residual above tolerance");
    }
    return P;
}

Matrix cholesky_upper(const Matrix& P) {
    const Eigen::Index n = P.rows();
    if (P.cols() != n) throw DimensionMismatch("cholesky_upper: square matrix required");
    require_finite(P, "cholesky input");
    const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw NotPositiveDefinite("cholesky_upper: input not symmetric");
    }
    Matrix S = 0.5 * (P + P.transpose());
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("cholesky_upper: non-positive pivot");
    }
    return Matrix(llt.matrixU());
}

Matrix pinv_left(const Matrix& M) {
    require_finite(M, "pinv_left input");
    if (numerical_rank(M) < M.cols()) {
        throw RankDeficient("pinv_left: numerical rank below column count");
    }
    Matrix G = M.transpose() * M;
    return G.ldlt().solve(M.transpose());
}

Matrix expm(const Matrix& A, double t) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n) throw DimensionMismatch("expm: square matrix required");
    require_finite(A, "expm input");
    if (n == 0) return Matrix(0, 0);

    Matrix M = A * t;
    const double norm = M.cwiseAbs().rowwise().sum().maxCoeff();  // induced inf-norm

    // scaling so the Pade-13 approximant stays in its accuracy region
    int squarings = 0;
    const double theta13 = 5.371920351148152;
    if (norm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
        M /= std::pow(2.0, squarings);
    }

    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    const Matrix I = Matrix::Identity(n, n);
    const Matrix M2 = M * M;
    const Matrix M4 = M2 * M2;
    const Matrix M6 = M4 * M2;
    Matrix U = M * (M6 * (b[13] * M6 + b[11] * M4 + b[9] * M2)
                    + b[7] * M6 + b[5] * M4 + b[3] * M2 + b[1] * I);
    Matrix V = M6 * (b[12] * M6 + b[10] * M4 + b[8] * M2)
             + b[6] * M6 + b[4] * M4 + b[2] * M2 + b[0] * I;
    Matrix R = (V - U).partialPivLu().solve(V + U);
    for (int i = 0; i < squarings; ++i) R = R * R;
    return R;
}

bool is_detectable(const Matrix& A, const Matrix& C, double rel_tol) {
    const Eigen::Index n = A.rows();
    ComplexVector eigs = eigenvalues(A);
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
        if (eigs(i).real() < 0.0) continue;
        Eigen::MatrixXcd pbh(n + C.rows(), n);
        pbh.topRows(n) = eigs(i) * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>();
        pbh.bottomRows(C.rows()) = C.cast<std::complex<double>>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) <= rel_tol * sv(0)) return false;
    }
    return true;
}

Matrix place_output_injection(const Matrix& A, const Matrix& C, double desired_rate) {
    const Eigen::Index n = A.rows();
    const Eigen::Index p = C.rows();
    if (A.cols() != n || C.cols() != n) throw DimensionMismatch("place_output_injection");
    if (desired_rate <= 0.0) desired_rate = 0.1;
    if (!is_detectable(A, C)) throw NotDetectable("place_output_injection: PBH test failed");

    if (is_hurwitz(A, desired_rate)) return Matrix::Zero(n, p);

    // Shift A anti-stable, solve the sign-flipped Lyapunov equation for Po > 0,
    // and inject K = -Po^{-1} C'. See header for the construction.
    const double abscissa = spectral_abscissa(A);
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    double beta = desired_rate + std::max(0.0, -abscissa) + 0.5;
    for (int attempt = 0; attempt < 6; ++attempt) {
        const Matrix Ab = A + beta * Matrix::Identity(n, n);
        if (spectral_abscissa(-Ab) >= 0.0) {  // A + beta I not anti-stable yet
            beta *= 2.0;
            continue;
        }
        const double eps = 1e-6 * scale * scale;
        Matrix W = C.transpose() * C + eps * Matrix::Identity(n, n);
        Matrix Po;
        try {
            Po = solve_lyapunov(-Ab, W);  // (-Ab)'Po + Po(-Ab) = -W, i.e. Ab'Po + Po Ab = W
        } catch (const Error&) {
            beta *= 2.0;
            continue;
        }
        Matrix K = -Po.ldlt().solve(C.transpose());
        for (double gain : {1.0, 2.0, 5.0, 0.5, 10.0, 20.0}) {
            if (is_hurwitz(A + gain * K * C)) return gain * K;
        }
        beta *= 2.0;
    }
    throw NotDetectable("place_output_injection: could not stabilize within attempts");
}

}  // namespace l1ofc::matlib
