#include "doctest.h"
#include "l1ofc/matlib.hpp"

#include <random>

using namespace l1ofc;
using matlib::Matrix;
using matlib::Vector;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix M(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) M(i, j++) = v;
        ++i;
    }
    return M;
}

}  // namespace

TEST_CASE("solve_lyapunov scalar and diagonal") {
    Matrix P = matlib::solve_lyapunov(mat({{-1}}), mat({{2}}));
    CHECK(P(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    Matrix P2 = matlib::solve_lyapunov(-Matrix::Identity(2, 2), 2.0 * Matrix::Identity(2, 2));
    CHECK((P2 - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("solve_lyapunov vs direct Kronecker oracle") {
    Matrix A = mat({{0, 1}, {-2, -3}});
    Matrix Q = Matrix::Identity(2, 2);
    Matrix P = matlib::solve_lyapunov(A, Q);

    // independent oracle: explicit 4x4 solve of (I (x) A' + A' (x) I) vec(P) = -vec(Q)
    Matrix K(4, 4);
    Matrix At = A.transpose();
    K << At(0, 0) + At(0, 0), At(0, 1), At(0, 1), 0,
         At(1, 0), At(1, 1) + At(0, 0), 0, At(0, 1),
         At(1, 0), 0, At(0, 0) + At(1, 1), At(0, 1),
         0, At(1, 0), At(1, 0), At(1, 1) + At(1, 1);
    Vector vq(4);
    vq << -1, 0, 0, -1;
    Vector vp = K.fullPivLu().solve(vq);
    Matrix Po(2, 2);
    Po << vp(0), vp(2), vp(1), vp(3);
    CHECK((P - Po).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((A.transpose() * P + P * A + Q).cwiseAbs().maxCoeff() < 1e-10);
    // SPD
    Eigen::SelfAdjointEigenSolver<Matrix> es(P);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("solve_lyapunov rejects non-Hurwitz A") {
    CHECK_THROWS_AS(matlib::solve_lyapunov(mat({{1}}), mat({{1}})), NotHurwitz);
}

TEST_CASE("cholesky_upper basics") {
    CHECK((matlib::cholesky_upper(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);

    Matrix R = matlib::cholesky_upper(mat({{4, 0}, {0, 9}}));
    CHECK(R(0, 0) == doctest::Approx(2.0));
    CHECK(R(1, 1) == doctest::Approx(3.0));
    CHECK(R(1, 0) == 0.0);

    std::mt19937 rng(7);
    std::normal_distribution<double> g;
    Matrix M(4, 4);
    for (Eigen::Index i = 0; i < M.size(); ++i) M(i) = g(rng);
    Matrix P = M.transpose() * M + Matrix::Identity(4, 4);
    Matrix Rr = matlib::cholesky_upper(P);
    CHECK((Rr.transpose() * Rr - P).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(Rr.triangularView<Eigen::StrictlyLower>().toDenseMatrix().cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(matlib::cholesky_upper(mat({{-1, 0}, {0, 1}})), NotPositiveDefinite);
}

TEST_CASE("pinv_left") {
    CHECK(matlib::pinv_left(mat({{0.25}}))(0, 0) == doctest::Approx(4.0));

    Matrix Mi = matlib::pinv_left(mat({{1}, {1}}));
    CHECK(Mi(0, 0) == doctest::Approx(0.5));
    CHECK(Mi(0, 1) == doctest::Approx(0.5));

    Matrix S = mat({{2, 1}, {1, 3}});
    CHECK((matlib::pinv_left(S) - S.inverse()).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(matlib::pinv_left(mat({{1, 1}, {2, 2}})), RankDeficient);
}

TEST_CASE("pinv_left identity property on random full-column-rank matrices") {
    std::mt19937 rng(99);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 7);
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % n);
        Matrix M(n, m);
        for (Eigen::Index i = 0; i < M.size(); ++i) M(i) = g(rng);
        if (matlib::numerical_rank(M) < m) continue;
        Matrix I = matlib::pinv_left(M) * M;
        CHECK((I - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("expm basics") {
    Matrix A = mat({{0.3, -1.2}, {2.0, 0.7}});
    CHECK((matlib::expm(A, 0.0) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);

    Matrix E = matlib::expm(mat({{-1, 0}, {0, -2}}), 1.0);
    CHECK(E(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(E(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(std::abs(E(0, 1)) < 1e-15);

    Matrix N = matlib::expm(mat({{0, 1}, {0, 0}}), 3.7);
    CHECK(N(0, 1) == doctest::Approx(3.7).epsilon(1e-13));
    CHECK(N(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("expm matches truncated series on small norms") {
    std::mt19937 rng(3);
    std::normal_distribution<double> g;
    Matrix A(3, 3);
    for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = 0.2 * g(rng);
    Matrix series = Matrix::Identity(3, 3);
    Matrix term = Matrix::Identity(3, 3);
    for (int k = 1; k <= 25; ++k) {
        term = term * A / static_cast<double>(k);
        series += term;
    }
    CHECK((matlib::expm(A, 1.0) - series).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("expm semigroup property") {
    std::mt19937 rng(17);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix A(3, 3);
        for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = g(rng);
        A -= (matlib::spectral_abscissa(A) + 0.5) * Matrix::Identity(3, 3);
        if (A.cwiseAbs().rowwise().sum().maxCoeff() > 5.0) continue;
        const double t = uni(rng), s = uni(rng);
        Matrix lhs = matlib::expm(A, t + s);
        Matrix rhs = matlib::expm(A, t) * matlib::expm(A, s);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("eigenvalues of simple spectra") {
    auto e1 = matlib::eigenvalues(mat({{-1, 0}, {0, -5}}));
    std::vector<double> re{e1(0).real(), e1(1).real()};
    std::sort(re.begin(), re.end());
    CHECK(re[0] == doctest::Approx(-5.0));
    CHECK(re[1] == doctest::Approx(-1.0));

    auto e2 = matlib::eigenvalues(mat({{0, 1}, {-2, -3}}));
    std::vector<double> re2{e2(0).real(), e2(1).real()};
    std::sort(re2.begin(), re2.end());
    CHECK(re2[0] == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(re2[1] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(std::abs(e2(0).imag()) < 1e-10);
}

TEST_CASE("eigenvalues match characteristic polynomial roots for the 3-state model") {
    // root isolation oracle on det(sI - A) for the stable 3-state example plant
    Matrix A = mat({{-2, 0, 1}, {1, -5, 2}, {1, 0, -5.5}});
    // char poly: s^3 + c2 s^2 + c1 s + c0
    const double c2 = -A.trace();
    const double c1 = 0.5 * (A.trace() * A.trace() - (A * A).trace());
    const double c0 = -A.determinant();
    auto eigs = matlib::eigenvalues(A);
    for (Eigen::Index i = 0; i < 3; ++i) {
        auto s = eigs(i);
        CHECK(std::abs(s * s * s + c2 * s * s + c1 * s + c0) < 1e-7);
        CHECK(s.real() < 0.0);
    }
}

TEST_CASE("place_output_injection") {
    // already Hurwitz: zero gain admissible
    Matrix K0 = matlib::place_output_injection(-Matrix::Identity(2, 2), Matrix::Identity(2, 2), 0.1);
    CHECK(matlib::is_hurwitz(-Matrix::Identity(2, 2) + K0 * Matrix::Identity(2, 2)));

    // toy A_H from the interactor example: marginal mode at 0 needs injection
    Matrix AH = mat({{0, 0}, {-2, -4}});
    Matrix C = mat({{1, 0}});
    Matrix K = matlib::place_output_injection(AH, C, 0.5);
    CHECK(matlib::is_hurwitz(AH + K * C));

    // undetectable pair rejected
    Matrix Au = mat({{1, 0}, {0, -1}});
    Matrix Cu = mat({{0, 1}});
    CHECK_THROWS_AS(matlib::place_output_injection(Au, Cu, 0.5), NotDetectable);
}

TEST_CASE("place_output_injection output always passes its own Hurwitz claim") {
    std::mt19937 rng(23);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 4);
        Matrix A(n, n), C(1, n);
        for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = g(rng);
        for (Eigen::Index i = 0; i < n; ++i) C(0, i) = g(rng);
        if (!matlib::is_detectable(A, C)) continue;
        Matrix K = matlib::place_output_injection(A, C, 0.2);
        CHECK(matlib::is_hurwitz(A + K * C));
    }
}
