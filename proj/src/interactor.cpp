#include "l1ofc/interactor.hpp"

#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

namespace l1ofc::interactor {

StateSpaceSystem build_scalar_interactor(const std::vector<double>& poles, double dc_gain) {
    if (dc_gain == 0.0) throw ConfigError("build_scalar_interactor: dc_gain must be nonzero");
    if (poles.empty()) {
        return StateSpaceSystem::gain(Matrix::Constant(1, 1, dc_gain));
    }
    lti::Poly num{dc_gain};
    for (double p : poles) {
        if (p >= 0.0) throw UnstablePoleRequested("build_scalar_interactor: pole not strictly negative");
        num[0] *= -p;
    }
    lti::RationalTF tf{num, lti::poly_from_roots(poles)};
    return lti::tf_to_ss(tf);
}

RankReport check_interactor_need(const Matrix& Am, const Matrix& Bm, const Matrix& Cm) {
    RankReport rep;
    const Eigen::Index m = Bm.cols();
    rep.rank_CmBm = matlib::numerical_rank(Cm * Bm);
    rep.needs_interactor = rep.rank_CmBm < m;
    Matrix Ak = Matrix::Identity(Am.rows(), Am.cols());
    for (int k = 0; k < static_cast<int>(Am.rows()); ++k) {
        if (matlib::numerical_rank(Cm * Ak * Bm) == m) {
            rep.first_nonzero_markov = k;
            return rep;
        }
        Ak = Am * Ak;
    }
    rep.first_nonzero_markov = static_cast<int>(Am.rows());
    return rep;
}

InteractorRealization solve_coupling(const Matrix& Am, const Matrix& Bm, const Matrix& Cm,
                                     const StateSpaceSystem& Z) {
    const Eigen::Index n = Am.rows();
    const Eigen::Index m = Bm.cols();
    const Eigen::Index p = Cm.rows();
    const Eigen::Index nz = Z.order();
    if (Z.inputs() != m || Z.outputs() != m) throw DimensionMismatch("solve_coupling: Z must be m x m");

    InteractorRealization out;
    out.Az = Z.A;
    out.Bz = Z.B;
    out.Cz = Z.C;
    out.Dz = Z.D;

    if (nz == 0) {
        // Z = constant gain: Tz empty, Bbar = Bm Dz^{-1}; requires Cm Bm full rank.
        Eigen::FullPivLU<Matrix> lu(Z.D);
        if (!lu.isInvertible()) throw SingularCoupling("solve_coupling: constant Z with singular Dz");
        out.Tz = Matrix::Zero(n, 0);
        out.Bbar = Bm * lu.inverse();
        if (matlib::numerical_rank(Cm * out.Bbar) < m) {
            throw InteractorMismatch("solve_coupling: Cm Bbar rank-deficient for constant Z");
        }
        return out;
    }

    if (!matlib::is_hurwitz(Z.A)) throw UnstablePoleRequested("solve_coupling: Az not Hurwitz");
    {
        Eigen::FullPivLU<Matrix> lu(Z.A);
        if (!lu.isInvertible()) throw SingularCoupling("solve_coupling: singular Az rejected");
    }
    // eigenvalue-overlap guard (Remark on uniqueness of the Sylvester solve)
    auto ea = matlib::eigenvalues(Am);
    auto ez = matlib::eigenvalues(Z.A);
    for (Eigen::Index i = 0; i < ea.size(); ++i) {
        for (Eigen::Index j = 0; j < ez.size(); ++j) {
            if (std::abs(ea(i) - ez(j)) < 1e-8 * (1.0 + std::abs(ea(i)))) {
                throw SingularCoupling("solve_coupling: eig(Az) intersects eig(Am)");
            }
        }
    }

    // Unknown w = [vec(Tz); vec(Bbar)] (column-major), rows stacked from:
    //   Am Tz - Tz Az - Bbar Cz = 0   (n*nz rows)
    //   Tz Bz + Bbar Dz = Bm          (n*m rows)
    //   Cm Tz = 0                     (p*nz rows)
    const Eigen::Index nT = n * nz, nB = n * m;
    const Eigen::Index rows = n * nz + n * m + p * nz;
    Matrix S = Matrix::Zero(rows, nT + nB);
    Vector rhs = Vector::Zero(rows);
    const Matrix In = Matrix::Identity(n, n);
    const Matrix Inz = Matrix::Identity(nz, nz);

    S.block(0, 0, n * nz, nT) =
        Eigen::kroneckerProduct(Inz, Am).eval() - Eigen::kroneckerProduct(Z.A.transpose(), In).eval();
    S.block(0, nT, n * nz, nB) = -Eigen::kroneckerProduct(Z.C.transpose(), In).eval();
    S.block(n * nz, 0, n * m, nT) = Eigen::kroneckerProduct(Z.B.transpose(), In).eval();
    S.block(n * nz, nT, n * m, nB) = Eigen::kroneckerProduct(Z.D.transpose(), In).eval();
    rhs.segment(n * nz, n * m) = Eigen::Map<const Vector>(Bm.data(), n * m);
    S.block(n * nz + n * m, 0, p * nz, nT) = Eigen::kroneckerProduct(Inz, Cm).eval();

    Eigen::ColPivHouseholderQR<Matrix> qr(S);
    if (qr.rank() < nT + nB) throw SingularCoupling("solve_coupling: vectorized system rank-deficient");
    Vector w = qr.solve(rhs);
    out.Tz = Eigen::Map<Matrix>(w.data(), n, nz);
    out.Bbar = Eigen::Map<Matrix>(w.data() + nT, n, m);

    // Post-verify every identity block of the coupling relations.
    const double scale = std::max({1.0, Am.cwiseAbs().maxCoeff(), Bm.cwiseAbs().maxCoeff()});
    const double tol = 1e-8 * scale;
    const double r1 = (Am * out.Tz - out.Tz * Z.A - out.Bbar * Z.C).cwiseAbs().maxCoeff();
    const double r2 = (out.Tz * Z.B + out.Bbar * Z.D - Bm).cwiseAbs().maxCoeff();
    const double r3 = (Cm * out.Tz).cwiseAbs().maxCoeff();
    const double r4 = (Cm * Am * out.Tz - Cm * out.Bbar * Z.C).cwiseAbs().maxCoeff();
    const double r5 = (Cm * Bm - Cm * out.Bbar * Z.D).cwiseAbs().maxCoeff();
    if (r1 > tol || r2 > tol || r3 > tol || r4 > tol || r5 > tol) {
        throw InteractorMismatch("solve_coupling: identity residuals above tolerance; Z is not a right interactor of sM(s)");
    }
    if (matlib::numerical_rank(out.Tz) < nz) {
        throw InteractorMismatch("solve_coupling: Tz not full column rank");
    }
    if (matlib::numerical_rank(Cm * out.Bbar) < m) {
        throw InteractorMismatch("solve_coupling: Cm Bbar not full column rank");
    }

    // pencil condition: [[-sI+Az, Bz],[Cz, Dz]] nonsingular at sample points
    for (int k = -10; k < 10; ++k) {
        const lti::Complex s(std::pow(10.0, 0.5 * k), std::pow(10.0, 0.35 * k));
        Eigen::MatrixXcd pencil(nz + m, nz + m);
        pencil.topLeftCorner(nz, nz) = Z.A.cast<lti::Complex>() - s * Eigen::MatrixXcd::Identity(nz, nz);
        pencil.topRightCorner(nz, m) = Z.B.cast<lti::Complex>();
        pencil.bottomLeftCorner(m, nz) = Z.C.cast<lti::Complex>();
        pencil.bottomRightCorner(m, m) = Z.D.cast<lti::Complex>();
        if (std::abs(pencil.determinant()) < 1e-12) {
            throw InteractorMismatch("solve_coupling: interactor pencil loses rank");
        }
    }
    return out;
}

CascadeTraces cascade_decompose(const Matrix& Am, const Matrix& /*Bm*/, const Matrix& Cm,
                                const InteractorRealization& Z, const SignalTrace& input,
                                const Vector& x0) {
    const Eigen::Index nz = Z.nz();
    const Eigen::Index nv = Am.rows();
    const Eigen::Index m = Z.Bbar.cols();
    // Integrate the cascade as one augmented system so the intermediate
    // signal feeding the v-subsystem is not artificially held between steps.
    Matrix Aa = Matrix::Zero(nz + nv, nz + nv);
    Matrix Ba = Matrix::Zero(nz + nv, m);
    if (nz > 0) {
        Aa.topLeftCorner(nz, nz) = Z.Az;
        Aa.bottomLeftCorner(nv, nz) = Z.Bbar * Z.Cz;
        Ba.topRows(nz) = Z.Bz;
    }
    Aa.bottomRightCorner(nv, nv) = Am;
    Ba.bottomRows(nv) = Z.Bbar * Z.Dz;

    Vector xa0 = Vector::Zero(nz + nv);
    xa0.tail(nv) = x0;
    StateSpaceSystem aug(Aa, Ba, Matrix::Identity(nz + nv, nz + nv), Matrix::Zero(nz + nv, m));
    SignalTrace xa = lti::simulate_lti(aug, input, xa0);

    CascadeTraces out;
    out.xz.step = input.step;
    out.xv.step = input.step;
    out.yv.step = input.step;
    for (const auto& x : xa.values) {
        out.xz.values.push_back(x.head(nz));
        out.xv.values.push_back(x.tail(nv));
        out.yv.values.push_back(Cm * x.tail(nv));
    }
    return out;
}

}  // namespace l1ofc::interactor
