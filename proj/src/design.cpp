#include "l1ofc/design.hpp"

#include <cmath>
#include "json.hpp"
#include <sstream>

namespace l1ofc::design {

using matlib::eigenvalues;
using matlib::spectral_abscissa;

RationalTF FilterSpec::to_tf() const {
    lti::Poly den{1.0};
    for (int k = 0; k < integrators; ++k) den = lti::poly_mul(den, lti::Poly{0.0, 1.0});
    for (double p : poles) {
        if (p >= 0.0) throw ConfigError("FilterSpec: pole not strictly negative");
        den = lti::poly_mul(den, lti::Poly{1.0, 1.0 / (-p)});  // (s/a + 1), a = -p
    }
    return RationalTF{lti::Poly{gain}, den};
}

namespace {

lti::Poly poly_add(const lti::Poly& a, const lti::Poly& b) {
    lti::Poly out(std::max(a.size(), b.size()), 0.0);
    for (size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

// Faddeev-LeVerrier: characteristic polynomial and the adjugate expansion of
// (sI - A), giving the exact SISO transfer function of a small realization.
RationalTF ss_to_tf_siso(const StateSpaceSystem& G) {
    if (G.inputs() != 1 || G.outputs() != 1) throw DimensionMismatch("ss_to_tf_siso: SISO required");
    const Eigen::Index n = G.order();
    if (n == 0) return RationalTF{lti::Poly{G.D(0, 0)}, lti::Poly{1.0}};
    lti::Poly den(static_cast<size_t>(n) + 1, 0.0);
    den[static_cast<size_t>(n)] = 1.0;
    lti::Poly num(static_cast<size_t>(n) + 1, 0.0);
    Matrix M = Matrix::Identity(n, n);  // coefficient of s^{n-1} in adj(sI - A)
    for (Eigen::Index k = 1; k <= n; ++k) {
        num[static_cast<size_t>(n - k)] = (G.C * M * G.B)(0, 0);
        Matrix AM = G.A * M;
        const double a = -AM.trace() / static_cast<double>(k);
        den[static_cast<size_t>(n - k)] = a;
        M = AM + a * Matrix::Identity(n, n);
    }
    for (size_t i = 0; i <= static_cast<size_t>(n); ++i) num[i] += G.D(0, 0) * den[i];
    return RationalTF{num, den};
}

// Diagonal replication of a SISO system to m channels.
StateSpaceSystem replicate_diag(const StateSpaceSystem& G, Eigen::Index m) {
    if (m == 1) return G;
    const Eigen::Index n = G.order();
    Matrix A = Matrix::Zero(n * m, n * m), B = Matrix::Zero(n * m, m);
    Matrix C = Matrix::Zero(m, n * m), D = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        A.block(i * n, i * n, n, n) = G.A;
        B.block(i * n, i, n, 1) = G.B;
        C.block(i, i * n, 1, n) = G.C;
        D(i, i) = G.D(0, 0);
    }
    return StateSpaceSystem(A, B, C, D);
}

StateSpaceSystem identity_minus(const StateSpaceSystem& G) {
    return StateSpaceSystem(G.A, G.B, -G.C, Matrix::Identity(G.outputs(), G.outputs()) - G.D);
}

double kappa_m_of(const Matrix& Am) {
    const double lambda = -spectral_abscissa(Am);
    if (lambda <= 0.0) throw NotHurwitz("kappa_m: Am not Hurwitz");
    const double eigmax = eigenvalues(Am).cwiseAbs().maxCoeff();
    const double dt = std::min(0.01, 0.05 / std::max(eigmax, 1e-9));
    const Matrix Phi = matlib::expm(Am, dt);
    Matrix E = Matrix::Identity(Am.rows(), Am.cols());
    double km = 1.0;
    double t = 0.0;
    const double t_cap = 200.0 / lambda;
    while (t < t_cap) {
        E = Phi * E;
        t += dt;
        const double norm = E.cwiseAbs().rowwise().sum().maxCoeff();
        km = std::max(km, norm);
        if (norm < 1e-6 && t > 3.0 / lambda) break;
    }
    return km;
}

double inf_norm(const Matrix& M) {
    return M.size() ? M.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
}

}  // namespace

HAndAH compute_H_and_AH(const Matrix& Am, const Matrix& Cm, const Matrix& Bbar) {
    Matrix CmBbar = Cm * Bbar;
    Matrix H = Bbar * matlib::pinv_left(CmBbar);
    const Eigen::Index n = Am.rows();
    Matrix A_H = (Matrix::Identity(n, n) - H * Cm) * Am;
    const double annihilation = ((Matrix::Identity(n, n) - H * Cm) * Bbar).cwiseAbs().maxCoeff();
    if (annihilation > 1e-10 * std::max(1.0, Bbar.cwiseAbs().maxCoeff())) {
        throw RankDeficient("compute_H_and_AH: (I - H Cm) Bbar annihilation failed");
    }
    return {H, A_H};
}

PredictorGain synthesize_predictor_gain(const Matrix& A_H, const Matrix& Cm,
                                        const std::optional<Matrix>& override_Kv,
                                        const Matrix& Q, double desired_rate) {
    Matrix Kv;
    if (override_Kv) {
        Kv = *override_Kv;
    } else {
        Kv = matlib::place_output_injection(A_H, Cm, desired_rate);
    }
    Matrix Av = A_H + Kv * Cm;
    if (!matlib::is_hurwitz(Av)) throw NotHurwitz("synthesize_predictor_gain: A_v not Hurwitz");
    Matrix Pv = matlib::solve_lyapunov(Av, Q);
    return {Kv, Av, Pv};
}

KappaConstants kappa_constants(const Matrix& Am, const Matrix& H, const Matrix& Cm,
                               const Matrix& Pv, const Matrix& Py) {
    const Eigen::Index n = Am.rows();
    Matrix proj = Matrix::Identity(n, n) - H * Cm;
    Matrix Pbar = proj.transpose() * Pv * proj;
    Eigen::SelfAdjointEigenSolver<Matrix> pb(0.5 * (Pbar + Pbar.transpose()));
    Eigen::SelfAdjointEigenSolver<Matrix> py(0.5 * (Py + Py.transpose()));
    Eigen::SelfAdjointEigenSolver<Matrix> pv(0.5 * (Pv + Pv.transpose()));
    const double lmax_pbar = pb.eigenvalues().maxCoeff();
    KappaConstants out;
    out.kappa_m = kappa_m_of(Am);
    out.kappa_y = std::sqrt(static_cast<double>(n) * lmax_pbar / py.eigenvalues().minCoeff());
    out.kappa_v = std::sqrt(static_cast<double>(n) * lmax_pbar / pv.eigenvalues().minCoeff());
    out.Pbar_v = Pbar;
    return out;
}

GrowthBounds uncertainty_growth_bounds(const PlantSpec& plant, const InteractorRealization& Z,
                                       double rho_x) {
    if (rho_x <= 0.0) throw ConfigError("uncertainty_growth_bounds: rho_x must be positive");
    const double d_rho = plant.d_of_delta ? plant.d_of_delta(rho_x) : 0.0;
    const Eigen::Index n = plant.n();
    const double norm_Dz = inf_norm(Z.Dz);

    if (Z.nz() == 0) {
        // interactor-free reduction: T-terms drop
        return {norm_Dz * d_rho, norm_Dz * plant.b0};
    }

    Matrix Tz_dag = matlib::pinv_left(Z.Tz);
    Matrix CzTzDag = Z.Cz * Tz_dag;
    const double l1_T = lti::l1_norm(
        StateSpaceSystem(Z.Az, Z.Bz, Z.Tz, Matrix::Zero(n, Z.Bz.cols())));

    double d_bar = 0.0;
    const double mid = 0.5 * (plant.omega_l + plant.omega_u);
    for (double omega : {plant.omega_l, mid, plant.omega_u}) {
        Matrix Tg(n, n + Z.nz());
        Tg.leftCols(n) = Matrix::Identity(n, n);
        Tg.rightCols(Z.nz()) = omega * Z.Tz;
        d_bar = std::max(d_bar, inf_norm(CzTzDag * Tg) + norm_Dz * inf_norm(Tg) * d_rho);
    }
    const double b_bar = inf_norm(CzTzDag) * rho_x + norm_Dz * l1_T * d_rho * d_rho * rho_x +
                         norm_Dz * (l1_T * d_rho + 1.0) * plant.b0;
    return {d_bar, b_bar};
}

Feasibility filter_feasibility(const PlantSpec& plant, const std::vector<OmegaSet>& sets,
                               double kappa_m, double rho_lo_scale, double rho_hi_scale,
                               int grid_points) {
    double lo = 0.0;
    for (const auto& s : sets) {
        lo = std::max(lo, s.rho_ext + (kappa_m + s.kappa_x) * plant.rho0);
    }
    lo = std::max(lo * rho_lo_scale, 1e-6);

    auto margin_at = [&](double rho_r) {
        const double delta = rho_r + plant.gamma_bar;
        const double d_delta = plant.d_of_delta ? plant.d_of_delta(delta) : 0.0;
        const double L = (delta / rho_r) * d_delta;
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& s : sets) {
            const double rho_int = (kappa_m + s.kappa_x) * plant.rho0;
            const double numer = rho_r - s.rho_ext - rho_int;
            double m;
            if (L <= 0.0) {
                m = numer;  // f == 0 limit: strict feasibility once rho_r clears the offsets
            } else {
                m = numer / (L * rho_r) - s.l1_G;
            }
            worst = std::min(worst, m);
        }
        return worst;
    };

    double best_rho = 0.0, best_margin = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid_points; ++k) {
        const double rho_r = lo * std::pow(rho_hi_scale, static_cast<double>(k) / (grid_points - 1));
        const double m = margin_at(rho_r);
        if (m > best_margin) {
            best_margin = m;
            best_rho = rho_r;
        }
    }
    if (best_margin <= 0.0) {
        std::ostringstream oss;
        oss << "filter_feasibility: no rho_r satisfies the L1-norm condition"
            << " (best margin " << best_margin << " at rho_r " << best_rho
            << "; ||G||_L1 = " << sets.front().l1_G << ", rho_ext = " << sets.front().rho_ext << ")";
        throw Infeasible(oss.str());
    }
    return {best_rho, best_margin};
}

AlphaSplit alpha_condition(const Matrix& Py, const Matrix& CmBbar, double d_bar, double eps_q,
                           double alpha, Eigen::Index m) {
    Matrix R = matlib::cholesky_upper(Py);
    Matrix T = R * CmBbar;
    Eigen::JacobiSVD<Matrix> svd(T);
    const double two_norm = svd.singularValues()(0);
    const double alpha_phi = (static_cast<double>(m) * d_bar * d_bar / eps_q) * two_norm * two_norm;
    const double alpha_y = 2.0 * alpha - alpha_phi;
    if (alpha_y <= 0.0) {
        std::ostringstream oss;
        oss << "alpha_condition: alpha_y <= 0; minimal admissible alpha is " << 0.5 * alpha_phi;
        throw AlphaTooSmall(oss.str());
    }
    return {alpha_phi, alpha_y};
}

double DesignArtifacts::envelope(double t, double x0_norm, double Gamma) const {
    return kappa_y * std::exp(-0.5 * lambda1 * t) * x0_norm +
           std::sqrt(theta1 / lambda_min_Py) / std::sqrt(Gamma);
}

void performance_bounds(const PlantSpec& plant, DesignArtifacts& art, double Gamma) {
    const OmegaSet& w = art.worst();
    const double L = art.L_rho_r;
    const double GL = w.l1_G * L;
    if (GL >= 1.0) throw Infeasible("performance_bounds: ||G||_L1 * L_rho_r >= 1");

    art.rho_int = (art.kappa_m + w.kappa_x) * plant.rho0;
    art.rho_ext = w.rho_ext;
    art.kappa_x = w.kappa_x;

    art.rho_rx = art.rho_r - art.rho_int / (1.0 - GL);
    art.rho_ru = w.l1_C0 * (L * art.rho_rx + plant.b0) + w.l1_C0Kg * plant.r_linf;

    art.gamma_x0 = (w.kappa_x + art.kappa_m) / (1.0 - GL);
    art.gamma_u0 = w.l1_C0 * L * art.gamma_x0 + (w.l1_C1 * art.kappa_y + w.l1_C2 * art.kappa_v);
    const double sy = 1.0 / std::sqrt(art.lambda_min_Py);
    const double sv = 1.0 / std::sqrt(art.lambda_min_Pv);
    art.gamma_x = (sy * w.l1_H1 + sv * w.l1_H2) / (1.0 - GL);
    art.gamma_u = w.l1_C0 * L * art.gamma_x + w.l1_C1 * sy + w.l1_C2 * sv;

    // epsilon_gamma must satisfy gamma_x eps < gamma_bar and gamma_u eps < gamma_bar
    // for every omega in the interval; take the worst over the sampled sets.
    double gmax = 0.0;
    for (const auto& s : art.omega_sets) {
        const double gl = s.l1_G * L;
        if (gl >= 1.0) throw Infeasible("performance_bounds: condition fails at an omega sample");
        const double gx = (sy * s.l1_H1 + sv * s.l1_H2) / (1.0 - gl);
        const double gu = s.l1_C0 * L * gx + s.l1_C1 * sy + s.l1_C2 * sv;
        gmax = std::max({gmax, gx, gu});
    }
    art.eps_gamma = 0.99 * plant.gamma_bar / std::max(gmax, 1e-12);

    art.rho_dx = art.gamma_x0 * plant.rho0 + plant.gamma_bar;
    art.rho_du = art.gamma_u0 * plant.rho0 + plant.gamma_bar;
    art.rho_u = art.rho_ru + art.rho_du;

    Matrix Qv = art.Q - art.eps_q * Matrix::Identity(art.Q.rows(), art.Q.cols());
    Eigen::SelfAdjointEigenSolver<Matrix> qv(0.5 * (Qv + Qv.transpose()));
    Eigen::SelfAdjointEigenSolver<Matrix> pv(0.5 * (art.P_v + art.P_v.transpose()));
    if (qv.eigenvalues().minCoeff() <= 0.0) throw NotPositiveDefinite("performance_bounds: Q_v not PD");
    art.lambda1 = std::min(qv.eigenvalues().minCoeff() / pv.eigenvalues().maxCoeff(), art.alpha_y);

    const double m = static_cast<double>(plant.m());
    art.theta0 = 4.0 * (plant.omega_u * plant.omega_u + m * art.d_bar * art.d_bar +
                        m * art.b_bar * art.b_bar);
    art.theta1 = art.theta0 + 4.0 * m * (art.d_bar * art.l_theta + art.b_bar * art.l_sigma) / art.lambda1;
    art.gamma_min = art.theta1 / (art.eps_gamma * art.eps_gamma);

    art.gamma_ok = true;
    if (Gamma < art.gamma_min) {
        std::ostringstream oss;
        oss << "performance_bounds: Gamma " << Gamma << " below floor " << art.gamma_min;
        throw GammaTooSmall(oss.str());
    }
}

namespace {

OmegaSet build_omega_set(const PlantSpec& plant, const RationalTF& D_tf, const RationalTF& Z_tf,
                         double alpha, const Matrix& CmBbar_dagger, const Matrix& Kg, double omega) {
    const Eigen::Index n = plant.n(), m = plant.m();
    OmegaSet s;
    s.omega = omega;

    lti::Poly omega_num = D_tf.num;
    for (auto& c : omega_num) c *= omega;
    RationalTF c0{D_tf.num, poly_add(D_tf.den, omega_num)};
    if (matlib::spectral_abscissa(lti::tf_to_ss(c0).A) >= 0.0) {
        throw Infeasible("build_omega_set: C(s) unstable at an omega sample");
    }
    s.C0 = replicate_diag(lti::tf_to_ss(c0), m);
    s.C = s.C0.premultiply(omega * Matrix::Identity(m, m));

    StateSpaceSystem H0(plant.Am, plant.Bm, Matrix::Identity(n, n), Matrix::Zero(n, m));
    s.Hr = lti::series(H0, s.C).postmultiply(Kg);
    s.G = lti::series(H0, identity_minus(s.C));

    // joint realization of C0(s) Z^{-1}(s) per channel
    RationalTF c0z{lti::poly_mul(c0.num, Z_tf.den), lti::poly_mul(c0.den, Z_tf.num)};
    if (!c0z.strictly_proper()) {
        throw ImproperRealization("build_omega_set: C0(s) Z^{-1}(s) not strictly proper");
    }
    const double hf = std::abs(c0z.eval(lti::Complex(0.0, 1e6)));
    if (hf >= 1e-3) {
        throw ImproperRealization("build_omega_set: C0 Z^{-1} high-frequency gain not small");
    }
    RationalTF c1_tf{lti::poly_mul(c0z.num, lti::Poly{alpha, 1.0}), c0z.den};
    if (!c1_tf.proper()) throw ImproperRealization("build_omega_set: (s+alpha) C0 Z^{-1} improper");

    s.C1 = replicate_diag(lti::tf_to_ss(c1_tf), m).postmultiply(CmBbar_dagger);
    s.C2 = replicate_diag(lti::tf_to_ss(c0z), m)
               .postmultiply(CmBbar_dagger * plant.Cm * plant.Am);
    s.H1 = lti::series(H0, s.C1).premultiply(omega * Matrix::Identity(n, n));
    s.H2 = lti::series(H0, s.C2).premultiply(omega * Matrix::Identity(n, n));

    s.l1_G = lti::l1_norm(s.G);
    s.l1_Hr = lti::l1_norm(s.Hr);
    s.l1_H1 = lti::l1_norm(s.H1);
    s.l1_H2 = lti::l1_norm(s.H2);
    s.l1_C0 = lti::l1_norm(s.C0);
    s.l1_C0Kg = lti::l1_norm(s.C0.postmultiply(Kg));
    s.l1_C1 = lti::l1_norm(s.C1);
    s.l1_C2 = lti::l1_norm(s.C2);
    return s;
}

}  // namespace

DesignArtifacts synthesize(const PlantSpec& plant, const DesignOptions& options, double Gamma) {
    const Eigen::Index n = plant.n(), m = plant.m(), p = plant.p();
    if (plant.Cm.cols() != n || plant.Am.cols() != n || plant.Bm.rows() != n) {
        throw DimensionMismatch("synthesize: plant dimensions inconsistent");
    }
    if (p < m) throw ConfigError("synthesize: p >= m required");
    if (!(plant.omega_l > 0.0 && plant.omega_l < plant.omega_u)) {
        throw ConfigError("synthesize: need 0 < omega_l < omega_u");
    }
    if (!matlib::is_hurwitz(plant.Am)) throw NotHurwitz("synthesize: Am not Hurwitz");
    if (!lti::is_controllable(plant.Am, plant.Bm)) throw NotMinimal("synthesize: (Am, Bm) uncontrollable");
    if (!lti::is_observable(plant.Am, plant.Cm)) throw NotMinimal("synthesize: (Am, Cm) unobservable");

    // Assumption 1: no unstable transmission zeros of M(s)
    StateSpaceSystem M(plant.Am, plant.Bm, plant.Cm, Matrix::Zero(p, m));
    for (auto z : lti::transmission_zeros(M)) {
        if (z.real() >= 0.0) throw ConfigError("synthesize: M(s) has an unstable transmission zero");
    }

    DesignArtifacts art;

    // interactor
    StateSpaceSystem Zss = options.interactor.explicit_Z
                               ? *options.interactor.explicit_Z
                               : replicate_diag(interactor::build_scalar_interactor(
                                                    options.interactor.poles, options.interactor.dc_gain),
                                                m);
    art.Z = interactor::solve_coupling(plant.Am, plant.Bm, plant.Cm, Zss);
    if (m == 1) {
        art.Z_tf = ss_to_tf_siso(StateSpaceSystem(art.Z.Az, art.Z.Bz, art.Z.Cz, art.Z.Dz));
    } else {
        if (options.interactor.explicit_Z) {
            throw ConfigError("synthesize: explicit Z with m > 1 unsupported; use the diagonal chain config");
        }
        art.Z_tf = ss_to_tf_siso(interactor::build_scalar_interactor(options.interactor.poles,
                                                                     options.interactor.dc_gain));
    }
    art.D_tf = options.filter.to_tf();
    art.D_filter = replicate_diag(lti::tf_to_ss(art.D_tf), m);

    // control-law filter D(s) Z^{-1}(s), realized jointly (must be strictly proper)
    RationalTF dz{lti::poly_mul(art.D_tf.num, art.Z_tf.den), lti::poly_mul(art.D_tf.den, art.Z_tf.num)};
    if (!dz.strictly_proper()) {
        throw ImproperRealization("synthesize: D(s) Z^{-1}(s) not strictly proper");
    }
    art.ctrl_filter = replicate_diag(lti::tf_to_ss(dz), m);

    // H, A_H, K_v, A_v, P_v
    art.CmBbar = plant.Cm * art.Z.Bbar;
    art.CmBbar_dagger = matlib::pinv_left(art.CmBbar);
    auto hah = compute_H_and_AH(plant.Am, plant.Cm, art.Z.Bbar);
    art.H = hah.H;
    art.A_H = hah.A_H;
    art.Q = options.overrides.Q ? *options.overrides.Q : Matrix(10.0 * Matrix::Identity(n, n));
    auto pg = synthesize_predictor_gain(art.A_H, plant.Cm, options.overrides.Kv, art.Q,
                                        options.predictor_rate);
    art.K_v = pg.K_v;
    art.A_v = pg.A_v;
    art.P_v = pg.P_v;
    art.P_y = options.overrides.Py ? *options.overrides.Py : Matrix(Matrix::Identity(p, p));
    {
        Eigen::SelfAdjointEigenSolver<Matrix> q(art.Q);
        art.eps_q = 0.1 * q.eigenvalues().minCoeff();
        Eigen::SelfAdjointEigenSolver<Matrix> py(art.P_y);
        art.lambda_min_Py = py.eigenvalues().minCoeff();
        Eigen::SelfAdjointEigenSolver<Matrix> pv(art.P_v);
        art.lambda_min_Pv = pv.eigenvalues().minCoeff();
    }

    auto kc = kappa_constants(plant.Am, art.H, plant.Cm, art.P_v, art.P_y);
    art.kappa_m = kc.kappa_m;
    art.kappa_y = kc.kappa_y;
    art.kappa_v = kc.kappa_v;
    art.Pbar_v = kc.Pbar_v;
    art.Kg = options.Kg;
    art.eps_proj = options.overrides.eps_proj.value_or(0.1);

    // alpha iteration: C1 depends on alpha, alpha_phi depends on the growth
    // bounds, which depend on the feasible rho_r found with the C1 norms.
    double alpha = options.overrides.alpha.value_or(10.0);
    const bool alpha_fixed = options.overrides.alpha.has_value();
    for (int iter = 0;; ++iter) {
        art.omega_sets.clear();
        const double mid = 0.5 * (plant.omega_l + plant.omega_u);
        for (double omega : {plant.omega_l, mid, plant.omega_u}) {
            art.omega_sets.push_back(build_omega_set(plant, art.D_tf, art.Z_tf, alpha,
                                                     art.CmBbar_dagger, art.Kg, omega));
            auto& s = art.omega_sets.back();
            s.kappa_x = s.l1_H1 * art.kappa_y + s.l1_H2 * art.kappa_v;
            s.rho_ext = s.l1_Hr * plant.r_linf + s.l1_G * plant.b0;
        }

        auto feas = filter_feasibility(plant, art.omega_sets, art.kappa_m);
        art.rho_r = feas.rho_r;
        art.feasibility_margin = feas.margin;
        art.rho_x = art.rho_r + plant.gamma_bar;
        {
            const double delta = art.rho_x;
            const double d_delta = plant.d_of_delta ? plant.d_of_delta(delta) : 0.0;
            art.L_rho_r = (delta / art.rho_r) * d_delta;
        }

        auto gb = uncertainty_growth_bounds(plant, art.Z, art.rho_x);
        art.d_bar = gb.d_bar;
        art.b_bar = gb.b_bar;

        try {
            auto as = alpha_condition(art.P_y, art.CmBbar, art.d_bar, art.eps_q, alpha, m);
            art.alpha = alpha;
            art.alpha_phi = as.alpha_phi;
            art.alpha_y = as.alpha_y;
            break;
        } catch (const AlphaTooSmall&) {
            if (alpha_fixed || iter >= 8) throw;
            Matrix R = matlib::cholesky_upper(art.P_y);
            Eigen::JacobiSVD<Matrix> svd(Matrix(R * art.CmBbar));
            const double tn = svd.singularValues()(0);
            const double aphi = (static_cast<double>(m) * art.d_bar * art.d_bar / art.eps_q) * tn * tn;
            alpha = 0.55 * aphi;
        }
    }

    // binding omega: smallest margin at the chosen rho_r
    {
        double worst = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < art.omega_sets.size(); ++i) {
            const auto& s = art.omega_sets[i];
            const double rho_int = (art.kappa_m + s.kappa_x) * plant.rho0;
            const double mgn = (art.rho_r - s.rho_ext - rho_int) /
                                   std::max(art.L_rho_r * art.rho_r, 1e-12) - s.l1_G;
            if (mgn < worst) {
                worst = mgn;
                art.binding = i;
            }
        }
    }

    // rate bounds on the Lemma-2 parameterization; heuristic defaults, config-overridable
    art.l_theta = options.overrides.l_theta.value_or(
        art.d_bar * std::abs(spectral_abscissa(plant.Am)));
    art.l_sigma = options.overrides.l_sigma.value_or(
        (plant.b_of_delta ? plant.b_of_delta(art.rho_x) : 0.0) +
        art.d_bar * (inf_norm(plant.Am) * art.rho_x + inf_norm(plant.Bm) * art.b_bar));

    art.gamma = Gamma;
    try {
        performance_bounds(plant, art, Gamma);
    } catch (const GammaTooSmall&) {
        art.gamma_ok = false;  // all constants are filled; only the gate tripped
    }
    return art;
}

namespace {
nlohmann::json mat_json(const Matrix& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        rows.push_back(r);
    }
    return rows;
}
}  // namespace

std::string DesignArtifacts::to_json() const {
    nlohmann::json j;
    j["interactor"] = {{"Az", mat_json(Z.Az)}, {"Bz", mat_json(Z.Bz)}, {"Cz", mat_json(Z.Cz)},
                       {"Dz", mat_json(Z.Dz)}, {"Tz", mat_json(Z.Tz)}, {"Bbar", mat_json(Z.Bbar)}};
    j["H"] = mat_json(H);
    j["A_H"] = mat_json(A_H);
    j["A_v"] = mat_json(A_v);
    j["K_v"] = mat_json(K_v);
    j["P_v"] = mat_json(P_v);
    j["P_y"] = mat_json(P_y);
    j["Q"] = mat_json(Q);
    j["Kg"] = mat_json(Kg);
    j["constants"] = {
        {"eps_q", eps_q},         {"alpha", alpha},         {"alpha_phi", alpha_phi},
        {"alpha_y", alpha_y},     {"kappa_m", kappa_m},     {"kappa_y", kappa_y},
        {"kappa_v", kappa_v},     {"kappa_x", kappa_x},     {"rho_r", rho_r},
        {"rho_x", rho_x},         {"rho_ext", rho_ext},     {"rho_int", rho_int},
        {"d_bar", d_bar},         {"b_bar", b_bar},         {"l_theta", l_theta},
        {"l_sigma", l_sigma},     {"rho_rx", rho_rx},       {"rho_ru", rho_ru},
        {"rho_u", rho_u},         {"rho_dx", rho_dx},       {"rho_du", rho_du},
        {"gamma_x0", gamma_x0},   {"gamma_u0", gamma_u0},   {"gamma_x", gamma_x},
        {"gamma_u", gamma_u},     {"eps_gamma", eps_gamma}, {"lambda1", lambda1},
        {"theta0", theta0},       {"theta1", theta1},       {"gamma_min", gamma_min},
        {"L_rho_r", L_rho_r},     {"feasibility_margin", feasibility_margin},
        {"gamma", gamma},         {"gamma_ok", gamma_ok},
    };
    nlohmann::json norms = nlohmann::json::array();
    for (const auto& s : omega_sets) {
        norms.push_back({{"omega", s.omega}, {"G", s.l1_G}, {"Hr", s.l1_Hr}, {"H1", s.l1_H1},
                         {"H2", s.l1_H2}, {"C0", s.l1_C0}, {"C0Kg", s.l1_C0Kg}, {"C1", s.l1_C1},
                         {"C2", s.l1_C2}});
    }
    j["l1_norms"] = norms;
    j["binding_omega"] = omega_sets.empty() ? 0.0 : worst().omega;
    return j.dump(2);
}

std::string DesignArtifacts::report_text() const {
    std::ostringstream os;
    os << "design report\n";
    os << "  rho_r = " << rho_r << "  (margin " << feasibility_margin << ")\n";
    os << "  rho_x = " << rho_x << "  rho_u = " << rho_u << "\n";
    os << "  rho_rx = " << rho_rx << "  rho_ru = " << rho_ru << "\n";
    os << "  rho_dx = " << rho_dx << "  rho_du = " << rho_du << "\n";
    os << "  d_bar = " << d_bar << "  b_bar = " << b_bar << "\n";
    os << "  kappa_m = " << kappa_m << "  kappa_y = " << kappa_y << "  kappa_v = " << kappa_v
       << "  kappa_x = " << kappa_x << "\n";
    os << "  alpha = " << alpha << "  alpha_phi = " << alpha_phi << "  alpha_y = " << alpha_y << "\n";
    os << "  lambda1 = " << lambda1 << "  theta0 = " << theta0 << "  theta1 = " << theta1 << "\n";
    os << "  eps_gamma = " << eps_gamma << "  Gamma_min = " << gamma_min << "\n";
    for (const auto& s : omega_sets) {
        os << "  omega " << s.omega << ": ||G|| = " << s.l1_G << "  ||Hr|| = " << s.l1_Hr
           << "  ||H1|| = " << s.l1_H1 << "  ||H2|| = " << s.l1_H2 << "\n";
    }
    return os.str();
}

}  // namespace l1ofc::design
