#include "l1ofc/runtime.hpp"

#include <cmath>

namespace l1ofc::runtime {

Vector proj(const Vector& estimate, const Vector& update, const ProjectionBounds& bounds) {
    const double eps = bounds.eps_proj;
    const double tmax2 = bounds.theta_max * bounds.theta_max;
    const double g = ((1.0 + eps) * estimate.squaredNorm() - tmax2) / (eps * tmax2);
    if (g < 0.0) return update;
    const Vector grad = (2.0 * (1.0 + eps) / (eps * tmax2)) * estimate;
    const double radial = grad.dot(update);
    if (radial <= 0.0) return update;
    return update - (g * radial / grad.squaredNorm()) * grad;
}

namespace {

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Controller::Controller(const PlantSpec& plant, const DesignArtifacts& art, const GammaGains& gains,
                       bool yhat_zero_init)
    : gains_(gains), yhat_zero_init_(yhat_zero_init) {
    n_ = plant.n();
    m_ = plant.m();
    p_ = plant.p();
    Am_ = plant.Am;
    Cm_ = plant.Cm;
    Bbar_ = art.Z.Bbar;
    H_ = art.H;
    Av_ = art.A_v;
    Kv_ = art.K_v;
    CmAm_ = plant.Cm * plant.Am;
    CmBbar_ = art.CmBbar;
    // Remark-8 variant replaces the P_v weighting of the cross term by the
    // same matrix, so L_ is unchanged; only the initialization differs.
    L_ = art.P_v.ldlt().solve(Am_.transpose() * Cm_.transpose() * art.P_y);
    Ey_ = Bbar_.transpose() * Cm_.transpose() * art.P_y;
    Kg_ = art.Kg;
    alpha_ = art.alpha;
    ctrl_ = art.ctrl_filter;
    zsys_ = art.Z.z_system();

    omega_c_ = 0.5 * (plant.omega_l + plant.omega_u);
    bnd_omega_ = {0.5 * (plant.omega_u - plant.omega_l), art.eps_proj};
    bnd_theta_ = {art.d_bar * (1.0 + art.eps_proj), art.eps_proj};
    bnd_sigma_ = {std::max(art.b_bar, 1e-12) * (1.0 + art.eps_proj), art.eps_proj};

    reset(Vector::Zero(p_));
}

void Controller::reset(const Vector& y0) {
    st_.vhat = Vector::Zero(n_);
    st_.yhat = yhat_zero_init_ ? Vector::Zero(p_) : y0;
    st_.omega_hat = omega_c_;
    st_.theta_hat = Vector::Zero(m_);
    st_.sigma_hat = Vector::Zero(m_);
    st_.xc = Vector::Zero(ctrl_.order());
    st_.xrz = Vector::Zero(zsys_.order());
    st_.xu = Vector::Zero(zsys_.order());
}

Vector Controller::control() const { return -(ctrl_.C * st_.xc); }

Vector Controller::uz() const { return zsys_.C * st_.xu + zsys_.D * control(); }

Vector Controller::xg_hat(const Vector& y) const {
    Vector xg(n_ + st_.xu.size());
    xg.head(n_) = st_.vhat + H_ * y;
    xg.tail(st_.xu.size()) = st_.xu;
    return xg;
}

Vector Controller::eta_hat(const Vector& y) const {
    return st_.omega_hat * uz() + st_.theta_hat * inf_norm(xg_hat(y)) + st_.sigma_hat;
}

Vector Controller::pack() const {
    Vector s(n_ + p_ + 1 + 2 * m_ + st_.xc.size() + st_.xrz.size() + st_.xu.size());
    Eigen::Index k = 0;
    s.segment(k, n_) = st_.vhat; k += n_;
    s.segment(k, p_) = st_.yhat; k += p_;
    s(k++) = st_.omega_hat;
    s.segment(k, m_) = st_.theta_hat; k += m_;
    s.segment(k, m_) = st_.sigma_hat; k += m_;
    s.segment(k, st_.xc.size()) = st_.xc; k += st_.xc.size();
    s.segment(k, st_.xrz.size()) = st_.xrz; k += st_.xrz.size();
    s.segment(k, st_.xu.size()) = st_.xu;
    return s;
}

void Controller::unpack(const Vector& s) {
    Eigen::Index k = 0;
    st_.vhat = s.segment(k, n_); k += n_;
    st_.yhat = s.segment(k, p_); k += p_;
    st_.omega_hat = s(k++);
    st_.theta_hat = s.segment(k, m_); k += m_;
    st_.sigma_hat = s.segment(k, m_); k += m_;
    st_.xc = s.segment(k, st_.xc.size()); k += st_.xc.size();
    st_.xrz = s.segment(k, st_.xrz.size()); k += st_.xrz.size();
    st_.xu = s.segment(k, st_.xu.size());
}

Vector Controller::deriv(const Vector& s, const Vector& y, const Vector& r) const {
    Eigen::Index k = 0;
    const auto vhat = s.segment(k, n_); k += n_;
    const auto yhat = s.segment(k, p_); k += p_;
    const double omega_hat = s(k++);
    const auto theta_hat = s.segment(k, m_); k += m_;
    const auto sigma_hat = s.segment(k, m_); k += m_;
    const Eigen::Index nc = st_.xc.size(), nrz = st_.xrz.size(), nu = st_.xu.size();
    const auto xc = s.segment(k, nc); k += nc;
    const auto xrz = s.segment(k, nrz); k += nrz;
    const auto xu = s.segment(k, nu);

    const Vector u = -(ctrl_.C * xc);
    const Vector u_z = zsys_.C * xu + zsys_.D * u;
    Vector xg(n_ + nu);
    xg.head(n_) = vhat + H_ * y;
    xg.tail(nu) = xu;
    const Vector ytil = yhat - y;
    const Vector eta = omega_hat * u_z + Vector(theta_hat) * inf_norm(xg) + sigma_hat;
    const Vector e_y = Ey_ * ytil;
    const Vector r_z = zsys_.C * xrz + zsys_.D * (Kg_ * r);

    Vector ds(s.size());
    k = 0;
    ds.segment(k, n_) = Av_ * xg.head(n_) - Kv_ * y - L_ * ytil; k += n_;
    ds.segment(k, p_) = -alpha_ * ytil + CmAm_ * xg.head(n_) + CmBbar_ * eta; k += p_;
    {
        Vector w(1), dw(1);
        w << omega_hat - omega_c_;
        dw << -(u_z.dot(e_y));
        ds(k++) = gains_.omega * proj(w, dw, bnd_omega_)(0);
    }
    ds.segment(k, m_) = gains_.theta * proj(theta_hat, -inf_norm(xg) * e_y, bnd_theta_); k += m_;
    ds.segment(k, m_) = gains_.sigma * proj(sigma_hat, -e_y, bnd_sigma_); k += m_;
    ds.segment(k, nc) = ctrl_.A * xc + ctrl_.B * (eta - r_z); k += nc;
    ds.segment(k, nrz) = zsys_.A * xrz + zsys_.B * (Kg_ * r); k += nrz;
    ds.segment(k, nu) = zsys_.A * xu + zsys_.B * u;
    return ds;
}

Vector Controller::step(const Vector& y, const Vector& r, double h) {
    const Vector u_apply = control();
    Vector s = pack();
    const Vector k1 = deriv(s, y, r);
    const Vector k2 = deriv(s + 0.5 * h * k1, y, r);
    const Vector k3 = deriv(s + 0.5 * h * k2, y, r);
    const Vector k4 = deriv(s + h * k3, y, r);
    s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!s.allFinite()) throw NonFiniteState("Controller::step: non-finite state");
    unpack(s);

    // discrete-time overshoot guards: the projection is exact only in
    // continuous time, so clamp back to the invariant sets after the step
    st_.omega_hat = std::clamp(st_.omega_hat, omega_c_ - bnd_omega_.theta_max,
                               omega_c_ + bnd_omega_.theta_max);
    const double tn = st_.theta_hat.norm();
    if (tn > bnd_theta_.theta_max) st_.theta_hat *= bnd_theta_.theta_max / tn;
    const double sn = st_.sigma_hat.norm();
    if (sn > bnd_sigma_.theta_max) st_.sigma_hat *= bnd_sigma_.theta_max / sn;
    return u_apply;
}

ReferenceSystem::ReferenceSystem(const PlantSpec& plant, const DesignArtifacts& art,
                                 double true_omega, design::UncertaintyFn f)
    : Am_(plant.Am), Bm_(plant.Bm), Cm_(plant.Cm), Kg_(art.Kg), omega_(true_omega),
      f_(std::move(f)) {
    lti::Poly den = art.D_tf.den;
    for (size_t i = 0; i < art.D_tf.num.size(); ++i) den[i] += true_omega * art.D_tf.num[i];
    StateSpaceSystem scalar = lti::tf_to_ss(lti::RationalTF{art.D_tf.num, den});
    const Eigen::Index m = plant.m(), ns = scalar.order();
    Matrix A = Matrix::Zero(ns * m, ns * m), B = Matrix::Zero(ns * m, m);
    Matrix C = Matrix::Zero(m, ns * m), D = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        A.block(i * ns, i * ns, ns, ns) = scalar.A;
        B.block(i * ns, i, ns, 1) = scalar.B;
        C.block(i, i * ns, 1, ns) = scalar.C;
        D(i, i) = scalar.D(0, 0);
    }
    C0_ = StateSpaceSystem(A, B, C, D);
    x_ = Vector::Zero(plant.n());
    xf_ = Vector::Zero(C0_.order());
}

Vector ReferenceSystem::f_of(const Vector& x, double t) const {
    if (!f_) return Vector::Zero(Bm_.cols());
    return f_(x, t);
}

Vector ReferenceSystem::u_of(const Vector& xf, const Vector& x, const Vector& r, double t) const {
    return C0_.C * xf + C0_.D * (Kg_ * r - f_of(x, t));
}

Vector ReferenceSystem::u(const Vector& r, double t) const { return u_of(xf_, x_, r, t); }

void ReferenceSystem::step(const Vector& r, double t, double h) {
    const Eigen::Index n = x_.size(), nf = xf_.size();
    auto deriv = [&](const Vector& s, double tau) {
        const Vector x = s.head(n), xf = s.tail(nf);
        const Vector fx = f_of(x, tau);
        const Vector u = C0_.C * xf + C0_.D * (Kg_ * r - fx);
        Vector ds(n + nf);
        ds.head(n) = Am_ * x + Bm_ * (omega_ * u + fx);
        ds.tail(nf) = C0_.A * xf + C0_.B * (Kg_ * r - fx);
        return ds;
    };
    Vector s(n + nf);
    s << x_, xf_;
    const Vector k1 = deriv(s, t);
    const Vector k2 = deriv(s + 0.5 * h * k1, t + 0.5 * h);
    const Vector k3 = deriv(s + 0.5 * h * k2, t + 0.5 * h);
    const Vector k4 = deriv(s + h * k3, t + h);
    s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!s.allFinite()) throw NonFiniteState("ReferenceSystem::step: non-finite state");
    x_ = s.head(n);
    xf_ = s.tail(nf);
}

}  // namespace l1ofc::runtime
