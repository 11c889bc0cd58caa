#include "mfrm/marginal.hpp"

#include <cmath>

#include "mfrm/errors.hpp"

namespace mfrm {

IndividualTerms make_individual_terms(const Model& model, const ChainState& s, int i, bool allow_diagonal) {
    IndividualTerms t;
    t.basis_index = model.basis_index(i);
    t.basis = &model.basis(t.basis_index);
    const Eigen::MatrixXd& Sigma = s.Sigma[i];
    t.diagonal = allow_diagonal && model.independent();
    if (t.diagonal) {
        t.P = Eigen::MatrixXd(Sigma.diagonal().cwiseInverse().asDiagonal());
    } else {
        Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
        if (llt.info() != Eigen::Success) throw NumericalError("Sigma_i is not positive definite");
        t.P = llt.solve(Eigen::MatrixXd::Identity(Sigma.rows(), Sigma.cols()));
    }
    // H^T R = H^T Y - (H^T 1) beta0^T
    Eigen::MatrixXd HtR = model.HtY(i) - t.basis->Ht1 * s.beta0.row(i);
    t.C = t.basis->Q.transpose() * HtR * t.P;
    return t;
}

namespace {

// Fixed-size kernels for small D; Dynamic handles the rest.
// Cholesky of g*P + diag(ilam) in place of L (lower). Returns prod of diag(L).
template <int DD>
double small_chol(const Eigen::Matrix<double, DD, DD>& P, double g, const Eigen::Matrix<double, DD, 1>& ilam,
                  Eigen::Matrix<double, DD, DD>& L) {
    const Eigen::Index D = P.rows();
    double prod = 1.0;
    for (Eigen::Index j = 0; j < D; ++j) {
        double s = g * P(j, j) + ilam(j);
        for (Eigen::Index l = 0; l < j; ++l) s -= L(j, l) * L(j, l);
        if (!(s > 0.0)) throw NumericalError("component precision is not positive definite");
        const double ljj = std::sqrt(s);
        L(j, j) = ljj;
        prod *= ljj;
        for (Eigen::Index i = j + 1; i < D; ++i) {
            double v = g * P(i, j);
            for (Eigen::Index l = 0; l < j; ++l) v -= L(i, l) * L(j, l);
            L(i, j) = v / ljj;
        }
    }
    return prod;
}

template <int DD>
void forward_solve(const Eigen::Matrix<double, DD, DD>& L, Eigen::Matrix<double, DD, 1>& r) {
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        double v = r(i);
        for (Eigen::Index l = 0; l < i; ++l) v -= L(i, l) * r(l);
        r(i) = v / L(i, i);
    }
}

template <int DD>
void backward_solve(const Eigen::Matrix<double, DD, DD>& L, Eigen::Matrix<double, DD, 1>& r) {
    for (Eigen::Index i = r.size() - 1; i >= 0; --i) {
        double v = r(i);
        for (Eigen::Index l = i + 1; l < r.size(); ++l) v -= L(l, i) * r(l);
        r(i) = v / L(i, i);
    }
}

template <int DD>
double weight_impl(const IndividualTerms& t, const Eigen::MatrixXd& theta_rot, const Eigen::VectorXd& lam2) {
    using Mat = Eigen::Matrix<double, DD, DD>;
    using Vec = Eigen::Matrix<double, DD, 1>;
    const Eigen::Index p = t.C.rows(), D = t.C.cols();
    const Eigen::VectorXd& g = t.basis->g;
    Vec ilam(D);
    double out = 0.0, lam_prod = 1.0;
    for (Eigen::Index d = 0; d < D; ++d) {
        ilam(d) = 1.0 / lam2(d);
        lam_prod *= lam2(d);
        out -= 0.5 * theta_rot.col(d).squaredNorm() * ilam(d);
    }
    out -= 0.5 * p * std::log(lam_prod);
    if (t.diagonal) {
        Vec pd(D);
        for (Eigen::Index d = 0; d < D; ++d) pd(d) = t.P(d, d);
        for (Eigen::Index k = 0; k < p; ++k) {
            double prod = 1.0;
            for (Eigen::Index d = 0; d < D; ++d) {
                const double a = g(k) * pd(d) + ilam(d);
                const double r = t.C(k, d) + theta_rot(k, d) * ilam(d);
                prod *= a;
                out += 0.5 * r * r / a;
            }
            out -= 0.5 * std::log(prod);
        }
        return out;
    }
    const Mat P = t.P;
    Mat L(D, D);
    Vec r(D);
    for (Eigen::Index k = 0; k < p; ++k) {
        const double prod = small_chol<DD>(P, g(k), ilam, L);
        for (Eigen::Index d = 0; d < D; ++d) r(d) = t.C(k, d) + theta_rot(k, d) * ilam(d);
        forward_solve<DD>(L, r);
        out += -std::log(prod) + 0.5 * r.squaredNorm();
    }
    return out;
}

template <int DD>
void dense_draw(const IndividualTerms& t, const Eigen::MatrixXd& theta_rot, const Eigen::ArrayXd& ilam_in,
                Eigen::MatrixXd& Brot, Rng& rng) {
    using Mat = Eigen::Matrix<double, DD, DD>;
    using Vec = Eigen::Matrix<double, DD, 1>;
    const Eigen::Index p = t.C.rows(), D = t.C.cols();
    const Mat P = t.P;
    const Vec ilam = ilam_in.matrix();
    const Eigen::VectorXd& g = t.basis->g;
    Mat L(D, D);
    Vec r(D);
    for (Eigen::Index k = 0; k < p; ++k) {
        small_chol<DD>(P, g(k), ilam, L);
        // mean A^{-1} r plus L^{-T} z in one back substitution: L^T x = L^{-1} r + z
        for (Eigen::Index d = 0; d < D; ++d) r(d) = t.C(k, d) + theta_rot(k, d) * ilam(d);
        forward_solve<DD>(L, r);
        for (Eigen::Index d = 0; d < D; ++d) r(d) += rng.normal();
        backward_solve<DD>(L, r);
        Brot.row(k) = r.transpose();
    }
}

template <int DD>
void dense_accumulate(const IndividualTerms& t, const Eigen::ArrayXd& ilam_in, Eigen::MatrixXd& W,
                      Eigen::MatrixXd& Lin) {
    using Mat = Eigen::Matrix<double, DD, DD>;
    using Vec = Eigen::Matrix<double, DD, 1>;
    const Eigen::Index p = t.C.rows(), D = t.C.cols();
    const Mat P = t.P;
    const Vec ilam = ilam_in.matrix();
    const Eigen::VectorXd& g = t.basis->g;
    Mat L(D, D), Ainv(D, D);
    Vec e(D);
    for (Eigen::Index k = 0; k < p; ++k) {
        small_chol<DD>(P, g(k), ilam, L);
        for (Eigen::Index c = 0; c < D; ++c) {
            e.setZero();
            e(c) = 1.0;
            forward_solve<DD>(L, e);
            backward_solve<DD>(L, e);
            Ainv.col(c) = e;
        }
        for (Eigen::Index d = 0; d < D; ++d)
            for (Eigen::Index c = 0; c < D; ++c)
                W(k, d * D + c) += (d == c ? ilam(d) : 0.0) - ilam(d) * Ainv(d, c) * ilam(c);
        for (Eigen::Index d = 0; d < D; ++d) e(d) = t.C(k, d);
        Lin.row(k) += (Ainv * e).transpose();
    }
}

}  // namespace

double log_marginal_weight(const IndividualTerms& t, const Eigen::MatrixXd& theta_rot,
                           const Eigen::VectorXd& lam2) {
    switch (t.C.cols()) {
        case 1: return weight_impl<1>(t, theta_rot, lam2);
        case 2: return weight_impl<2>(t, theta_rot, lam2);
        case 3: return weight_impl<3>(t, theta_rot, lam2);
        case 4: return weight_impl<4>(t, theta_rot, lam2);
        default: return weight_impl<Eigen::Dynamic>(t, theta_rot, lam2);
    }
}

Eigen::MatrixXd draw_coefficients(const IndividualTerms& t, const Eigen::MatrixXd& theta,
                                  const Eigen::VectorXd& lam2, Rng& rng) {
    const Eigen::Index p = t.C.rows(), D = t.C.cols();
    const auto& Q = t.basis->Q;
    const Eigen::VectorXd& g = t.basis->g;
    const Eigen::ArrayXd ilam = lam2.array().inverse();
    Eigen::MatrixXd theta_rot = Q.transpose() * theta;
    Eigen::MatrixXd Brot(p, D);
    if (t.diagonal) {
        for (Eigen::Index d = 0; d < D; ++d)
            for (Eigen::Index k = 0; k < p; ++k) {
                double a = g(k) * t.P(d, d) + ilam(d);
                double r = t.C(k, d) + theta_rot(k, d) * ilam(d);
                Brot(k, d) = r / a + rng.normal() / std::sqrt(a);
            }
    } else {
        switch (D) {
            case 1: dense_draw<1>(t, theta_rot, ilam, Brot, rng); break;
            case 2: dense_draw<2>(t, theta_rot, ilam, Brot, rng); break;
            case 3: dense_draw<3>(t, theta_rot, ilam, Brot, rng); break;
            case 4: dense_draw<4>(t, theta_rot, ilam, Brot, rng); break;
            default: dense_draw<Eigen::Dynamic>(t, theta_rot, ilam, Brot, rng);
        }
    }
    return Q * Brot;
}

ThetaSystem::ThetaSystem(int p, int D, int n_bases)
    : p_(p), D_(D), W_(n_bases, Eigen::MatrixXd::Zero(p, D * D)), lin_(n_bases, Eigen::MatrixXd::Zero(p, D)),
      used_(n_bases, false), basis_(n_bases, nullptr) {}

void ThetaSystem::add(const IndividualTerms& t, const Eigen::VectorXd& lam2) {
    const int b = t.basis_index;
    used_[b] = true;
    basis_[b] = t.basis;
    const Eigen::ArrayXd ilam = lam2.array().inverse();
    const Eigen::VectorXd& g = t.basis->g;
    auto& W = W_[b];
    auto& L = lin_[b];
    if (t.diagonal) {
        for (int d = 0; d < D_; ++d)
            for (int k = 0; k < p_; ++k) {
                double a = g(k) * t.P(d, d) + ilam(d);
                W(k, d * D_ + d) += ilam(d) - ilam(d) * ilam(d) / a;
                L(k, d) += t.C(k, d) / a;
            }
        return;
    }
    switch (D_) {
        case 1: dense_accumulate<1>(t, ilam, W, L); break;
        case 2: dense_accumulate<2>(t, ilam, W, L); break;
        case 3: dense_accumulate<3>(t, ilam, W, L); break;
        case 4: dense_accumulate<4>(t, ilam, W, L); break;
        default: dense_accumulate<Eigen::Dynamic>(t, ilam, W, L);
    }
}

void ThetaSystem::finalize(const Model& model, const Eigen::VectorXd& tau2, const Eigen::MatrixXd& mu,
                           const Eigen::VectorXd& lam2, Eigen::MatrixXd& prec, Eigen::VectorXd& lin) const {
    const int n = p_ * D_;
    prec = Eigen::MatrixXd::Zero(n, n);
    lin = Eigen::VectorXd::Zero(n);
    const Eigen::MatrixXd& K = model.K();
    for (int d = 0; d < D_; ++d) {
        prec.block(d * p_, d * p_, p_, p_) += K / tau2(d);
        lin.segment(d * p_, p_) += K * mu.col(d) / tau2(d);
    }
    for (std::size_t b = 0; b < W_.size(); ++b) {
        if (!used_[b]) continue;
        const auto& Q = basis_[b]->Q;
        for (int d = 0; d < D_; ++d)
            for (int e = 0; e < D_; ++e) {
                const auto w = W_[b].col(d * D_ + e);
                if (w.isZero(0.0)) continue;
                prec.block(d * p_, e * p_, p_, p_).noalias() += Q * w.asDiagonal() * Q.transpose();
            }
        Eigen::MatrixXd Lu = Q * lin_[b];
        for (int d = 0; d < D_; ++d) lin.segment(d * p_, p_) += Lu.col(d) / lam2(d);
    }
}

}  // namespace mfrm
