#include "mfrm/randdist.hpp"

#include <cmath>
#include <limits>

#include "mfrm/errors.hpp"
#include "mfrm/special.hpp"

namespace mfrm {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& m, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + ": matrix not SPD");
    return llt;
}
}  // namespace

Eigen::VectorXd sample_mvn_prec(const Eigen::VectorXd& mean, const Eigen::MatrixXd& prec, Rng& rng) {
    auto llt = checked_llt(prec, "sample_mvn_prec");
    Eigen::VectorXd z = rng.normal_vector(mean.size());
    return mean + llt.matrixU().solve(z);
}

Eigen::VectorXd sample_mvn_canonical(const Eigen::VectorXd& h, const Eigen::MatrixXd& prec, Rng& rng) {
    auto llt = checked_llt(prec, "sample_mvn_canonical");
    Eigen::VectorXd z = rng.normal_vector(h.size());
    return llt.solve(h) + llt.matrixU().solve(z);
}

Eigen::VectorXd sample_mvn_cov(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng) {
    auto llt = checked_llt(cov, "sample_mvn_cov");
    return mean + llt.matrixL() * rng.normal_vector(mean.size());
}

double sample_inv_gamma(double a, double b, Rng& rng) {
    if (!(a > 0.0) || !(b > 0.0)) throw NumericalError("sample_inv_gamma: nonpositive parameter");
    return 1.0 / rng.gamma(a, b);
}

Eigen::MatrixXd sample_inv_wishart(double df, const Eigen::MatrixXd& scale, Rng& rng) {
    const Eigen::Index D = scale.rows();
    if (df <= D - 1) throw NumericalError("sample_inv_wishart: df too small");
    // X^{-1} ~ W(df, scale^{-1}) with scale^{-1} = L L^T; Bartlett factor A
    Eigen::MatrixXd sinv = checked_llt(scale, "sample_inv_wishart").solve(
        Eigen::MatrixXd::Identity(D, D));
    Eigen::MatrixXd L = checked_llt(sinv, "sample_inv_wishart").matrixL();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(D, D);
    for (Eigen::Index i = 0; i < D; ++i) {
        A(i, i) = std::sqrt(rng.chi_squared(df - static_cast<double>(i)));
        for (Eigen::Index j = 0; j < i; ++j) A(i, j) = rng.normal();
    }
    Eigen::MatrixXd T = L * A;
    Eigen::MatrixXd Tinv = T.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(D, D));
    Eigen::MatrixXd X = Tinv.transpose() * Tinv;
    return 0.5 * (X + X.transpose());
}

Eigen::VectorXd sample_log_dirichlet(const Eigen::VectorXd& conc, Rng& rng) {
    Eigen::VectorXd lg(conc.size());
    for (Eigen::Index k = 0; k < conc.size(); ++k) {
        if (!(conc(k) > 0.0)) throw NumericalError("sample_dirichlet: nonpositive concentration");
        lg(k) = rng.log_gamma1(conc(k));
    }
    return lg.array() - log_sum_exp(lg);
}

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& conc, Rng& rng) {
    return sample_log_dirichlet(conc, rng).array().exp();
}

Eigen::MatrixXd sample_matrix_normal(const Eigen::MatrixXd& mean, const Eigen::MatrixXd& U,
                                     const Eigen::MatrixXd& V, Rng& rng) {
    Eigen::MatrixXd Lu = checked_llt(U, "sample_matrix_normal").matrixL();
    Eigen::MatrixXd Lv = checked_llt(V, "sample_matrix_normal").matrixL();
    Eigen::MatrixXd Z(mean.rows(), mean.cols());
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
        for (Eigen::Index i = 0; i < Z.rows(); ++i) Z(i, j) = rng.normal();
    return mean + Lu * Z * Lv.transpose();
}

double log_normal_density(double x, double mean, double var) {
    double r = x - mean;
    return -0.5 * (kLog2Pi + std::log(var) + r * r / var);
}

double log_mvn_prec_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                            const Eigen::MatrixXd& prec) {
    auto llt = checked_llt(prec, "log_mvn_prec_density");
    Eigen::VectorXd r = x - mean;
    double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    double quad = r.dot(prec * r);
    return -0.5 * (x.size() * kLog2Pi - logdet + quad);
}

double log_inv_gamma_density(double x, double a, double b) {
    if (!(x > 0.0)) return kNegInf;
    return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
}

double log_gamma_density(double x, double shape, double rate) {
    if (!(x > 0.0)) return kNegInf;
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_trunc_inv_gamma_density(double x, double a, double b, double upper) {
    if (!(x > 0.0) || x >= upper) return kNegInf;
    // P(X < upper) = Q(a, b / upper)
    return log_inv_gamma_density(x, a, b) - log_gamma_q(a, b / upper);
}

double log_mv_gamma(int D, double a) {
    double s = 0.25 * D * (D - 1) * std::log(M_PI);
    for (int j = 0; j < D; ++j) s += std::lgamma(a - 0.5 * j);
    return s;
}

double log_inv_wishart_density(const Eigen::MatrixXd& X, double df, const Eigen::MatrixXd& scale) {
    const int D = static_cast<int>(X.rows());
    Eigen::LLT<Eigen::MatrixXd> lx(X);
    if (lx.info() != Eigen::Success) return kNegInf;
    double logdet_x = 2.0 * lx.matrixLLT().diagonal().array().log().sum();
    double logdet_s = 2.0 * checked_llt(scale, "log_inv_wishart_density")
                                .matrixLLT().diagonal().array().log().sum();
    double tr = lx.solve(scale).trace();
    return 0.5 * df * logdet_s - 0.5 * df * D * std::log(2.0) - log_mv_gamma(D, 0.5 * df) -
           0.5 * (df + D + 1.0) * logdet_x - 0.5 * tr;
}

double log_dirichlet_density(const Eigen::VectorXd& p, const Eigen::VectorXd& conc) {
    double s = std::lgamma(conc.sum());
    for (Eigen::Index k = 0; k < p.size(); ++k)
        s += (conc(k) - 1.0) * std::log(p(k)) - std::lgamma(conc(k));
    return s;
}

}  // namespace mfrm
