#include "mfrm/weights.hpp"

#include <cmath>

#include "mfrm/errors.hpp"
#include "mfrm/randdist.hpp"

namespace mfrm {

namespace {
// log(1 + e^x) without overflow
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
}  // namespace

Eigen::VectorXd log_stick_breaking(const Eigen::MatrixXd& alpha, const Eigen::VectorXd& x) {
    const Eigen::Index J = alpha.rows();
    Eigen::VectorXd lp(J);
    double rest = 0.0;  // log prod_{l<j} (1 - nu_l)
    for (Eigen::Index j = 0; j + 1 < J; ++j) {
        double eta = alpha.row(j).dot(x);
        lp(j) = rest - softplus(-eta);
        rest -= softplus(eta);
    }
    lp(J - 1) = rest;
    return lp;
}

Eigen::MatrixXd log_weight_matrix(const Model& model, const ChainState& s) {
    const int m = model.m(), J = s.J();
    Eigen::MatrixXd lw(m, J);
    if (model.use_covariates()) {
        for (int i = 0; i < m; ++i) lw.row(i) = log_stick_breaking(s.alpha, model.Xw().row(i).transpose()).transpose();
    } else {
        Eigen::RowVectorXd lp = s.pi.array().log().transpose();
        lw.rowwise() = lp;
    }
    return lw;
}

void step_stick_breaking(const Model& model, ChainState& s, Rng& rng) {
    const int m = model.m(), J = s.J(), L = model.weight_dim();
    const double prec0 = 1.0 / model.hp().sigma_alpha2;
    const auto& X = model.Xw();
    for (int j = 0; j + 1 < J; ++j) {
        Eigen::MatrixXd P = prec0 * Eigen::MatrixXd::Identity(L, L);
        Eigen::VectorXd h = Eigen::VectorXd::Zero(L);
        for (int i = 0; i < m; ++i) {
            if (s.z[i] < j) continue;
            auto x = X.row(i).transpose();
            double w = sample_polya_gamma(s.alpha.row(j).dot(x), rng);
            P.noalias() += w * x * x.transpose();
            h += (s.z[i] == j ? 0.5 : -0.5) * x;
        }
        s.alpha.row(j) = sample_mvn_canonical(h, P, rng).transpose();
    }
}

void step_dirichlet_weights(const Model& model, ChainState& s, Rng& rng) {
    auto c = s.counts();
    Eigen::VectorXd conc(s.J());
    for (int j = 0; j < s.J(); ++j) conc(j) = model.dir_conc() + c[j];
    s.pi = sample_dirichlet(conc, rng);
}

double log_weights_prior(const Model& model, const ChainState& s) {
    if (model.use_covariates()) {
        const double v = model.hp().sigma_alpha2;
        double lp = 0.0;
        for (int j = 0; j + 1 < s.J(); ++j)
            for (Eigen::Index l = 0; l < s.alpha.cols(); ++l) lp += log_normal_density(s.alpha(j, l), 0.0, v);
        return lp;
    }
    return log_dirichlet_density(s.pi, Eigen::VectorXd::Constant(s.J(), model.dir_conc()));
}

Eigen::MatrixXd build_weight_design(const CovariateTable& cov) {
    const Eigen::Index m = cov.values.rows();
    int cols = 1;
    for (std::size_t l = 0; l < cov.names.size(); ++l)
        cols += cov.categorical[l] ? static_cast<int>(cov.levels[l].size()) - 1 : 1;
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(m, cols);
    X.col(0).setOnes();
    int c = 1;
    for (std::size_t l = 0; l < cov.names.size(); ++l) {
        Eigen::VectorXd v = cov.values.col(l);
        if (cov.categorical[l]) {
            const int levels = static_cast<int>(cov.levels[l].size());
            for (Eigen::Index i = 0; i < m; ++i) {
                int code = static_cast<int>(v(i));
                if (code > 0) X(i, c + code - 1) = 1.0;
            }
            c += levels - 1;
        } else {
            double mean = v.mean();
            double sd = std::sqrt((v.array() - mean).square().sum() / std::max<Eigen::Index>(1, m - 1));
            X.col(c++) = (v.array() - mean) / (sd > 0.0 ? sd : 1.0);
        }
    }
    return X;
}

}  // namespace mfrm
