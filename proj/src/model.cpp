#include "mfrm/model.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "mfrm/errors.hpp"
#include "mfrm/ppmx.hpp"
#include "mfrm/randdist.hpp"
#include "mfrm/repulsion.hpp"
#include "mfrm/weights.hpp"

namespace mfrm {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

Mode parse_mode(const std::string& s) {
    if (s == "mfrmmx") return Mode::Mfrmmx;
    if (s == "mfrmmx-ind") return Mode::MfrmmxInd;
    if (s == "mfppmx") return Mode::Mfppmx;
    if (s == "mfppmx-ind") return Mode::MfppmxInd;
    throw ConfigError("unknown mode '" + s + "'");
}

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::Mfrmmx: return "mfrmmx";
        case Mode::MfrmmxInd: return "mfrmmx-ind";
        case Mode::Mfppmx: return "mfppmx";
        case Mode::MfppmxInd: return "mfppmx-ind";
    }
    return "?";
}

Hyperparams Hyperparams::defaults(int D) {
    Hyperparams hp;
    hp.A = Eigen::VectorXd::Constant(D, 10.0);
    hp.phi = Eigen::VectorXd::Zero(D);
    hp.Sigma0 = Eigen::MatrixXd::Identity(D, D);
    return hp;
}

void Hyperparams::validate(int D) const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (p < 2) fail("p must be at least 2");
    if (J < 1) fail("J must be positive");
    if (A.size() != D) fail("A must have one entry per dimension");
    if (phi.size() != D) fail("phi must have one entry per dimension");
    if ((A.array() <= 0.0).any()) fail("A must be positive");
    if ((phi.array() < 0.0).any()) fail("phi must be nonnegative");
    if (!(nu > 0.0) || !(q >= 1.0)) fail("nu must be positive and q at least 1");
    if (!(a_tau > 0.0) || !(xi > 0.0) || !(varpi > 0.0)) fail("tau hyperparameters must be positive");
    if (!(s_mu2 > 0.0) || !(s02 > 0.0) || !(a0 > 0.0) || !(b0 > 0.0)) fail("variance hyperparameters must be positive");
    if (!(a_sigma > 0.0) || !(b_sigma > 0.0)) fail("a_sigma and b_sigma must be positive");
    if (!(omega > 0.0)) fail("omega must be positive");
    if (Sigma0.rows() != D || Sigma0.cols() != D) fail("Sigma0 must be D x D");
    Eigen::LLT<Eigen::MatrixXd> llt(Sigma0);
    if (llt.info() != Eigen::Success) fail("Sigma0 must be positive definite");
    if (dir_conc < 0.0 || !(sigma_alpha2 > 0.0) || !(cohesion_M > 0.0) || !(dm_conc > 0.0))
        fail("weight hyperparameters must be positive");
    if (grid_n < 0) fail("grid_n must be nonnegative");
}

std::vector<int> ChainState::counts() const {
    std::vector<int> c(J(), 0);
    for (int zi : z) ++c[zi];
    return c;
}

int ChainState::n_clusters() const {
    int k = 0;
    for (int c : counts()) k += c > 0;
    return k;
}

Model::Model(CurveDataset data, Hyperparams hp, Mode mode, bool use_covariates)
    : data_(std::move(data)), hp_(std::move(hp)), mode_(mode), use_covariates_(use_covariates) {
    if (data_.m() < 1) throw DataError("no curves");
    D_ = data_.D();
    if (D_ < 1) throw DataError("curves have no dimensions");
    hp_.validate(D_);
    if (use_covariates_ && data_.covariates.empty())
        throw DataError("covariates requested but none supplied");
    const int p = hp_.p;
    int nmax = 0;
    std::map<int, int> by_n;
    for (int i = 0; i < data_.m(); ++i) {
        const auto& Y = data_.Y[i];
        if (Y.cols() != D_) throw DataError("curve " + data_.ids[i] + " has inconsistent dimension");
        if (!Y.allFinite()) throw DataError("curve " + data_.ids[i] + " has missing or non-finite values");
        if (Y.rows() < p + 4) throw DataError("curve " + data_.ids[i] + " is too short for p");
        nmax = std::max<int>(nmax, Y.rows());
        if (!by_n.count(Y.rows())) {
            by_n[Y.rows()] = static_cast<int>(bases_.size());
            bases_.push_back(make_spline_basis(Y.rows(), p));
        }
    }
    for (int i = 0; i < data_.m(); ++i) {
        basis_of_.push_back(by_n[data_.Y[i].rows()]);
        HtY_.push_back(bases_[basis_of_[i]].H.transpose() * data_.Y[i]);
    }
    J_ = ppmx() ? data_.m() : hp_.J;
    K_ = build_penalty<double>(p);
    Eigen::LLT<Eigen::MatrixXd> kl(K_);
    K_upper_ = kl.matrixU();
    log_det_K_ = 2.0 * kl.matrixLLT().diagonal().array().log().sum();
    H_dist_ = build_centered_design<double>(hp_.grid_n > 0 ? hp_.grid_n : nmax, p);

    if (use_covariates_) {
        const auto& cov = data_.covariates;
        if (cov.values.rows() != data_.m()) throw DataError("covariate rows do not match curves");
        Xw_ = build_weight_design(cov);
        int nc = 0, nk = 0;
        for (bool c : cov.categorical) (c ? nk : nc)++;
        sim_cont_.resize(data_.m(), nc);
        sim_cat_.resize(data_.m(), nk);
        int ic = 0, ik = 0;
        for (std::size_t l = 0; l < cov.names.size(); ++l) {
            if (cov.categorical[l]) {
                sim_cat_.col(ik++) = cov.values.col(l).cast<int>();
                sim_levels_.push_back(static_cast<int>(cov.levels[l].size()));
            } else {
                Eigen::VectorXd x = cov.values.col(l);
                double mean = x.mean();
                double sd = std::sqrt((x.array() - mean).square().sum() / std::max(1, data_.m() - 1));
                sim_cont_.col(ic++) = (x.array() - mean) / (sd > 0.0 ? sd : 1.0);
            }
        }
    } else {
        Xw_ = Eigen::MatrixXd::Ones(data_.m(), 1);
    }
}

double loglik_individual(const Eigen::MatrixXd& Y, const Eigen::VectorXd& beta0,
                         const Eigen::MatrixXd& B, const Eigen::MatrixXd& Sigma,
                         const Eigen::MatrixXd& H) {
    if (H.rows() != Y.rows() || H.cols() != B.rows() || B.cols() != Y.cols() ||
        Sigma.rows() != Y.cols() || beta0.size() != Y.cols())
        throw ShapeError("loglik_individual: dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
    if (llt.info() != Eigen::Success) throw NumericalError("loglik_individual: Sigma not SPD");
    Eigen::MatrixXd E = Y - H * B;
    E.rowwise() -= beta0.transpose();
    const double n = static_cast<double>(Y.rows()), D = static_cast<double>(Y.cols());
    double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    // tr(Sigma^{-1} E^T E) = ||L^{-1} E^T||_F^2
    Eigen::MatrixXd W = llt.matrixL().solve(E.transpose());
    return -0.5 * n * D * kLog2Pi - 0.5 * n * logdet - 0.5 * W.squaredNorm();
}

double loglik_individual(const Model& model, const ChainState& s, int i) {
    return loglik_individual(model.data().Y[i], s.beta0.row(i).transpose(), s.B[i], s.Sigma[i],
                             model.basis_of(i).H);
}

Eigen::VectorXd residual_means(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& H,
                               const Eigen::MatrixXd& B) {
    return (Y - H * B).colwise().mean().transpose();
}

double log_lambda2_prior(double lam2, double A) {
    if (!(lam2 > 0.0) || lam2 >= A * A) return -std::numeric_limits<double>::infinity();
    return -std::log(2.0 * A) - 0.5 * std::log(lam2);
}

double log_component_prior(const Model& model, const ChainState& s, const Eigen::VectorXd& theta,
                           double tau2, double lam2, int d) {
    const auto& hp = model.hp();
    const int p = model.p();
    Eigen::VectorXd r = theta - s.mu.col(d);
    double lt = -0.5 * p * kLog2Pi + 0.5 * model.log_det_K() - 0.5 * p * std::log(tau2) -
                0.5 * r.dot(model.K() * r) / tau2;
    return lt + log_inv_gamma_density(tau2, hp.a_tau, s.b_tau) + log_lambda2_prior(lam2, hp.A(d));
}

double logprior_state(const Model& model, const ChainState& s) {
    const auto& hp = model.hp();
    const int D = model.D(), p = model.p(), m = model.m();
    double lp = 0.0;

    for (int i = 0; i < m; ++i) {
        if (model.independent()) {
            for (int d = 0; d < D; ++d) lp += log_inv_gamma_density(s.Sigma[i](d, d), hp.a_sigma, hp.b_sigma);
        } else if (hp.omega > D - 1) {
            lp += log_inv_wishart_density(s.Sigma[i], hp.omega, hp.Sigma0);
        } else {
            // improper prior: kernel only
            Eigen::LLT<Eigen::MatrixXd> llt(s.Sigma[i]);
            double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
            lp += -0.5 * (hp.omega + D + 1.0) * logdet - 0.5 * llt.solve(hp.Sigma0).trace();
        }
    }
    for (int d = 0; d < D; ++d) {
        for (int i = 0; i < m; ++i) lp += log_normal_density(s.beta0(i, d), s.mu0(d), s.sig02(d));
        lp += log_normal_density(s.mu0(d), 0.0, hp.s02);
        lp += log_inv_gamma_density(s.sig02(d), hp.a0, hp.b0);
        for (int i = 0; i < m; ++i) {
            int j = s.z[i];
            double l2 = s.lam2(j, d);
            lp += -0.5 * p * (kLog2Pi + std::log(l2)) - 0.5 * (s.B[i].col(d) - s.theta[j].col(d)).squaredNorm() / l2;
        }
        lp += -0.5 * p * (kLog2Pi + std::log(hp.s_mu2)) - 0.5 * s.mu.col(d).squaredNorm() / hp.s_mu2;
    }

    auto counts = s.counts();
    for (int j = 0; j < s.J(); ++j) {
        if (model.ppmx() && counts[j] == 0) continue;
        for (int d = 0; d < D; ++d)
            lp += log_component_prior(model, s, s.theta[j].col(d), s.tau2(j, d), s.lam2(j, d), d);
    }
    lp += log_gamma_density(s.b_tau, hp.xi, hp.varpi);

    if (model.ppmx()) {
        lp += log_partition_prior(model, s.z);
    } else {
        Eigen::MatrixXd lw = log_weight_matrix(model, s);
        for (int i = 0; i < m; ++i) lp += lw(i, s.z[i]);
        lp += log_weights_prior(model, s);
        if (model.repulsive()) {
            auto spec = RepulsionSpec::from_model(model);
            for (int d = 0; d < D; ++d) lp += log_repulsive_factor(spec, d, theta_dimension(s, d));
        }
    }
    return lp;
}

double inv_gamma_median(double a, double b) {
    double c = 1.0 / (9.0 * a);
    double g = a * std::pow(1.0 - c, 3);
    if (g <= 0.0) g = a;
    return b / g;
}

namespace {

std::vector<int> kmeans(const Eigen::MatrixXd& X, int k, Rng& rng) {
    const int n = static_cast<int>(X.rows());
    k = std::max(1, std::min(k, n));
    std::vector<int> centers{rng.uniform_int(n)};
    Eigen::VectorXd d2 = (X.rowwise() - X.row(centers[0])).rowwise().squaredNorm();
    while (static_cast<int>(centers.size()) < k) {
        double tot = d2.sum();
        int c = 0;
        if (tot > 0.0) {
            double u = rng.uniform() * tot, acc = 0.0;
            for (c = 0; c < n - 1; ++c) {
                acc += d2(c);
                if (u < acc) break;
            }
        } else {
            c = rng.uniform_int(n);
        }
        centers.push_back(c);
        d2 = d2.cwiseMin((X.rowwise() - X.row(c)).rowwise().squaredNorm());
    }
    Eigen::MatrixXd C(k, X.cols());
    for (int c = 0; c < k; ++c) C.row(c) = X.row(centers[c]);
    std::vector<int> lab(n, -1);
    for (int it = 0; it < 100; ++it) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            Eigen::Index best;
            (C.rowwise() - X.row(i)).rowwise().squaredNorm().minCoeff(&best);
            if (lab[i] != best) {
                lab[i] = static_cast<int>(best);
                changed = true;
            }
        }
        if (!changed) break;
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(k, X.cols());
        Eigen::VectorXi cnt = Eigen::VectorXi::Zero(k);
        for (int i = 0; i < n; ++i) {
            S.row(lab[i]) += X.row(i);
            ++cnt(lab[i]);
        }
        for (int c = 0; c < k; ++c)
            if (cnt(c) > 0) C.row(c) = S.row(c) / cnt(c);
    }
    // relabel by first appearance, dropping empty clusters
    std::vector<int> map(k, -1);
    int next = 0;
    for (int& l : lab) {
        if (map[l] < 0) map[l] = next++;
        l = map[l];
    }
    return lab;
}

}  // namespace

ChainState init_state(const Model& model, Rng& rng) {
    const auto& hp = model.hp();
    const int m = model.m(), D = model.D(), p = model.p(), J = model.J();
    ChainState s;
    s.beta0.resize(m, D);
    s.B.resize(m);
    s.Sigma.resize(m);
    Eigen::MatrixXd coef(m, p * D);
    for (int i = 0; i < m; ++i) {
        const auto& Y = model.data().Y[i];
        const auto& H = model.basis_of(i).H;
        Eigen::VectorXd ybar = Y.colwise().mean().transpose();
        Eigen::MatrixXd Yc = Y.rowwise() - ybar.transpose();
        Eigen::MatrixXd G = H.transpose() * H + 1e-6 * Eigen::MatrixXd::Identity(p, p);
        s.B[i] = G.ldlt().solve(H.transpose() * Yc);
        s.beta0.row(i) = ybar.transpose();
        Eigen::MatrixXd E = Yc - H * s.B[i];
        Eigen::MatrixXd S = E.transpose() * E / std::max<double>(1.0, Y.rows() - p - 1.0);
        S += 1e-3 * (S.diagonal().mean() + 1e-3) * Eigen::MatrixXd::Identity(D, D);
        if (model.independent()) S = Eigen::MatrixXd(S.diagonal().asDiagonal());
        s.Sigma[i] = S;
        coef.row(i) = Eigen::Map<const Eigen::RowVectorXd>(s.B[i].data(), p * D);
    }
    int k = std::min(J, (m + 3) / 4);
    s.z = kmeans(coef, k, rng);

    s.b_tau = hp.xi / hp.varpi;
    s.mu = Eigen::MatrixXd::Zero(p, D);
    s.mu0 = s.beta0.colwise().mean().transpose();
    s.sig02 = Eigen::VectorXd::Constant(D, inv_gamma_median(hp.a0, hp.b0));
    s.tau2 = Eigen::MatrixXd::Constant(J, D, inv_gamma_median(hp.a_tau, s.b_tau));
    s.lam2.resize(J, D);
    for (int d = 0; d < D; ++d) s.lam2.col(d).setConstant(0.25 * hp.A(d) * hp.A(d));
    s.theta.assign(J, Eigen::MatrixXd::Zero(p, D));
    Eigen::VectorXd scale = Eigen::VectorXd::Zero(D);
    for (int i = 0; i < m; ++i) scale += s.B[i].colwise().squaredNorm().transpose() / (double(m) * p);
    scale = scale.cwiseSqrt();
    std::vector<int> cnt(J, 0);
    for (int i = 0; i < m; ++i) {
        s.theta[s.z[i]] += s.B[i];
        ++cnt[s.z[i]];
    }
    for (int j = 0; j < J; ++j) {
        if (cnt[j] > 0) {
            // jitter so that no theta sits exactly on a coefficient vector
            s.theta[j] /= cnt[j];
            for (int d = 0; d < D; ++d) s.theta[j].col(d) += 0.05 * scale(d) * rng.normal_vector(p);
        } else if (!model.ppmx()) {
            for (int d = 0; d < D; ++d) {
                Eigen::VectorXd zv = rng.normal_vector(p);
                s.theta[j].col(d) = s.mu.col(d) +
                    std::sqrt(s.tau2(j, d)) * model.K_chol_upper().triangularView<Eigen::Upper>().solve(zv);
            }
        }
    }
    s.alpha = Eigen::MatrixXd::Zero(J, model.weight_dim());
    s.pi.resize(J);
    for (int j = 0; j < J; ++j) s.pi(j) = cnt[j] + model.dir_conc();
    s.pi /= s.pi.sum();
    return s;
}

}  // namespace mfrm
