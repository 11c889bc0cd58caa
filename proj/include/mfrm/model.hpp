#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfrm/basis.hpp"
#include "mfrm/rng.hpp"

namespace mfrm {

enum class Mode { Mfrmmx, MfrmmxInd, Mfppmx, MfppmxInd };

Mode parse_mode(const std::string& s);
std::string mode_name(Mode m);
inline bool is_ppmx(Mode m) { return m == Mode::Mfppmx || m == Mode::MfppmxInd; }
inline bool is_independent(Mode m) { return m == Mode::MfrmmxInd || m == Mode::MfppmxInd; }

struct Hyperparams {
    int p = 10;
    int J = 20;
    Eigen::VectorXd A;    // per dimension bound on sqrt(lambda^2)
    Eigen::VectorXd phi;  // per dimension repulsion strength
    double nu = 2.0;
    double q = 2.0;
    double dist_floor = 1e-12;
    int grid_n = 0;  // 0: longest curve

    double a_tau = 1.0;
    double xi = 1.0;
    double varpi = 0.1;
    double s_mu2 = 1e4;
    double s02 = 1e4;
    double a0 = 1.0;
    double b0 = 1.0;
    double omega = 1.0;
    Eigen::MatrixXd Sigma0;  // D x D
    double a_sigma = 1.0;
    double b_sigma = 1.0;

    double dir_conc = 0.0;      // 0: 1 / J
    double sigma_alpha2 = 4.0;  // prior variance of stick-breaking coefficients
    double cohesion_M = 1.0;
    double dm_conc = 1.0;       // categorical similarity

    // Defaults of the simulation study for D dimensions.
    static Hyperparams defaults(int D);
    void validate(int D) const;
};

struct CovariateTable {
    std::vector<std::string> names;
    std::vector<bool> categorical;
    Eigen::MatrixXd values;  // m x L; categorical columns hold level codes 0..C-1
    std::vector<std::vector<std::string>> levels;
    bool empty() const { return names.empty(); }
};

struct CurveDataset {
    std::vector<std::string> ids;
    std::vector<Eigen::MatrixXd> Y;  // n_i x D
    CovariateTable covariates;
    std::vector<int> truth;  // optional true labels, 0-based

    int m() const { return static_cast<int>(Y.size()); }
    int D() const { return Y.empty() ? 0 : static_cast<int>(Y.front().cols()); }
};

struct ChainState {
    std::vector<int> z;                  // 0-based component labels
    std::vector<Eigen::MatrixXd> theta;  // J of p x D
    Eigen::MatrixXd tau2;                // J x D
    Eigen::MatrixXd lam2;                // J x D
    double b_tau = 1.0;
    std::vector<Eigen::MatrixXd> B;      // m of p x D
    Eigen::MatrixXd beta0;               // m x D
    std::vector<Eigen::MatrixXd> Sigma;  // m of D x D
    Eigen::MatrixXd mu;                  // p x D
    Eigen::VectorXd mu0;
    Eigen::VectorXd sig02;
    Eigen::MatrixXd alpha;  // J x L, covariate-dependent weights
    Eigen::VectorXd pi;     // J, weights without covariates

    int J() const { return static_cast<int>(theta.size()); }
    int m() const { return static_cast<int>(z.size()); }
    std::vector<int> counts() const;
    int n_clusters() const;
};

// Fixed quantities shared by every step of a chain.
class Model {
public:
    Model(CurveDataset data, Hyperparams hp, Mode mode, bool use_covariates);

    const CurveDataset& data() const { return data_; }
    const Hyperparams& hp() const { return hp_; }
    Mode mode() const { return mode_; }
    bool ppmx() const { return is_ppmx(mode_); }
    bool independent() const { return is_independent(mode_); }
    bool use_covariates() const { return use_covariates_; }
    bool repulsive() const { return !ppmx() && (hp_.phi.array() > 0.0).any(); }

    int m() const { return data_.m(); }
    int D() const { return D_; }
    int p() const { return hp_.p; }
    int J() const { return J_; }

    const Eigen::MatrixXd& K() const { return K_; }
    const Eigen::MatrixXd& K_chol_upper() const { return K_upper_; }  // K = U^T U
    double log_det_K() const { return log_det_K_; }
    const Eigen::MatrixXd& H_dist() const { return H_dist_; }

    int n_bases() const { return static_cast<int>(bases_.size()); }
    const SplineBasis& basis(int b) const { return bases_[b]; }
    int basis_index(int i) const { return basis_of_[i]; }
    const SplineBasis& basis_of(int i) const { return bases_[basis_of_[i]]; }
    const Eigen::MatrixXd& HtY(int i) const { return HtY_[i]; }

    // weight design with intercept, standardized continuous and one-hot categorical columns
    const Eigen::MatrixXd& Xw() const { return Xw_; }
    int weight_dim() const { return static_cast<int>(Xw_.cols()); }
    // similarity inputs: standardized continuous columns and categorical codes
    const Eigen::MatrixXd& sim_continuous() const { return sim_cont_; }
    const Eigen::MatrixXi& sim_categorical() const { return sim_cat_; }
    const std::vector<int>& sim_levels() const { return sim_levels_; }

    double dir_conc() const { return hp_.dir_conc > 0.0 ? hp_.dir_conc : 1.0 / J_; }

private:
    CurveDataset data_;
    Hyperparams hp_;
    Mode mode_;
    bool use_covariates_;
    int D_ = 0;
    int J_ = 0;
    Eigen::MatrixXd K_, K_upper_, H_dist_;
    double log_det_K_ = 0.0;
    std::vector<SplineBasis> bases_;
    std::vector<int> basis_of_;
    std::vector<Eigen::MatrixXd> HtY_;
    Eigen::MatrixXd Xw_;
    Eigen::MatrixXd sim_cont_;
    Eigen::MatrixXi sim_cat_;
    std::vector<int> sim_levels_;
};

// Matrix-normal observation log-likelihood of one curve.
double loglik_individual(const Eigen::MatrixXd& Y, const Eigen::VectorXd& beta0,
                         const Eigen::MatrixXd& B, const Eigen::MatrixXd& Sigma,
                         const Eigen::MatrixXd& H);
double loglik_individual(const Model& model, const ChainState& s, int i);

// Log prior density of every parameter block, coefficients B included.
double logprior_state(const Model& model, const ChainState& s);

// Prior density of one component's parameters in dimension d (repulsion excluded).
double log_component_prior(const Model& model, const ChainState& s, const Eigen::VectorXd& theta,
                           double tau2, double lam2, int d);
double log_lambda2_prior(double lam2, double A);

Eigen::VectorXd residual_means(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& H,
                               const Eigen::MatrixXd& B);

// Data-driven starting point (k-means on least-squares coefficients).
ChainState init_state(const Model& model, Rng& rng);

double inv_gamma_median(double a, double b);

}  // namespace mfrm
