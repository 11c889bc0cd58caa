#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mfrm/model.hpp"
#include "mfrm/rng.hpp"

namespace mfrm {

// Per-curve quantities for integrating out B_i. In the eigenbasis Q of H^T H the
// posterior precision of B_i splits into p blocks A_k = g_k Sigma^{-1} + diag(1 / lambda^2).
struct IndividualTerms {
    const SplineBasis* basis = nullptr;
    int basis_index = 0;
    Eigen::MatrixXd P;  // Sigma_i^{-1}
    Eigen::MatrixXd C;  // Q^T H^T (Y - 1 beta0^T) Sigma^{-1}, p x D
    bool diagonal = false;
};

IndividualTerms make_individual_terms(const Model& model, const ChainState& s, int i,
                                      bool allow_diagonal = true);

// log of int p(Y_i | B, ...) N(B; Theta_j, lambda_j^2) dB up to terms free of the component.
// theta_rot = Q^T Theta_j.
double log_marginal_weight(const IndividualTerms& t, const Eigen::MatrixXd& theta_rot,
                           const Eigen::VectorXd& lam2);

// B_i | Theta_j, lambda_j^2, rest.
Eigen::MatrixXd draw_coefficients(const IndividualTerms& t, const Eigen::MatrixXd& theta,
                                  const Eigen::VectorXd& lam2, Rng& rng);

// Gaussian full conditional of vec(Theta_j) (column-stacked, p x D) with B integrated out.
class ThetaSystem {
public:
    ThetaSystem(int p, int D, int n_bases);
    void add(const IndividualTerms& t, const Eigen::VectorXd& lam2);
    // prior N(mu_d, tau_d^2 K^{-1}) per dimension; returns precision and linear term
    void finalize(const Model& model, const Eigen::VectorXd& tau2, const Eigen::MatrixXd& mu,
                  const Eigen::VectorXd& lam2, Eigen::MatrixXd& prec, Eigen::VectorXd& lin) const;

private:
    int p_, D_;
    std::vector<Eigen::MatrixXd> W_;    // per basis, p x D*D, summed rotated precision blocks
    std::vector<Eigen::MatrixXd> lin_;  // per basis, p x D, summed rotated V c
    std::vector<bool> used_;
    std::vector<const SplineBasis*> basis_;
};

}  // namespace mfrm
