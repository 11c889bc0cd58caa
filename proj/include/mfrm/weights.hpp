#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mfrm/model.hpp"
#include "mfrm/rng.hpp"

namespace mfrm {

// log pi_j(x) for logistic stick-breaking with nu_J = 1; rows of alpha are alpha_j.
Eigen::VectorXd log_stick_breaking(const Eigen::MatrixXd& alpha, const Eigen::VectorXd& x);

// m x J matrix of log mixture weights for the current state.
Eigen::MatrixXd log_weight_matrix(const Model& model, const ChainState& s);

// Polya-Gamma update of alpha_1..alpha_{J-1}.
void step_stick_breaking(const Model& model, ChainState& s, Rng& rng);

// pi ~ Dir(conc + counts).
void step_dirichlet_weights(const Model& model, ChainState& s, Rng& rng);

double log_weights_prior(const Model& model, const ChainState& s);

// Standardized covariates with intercept and one-hot categorical columns (first level dropped).
Eigen::MatrixXd build_weight_design(const CovariateTable& cov);

}  // namespace mfrm
