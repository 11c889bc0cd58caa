#pragma once

#include <Eigen/Dense>

#include "mfrm/rng.hpp"

namespace mfrm {

// Gaussian given mean and precision.
Eigen::VectorXd sample_mvn_prec(const Eigen::VectorXd& mean, const Eigen::MatrixXd& prec, Rng& rng);
// Gaussian in canonical form: precision Q, linear term h, mean Q^{-1} h.
Eigen::VectorXd sample_mvn_canonical(const Eigen::VectorXd& h, const Eigen::MatrixXd& prec, Rng& rng);
Eigen::VectorXd sample_mvn_cov(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng);

// shape a, scale b: density b^a / Gamma(a) x^{-a-1} exp(-b/x)
double sample_inv_gamma(double a, double b, Rng& rng);

// Inverse gamma restricted to (0, upper), by adaptive rejection sampling.
double sample_trunc_inv_gamma(double a, double b, double upper, Rng& rng);

// PG(1, c) by the alternating series method.
double sample_polya_gamma(double c, Rng& rng);
double polya_gamma_mean(double c);
double polya_gamma_var(double c);

// IW(df, scale): E[X] = scale / (df - D - 1).
Eigen::MatrixXd sample_inv_wishart(double df, const Eigen::MatrixXd& scale, Rng& rng);

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& conc, Rng& rng);
Eigen::VectorXd sample_log_dirichlet(const Eigen::VectorXd& conc, Rng& rng);

// Matrix normal with row covariance U and column covariance V.
Eigen::MatrixXd sample_matrix_normal(const Eigen::MatrixXd& mean, const Eigen::MatrixXd& U,
                                     const Eigen::MatrixXd& V, Rng& rng);

double log_normal_density(double x, double mean, double var);
double log_mvn_prec_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                            const Eigen::MatrixXd& prec);
double log_inv_gamma_density(double x, double a, double b);
double log_gamma_density(double x, double shape, double rate);
double log_trunc_inv_gamma_density(double x, double a, double b, double upper);
double log_inv_wishart_density(const Eigen::MatrixXd& X, double df, const Eigen::MatrixXd& scale);
double log_dirichlet_density(const Eigen::VectorXd& p, const Eigen::VectorXd& conc);
// log multivariate gamma function
double log_mv_gamma(int D, double a);

}  // namespace mfrm
