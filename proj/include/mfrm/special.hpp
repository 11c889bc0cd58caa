#pragma once

namespace mfrm {

// Regularized incomplete gamma functions on the log scale.
double log_gamma_p(double a, double x);
double log_gamma_q(double a, double x);

double normal_cdf(double x);
double log_normal_cdf(double x);

}  // namespace mfrm
