#include <cmath>

#include "mfrm/randdist.hpp"
#include "mfrm/special.hpp"

namespace mfrm {

namespace {

constexpr double kTrunc = 0.64;

// n-th coefficient of the alternating series for J*(1, z)
double series_coef(double x, int n) {
    double k = n + 0.5;
    if (x > kTrunc) return M_PI * k * std::exp(-0.5 * k * k * M_PI * M_PI * x);
    return M_PI * k * std::pow(2.0 / (M_PI * x), 1.5) * std::exp(-2.0 * k * k / x);
}

// Inverse Gaussian(mu = 1/z, shape 1) truncated to (0, kTrunc)
double trunc_inv_gauss(double z, Rng& rng) {
    const double t = kTrunc;
    double x;
    if (z < 1.0 / t) {
        // mean beyond the truncation point: propose from the z = 0 limit
        while (true) {
            double e1, e2;
            do {
                e1 = rng.exponential();
                e2 = rng.exponential();
            } while (e1 * e1 > 2.0 * e2 / t);
            x = 1.0 + e1 * t;
            x = t / (x * x);
            if (rng.uniform() <= std::exp(-0.5 * z * z * x)) return x;
        }
    }
    const double mu = 1.0 / z;
    do {
        double y = rng.normal();
        y *= y;
        double mu_y = mu * y;
        x = mu + 0.5 * mu * mu_y - 0.5 * mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
        if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    } while (x > t);
    return x;
}

}  // namespace

double sample_polya_gamma(double c, Rng& rng) {
    const double z = 0.5 * std::abs(c);
    const double t = kTrunc;
    const double K = M_PI * M_PI / 8.0 + 0.5 * z * z;
    // relative masses of the exponential tail (p) and inverse-Gaussian body (q)
    const double logp = std::log(M_PI / (2.0 * K)) - K * t;
    const double rt = 1.0 / std::sqrt(t);
    const double lq1 = -z + log_normal_cdf(rt * (t * z - 1.0));
    const double lq2 = z + log_normal_cdf(-rt * (t * z + 1.0));
    const double mx = std::max(lq1, lq2);
    const double logq = std::log(2.0) + mx + std::log(std::exp(lq1 - mx) + std::exp(lq2 - mx));
    const double prob_exp = 1.0 / (1.0 + std::exp(logq - logp));

    while (true) {
        double x = rng.uniform() < prob_exp ? t + rng.exponential() / K : trunc_inv_gauss(z, rng);
        double s = series_coef(x, 0);
        double y = rng.uniform() * s;
        for (int n = 1;; ++n) {
            if (n % 2 == 1) {
                s -= series_coef(x, n);
                if (y <= s) return 0.25 * x;
            } else {
                s += series_coef(x, n);
                if (y > s) break;
            }
        }
    }
}

double polya_gamma_mean(double c) {
    double a = std::abs(c);
    if (a < 1e-6) return 0.25 - a * a / 48.0;
    return std::tanh(0.5 * a) / (2.0 * a);
}

double polya_gamma_var(double c) {
    double a = std::abs(c);
    if (a < 1e-3) return 1.0 / 24.0 - a * a / 120.0;
    double ch = std::cosh(0.5 * a);
    return (2.0 * std::tanh(0.5 * a) - a / (ch * ch)) / (4.0 * a * a * a);
}

}  // namespace mfrm
