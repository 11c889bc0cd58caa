#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace mfrm {

// Seeded per (seed, stream) so that chains and workers never share state.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    double uniform();  // open interval (0, 1)
    double normal() { return normal_(eng_); }
    double exponential() { return -std::log(uniform()); }
    double gamma(double shape, double rate);
    // log of a Gamma(shape, 1) draw; stays finite for tiny shapes
    double log_gamma1(double shape);
    double chi_squared(double df) { return gamma(0.5 * df, 0.5); }
    int uniform_int(int n);  // 0..n-1

    Eigen::VectorXd normal_vector(Eigen::Index n);

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    std::normal_distribution<double> normal_;
};

// Draws an index with probability proportional to exp(logw).
int sample_log_weights(const Eigen::VectorXd& logw, Rng& rng);

double log_sum_exp(const Eigen::VectorXd& v);

}  // namespace mfrm
