#include "mfrm/rng.hpp"

#include <cmath>
#include <limits>

namespace mfrm {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x6d66726dU};
    eng_.seed(seq);
}

double Rng::uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
}

double Rng::gamma(double shape, double rate) {
    std::gamma_distribution<double> g(shape, 1.0 / rate);
    return g(eng_);
}

double Rng::log_gamma1(double shape) {
    if (shape >= 1.0) return std::log(gamma(shape, 1.0));
    // G(a) = G(a+1) U^{1/a}
    return std::log(gamma(shape + 1.0, 1.0)) + std::log(uniform()) / shape;
}

int Rng::uniform_int(int n) {
    std::uniform_int_distribution<int> u(0, n - 1);
    return u(eng_);
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
}

double log_sum_exp(const Eigen::VectorXd& v) {
    double mx = v.maxCoeff();
    if (!std::isfinite(mx)) return mx;
    return mx + std::log((v.array() - mx).exp().sum());
}

int sample_log_weights(const Eigen::VectorXd& logw, Rng& rng) {
    double mx = logw.maxCoeff();
    if (!std::isfinite(mx)) {
        if (mx == std::numeric_limits<double>::infinity()) {
            for (Eigen::Index k = 0; k < logw.size(); ++k)
                if (logw(k) == mx) return static_cast<int>(k);
        }
        return rng.uniform_int(static_cast<int>(logw.size()));
    }
    Eigen::VectorXd w = (logw.array() - mx).exp();
    double u = rng.uniform() * w.sum();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) {
        acc += w(k);
        if (u < acc) return static_cast<int>(k);
    }
    for (Eigen::Index k = w.size() - 1; k >= 0; --k)
        if (w(k) > 0) return static_cast<int>(k);
    return 0;
}

}  // namespace mfrm
