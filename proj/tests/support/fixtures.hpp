#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfrm/model.hpp"
#include "mfrm/rng.hpp"

namespace fixture {

// Small random dataset: m curves of length n in D dimensions, two loose groups.
inline mfrm::CurveDataset small_dataset(int m, int n, int D, unsigned seed = 1, bool covariates = false,
                                        std::vector<int> lengths = {}) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    mfrm::CurveDataset data;
    for (int i = 0; i < m; ++i) {
        const int ni = lengths.empty() ? n : lengths[i % lengths.size()];
        const int g = i % 2;
        Eigen::MatrixXd Y(ni, D);
        for (int t = 0; t < ni; ++t)
            for (int d = 0; d < D; ++d) {
                const double x = static_cast<double>(t) / ni;
                Y(t, d) = (g ? 3.0 * std::sin(3.0 * x + d) : 2.0 * x * x - d) + 0.3 * N(eng);
            }
        data.ids.push_back("c" + std::to_string(i));
        data.Y.push_back(Y);
        data.truth.push_back(g);
    }
    if (covariates) {
        auto& cov = data.covariates;
        cov.names = {"x", "grp"};
        cov.categorical = {false, true};
        cov.levels = {{}, {"a", "b", "c"}};
        cov.values.resize(m, 2);
        for (int i = 0; i < m; ++i) {
            cov.values(i, 0) = (i % 2) + 0.2 * N(eng);
            cov.values(i, 1) = i % 3;
        }
    }
    return data;
}

inline mfrm::Hyperparams small_hp(int D, int p, int J) {
    auto hp = mfrm::Hyperparams::defaults(D);
    hp.p = p;
    hp.J = J;
    return hp;
}

// A state with every block drawn at random (not from the prior); useful for
// density bookkeeping checks.
inline mfrm::ChainState random_state(const mfrm::Model& model, unsigned seed) {
    mfrm::Rng rng(seed);
    mfrm::ChainState s = mfrm::init_state(model, rng);
    std::mt19937_64 eng(seed + 1000);
    std::normal_distribution<double> N(0.0, 1.0);
    std::uniform_real_distribution<double> U(0.2, 2.0);
    const int J = s.J(), D = model.D(), p = model.p();
    for (int j = 0; j < J; ++j)
        for (int d = 0; d < D; ++d) {
            for (int k = 0; k < p; ++k) s.theta[j](k, d) = 2.0 * N(eng);
            s.tau2(j, d) = U(eng);
            s.lam2(j, d) = std::min(U(eng), 0.9 * model.hp().A(d) * model.hp().A(d));
        }
    std::uniform_int_distribution<int> Z(0, model.ppmx() ? model.m() - 1 : J - 1);
    for (auto& zi : s.z) zi = Z(eng);
    for (auto& B : s.B)
        for (int k = 0; k < B.size(); ++k) B.data()[k] += 0.5 * N(eng);
    for (int k = 0; k < s.mu.size(); ++k) s.mu.data()[k] = N(eng);
    if (s.alpha.size())
        for (int k = 0; k < s.alpha.size(); ++k) s.alpha.data()[k] = N(eng);
    if (s.pi.size()) {
        for (int j = 0; j < J; ++j) s.pi(j) = U(eng);
        s.pi /= s.pi.sum();
    }
    s.b_tau = U(eng);
    return s;
}

}  // namespace fixture
