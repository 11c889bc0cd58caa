#pragma once

// Prior-preservation checks for single sampler blocks. Each check alternates
// drawing the children of a block from their conditional given the block with
// the block's own update; the block's marginal must then stay at its prior.

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfrm/model.hpp"
#include "mfrm/randdist.hpp"
#include "mfrm/sampler.hpp"
#include "mfrm/weights.hpp"
#include "support/fixtures.hpp"
#include "support/stats.hpp"

namespace geweke {

struct Result {
    std::string name;
    double z;
};

struct Stat {
    std::string name;
    std::function<double(const mfrm::ChainState&)> f;
    double expect;
};

struct Block {
    std::string name;
    mfrm::Mode mode = mfrm::Mode::Mfrmmx;
    bool covariates = false;
    bool rebuild = false;  // children include the observed curves
    std::function<void(const mfrm::Model&, mfrm::ChainState&, std::mt19937_64&)> regen;
    std::function<void(mfrm::Sampler&)> step;
    std::vector<Stat> stats;
};

inline mfrm::Hyperparams suite_hp() {
    auto hp = fixture::small_hp(2, 4, 3);
    hp.A.setConstant(3.0);
    hp.s_mu2 = 4.0;
    hp.s02 = 4.0;
    hp.a0 = 3.0;
    hp.b0 = 2.0;
    hp.omega = 4.0;
    hp.Sigma0.resize(2, 2);
    hp.Sigma0 << 1.0, 0.3, 0.3, 0.8;
    hp.a_sigma = 3.0;
    hp.b_sigma = 2.0;
    hp.a_tau = 3.0;
    hp.xi = 2.0;
    hp.varpi = 1.0;
    hp.sigma_alpha2 = 2.0;
    return hp;
}

inline mfrm::CurveDataset resimulate(const mfrm::Model& model, const mfrm::ChainState& s, std::mt19937_64& eng) {
    std::normal_distribution<double> N(0.0, 1.0);
    mfrm::CurveDataset data = model.data();
    const int D = model.D();
    for (int i = 0; i < model.m(); ++i) {
        const auto& H = model.basis_of(i).H;
        Eigen::MatrixXd L = s.Sigma[i].llt().matrixL();
        Eigen::MatrixXd Y = H * s.B[i];
        Y.rowwise() += s.beta0.row(i);
        Eigen::VectorXd e(D);
        for (int t = 0; t < Y.rows(); ++t) {
            for (int d = 0; d < D; ++d) e(d) = N(eng);
            Y.row(t) += (L * e).transpose();
        }
        data.Y[i] = Y;
    }
    return data;
}

inline void regen_theta(const mfrm::Model& model, mfrm::ChainState& s, std::mt19937_64& eng) {
    std::normal_distribution<double> N(0.0, 1.0);
    const int p = model.p();
    for (int j = 0; j < s.J(); ++j)
        for (int d = 0; d < model.D(); ++d) {
            Eigen::VectorXd zv(p);
            for (int k = 0; k < p; ++k) zv(k) = N(eng);
            s.theta[j].col(d) =
                s.mu.col(d) + std::sqrt(s.tau2(j, d)) * model.K_chol_upper().triangularView<Eigen::Upper>().solve(zv);
        }
}

inline void regen_B(const mfrm::Model& model, mfrm::ChainState& s, std::mt19937_64& eng) {
    std::normal_distribution<double> N(0.0, 1.0);
    for (int i = 0; i < model.m(); ++i) {
        const int j = s.z[i];
        for (int d = 0; d < model.D(); ++d)
            for (int k = 0; k < model.p(); ++k) s.B[i](k, d) = s.theta[j](k, d) + std::sqrt(s.lam2(j, d)) * N(eng);
    }
}

inline void regen_beta0(const mfrm::Model& model, mfrm::ChainState& s, std::mt19937_64& eng) {
    std::normal_distribution<double> N(0.0, 1.0);
    for (int i = 0; i < model.m(); ++i)
        for (int d = 0; d < model.D(); ++d) s.beta0(i, d) = s.mu0(d) + std::sqrt(s.sig02(d)) * N(eng);
}

inline std::vector<Result> run_block(const Block& b, int sweeps, unsigned seed) {
    const auto hp = suite_hp();
    auto data = fixture::small_dataset(6, 14, 2, seed, b.covariates);
    auto model = std::make_unique<mfrm::Model>(data, hp, b.mode, b.covariates);
    mfrm::ChainState s = fixture::random_state(*model, seed);
    s.z = {0, 0, 1, 1, 0, 1};  // label 2 stays empty
    for (int i = 0; i < model->m(); ++i) {
        Eigen::MatrixXd S = hp.Sigma0;
        if (model->independent()) S = Eigen::MatrixXd(S.diagonal().asDiagonal());
        s.Sigma[i] = S;
    }
    std::mt19937_64 eng(seed * 7919u + 13u);
    const int burn = 200;
    std::vector<std::vector<double>> rec(b.stats.size(), std::vector<double>(sweeps));
    for (int it = 0; it < burn + sweeps; ++it) {
        if (b.regen) b.regen(*model, s, eng);
        if (b.rebuild) {
            auto fresh = resimulate(*model, s, eng);
            model = std::make_unique<mfrm::Model>(std::move(fresh), hp, b.mode, b.covariates);
        }
        mfrm::Sampler smp(*model, s, eng());
        b.step(smp);
        s = smp.state();
        if (it >= burn)
            for (std::size_t k = 0; k < b.stats.size(); ++k) rec[k][it - burn] = b.stats[k].f(s);
    }
    std::vector<Result> out;
    for (std::size_t k = 0; k < b.stats.size(); ++k) {
        auto m = oracle::batch_mean_se(rec[k]);
        out.push_back({b.name + ": " + b.stats[k].name, (m.mean - b.stats[k].expect) / m.se});
    }
    return out;
}

// Every block of the suite with its statistics; expectations are prior moments
// given the parents, which stay fixed within a block's check.
inline std::vector<Block> suite() {
    using mfrm::ChainState;
    using mfrm::Mode;
    using mfrm::Sampler;
    const auto hp = suite_hp();
    std::vector<Block> out;
    // the starting state of run_block, whose parents every check holds fixed
    auto fixed = [](unsigned seed, Mode mode, bool cov) {
        auto data = fixture::small_dataset(6, 14, 2, seed, cov);
        mfrm::Model model(data, suite_hp(), mode, cov);
        return fixture::random_state(model, seed);
    };
    const unsigned seed = 3;

    {
        ChainState f = fixed(seed, Mode::Mfrmmx, false);
        const double a = hp.a_tau, bt = f.b_tau;
        out.push_back({"tau2", Mode::Mfrmmx, false, false, regen_theta, [](Sampler& s) { s.step_tau2(); },
                       {{"E 1/tau2", [](const ChainState& s) { return 1.0 / s.tau2(0, 0); }, a / bt},
                        {"E 1/tau2^2", [](const ChainState& s) { return std::pow(s.tau2(2, 1), -2.0); },
                         a * (a + 1) / (bt * bt)}}});
    }
    {
        const double A = hp.A(0);
        out.push_back({"lambda2", Mode::Mfrmmx, false, false, regen_B, [](Sampler& s) { s.step_lam2(); },
                       {{"E lambda", [](const ChainState& s) { return std::sqrt(s.lam2(0, 0)); }, A / 2},
                        {"E lambda2", [](const ChainState& s) { return s.lam2(1, 1); }, A * A / 3},
                        {"E lambda2 empty", [](const ChainState& s) { return s.lam2(2, 0); }, A * A / 3}}});
    }
    for (Mode mode : {Mode::Mfrmmx, Mode::MfrmmxInd}) {
        ChainState f = fixed(seed, mode, false);
        const double m0 = f.mu0(0), v0 = f.sig02(0), m1 = f.mu0(1);
        out.push_back({std::string("beta0 ") + mfrm::mode_name(mode), mode, false, true, nullptr,
                       [](Sampler& s) { s.step_beta0(); },
                       {{"E beta0", [](const ChainState& s) { return s.beta0(0, 0); }, m0},
                        {"E (beta0-mu0)^2", [m0](const ChainState& s) { return std::pow(s.beta0(0, 0) - m0, 2); }, v0},
                        {"E beta0 d2", [](const ChainState& s) { return s.beta0(3, 1); }, m1}}});
    }
    {
        Eigen::MatrixXd W = hp.omega * hp.Sigma0.inverse();
        out.push_back({"Sigma", Mode::Mfrmmx, false, true, nullptr, [](Sampler& s) { s.step_sigma(); },
                       {{"E inv Sigma 00", [](const ChainState& s) { return s.Sigma[0].inverse()(0, 0); }, W(0, 0)},
                        {"E inv Sigma 01", [](const ChainState& s) { return s.Sigma[2].inverse()(0, 1); }, W(0, 1)},
                        {"E inv Sigma 11", [](const ChainState& s) { return s.Sigma[4].inverse()(1, 1); }, W(1, 1)}}});
        out.push_back({"Sigma diagonal", Mode::MfrmmxInd, false, true, nullptr, [](Sampler& s) { s.step_sigma(); },
                       {{"E 1/sigma2", [](const ChainState& s) { return 1.0 / s.Sigma[1](1, 1); }, hp.a_sigma / hp.b_sigma},
                        {"E sigma2", [](const ChainState& s) { return s.Sigma[3](0, 0); }, hp.b_sigma / (hp.a_sigma - 1)}}});
    }
    {
        ChainState f = fixed(seed, Mode::Mfrmmx, false);
        const int j0 = 0;
        const double th = f.theta[j0](1, 0), l2 = f.lam2(j0, 0);
        out.push_back({"coefficients", Mode::Mfrmmx, false, true, nullptr, [](Sampler& s) { s.step_coefficients(); },
                       {{"E B", [](const ChainState& s) { return s.B[0](1, 0); }, th},
                        {"E (B-theta)^2", [th](const ChainState& s) { return std::pow(s.B[0](1, 0) - th, 2); }, l2}}});
    }
    for (Mode mode : {Mode::Mfrmmx, Mode::MfrmmxInd}) {
        ChainState f = fixed(seed, mode, false);
        auto data = fixture::small_dataset(6, 14, 2, seed, false);
        mfrm::Model model(data, hp, mode, false);
        Eigen::MatrixXd Kinv = model.K().inverse();
        const double mu1 = f.mu(1, 0), v1 = f.tau2(1, 0) * Kinv(1, 1);
        const double mu2 = f.mu(2, 1), v2 = f.tau2(2, 1) * Kinv(2, 2);
        const double c03 = f.tau2(0, 1) * Kinv(0, 3), m0 = f.mu(0, 1), m3 = f.mu(3, 1);
        out.push_back(
            {std::string("theta ") + mfrm::mode_name(mode), mode, false, true, regen_B,
             [](Sampler& s) { s.step_theta(); },
             {{"E theta", [](const ChainState& s) { return s.theta[1](1, 0); }, mu1},
              {"E (theta-mu)^2", [mu1](const ChainState& s) { return std::pow(s.theta[1](1, 0) - mu1, 2); }, v1},
              {"E theta empty", [](const ChainState& s) { return s.theta[2](2, 1); }, mu2},
              {"E (theta-mu)^2 empty", [mu2](const ChainState& s) { return std::pow(s.theta[2](2, 1) - mu2, 2); }, v2},
              {"cross moment", [m0, m3](const ChainState& s) { return (s.theta[0](0, 1) - m0) * (s.theta[0](3, 1) - m3); },
               c03}}});
    }
    out.push_back({"mu", Mode::Mfrmmx, false, false, regen_theta, [](Sampler& s) { s.step_mu(); },
                   {{"E mu", [](const ChainState& s) { return s.mu(1, 0); }, 0.0},
                    {"E mu^2", [](const ChainState& s) { return s.mu(2, 1) * s.mu(2, 1); }, hp.s_mu2}}});
    out.push_back({"mu0", Mode::Mfrmmx, false, false, regen_beta0, [](Sampler& s) { s.step_mu0(); },
                   {{"E mu0", [](const ChainState& s) { return s.mu0(0); }, 0.0},
                    {"E mu0^2", [](const ChainState& s) { return s.mu0(1) * s.mu0(1); }, hp.s02}}});
    out.push_back({"sigma0^2", Mode::Mfrmmx, false, false, regen_beta0, [](Sampler& s) { s.step_sig02(); },
                   {{"E 1/sigma0^2", [](const ChainState& s) { return 1.0 / s.sig02(0); }, hp.a0 / hp.b0},
                    {"E sigma0^2", [](const ChainState& s) { return s.sig02(1); }, hp.b0 / (hp.a0 - 1)}}});
    out.push_back({"b_tau", Mode::Mfrmmx, false, false,
                   [](const mfrm::Model& model, ChainState& s, std::mt19937_64& eng) {
                       for (int j = 0; j < s.J(); ++j)
                           for (int d = 0; d < model.D(); ++d) {
                               std::gamma_distribution<double> G(model.hp().a_tau, 1.0 / s.b_tau);
                               s.tau2(j, d) = 1.0 / G(eng);
                           }
                   },
                   [](Sampler& s) { s.step_b_tau(); },
                   {{"E b_tau", [](const ChainState& s) { return s.b_tau; }, hp.xi / hp.varpi},
                    {"E b_tau^2", [](const ChainState& s) { return s.b_tau * s.b_tau; },
                     hp.xi * (hp.xi + 1) / (hp.varpi * hp.varpi)}}});
    out.push_back({"alpha", Mode::Mfrmmx, true, false,
                   [](const mfrm::Model& model, ChainState& s, std::mt19937_64& eng) {
                       std::uniform_real_distribution<double> U(0.0, 1.0);
                       for (int i = 0; i < model.m(); ++i) {
                           Eigen::VectorXd lp = mfrm::log_stick_breaking(s.alpha, model.Xw().row(i).transpose());
                           double u = U(eng), c = 0.0;
                           int pick = s.J() - 1;
                           for (int j = 0; j < s.J(); ++j) {
                               c += std::exp(lp(j));
                               if (u < c) {
                                   pick = j;
                                   break;
                               }
                           }
                           s.z[i] = pick;
                       }
                   },
                   [](Sampler& s) { s.step_weights(); },
                   {{"E alpha", [](const ChainState& s) { return s.alpha(0, 0); }, 0.0},
                    {"E alpha^2", [](const ChainState& s) { return s.alpha(1, 1) * s.alpha(1, 1); }, hp.sigma_alpha2}}});
    return out;
}

inline std::vector<Result> run_suite(int sweeps, unsigned seed = 3) {
    std::vector<Result> all;
    for (const auto& b : suite()) {
        auto r = run_block(b, sweeps, seed);
        all.insert(all.end(), r.begin(), r.end());
    }
    return all;
}

}  // namespace geweke
