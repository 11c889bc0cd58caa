#include <doctest.h>

#include <cmath>
#include <random>

#include "mfrm/randdist.hpp"
#include "mfrm/weights.hpp"
#include "support/fixtures.hpp"
#include "support/stats.hpp"

using namespace mfrm;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

int draw_index(const Eigen::VectorXd& logp, std::mt19937_64& eng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double u = U(eng), c = 0.0;
    for (int j = 0; j < logp.size(); ++j) {
        c += std::exp(logp(j));
        if (u < c) return j;
    }
    return static_cast<int>(logp.size()) - 1;
}

}  // namespace

TEST_CASE("stick-breaking weights follow the product formula") {
    Eigen::MatrixXd alpha(4, 2);
    alpha << 0.3, -1.0, -0.5, 0.2, 1.2, 0.7, 9.0, 9.0;  // last row is ignored
    Eigen::VectorXd x(2);
    x << 1.0, 0.4;
    Eigen::VectorXd lp = log_stick_breaking(alpha, x);
    double rest = 1.0;
    for (int j = 0; j < 3; ++j) {
        const double nu = logistic(alpha.row(j).dot(x));
        CHECK(std::exp(lp(j)) == doctest::Approx(nu * rest).epsilon(1e-13));
        rest *= 1.0 - nu;
    }
    CHECK(std::exp(lp(3)) == doctest::Approx(rest).epsilon(1e-13));
    CHECK(lp.array().exp().sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("stick-breaking stays finite for extreme predictors") {
    Eigen::MatrixXd alpha(3, 1);
    alpha << 800.0, -800.0, 0.0;
    Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
    Eigen::VectorXd lp = log_stick_breaking(alpha, x);
    CHECK(lp.allFinite());
    CHECK(lp(0) == doctest::Approx(0.0));
    CHECK(lp(1) < -1000.0);
    alpha(0, 0) = -800.0;
    lp = log_stick_breaking(alpha, x);
    CHECK(lp.allFinite());
    CHECK(log_sum_exp(lp) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("weight design columns") {
    auto data = fixture::small_dataset(9, 20, 1, 3, true);
    Eigen::MatrixXd X = build_weight_design(data.covariates);
    REQUIRE(X.cols() == 4);
    CHECK((X.col(0).array() == 1.0).all());
    CHECK(X.col(1).mean() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((X.col(1).array().square().sum() / 8.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 9; ++i) {
        const int code = i % 3;
        CHECK(X(i, 2) == (code == 1 ? 1.0 : 0.0));
        CHECK(X(i, 3) == (code == 2 ? 1.0 : 0.0));
    }
}

TEST_CASE("weights prior densities") {
    auto data = fixture::small_dataset(6, 20, 1, 3, true);
    auto hp = fixture::small_hp(1, 4, 3);
    Model cov(data, hp, Mode::Mfrmmx, true);
    ChainState s = fixture::random_state(cov, 2);
    double expect = 0.0;
    for (int j = 0; j < 2; ++j)
        for (int l = 0; l < cov.weight_dim(); ++l) expect += log_normal_density(s.alpha(j, l), 0.0, hp.sigma_alpha2);
    CHECK(log_weights_prior(cov, s) == doctest::Approx(expect).epsilon(1e-12));
    Model plain(data, hp, Mode::Mfrmmx, false);
    ChainState t = fixture::random_state(plain, 2);
    CHECK(log_weights_prior(plain, t) ==
          doctest::Approx(log_dirichlet_density(t.pi, Eigen::VectorXd::Constant(3, 1.0 / 3))).epsilon(1e-12));
    Eigen::MatrixXd lw = log_weight_matrix(plain, t);
    CHECK(lw(4, 1) == doctest::Approx(std::log(t.pi(1))));
}

TEST_CASE("polya-gamma update preserves the coefficient prior") {
    auto data = fixture::small_dataset(10, 20, 1, 3, true);
    auto hp = fixture::small_hp(1, 4, 3);
    Model model(data, hp, Mode::Mfrmmx, true);
    ChainState s = fixture::random_state(model, 1);
    std::mt19937_64 eng(8);
    std::normal_distribution<double> N(0.0, std::sqrt(hp.sigma_alpha2));
    for (int j = 0; j < 3; ++j)
        for (int l = 0; l < model.weight_dim(); ++l) s.alpha(j, l) = N(eng);
    Rng rng(31);
    const int sweeps = 10000;
    std::vector<double> a0(sweeps), a1sq(sweeps), a2(sweeps);
    for (int it = 0; it < sweeps; ++it) {
        // z | alpha from the prior, then alpha | z
        for (int i = 0; i < model.m(); ++i)
            s.z[i] = draw_index(log_stick_breaking(s.alpha, model.Xw().row(i).transpose()), eng);
        step_stick_breaking(model, s, rng);
        a0[it] = s.alpha(0, 0);
        a1sq[it] = s.alpha(1, 1) * s.alpha(1, 1);
        a2[it] = s.alpha(1, 3);
    }
    auto m0 = oracle::batch_mean_se(a0), m1 = oracle::batch_mean_se(a1sq), m2 = oracle::batch_mean_se(a2);
    CHECK(std::abs(m0.mean) < 4 * m0.se);
    CHECK(std::abs(m1.mean - hp.sigma_alpha2) < 4 * m1.se);
    CHECK(std::abs(m2.mean) < 4 * m2.se);
}

TEST_CASE("dirichlet update preserves the weight prior") {
    auto data = fixture::small_dataset(10, 20, 1, 3);
    auto hp = fixture::small_hp(1, 4, 3);
    hp.dir_conc = 0.7;
    Model model(data, hp, Mode::Mfrmmx, false);
    ChainState s = fixture::random_state(model, 1);
    std::mt19937_64 eng(4);
    Rng rng(5);
    const int sweeps = 10000;
    std::vector<double> p0(sweeps), p0sq(sweeps);
    for (int it = 0; it < sweeps; ++it) {
        Eigen::VectorXd lp = s.pi.array().log();
        for (int i = 0; i < model.m(); ++i) s.z[i] = draw_index(lp, eng);
        step_dirichlet_weights(model, s, rng);
        p0[it] = s.pi(0);
        p0sq[it] = s.pi(0) * s.pi(0);
    }
    // Dir(0.7, 0.7, 0.7): E pi = 1/3, E pi^2 = a(a+1) / (A(A+1))
    auto m = oracle::batch_mean_se(p0), m2 = oracle::batch_mean_se(p0sq);
    CHECK(std::abs(m.mean - 1.0 / 3) < 4 * m.se);
    CHECK(std::abs(m2.mean - 0.7 * 1.7 / (2.1 * 3.1)) < 4 * m2.se);
}
