#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mfrm/errors.hpp"
#include "mfrm/randdist.hpp"
#include "mfrm/special.hpp"
#include "support/stats.hpp"

using namespace mfrm;

TEST_CASE("incomplete gamma against closed forms") {
    for (double x : {0.01, 0.3, 1.0, 2.5, 10.0, 60.0}) {
        CHECK(log_gamma_q(1.0, x) == doctest::Approx(-x).epsilon(1e-12));
        CHECK(std::exp(log_gamma_q(0.5, x)) == doctest::Approx(std::erfc(std::sqrt(x))).epsilon(1e-10));
        // Q(2, x) = (1 + x) e^{-x}
        CHECK(log_gamma_q(2.0, x) == doctest::Approx(std::log1p(x) - x).epsilon(1e-11));
        CHECK(std::exp(log_gamma_p(3.0, x)) + std::exp(log_gamma_q(3.0, x)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(std::isfinite(log_gamma_q(5.0, 800.0)));
    CHECK(log_gamma_q(5.0, 800.0) < -700.0);
}

TEST_CASE("normal cdf tails") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(log_normal_cdf(-40.0) == doctest::Approx(-804.608442013754).epsilon(1e-9));
}

TEST_CASE("truncated inverse gamma density integrates to one") {
    struct Case {
        double a, b, upper;
    };
    for (Case c : {Case{0.5, 0.2, 1.0}, Case{3.0, 40.0, 100.0}, Case{19.5, 2.0, 0.5}, Case{1.0, 500.0, 25.0}}) {
        double z = oracle::integrate([&](double x) { return std::exp(log_trunc_inv_gamma_density(x, c.a, c.b, c.upper)); },
                                     1e-12, c.upper, 4000);
        CHECK(z == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(log_trunc_inv_gamma_density(c.upper * 1.01, c.a, c.b, c.upper) == -std::numeric_limits<double>::infinity());
    }
}

TEST_CASE("truncated inverse gamma sampler matches a rejection oracle") {
    struct Case {
        double a, b, upper;
    };
    Rng rng(7);
    std::mt19937_64 eng(99);
    for (Case c : {Case{0.5, 0.3, 1.0}, Case{2.0, 20.0, 4.0}, Case{15.5, 150.0, 100.0}, Case{4.0, 1.0, 0.2}}) {
        const int n = 20000;
        std::vector<double> mine(n), ref(n);
        for (int i = 0; i < n; ++i) {
            mine[i] = sample_trunc_inv_gamma(c.a, c.b, c.upper, rng);
            ref[i] = oracle::trunc_inv_gamma_rejection(c.a, c.b, c.upper, eng);
            REQUIRE(mine[i] > 0.0);
            REQUIRE(mine[i] < c.upper);
        }
        double d = oracle::ks_two_sample(mine, ref);
        CHECK(oracle::ks_pvalue(d, n / 2.0) > 0.001);
    }
}

TEST_CASE("inverse gamma sampler matches its density") {
    Rng rng(3);
    const double a = 3.5, b = 2.0;
    std::vector<double> x(20000);
    for (auto& v : x) v = sample_inv_gamma(a, b, rng);
    auto cdf = [&](double t) { return std::exp(log_gamma_q(a, b / t)); };
    CHECK(oracle::ks_pvalue(oracle::ks_statistic(x, cdf), x.size()) > 0.001);
    double z = oracle::integrate([&](double t) { return std::exp(log_inv_gamma_density(t, a, b)); }, 1e-9, 200.0, 4000);
    CHECK(z == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("polya-gamma moments") {
    Rng rng(11);
    for (double c : {0.0, 0.5, 2.0, 5.0}) {
        // independent closed forms
        const double mean = c == 0.0 ? 0.25 : std::tanh(c / 2) / (2 * c);
        CHECK(polya_gamma_mean(c) == doctest::Approx(mean).epsilon(1e-12));
        const int n = 40000;
        std::vector<double> x(n);
        for (auto& v : x) v = sample_polya_gamma(c, rng);
        auto m = oracle::mean_se(x);
        CHECK(std::abs(m.mean - mean) < 4 * m.se);
        auto v = oracle::var_se(x);
        CHECK(std::abs(v.mean - polya_gamma_var(c)) < 4 * v.se);
    }
    // variance against the series sum_k 1/(2 pi^2)^2 / ((k-1/2)^2 + c^2/4pi^2)^2
    for (double c : {0.0, 1e-4, 0.5, 3.0, 30.0}) {
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double s = 0.0;
        for (int k = 1; k < 200000; ++k) {
            double den = (k - 0.5) * (k - 0.5) + c * c / (4 * pi2);
            s += 1.0 / (den * den);
        }
        CHECK(polya_gamma_var(c) == doctest::Approx(s / (4 * pi2 * pi2)).epsilon(1e-8));
    }
}

TEST_CASE("polya-gamma draws match the gamma-convolution oracle") {
    Rng rng(5);
    std::mt19937_64 eng(17);
    for (double c : {0.0, 1.3, 6.0}) {
        const int n = 10000;
        std::vector<double> a(n), b(n);
        for (int i = 0; i < n; ++i) {
            a[i] = sample_polya_gamma(c, rng);
            b[i] = oracle::polya_gamma_series(c, eng);
        }
        CHECK(oracle::ks_pvalue(oracle::ks_two_sample(a, b), n / 2.0) > 0.001);
    }
}

TEST_CASE("inverse wishart mean and one-dimensional reduction") {
    Rng rng(21);
    Eigen::MatrixXd S(3, 3);
    S << 2.0, 0.5, -0.3, 0.5, 1.0, 0.2, -0.3, 0.2, 1.5;
    const double df = 9.0;
    const int n = 20000;
    std::vector<std::vector<double>> draws(9, std::vector<double>(n));
    for (int k = 0; k < n; ++k) {
        Eigen::MatrixXd X = sample_inv_wishart(df, S, rng);
        REQUIRE((X - X.transpose()).norm() < 1e-12);
        for (int e = 0; e < 9; ++e) draws[e][k] = X(e % 3, e / 3);
    }
    Eigen::MatrixXd expect = S / (df - 3 - 1);
    for (int e = 0; e < 9; ++e) {
        auto m = oracle::mean_se(draws[e]);
        CHECK(std::abs(m.mean - expect(e % 3, e / 3)) < 4 * m.se);
    }
    // D = 1: IW(df, s) is IG(df / 2, s / 2)
    Eigen::MatrixXd s1(1, 1);
    s1(0, 0) = 3.0;
    std::vector<double> x(20000);
    for (auto& v : x) v = sample_inv_wishart(7.0, s1, rng)(0, 0);
    auto cdf = [](double t) { return std::exp(log_gamma_q(3.5, 1.5 / t)); };
    CHECK(oracle::ks_pvalue(oracle::ks_statistic(x, cdf), x.size()) > 0.001);
    Eigen::MatrixXd X1(1, 1);
    X1(0, 0) = 0.8;
    CHECK(log_inv_wishart_density(X1, 7.0, s1) == doctest::Approx(log_inv_gamma_density(0.8, 3.5, 1.5)).epsilon(1e-12));
}

TEST_CASE("inverse wishart density against a direct formula") {
    Eigen::MatrixXd S(2, 2), X(2, 2);
    S << 1.5, 0.3, 0.3, 0.7;
    X << 0.4, -0.1, -0.1, 0.9;
    const double df = 5.0;
    // 2x2 closed form
    const double lg2 = 0.5 * std::log(std::numbers::pi) + std::lgamma(df / 2) + std::lgamma((df - 1) / 2);
    const double expect = 0.5 * df * std::log(S.determinant()) - df * std::log(2.0) - lg2 -
                          0.5 * (df + 3) * std::log(X.determinant()) - 0.5 * (S * X.inverse()).trace();
    CHECK(log_inv_wishart_density(X, df, S) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(log_mv_gamma(2, df / 2) == doctest::Approx(lg2).epsilon(1e-13));
}

TEST_CASE("multivariate normal samplers agree on mean and covariance") {
    Rng rng(2);
    Eigen::MatrixXd C(2, 2);
    C << 2.0, 0.8, 0.8, 1.0;
    Eigen::VectorXd mu(2);
    mu << 1.0, -2.0;
    Eigen::MatrixXd P = C.inverse();
    const int n = 40000;
    std::vector<double> x0(n), x1(n), c01(n), y0(n);
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXd a = sample_mvn_prec(mu, P, rng);
        Eigen::VectorXd b = sample_mvn_canonical(P * mu, P, rng);
        Eigen::VectorXd c = sample_mvn_cov(mu, C, rng);
        x0[k] = a(0);
        x1[k] = b(1);
        c01[k] = (c(0) - mu(0)) * (c(1) - mu(1));
        y0[k] = c(0);
    }
    auto m0 = oracle::mean_se(x0), m1 = oracle::mean_se(x1), mc = oracle::mean_se(c01);
    CHECK(std::abs(m0.mean - 1.0) < 4 * m0.se);
    CHECK(std::abs(m1.mean + 2.0) < 4 * m1.se);
    CHECK(std::abs(mc.mean - 0.8) < 4 * mc.se);
    auto v0 = oracle::var_se(y0);
    CHECK(std::abs(v0.mean - 2.0) < 4 * v0.se);
    Eigen::VectorXd x(2);
    x << 0.3, -1.0;
    Eigen::VectorXd r = x - mu;
    double expect = -std::log(2 * std::numbers::pi) - 0.5 * std::log(C.determinant()) - 0.5 * r.dot(C.inverse() * r);
    CHECK(log_mvn_prec_density(x, mu, P) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("dirichlet draws and density") {
    Rng rng(8);
    Eigen::VectorXd a(3);
    a << 0.5, 2.0, 4.0;
    const int n = 30000;
    std::vector<double> p0(n), lp(n);
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXd p = sample_dirichlet(a, rng);
        REQUIRE(p.sum() == doctest::Approx(1.0));
        p0[k] = p(0);
        Eigen::VectorXd l = sample_log_dirichlet(a, rng);
        lp[k] = std::exp(l(2));
    }
    auto m = oracle::mean_se(p0), m2 = oracle::mean_se(lp);
    CHECK(std::abs(m.mean - 0.5 / 6.5) < 4 * m.se);
    CHECK(std::abs(m2.mean - 4.0 / 6.5) < 4 * m2.se);
    // tiny concentrations stay finite on the log scale
    Eigen::VectorXd tiny = Eigen::VectorXd::Constant(4, 1e-3);
    Eigen::VectorXd l = sample_log_dirichlet(tiny, rng);
    CHECK(l.allFinite());
    CHECK(log_sum_exp(l) == doctest::Approx(0.0).epsilon(1e-12));
    Eigen::VectorXd p(3);
    p << 0.2, 0.3, 0.5;
    double expect = std::lgamma(6.5) - std::lgamma(0.5) - std::lgamma(2.0) - std::lgamma(4.0) - 0.5 * std::log(0.2) +
                    std::log(0.3) + 3 * std::log(0.5);
    CHECK(log_dirichlet_density(p, a) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("matrix normal covariance structure") {
    Rng rng(4);
    Eigen::MatrixXd U(2, 2), V(2, 2), M = Eigen::MatrixXd::Zero(2, 2);
    U << 1.0, 0.5, 0.5, 2.0;
    V << 3.0, -1.0, -1.0, 1.0;
    const int n = 40000;
    std::vector<double> cross(n);
    for (int k = 0; k < n; ++k) {
        Eigen::MatrixXd X = sample_matrix_normal(M, U, V, rng);
        cross[k] = X(0, 0) * X(1, 1);  // Cov = U(0,1) V(0,1)
    }
    auto m = oracle::mean_se(cross);
    CHECK(std::abs(m.mean - (0.5 * -1.0)) < 4 * m.se);
}

TEST_CASE("log weights sampling and log-sum-exp") {
    Rng rng(1);
    Eigen::VectorXd lw(3);
    lw << std::log(0.2), -std::numeric_limits<double>::infinity(), std::log(0.8);
    int hits[3] = {0, 0, 0};
    for (int k = 0; k < 20000; ++k) ++hits[sample_log_weights(lw, rng)];
    CHECK(hits[1] == 0);
    CHECK(std::abs(hits[0] / 20000.0 - 0.2) < 4 * std::sqrt(0.16 / 20000));
    Eigen::VectorXd big(2);
    big << 1000.0, 1000.0;
    CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));
}
