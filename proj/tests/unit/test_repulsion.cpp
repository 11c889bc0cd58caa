#include <doctest.h>

#include <cmath>
#include <random>

#include "mfrm/errors.hpp"
#include "mfrm/repulsion.hpp"
#include "support/fixtures.hpp"

using namespace mfrm;

namespace {

struct Fx {
    std::unique_ptr<Model> model;
    ChainState s;
};

Fx make(double phi, double q = 2.0, double nu = 2.0) {
    auto data = fixture::small_dataset(6, 20, 2);
    auto hp = fixture::small_hp(2, 6, 5);
    hp.phi << phi, 2.0 * phi;
    hp.q = q;
    hp.nu = nu;
    Fx f;
    f.model = std::make_unique<Model>(data, hp, Mode::Mfrmmx, false);
    f.s = fixture::random_state(*f.model, 3);
    return f;
}

// Direct discretized L_q distance between centered curves.
double direct_distance(const Eigen::MatrixXd& Hc, const Eigen::VectorXd& a, const Eigen::VectorXd& b, double q) {
    Eigen::VectorXd f = Hc * (a - b);
    double s = 0.0;
    for (int t = 0; t < f.size(); ++t) s += std::pow(std::abs(f(t)), q);
    return std::pow(s / f.size(), 1.0 / q);
}

}  // namespace

TEST_CASE("distance is the discretized norm of centered curve differences") {
    for (double q : {2.0, 1.0, 3.0}) {
        auto f = make(1.0, q);
        auto spec = RepulsionSpec::from_model(*f.model);
        const auto& Hc = f.model->H_dist();
        // centered: every curve sums to zero on the grid
        CHECK((Hc.colwise().sum()).norm() < 1e-10);
        Eigen::VectorXd a = f.s.theta[0].col(0), b = f.s.theta[3].col(0);
        CHECK(curve_distance(spec, a, b) == doctest::Approx(direct_distance(Hc, a, b, q)).epsilon(1e-11));
        CHECK(curve_distance(spec, a, b) == doctest::Approx(curve_distance(spec, b, a)).epsilon(1e-14));
        // a level shift is invisible
        Eigen::VectorXd shift = a + 5.0 * Eigen::VectorXd::Ones(a.size());
        CHECK(curve_distance(spec, a, shift) < 1e-6);
    }
    auto f = make(1.0);
    auto spec = RepulsionSpec::from_model(*f.model);
    CHECK_THROWS_AS(curve_distance(spec, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)), ShapeError);
}

TEST_CASE("log repulsive factor against pairwise sum") {
    auto f = make(0.7, 2.0, 3.0);
    auto spec = RepulsionSpec::from_model(*f.model);
    for (int d = 0; d < 2; ++d) {
        Eigen::MatrixXd T = theta_dimension(f.s, d);
        double expect = 0.0;
        for (int j = 0; j < T.cols(); ++j)
            for (int l = 0; l < j; ++l)
                expect -= spec.phi(d) * std::pow(direct_distance(f.model->H_dist(), T.col(j), T.col(l), 2.0), -3.0);
        CHECK(log_repulsive_factor(spec, d, T) == doctest::Approx(expect).epsilon(1e-11));
    }
}

TEST_CASE("scaling coefficients apart increases log h") {
    auto f = make(2.0);
    auto spec = RepulsionSpec::from_model(*f.model);
    Eigen::MatrixXd T = theta_dimension(f.s, 1);
    double prev = log_repulsive_factor(spec, 1, T);
    for (double c : {1.5, 2.0, 4.0}) {
        double cur = log_repulsive_factor(spec, 1, c * T);
        CHECK(cur > prev);
        // with nu = 2 distances scale by c, so log h scales by 1/c^2
        CHECK(cur == doctest::Approx(log_repulsive_factor(spec, 1, T) / (c * c)).epsilon(1e-10));
        prev = cur;
    }
    CHECK(log_repulsive_factor(spec, 1, Eigen::MatrixXd::Zero(T.rows(), 3)) < -1e20);  // floored, not infinite
    CHECK(std::isfinite(log_repulsive_factor(spec, 1, Eigen::MatrixXd::Zero(T.rows(), 3))));
}

TEST_CASE("zero strength switches repulsion off per dimension") {
    auto f = make(0.0);
    auto spec = RepulsionSpec::from_model(*f.model);
    CHECK(log_repulsive_factor(spec, 0, theta_dimension(f.s, 0)) == 0.0);
    RepulsionCache cache(spec, f.s);
    CHECK_FALSE(cache.active());
    CHECK(cache.log_h_total() == 0.0);
}

TEST_CASE("cache deltas equal full recomputation") {
    for (double q : {2.0, 1.5}) {
        auto f = make(0.8, q);
        auto spec = RepulsionSpec::from_model(*f.model);
        RepulsionCache cache(spec, f.s);
        CHECK(cache.active());
        std::mt19937_64 eng(5);
        std::normal_distribution<double> N(0.0, 1.0);
        std::uniform_int_distribution<int> pick(0, f.s.J() - 1);
        for (int it = 0; it < 50; ++it) {
            const int j = pick(eng), d = it % 2;
            Eigen::VectorXd nd = f.s.theta[j].col(d);
            for (int k = 0; k < nd.size(); ++k) nd(k) += N(eng);
            const double before = log_repulsive_factor(spec, d, theta_dimension(f.s, d));
            const double delta = cache.delta(f.s, d, j, nd);
            CHECK(delta == doctest::Approx(log_repulsive_factor_delta(spec, d, theta_dimension(f.s, d), j, nd)).epsilon(1e-9));
            f.s.theta[j].col(d) = nd;
            const double after = log_repulsive_factor(spec, d, theta_dimension(f.s, d));
            CHECK(after - before == doctest::Approx(delta).epsilon(1e-9));
            if (it % 3 == 0) cache.update_component(f.s, j, d);
            else cache.update_component(f.s, j);
            CHECK(cache.log_h(d) == doctest::Approx(after).epsilon(1e-9));
        }
        double total = 0.0;
        for (int d = 0; d < 2; ++d) total += log_repulsive_factor(spec, d, theta_dimension(f.s, d));
        CHECK(cache.log_h_total() == doctest::Approx(total).epsilon(1e-10));
        RepulsionCache fresh(spec, f.s);
        CHECK(fresh.log_h_total() == doctest::Approx(cache.log_h_total()).epsilon(1e-10));
    }
}
