#include "mfrm/repulsion.hpp"

#include <cmath>

#include "mfrm/errors.hpp"

namespace mfrm {

RepulsionSpec RepulsionSpec::from_model(const Model& model) {
    RepulsionSpec spec;
    spec.phi = model.hp().phi;
    spec.nu = model.hp().nu;
    spec.q = model.hp().q;
    spec.floor = model.hp().dist_floor;
    spec.H = model.H_dist();
    spec.Gram = spec.H.transpose() * spec.H / static_cast<double>(spec.H.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec.Gram);
    spec.R = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    return spec;
}

double curve_distance(const RepulsionSpec& spec, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != spec.H.cols() || b.size() != spec.H.cols())
        throw ShapeError("curve_distance: coefficient length does not match the design");
    Eigen::VectorXd diff = a - b;
    if (spec.q == 2.0) return (spec.R * diff).norm();
    Eigen::VectorXd f = spec.H * diff;
    return std::pow(f.array().abs().pow(spec.q).mean(), 1.0 / spec.q);
}

namespace {
double pair_value(const RepulsionSpec& spec, int d, double dist) {
    const double x = std::max(dist, spec.floor);
    if (spec.nu == 2.0) return spec.phi(d) / (x * x);
    return spec.phi(d) * std::pow(x, -spec.nu);
}
}  // namespace

double log_repulsive_factor(const RepulsionSpec& spec, int d, const Eigen::MatrixXd& Theta) {
    if (spec.phi(d) == 0.0) return 0.0;
    double s = 0.0;
    for (Eigen::Index j = 0; j < Theta.cols(); ++j)
        for (Eigen::Index l = j + 1; l < Theta.cols(); ++l)
            s += pair_value(spec, d, curve_distance(spec, Theta.col(j), Theta.col(l)));
    return -s;
}

double log_repulsive_factor_delta(const RepulsionSpec& spec, int d, const Eigen::MatrixXd& Theta,
                                  int j, const Eigen::VectorXd& theta_new) {
    if (spec.phi(d) == 0.0) return 0.0;
    double s = 0.0;
    for (Eigen::Index l = 0; l < Theta.cols(); ++l) {
        if (l == j) continue;
        s += pair_value(spec, d, curve_distance(spec, Theta.col(j), Theta.col(l))) -
             pair_value(spec, d, curve_distance(spec, theta_new, Theta.col(l)));
    }
    return s;
}

Eigen::MatrixXd theta_dimension(const ChainState& s, int d) {
    Eigen::MatrixXd T(s.theta.front().rows(), s.J());
    for (int j = 0; j < s.J(); ++j) T.col(j) = s.theta[j].col(d);
    return T;
}

RepulsionCache::RepulsionCache(const RepulsionSpec& spec, const ChainState& s) : spec_(spec) {
    active_ = (spec_.phi.array() > 0.0).any();
    rebuild(s);
}

double RepulsionCache::pair_term(double dist, int d) const { return pair_value(spec_, d, dist); }

double RepulsionCache::distance(const ChainState& s, int d, int j, int l) const {
    if (spec_.q == 2.0) return (proj_[d].col(j) - proj_[d].col(l)).norm();
    return curve_distance(spec_, s.theta[j].col(d), s.theta[l].col(d));
}

void RepulsionCache::rebuild(const ChainState& s) {
    const int J = s.J(), D = static_cast<int>(spec_.phi.size());
    dist_.assign(D, Eigen::MatrixXd::Zero(J, J));
    proj_.assign(D, Eigen::MatrixXd());
    if (!active_) return;
    for (int d = 0; d < D; ++d) {
        if (spec_.phi(d) == 0.0) continue;
        if (spec_.q == 2.0) proj_[d] = spec_.R * theta_dimension(s, d);
        for (int j = 0; j < J; ++j)
            for (int l = j + 1; l < J; ++l) dist_[d](j, l) = dist_[d](l, j) = distance(s, d, j, l);
    }
}

double RepulsionCache::log_h(int d) const {
    if (!active_ || spec_.phi(d) == 0.0) return 0.0;
    const auto& M = dist_[d];
    double s = 0.0;
    for (Eigen::Index j = 0; j < M.rows(); ++j)
        for (Eigen::Index l = j + 1; l < M.cols(); ++l) s += pair_term(M(j, l), d);
    return -s;
}

double RepulsionCache::log_h_total() const {
    double s = 0.0;
    for (int d = 0; d < static_cast<int>(spec_.phi.size()); ++d) s += log_h(d);
    return s;
}

double RepulsionCache::delta(const ChainState& s, int d, int j, const Eigen::VectorXd& theta_new) const {
    if (!active_ || spec_.phi(d) == 0.0) return 0.0;
    double out = 0.0;
    if (spec_.q == 2.0) {
        const Eigen::VectorXd u = spec_.R * theta_new;
        for (int l = 0; l < s.J(); ++l) {
            if (l == j) continue;
            out += pair_term(dist_[d](j, l), d) - pair_term((u - proj_[d].col(l)).norm(), d);
        }
        return out;
    }
    for (int l = 0; l < s.J(); ++l) {
        if (l == j) continue;
        out += pair_term(dist_[d](j, l), d) - pair_term(curve_distance(spec_, theta_new, s.theta[l].col(d)), d);
    }
    return out;
}

void RepulsionCache::update_component(const ChainState& s, int j, int only_d) {
    if (!active_) return;
    for (int d = 0; d < static_cast<int>(spec_.phi.size()); ++d) {
        if (spec_.phi(d) == 0.0 || (only_d >= 0 && d != only_d)) continue;
        if (spec_.q == 2.0) proj_[d].col(j) = spec_.R * s.theta[j].col(d);
        for (int l = 0; l < s.J(); ++l) {
            if (l == j) continue;
            dist_[d](j, l) = dist_[d](l, j) = distance(s, d, j, l);
        }
    }
}

}  // namespace mfrm
