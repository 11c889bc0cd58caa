#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mfrm/model.hpp"

namespace mfrm {

struct RepulsionSpec {
    Eigen::VectorXd phi;
    double nu = 2.0;
    double q = 2.0;
    double floor = 1e-12;
    Eigen::MatrixXd H;     // centered design on the common grid
    Eigen::MatrixXd Gram;  // H^T H / n, used when q == 2
    Eigen::MatrixXd R;     // R^T R = Gram, so the q == 2 distance is |R (a - b)|

    static RepulsionSpec from_model(const Model& model);
};

double curve_distance(const RepulsionSpec& spec, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// log h for dimension d; columns of Theta are the component coefficient vectors.
double log_repulsive_factor(const RepulsionSpec& spec, int d, const Eigen::MatrixXd& Theta);

// Change in log h when column j of Theta is replaced.
double log_repulsive_factor_delta(const RepulsionSpec& spec, int d, const Eigen::MatrixXd& Theta,
                                  int j, const Eigen::VectorXd& theta_new);

Eigen::MatrixXd theta_dimension(const ChainState& s, int d);  // p x J

// Pairwise distances per dimension, kept in sync with theta.
class RepulsionCache {
public:
    RepulsionCache() = default;
    RepulsionCache(const RepulsionSpec& spec, const ChainState& s);

    void rebuild(const ChainState& s);
    double log_h(int d) const;
    double log_h_total() const;
    double delta(const ChainState& s, int d, int j, const Eigen::VectorXd& theta_new) const;
    // call after theta[j] has been changed in s
    void update_component(const ChainState& s, int j, int only_d = -1);
    const RepulsionSpec& spec() const { return spec_; }
    bool active() const { return active_; }

private:
    RepulsionSpec spec_;
    bool active_ = false;
    std::vector<Eigen::MatrixXd> dist_;  // per d, J x J
    std::vector<Eigen::MatrixXd> proj_;  // per d, R * theta columns (q == 2 only)
    double distance(const ChainState& s, int d, int j, int l) const;
    double pair_term(double dist, int d) const;
};

}  // namespace mfrm
