#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mfrm/repulsion.hpp"
#include "mfrm/sampler.hpp"

namespace mfrm {

// Fraction of draws in which each pair shares a component; rows of z are draws.
Eigen::MatrixXd coclustering(const Eigen::MatrixXi& z);

// Least-squares partition: index of the draw closest to the co-clustering matrix.
int dahl_partition(const Eigen::MatrixXi& z, const Eigen::MatrixXd& cocluster);

double rand_index(const std::vector<int>& a, const std::vector<int>& b);

struct InformationCriteria {
    double lppd = 0.0;
    double p_waic = 0.0;
    double waic = 0.0;
    double lpml = 0.0;
};
InformationCriteria information_criteria(const Eigen::MatrixXd& loglik);

struct ClusterCounts {
    Eigen::VectorXi clusters;
    Eigen::VectorXi singletons;
    double mean_clusters = 0.0;
    double mean_singletons = 0.0;
};
ClusterCounts cluster_counts(const Eigen::MatrixXi& z);

// Mean pairwise curve distance among occupied components, per draw (rows) and dimension (cols).
// Draws with fewer than two components give NaN.
Eigen::MatrixXd pairwise_theta_distances(const PosteriorDraws& draws, const RepulsionSpec& spec);

double median(std::vector<double> v);

std::vector<int> row_labels(const Eigen::MatrixXi& z, int row);

}  // namespace mfrm
