#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mfrm/model.hpp"
#include "mfrm/rng.hpp"

namespace mfrm {

// log c(S) = log M + log (|S| - 1)!
double log_cohesion(int size, double M);

// Auxiliary normal-normal similarity of one continuous covariate.
double log_similarity_continuous(double sum, double sumsq, int n);
// Dirichlet-multinomial similarity of one categorical covariate.
double log_similarity_categorical(const std::vector<int>& level_counts, double conc);

// log g(X_S) over all covariates used by the model; 0 without covariates.
double log_similarity(const Model& model, const std::vector<int>& members);

// log of c(S)g(X_S) summed over the blocks of z (labels need not be compact).
double log_partition_prior(const Model& model, const std::vector<int>& z);

// log [c(S + i) g(X_{S+i})] - log [c(S) g(X_S)], S nonempty and not containing i.
double log_join_ratio(const Model& model, const std::vector<int>& members, int i);

// Relabels occupied components to 0..K-1 in order of first appearance, moving parameters along.
void compact_labels(ChainState& s);

}  // namespace mfrm
