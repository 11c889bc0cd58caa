#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mfrm/model.hpp"
#include "mfrm/repulsion.hpp"
#include "mfrm/rng.hpp"

namespace mfrm {

struct SplitMergeOptions {
    int n_gs = 5;              // intermediate restricted scans
    bool random_launch = true; // launch from prior draws and a random split of S
};

struct MoveRecord {
    enum class Kind { Split, Merge, Skipped, Failed };
    long iter = 0;
    Kind kind = Kind::Skipped;
    int i0 = -1, i1 = -1;
    double log_ratio = 0.0;
    bool accepted = false;
};

const char* move_kind_name(MoveRecord::Kind k);

// Parameters of the one or two components involved in a restricted scan.
struct LaunchState {
    int labels[2] = {-1, -1};
    bool two = true;           // split form; false means everyone sits in labels[1]
    std::vector<int> members;  // anchors first: members[0] = i0, members[1] = i1
    std::vector<int> side;     // 0 or 1 per member
    Eigen::MatrixXd theta[2];
    Eigen::MatrixXd tau2;  // 2 x D
    Eigen::MatrixXd lam2;  // 2 x D
};

// Everything a restricted scan conditions on.
struct ScanContext {
    const Model* model;
    const ChainState* state;
    const Eigen::MatrixXd* log_weights;  // m x J; unused for product partitions
};

// One restricted Gibbs scan over theta, tau^2, lambda^2 and (two-component form) the
// non-anchor allocations. With target set, values are forced to the target and only
// their log density is accumulated. Returns the log proposal density of the scan, or 0
// when density is false.
double restricted_scan(const ScanContext& ctx, LaunchState& L, Rng& rng, const LaunchState* target,
                       bool density = true);

// Split or merge proposal with Metropolis-Hastings acceptance; updates s and the cache.
MoveRecord split_merge_move(const Model& model, ChainState& s, RepulsionCache& cache,
                            const Eigen::MatrixXd& log_weights, Rng& rng,
                            const SplitMergeOptions& opt);

// Pieces of the acceptance ratio for a fully specified proposal; exposed for testing.
struct SplitMergeTerms {
    double log_prior_ratio = 0.0;  // allocations, component priors, repulsion
    double log_lik_ratio = 0.0;    // coefficients given component parameters
};
SplitMergeTerms split_merge_ratio_terms(const Model& model, const ChainState& current,
                                        const ChainState& proposed, const std::vector<int>& members,
                                        const int labels[2]);

}  // namespace mfrm
