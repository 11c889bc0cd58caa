#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mfrm/marginal.hpp"
#include "mfrm/model.hpp"
#include "mfrm/repulsion.hpp"
#include "mfrm/rng.hpp"
#include "mfrm/splitmerge.hpp"

namespace mfrm {

// Which blocks a sweep updates; tests switch blocks off to hold them fixed.
struct StepMask {
    bool split_merge = true;
    bool weights = true;
    bool allocations = true;
    bool theta = true;
    bool coefficients = true;
    bool tau2 = true;
    bool lam2 = true;
    bool mu = true;
    bool beta0 = true;
    bool sigma = true;
    bool mu0 = true;
    bool sig02 = true;
    bool b_tau = true;
};

struct McmcSchedule {
    long n_burn = 20000;
    long n_keep = 2000;
    long thin = 10;
    long n_adapt = -1;  // negative: whole burn-in
    long adapt_every = 200;
};

// Random-walk scales of the repulsive theta update, per dimension.
struct ProposalScales {
    Eigen::VectorXd occupied;
    Eigen::VectorXd empty;
};

struct ComponentDraw {
    int label = 0;
    int size = 0;
    Eigen::MatrixXd theta;  // p x D
    Eigen::VectorXd tau2;
    Eigen::VectorXd lam2;
};

struct PosteriorDraws {
    int m = 0, J = 0, p = 0, D = 0;
    Eigen::MatrixXi z;        // n_keep x m, 0-based
    Eigen::MatrixXd loglik;   // n_keep x m
    Eigen::MatrixXd weights;  // n_keep x J, averaged over individuals
    Eigen::VectorXd b_tau;
    std::vector<std::vector<ComponentDraw>> components;  // occupied components per draw
    std::vector<MoveRecord> moves;
    ProposalScales scales;
    Eigen::MatrixXd theta_accept;  // 2 x D acceptance rates after burn-in (occupied, empty)

    Eigen::VectorXi n_clusters() const;
};

class Sampler {
public:
    Sampler(const Model& model, ChainState init, std::uint64_t seed, std::uint64_t stream = 0);

    void sweep();

    void step_split_merge();
    void step_weights();
    void step_allocations();
    void step_theta();
    void step_coefficients();
    void step_tau2();
    void step_lam2();
    void step_b_tau();
    void step_mu();
    void step_beta0();
    void step_sigma();
    void step_mu0();
    void step_sig02();

    // adapt proposal scales from the acceptance counts since the last call
    void adapt();
    void reset_acceptance();

    // call after editing the state from outside
    void refresh();

    ChainState& state() { return s_; }
    const ChainState& state() const { return s_; }
    Rng& rng() { return rng_; }
    const Model& model() const { return model_; }
    const RepulsionCache& repulsion() const { return cache_; }
    long iteration() const { return iter_; }

    StepMask mask;
    SplitMergeOptions split_merge;
    ProposalScales scales;
    std::vector<MoveRecord> moves;
    bool record_moves = true;

    Eigen::MatrixXd accepted, proposed;  // 2 x D theta move counts

private:
    const Model& model_;
    ChainState s_;
    Rng rng_;
    RepulsionCache cache_;
    std::vector<IndividualTerms> terms_;
    bool terms_valid_ = false;
    long iter_ = 0;

    void ensure_terms();
    std::vector<std::vector<int>> members() const;
    void allocations_mixture();
    void allocations_ppmx();
    void draw_component_prior(int j);
};

PosteriorDraws run_chain(const Model& model, const McmcSchedule& sched, std::uint64_t seed,
                         std::uint64_t chain = 0, const SplitMergeOptions& sm = {});

}  // namespace mfrm
