#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfrm/config.hpp"
#include "mfrm/model.hpp"
#include "mfrm/sampler.hpp"

namespace mfrm {

// Worker threads for independent chains; MFRMMX_WORKERS overrides the hardware count.
int worker_count();

// Chain c uses stream c of the seed, so output does not depend on the worker count.
std::vector<PosteriorDraws> run_chains(const Model& model, const McmcSchedule& sched, std::uint64_t seed,
                                       int chains, const SplitMergeOptions& sm, int workers);

struct PooledDraws {
    Eigen::MatrixXi z;
    Eigen::MatrixXd loglik;
};
PooledDraws pool_draws(const std::vector<PosteriorDraws>& chains);

// Structured summary as JSON text.
std::string summarize_fit(const Model& model, const std::vector<PosteriorDraws>& chains);
std::string summarize_draws(const PooledDraws& pooled, const std::vector<std::string>& ids,
                            const std::vector<int>& truth);

// Writes draws, traces, summaries and the manifest into dir.
void write_fit_outputs(const std::string& dir, const Model& model, const RunConfig& cfg,
                       const std::vector<PosteriorDraws>& chains);

// manifest.json: status, seeds, canonical config and input hashes, enough to re-run a fit.
void write_manifest(const std::string& dir, const RunConfig& cfg, const std::string& status,
                    const std::vector<std::string>& artifacts, const std::string& error = "");

// Reads draws_z.csv and loglik.csv written by write_fit_outputs.
PooledDraws read_pooled_draws(const std::string& dir, std::vector<std::string>& ids);

}  // namespace mfrm
