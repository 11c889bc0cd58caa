#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfrm/model.hpp"
#include "mfrm/sampler.hpp"
#include "mfrm/splitmerge.hpp"

namespace mfrm {

// Flat "key = value [unit]" settings; '#' starts a comment and unknown keys are errors.
struct RunConfig {
    std::string data;
    std::string covariates_file;
    std::string truth_file;
    Mode mode = Mode::Mfrmmx;
    bool covariates = false;
    int chains = 1;
    std::uint64_t seed = 1;

    Hyperparams hp = Hyperparams::defaults(1);
    std::vector<double> A{10.0};   // one value or one per dimension
    std::vector<double> phi{0.0};
    double sigma0 = 1.0;           // Sigma0 = sigma0 * I

    McmcSchedule sched;
    SplitMergeOptions split_merge;

    Hyperparams hyperparams(int D) const;
    // canonical text used for the config hash
    std::string canonical() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

}  // namespace mfrm
