#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mfrm/config.hpp"
#include "mfrm/errors.hpp"
#include "mfrm/io.hpp"
#include "mfrm/runner.hpp"
#include "mfrm/simgen.hpp"

using namespace mfrm;

namespace {

struct FitArgs {
    std::string config, data, covariates_file, truth_file, out = "mfrmmx_out", mode, covariates, phi;
    long seed = -1;
    int chains = 0;
    bool dry_run = false;
};

int run_fit(const FitArgs& a) {
    RunConfig cfg = a.config.empty() ? RunConfig{} : load_config(a.config);
    if (!a.data.empty()) cfg.data = a.data;
    if (!a.covariates_file.empty()) cfg.covariates_file = a.covariates_file;
    if (!a.truth_file.empty()) cfg.truth_file = a.truth_file;
    if (!a.mode.empty()) apply_setting(cfg, "mode", a.mode);
    if (!a.covariates.empty()) apply_setting(cfg, "covariates", a.covariates);
    if (!a.phi.empty()) apply_setting(cfg, "phi", a.phi);
    if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
    if (a.chains > 0) cfg.chains = a.chains;
    if (cfg.data.empty()) throw ConfigError("no data file given");

    CurveDataset data = read_curves_csv(cfg.data);
    if (!cfg.covariates_file.empty()) read_covariates_csv(cfg.covariates_file, data);
    if (!cfg.truth_file.empty()) read_truth_csv(cfg.truth_file, data);
    Model model(data, cfg.hyperparams(data.D()), cfg.mode, cfg.covariates);

    std::cout << "mode " << mode_name(cfg.mode) << ", " << model.m() << " curves, D = " << model.D()
              << ", p = " << model.p() << ", J = " << model.J() << ", chains = " << cfg.chains
              << ", config " << hex64(fnv1a64(cfg.canonical())) << '\n';
    if (a.dry_run) {
        write_manifest(a.out, cfg, "dry-run", {});
        std::cout << "dry run: configuration and data are valid\n";
        return 0;
    }
    const int workers = worker_count();
    try {
        auto chains = run_chains(model, cfg.sched, cfg.seed, cfg.chains, cfg.split_merge, workers);
        write_fit_outputs(a.out, model, cfg, chains);
    } catch (const std::exception& e) {
        // whatever was written before the failure is listed as partial
        std::vector<std::string> partial;
        if (std::filesystem::exists(a.out))
            for (const auto& f : std::filesystem::directory_iterator(a.out))
                if (f.path().filename() != "manifest.json") partial.push_back(f.path().filename().string());
        std::sort(partial.begin(), partial.end());
        write_manifest(a.out, cfg, "failed", partial, e.what());
        throw;
    }
    std::cout << "wrote " << a.out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Repulsive mixture models for multivariate functional data"};
    app.require_subcommand(1);

    FitArgs fit;
    auto* f = app.add_subcommand("fit", "run MCMC on a curve data set");
    f->add_option("--config", fit.config, "settings file");
    f->add_option("--data", fit.data, "curves CSV (id,dim,t,y)");
    f->add_option("--covariate-file", fit.covariates_file, "covariates CSV");
    f->add_option("--truth", fit.truth_file, "true labels CSV (id,label)");
    f->add_option("--seed", fit.seed, "master seed");
    f->add_option("--chains", fit.chains, "number of chains");
    f->add_option("--out", fit.out, "output directory");
    f->add_option("--mode", fit.mode, "model")->check(CLI::IsMember({"mfrmmx", "mfrmmx-ind", "mfppmx", "mfppmx-ind"}));
    f->add_option("--covariates", fit.covariates, "use covariates")->check(CLI::IsMember({"on", "off"}));
    f->add_option("--phi", fit.phi, "repulsion strength, one value or one per dimension");
    f->add_flag("--dry-run", fit.dry_run, "validate inputs and stop");

    long sim_seed = 1;
    int replicates = 1;
    std::string sim_out = "sim";
    auto* s = app.add_subcommand("simulate", "generate simulated curve data sets");
    s->add_option("--seed", sim_seed, "seed");
    s->add_option("--replicates", replicates, "number of data sets");
    s->add_option("--out", sim_out, "output directory");

    std::string sum_dir, sum_truth, sum_out;
    auto* u = app.add_subcommand("summarize", "recompute summaries from saved draws");
    u->add_option("--draws", sum_dir, "directory written by fit")->required();
    u->add_option("--truth", sum_truth, "true labels CSV (id,label)");
    u->add_option("--out", sum_out, "write the summary here instead of stdout");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*f) return run_fit(fit);
        if (*s) {
            std::filesystem::create_directories(sim_out);
            for (int r = 0; r < replicates; ++r) {
                auto data = simulate_dataset(SimulationSpec{}, static_cast<std::uint64_t>(sim_seed) + r);
                std::string base = sim_out + "/rep" + std::to_string(r + 1);
                write_curves_csv(base + "_curves.csv", data);
                write_covariates_csv(base + "_covariates.csv", data);
                write_truth_csv(base + "_truth.csv", data);
            }
            std::cout << "wrote " << replicates << " data set(s) to " << sim_out << '\n';
            return 0;
        }
        if (*u) {
            std::vector<std::string> ids;
            auto pooled = read_pooled_draws(sum_dir, ids);
            std::vector<int> truth;
            if (!sum_truth.empty()) {
                CurveDataset tmp;
                tmp.ids = ids;
                tmp.Y.resize(ids.size());
                read_truth_csv(sum_truth, tmp);
                truth = tmp.truth;
            }
            std::string text = summarize_draws(pooled, ids, truth);
            if (sum_out.empty()) std::cout << text << '\n';
            else std::ofstream(sum_out) << text << '\n';
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
