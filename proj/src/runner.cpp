#include "mfrm/runner.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mfrm/analysis.hpp"
#include "mfrm/errors.hpp"
#include "mfrm/io.hpp"

namespace mfrm {

namespace {

const char* kVersion = "1.0.0";

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw DataError("cannot write " + p.string());
    return out;
}

nlohmann::json partition_summary(const PooledDraws& pooled, const std::vector<int>& truth) {
    nlohmann::json j;
    auto counts = cluster_counts(pooled.z);
    j["n_draws"] = pooled.z.rows();
    j["mean_clusters"] = counts.mean_clusters;
    j["mean_singletons"] = counts.mean_singletons;
    auto C = coclustering(pooled.z);
    int best = dahl_partition(pooled.z, C);
    auto labels = row_labels(pooled.z, best);
    // relabel 1..K by first appearance
    std::map<int, int> map;
    std::vector<int> out;
    for (int l : labels) {
        if (!map.count(l)) map.emplace(l, static_cast<int>(map.size()) + 1);
        out.push_back(map[l]);
    }
    j["dahl_draw"] = best;
    j["dahl_partition"] = out;
    j["dahl_clusters"] = map.size();
    if (!truth.empty()) {
        j["rand_index_dahl"] = rand_index(labels, truth);
        double mean_rand = 0.0;
        for (Eigen::Index s = 0; s < pooled.z.rows(); ++s) mean_rand += rand_index(row_labels(pooled.z, s), truth);
        j["rand_index_mean"] = mean_rand / pooled.z.rows();
    }
    auto ic = information_criteria(pooled.loglik);
    j["lppd"] = ic.lppd;
    j["p_waic"] = ic.p_waic;
    j["waic"] = ic.waic;
    j["lpml"] = ic.lpml;
    return j;
}

}  // namespace

int worker_count() {
    if (const char* env = std::getenv("MFRMMX_WORKERS")) {
        int w = std::atoi(env);
        if (w < 1) throw ConfigError("MFRMMX_WORKERS must be a positive integer");
        return w;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<PosteriorDraws> run_chains(const Model& model, const McmcSchedule& sched, std::uint64_t seed,
                                       int chains, const SplitMergeOptions& sm, int workers) {
    std::vector<PosteriorDraws> out(chains);
    std::vector<std::exception_ptr> errors(chains);
    std::atomic<int> next{0};
    auto work = [&] {
        for (int c; (c = next++) < chains;) {
            try {
                out[c] = run_chain(model, sched, seed, static_cast<std::uint64_t>(c), sm);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < std::min(workers, chains); ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

PooledDraws pool_draws(const std::vector<PosteriorDraws>& chains) {
    PooledDraws p;
    Eigen::Index rows = 0, m = chains.empty() ? 0 : chains.front().z.cols();
    for (const auto& c : chains) rows += c.z.rows();
    p.z.resize(rows, m);
    p.loglik.resize(rows, m);
    Eigen::Index r = 0;
    for (const auto& c : chains) {
        p.z.middleRows(r, c.z.rows()) = c.z;
        p.loglik.middleRows(r, c.z.rows()) = c.loglik;
        r += c.z.rows();
    }
    return p;
}

std::string summarize_draws(const PooledDraws& pooled, const std::vector<std::string>& ids,
                            const std::vector<int>& truth) {
    nlohmann::json j = partition_summary(pooled, truth);
    j["ids"] = ids;
    return j.dump(2);
}

std::string summarize_fit(const Model& model, const std::vector<PosteriorDraws>& chains) {
    auto pooled = pool_draws(chains);
    nlohmann::json j = partition_summary(pooled, model.data().truth);
    j["mode"] = mode_name(model.mode());
    j["covariates"] = model.use_covariates();
    j["m"] = model.m();
    j["D"] = model.D();
    j["p"] = model.p();
    j["J"] = model.J();
    j["chains"] = chains.size();
    j["ids"] = model.data().ids;
    auto spec = RepulsionSpec::from_model(model);
    std::vector<double> logdist;
    nlohmann::json per_chain = nlohmann::json::array();
    for (const auto& c : chains) {
        nlohmann::json cj;
        auto dist = pairwise_theta_distances(c, spec);
        for (Eigen::Index s = 0; s < dist.rows(); ++s)
            for (Eigen::Index d = 0; d < dist.cols(); ++d)
                if (!std::isnan(dist(s, d))) logdist.push_back(std::log(dist(s, d)));
        long prop[2] = {0, 0}, acc[2] = {0, 0};
        for (const auto& mv : c.moves) {
            int k = mv.kind == MoveRecord::Kind::Split ? 0 : mv.kind == MoveRecord::Kind::Merge ? 1 : -1;
            if (k < 0) continue;
            ++prop[k];
            acc[k] += mv.accepted;
        }
        cj["split_proposed"] = prop[0];
        cj["split_accepted"] = acc[0];
        cj["merge_proposed"] = prop[1];
        cj["merge_accepted"] = acc[1];
        cj["mean_clusters"] = c.n_clusters().cast<double>().mean();
        std::vector<double> ao, ae;
        for (Eigen::Index d = 0; d < c.theta_accept.cols(); ++d) {
            ao.push_back(c.theta_accept(0, d));
            ae.push_back(c.theta_accept(1, d));
        }
        cj["theta_accept_occupied"] = ao;
        cj["theta_accept_empty"] = ae;
        per_chain.push_back(cj);
    }
    j["median_log_mean_pairwise_distance"] = logdist.empty() ? nlohmann::json(nullptr) : nlohmann::json(median(logdist));
    j["per_chain"] = per_chain;
    return j.dump(2);
}

void write_fit_outputs(const std::string& dir, const Model& model, const RunConfig& cfg,
                       const std::vector<PosteriorDraws>& chains) {
    namespace fs = std::filesystem;
    fs::path root(dir);
    fs::create_directories(root);
    const auto& ids = model.data().ids;
    const int m = model.m();
    {
        auto out = open_out(root / "draws_z.csv");
        out << "chain,draw";
        for (const auto& id : ids) out << ',' << id;
        out << '\n';
        for (std::size_t c = 0; c < chains.size(); ++c)
            for (Eigen::Index s = 0; s < chains[c].z.rows(); ++s) {
                out << c << ',' << s;
                for (int i = 0; i < m; ++i) out << ',' << chains[c].z(s, i) + 1;
                out << '\n';
            }
    }
    {
        auto out = open_out(root / "loglik.csv");
        out << "chain,draw";
        for (const auto& id : ids) out << ',' << id;
        out << '\n';
        for (std::size_t c = 0; c < chains.size(); ++c)
            for (Eigen::Index s = 0; s < chains[c].loglik.rows(); ++s) {
                out << c << ',' << s;
                for (int i = 0; i < m; ++i) out << ',' << format_double(chains[c].loglik(s, i));
                out << '\n';
            }
    }
    {
        auto out = open_out(root / "theta_trace.csv");
        out << "chain,draw,component,size,dim,tau2,lambda2";
        for (int k = 1; k <= model.p(); ++k) out << ",theta_" << k;
        out << '\n';
        for (std::size_t c = 0; c < chains.size(); ++c)
            for (std::size_t s = 0; s < chains[c].components.size(); ++s)
                for (const auto& comp : chains[c].components[s])
                    for (int d = 0; d < model.D(); ++d) {
                        out << c << ',' << s << ',' << comp.label + 1 << ',' << comp.size << ',' << d + 1 << ','
                            << format_double(comp.tau2(d)) << ',' << format_double(comp.lam2(d));
                        for (int k = 0; k < model.p(); ++k) out << ',' << format_double(comp.theta(k, d));
                        out << '\n';
                    }
    }
    {
        auto spec = RepulsionSpec::from_model(model);
        auto out = open_out(root / "distance_series.csv");
        out << "chain,draw,clusters";
        for (int d = 1; d <= model.D(); ++d) out << ",dim_" << d;
        out << '\n';
        for (std::size_t c = 0; c < chains.size(); ++c) {
            auto dist = pairwise_theta_distances(chains[c], spec);
            for (Eigen::Index s = 0; s < dist.rows(); ++s) {
                out << c << ',' << s << ',' << chains[c].components[s].size();
                for (Eigen::Index d = 0; d < dist.cols(); ++d)
                    out << ',' << (std::isnan(dist(s, d)) ? std::string("NA") : format_double(dist(s, d)));
                out << '\n';
            }
        }
    }
    {
        auto out = open_out(root / "moves.csv");
        out << "chain,iter,kind,i0,i1,log_ratio,accepted\n";
        for (std::size_t c = 0; c < chains.size(); ++c)
            for (const auto& mv : chains[c].moves)
                out << c << ',' << mv.iter << ',' << move_kind_name(mv.kind) << ',' << mv.i0 + 1 << ','
                    << mv.i1 + 1 << ',' << format_double(mv.log_ratio) << ',' << (mv.accepted ? 1 : 0) << '\n';
    }
    auto pooled = pool_draws(chains);
    {
        auto C = coclustering(pooled.z);
        auto out = open_out(root / "coclustering.csv");
        out << "id";
        for (const auto& id : ids) out << ',' << id;
        out << '\n';
        for (int i = 0; i < m; ++i) {
            out << ids[i];
            for (int k = 0; k < m; ++k) out << ',' << format_double(C(i, k));
            out << '\n';
        }
    }
    open_out(root / "summary.json") << summarize_fit(model, chains) << '\n';

    write_manifest(dir, cfg, "complete",
                   {"draws_z.csv", "loglik.csv", "theta_trace.csv", "distance_series.csv", "moves.csv",
                    "coclustering.csv", "summary.json"});
}

void write_manifest(const std::string& dir, const RunConfig& cfg, const std::string& status,
                    const std::vector<std::string>& artifacts, const std::string& error) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json man;
    man["tool"] = "mfrmmx";
    man["version"] = kVersion;
    man["status"] = status;
    if (!error.empty()) man["error"] = error;
    man["mode"] = mode_name(cfg.mode);
    man["covariates"] = cfg.covariates;
    man["seed"] = cfg.seed;
    man["chains"] = cfg.chains;
    std::vector<std::string> streams;
    for (int c = 0; c < cfg.chains; ++c) streams.push_back(std::to_string(cfg.seed) + ":" + std::to_string(c));
    man["chain_streams"] = streams;
    man["config_hash"] = hex64(fnv1a64(cfg.canonical()));
    man["config"] = cfg.canonical();
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [key, path] : {std::pair<std::string, std::string>{"data", cfg.data},
                                    {"covariates_file", cfg.covariates_file},
                                    {"truth_file", cfg.truth_file}}) {
        if (path.empty()) continue;
        std::ifstream in(path, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        inputs[key] = {{"path", path}, {"fnv1a64", hex64(fnv1a64(ss.str()))}};
    }
    man["inputs"] = inputs;
    man["artifacts"] = artifacts;
    open_out(fs::path(dir) / "manifest.json") << man.dump(2) << '\n';
}

PooledDraws read_pooled_draws(const std::string& dir, std::vector<std::string>& ids) {
    namespace fs = std::filesystem;
    auto read = [&](const fs::path& p, bool ints, std::vector<std::string>& header) {
        std::ifstream in(p);
        if (!in) throw DataError("cannot open " + p.string());
        std::string line;
        std::getline(in, line);
        header = split_csv_line(line);
        if (header.size() < 3 || header[0] != "chain" || header[1] != "draw")
            throw DataError(p.string() + ": unexpected header");
        std::vector<std::vector<double>> rows;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto f = split_csv_line(line);
            if (f.size() != header.size()) throw DataError(p.string() + ": ragged row");
            std::vector<double> r;
            for (std::size_t k = 2; k < f.size(); ++k) r.push_back(std::stod(f[k]) - (ints ? 1.0 : 0.0));
            rows.push_back(r);
        }
        Eigen::MatrixXd M(rows.size(), header.size() - 2);
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t k = 0; k < rows[r].size(); ++k) M(r, k) = rows[r][k];
        return M;
    };
    std::vector<std::string> hz, hl;
    PooledDraws p;
    p.z = read(fs::path(dir) / "draws_z.csv", true, hz).cast<int>();
    p.loglik = read(fs::path(dir) / "loglik.csv", false, hl);
    if (hz != hl || p.z.rows() != p.loglik.rows()) throw DataError("draws_z.csv and loglik.csv disagree");
    ids.assign(hz.begin() + 2, hz.end());
    return p;
}

}  // namespace mfrm
