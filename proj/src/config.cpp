#include "mfrm/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mfrm/errors.hpp"
#include "mfrm/io.hpp"

namespace mfrm {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
    double x = 0.0;
    auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError(key + ": expected a real number, got '" + v + "'");
    return x;
}

long to_int(const std::string& key, const std::string& v) {
    long x = 0;
    auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return x;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& f : split_csv_line(v)) out.push_back(to_real(key, f));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

bool to_switch(const std::string& key, const std::string& v) {
    if (v == "on") return true;
    if (v == "off") return false;
    throw ConfigError(key + ": expected on or off");
}

struct Key {
    const char* unit;  // accepted trailing unit, or nullptr
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

#define REAL(field) [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_real(k, v); }
#define INT(field) [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_int(k, v); }

const std::map<std::string, Key>& schema() {
    static const std::map<std::string, Key> keys = {
        {"data", {nullptr, [](RunConfig& c, const std::string&, const std::string& v) { c.data = v; }}},
        {"covariates_file", {nullptr, [](RunConfig& c, const std::string&, const std::string& v) { c.covariates_file = v; }}},
        {"truth_file", {nullptr, [](RunConfig& c, const std::string&, const std::string& v) { c.truth_file = v; }}},
        {"mode", {nullptr, [](RunConfig& c, const std::string&, const std::string& v) { c.mode = parse_mode(v); }}},
        {"covariates", {nullptr, [](RunConfig& c, const std::string& k, const std::string& v) { c.covariates = to_switch(k, v); }}},
        {"chains", {nullptr, INT(chains)}},
        {"seed", {nullptr, [](RunConfig& c, const std::string& k, const std::string& v) {
             long s = to_int(k, v);
             if (s < 0) throw ConfigError("seed must be nonnegative");
             c.seed = static_cast<std::uint64_t>(s);
         }}},
        {"p", {nullptr, INT(hp.p)}},
        {"J", {nullptr, INT(hp.J)}},
        {"A", {nullptr, [](RunConfig& c, const std::string& k, const std::string& v) { c.A = to_list(k, v); }}},
        {"phi", {nullptr, [](RunConfig& c, const std::string& k, const std::string& v) { c.phi = to_list(k, v); }}},
        {"nu", {nullptr, REAL(hp.nu)}},
        {"q", {nullptr, REAL(hp.q)}},
        {"dist_floor", {nullptr, REAL(hp.dist_floor)}},
        {"grid_n", {"points", INT(hp.grid_n)}},
        {"a_tau", {nullptr, REAL(hp.a_tau)}},
        {"xi", {nullptr, REAL(hp.xi)}},
        {"varpi", {nullptr, REAL(hp.varpi)}},
        {"s_mu2", {nullptr, REAL(hp.s_mu2)}},
        {"s02", {nullptr, REAL(hp.s02)}},
        {"a0", {nullptr, REAL(hp.a0)}},
        {"b0", {nullptr, REAL(hp.b0)}},
        {"omega", {nullptr, REAL(hp.omega)}},
        {"sigma0", {nullptr, REAL(sigma0)}},
        {"a_sigma", {nullptr, REAL(hp.a_sigma)}},
        {"b_sigma", {nullptr, REAL(hp.b_sigma)}},
        {"dir_conc", {nullptr, REAL(hp.dir_conc)}},
        {"sigma_alpha2", {nullptr, REAL(hp.sigma_alpha2)}},
        {"cohesion_M", {nullptr, REAL(hp.cohesion_M)}},
        {"dm_conc", {nullptr, REAL(hp.dm_conc)}},
        {"n_burn", {"sweeps", INT(sched.n_burn)}},
        {"n_keep", {"draws", INT(sched.n_keep)}},
        {"thin", {"sweeps", INT(sched.thin)}},
        {"n_adapt", {"sweeps", INT(sched.n_adapt)}},
        {"adapt_every", {"sweeps", INT(sched.adapt_every)}},
        {"n_gs", {"scans", INT(split_merge.n_gs)}},
        {"launch", {nullptr, [](RunConfig& c, const std::string&, const std::string& v) {
             if (v == "random") c.split_merge.random_launch = true;
             else if (v == "current") c.split_merge.random_launch = false;
             else throw ConfigError("launch: expected random or current");
         }}},
    };
    return keys;
}

#undef REAL
#undef INT

void check(const RunConfig& c) {
    if (c.chains < 1) throw ConfigError("chains must be positive");
    if (c.sched.n_burn < 0 || c.sched.n_keep < 1 || c.sched.thin < 1 || c.sched.adapt_every < 1)
        throw ConfigError("invalid sweep counts");
    if (c.split_merge.n_gs < 0) throw ConfigError("n_gs must be nonnegative");
    if (!(c.sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto it = schema().find(key);
    if (it == schema().end()) throw ConfigError("unknown key '" + key + "'");
    std::string v = trim(value);
    auto sp = v.find_last_of(" \t");
    if (it->second.unit && sp != std::string::npos) {
        std::string unit = v.substr(sp + 1);
        if (unit != it->second.unit)
            throw ConfigError(key + ": unexpected unit '" + unit + "'");
        v = trim(v.substr(0, sp));
    }
    if (v.empty()) throw ConfigError(key + ": missing value");
    it->second.set(cfg, key, v);
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (seen.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        seen[key] = lineno;
        try {
            apply_setting(cfg, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    check(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

Hyperparams RunConfig::hyperparams(int D) const {
    Hyperparams h = hp;
    auto expand = [D](const std::vector<double>& v, const char* name) {
        if (v.size() == 1) return Eigen::VectorXd::Constant(D, v[0]).eval();
        if (static_cast<int>(v.size()) != D)
            throw ConfigError(std::string(name) + " needs one value or one per dimension");
        return Eigen::Map<const Eigen::VectorXd>(v.data(), D).eval();
    };
    h.A = expand(A, "A");
    h.phi = expand(phi, "phi");
    h.Sigma0 = sigma0 * Eigen::MatrixXd::Identity(D, D);
    h.validate(D);
    return h;
}

std::string RunConfig::canonical() const {
    std::ostringstream o;
    auto list = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_double(v[k]);
        return s;
    };
    o << "mode=" << mode_name(mode) << "\ncovariates=" << (covariates ? "on" : "off") << "\nchains=" << chains
      << "\nseed=" << seed << "\np=" << hp.p << "\nJ=" << hp.J << "\nA=" << list(A) << "\nphi=" << list(phi)
      << "\nnu=" << format_double(hp.nu) << "\nq=" << format_double(hp.q)
      << "\ndist_floor=" << format_double(hp.dist_floor) << "\ngrid_n=" << hp.grid_n
      << "\na_tau=" << format_double(hp.a_tau) << "\nxi=" << format_double(hp.xi)
      << "\nvarpi=" << format_double(hp.varpi) << "\ns_mu2=" << format_double(hp.s_mu2)
      << "\ns02=" << format_double(hp.s02) << "\na0=" << format_double(hp.a0) << "\nb0=" << format_double(hp.b0)
      << "\nomega=" << format_double(hp.omega) << "\nsigma0=" << format_double(sigma0)
      << "\na_sigma=" << format_double(hp.a_sigma) << "\nb_sigma=" << format_double(hp.b_sigma)
      << "\ndir_conc=" << format_double(hp.dir_conc) << "\nsigma_alpha2=" << format_double(hp.sigma_alpha2)
      << "\ncohesion_M=" << format_double(hp.cohesion_M) << "\ndm_conc=" << format_double(hp.dm_conc)
      << "\nn_burn=" << sched.n_burn << "\nn_keep=" << sched.n_keep << "\nthin=" << sched.thin
      << "\nn_adapt=" << sched.n_adapt << "\nadapt_every=" << sched.adapt_every
      << "\nn_gs=" << split_merge.n_gs << "\nlaunch=" << (split_merge.random_launch ? "random" : "current") << '\n';
    return o.str();
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace mfrm
