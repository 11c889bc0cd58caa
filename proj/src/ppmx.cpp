#include "mfrm/ppmx.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace mfrm {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

double log_cohesion(int size, double M) {
    if (size < 1) throw std::domain_error("cohesion of an empty cluster");
    return std::log(M) + std::lgamma(static_cast<double>(size));
}

double log_similarity_continuous(double sum, double sumsq, int n) {
    double s2 = 1.0 / (n + 0.1);
    return 0.5 * std::log(s2) - 0.5 * std::log(10.0) - 0.5 * n * kLog2Pi -
           0.5 * (sumsq - s2 * sum * sum);
}

double log_similarity_categorical(const std::vector<int>& level_counts, double conc) {
    int n = 0;
    double s = 0.0;
    for (int c : level_counts) {
        n += c;
        s += std::lgamma(conc + c) - std::lgamma(conc);
    }
    double total = conc * level_counts.size();
    return s + std::lgamma(total) - std::lgamma(total + n);
}

double log_similarity(const Model& model, const std::vector<int>& members) {
    if (!model.use_covariates() || members.empty()) return 0.0;
    double g = 0.0;
    const auto& Xc = model.sim_continuous();
    for (Eigen::Index l = 0; l < Xc.cols(); ++l) {
        double sum = 0.0, sumsq = 0.0;
        for (int i : members) {
            sum += Xc(i, l);
            sumsq += Xc(i, l) * Xc(i, l);
        }
        g += log_similarity_continuous(sum, sumsq, static_cast<int>(members.size()));
    }
    const auto& Xk = model.sim_categorical();
    for (Eigen::Index l = 0; l < Xk.cols(); ++l) {
        std::vector<int> cnt(model.sim_levels()[l], 0);
        for (int i : members) ++cnt[Xk(i, l)];
        g += log_similarity_categorical(cnt, model.hp().dm_conc);
    }
    return g;
}

double log_partition_prior(const Model& model, const std::vector<int>& z) {
    std::map<int, std::vector<int>> blocks;
    for (int i = 0; i < static_cast<int>(z.size()); ++i) blocks[z[i]].push_back(i);
    double lp = 0.0;
    for (const auto& [label, members] : blocks)
        lp += log_cohesion(static_cast<int>(members.size()), model.hp().cohesion_M) + log_similarity(model, members);
    return lp;
}

double log_join_ratio(const Model& model, const std::vector<int>& members, int i) {
    const double n = static_cast<double>(members.size());
    double r = std::log(n);
    if (!model.use_covariates() || members.empty()) return r;
    const auto& Xc = model.sim_continuous();
    for (Eigen::Index l = 0; l < Xc.cols(); ++l) {
        double sum = 0.0, sumsq = 0.0;
        for (int k : members) {
            sum += Xc(k, l);
            sumsq += Xc(k, l) * Xc(k, l);
        }
        const double x = Xc(i, l);
        const int nn = static_cast<int>(members.size());
        r += log_similarity_continuous(sum + x, sumsq + x * x, nn + 1) - log_similarity_continuous(sum, sumsq, nn);
    }
    // Dirichlet-multinomial predictive of the new level
    const auto& Xk = model.sim_categorical();
    const double conc = model.hp().dm_conc;
    for (Eigen::Index l = 0; l < Xk.cols(); ++l) {
        int same = 0;
        for (int k : members) same += Xk(k, l) == Xk(i, l);
        r += std::log((conc + same) / (conc * model.sim_levels()[l] + n));
    }
    return r;
}

void compact_labels(ChainState& s) {
    const int J = s.J();
    std::vector<int> map(J, -1);
    int next = 0;
    for (int zi : s.z)
        if (map[zi] < 0) map[zi] = next++;
    for (int j = 0; j < J; ++j)
        if (map[j] < 0) map[j] = next++;
    auto theta = s.theta;
    Eigen::MatrixXd tau2 = s.tau2, lam2 = s.lam2;
    for (int j = 0; j < J; ++j) {
        s.theta[map[j]] = theta[j];
        s.tau2.row(map[j]) = tau2.row(j);
        s.lam2.row(map[j]) = lam2.row(j);
    }
    for (int& zi : s.z) zi = map[zi];
}

}  // namespace mfrm
