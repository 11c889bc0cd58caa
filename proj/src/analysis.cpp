#include "mfrm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mfrm/errors.hpp"

namespace mfrm {

Eigen::MatrixXd coclustering(const Eigen::MatrixXi& z) {
    const Eigen::Index S = z.rows(), m = z.cols();
    if (S == 0) throw ShapeError("coclustering: no draws");
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index s = 0; s < S; ++s)
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index k = i; k < m; ++k)
                if (z(s, i) == z(s, k)) C(i, k) += 1.0;
    C /= static_cast<double>(S);
    C.triangularView<Eigen::StrictlyLower>() = C.transpose();
    return C;
}

int dahl_partition(const Eigen::MatrixXi& z, const Eigen::MatrixXd& cocluster) {
    const Eigen::Index S = z.rows(), m = z.cols();
    int best = 0;
    double best_loss = std::numeric_limits<double>::infinity();
    for (Eigen::Index s = 0; s < S; ++s) {
        double loss = 0.0;
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index k = 0; k < m; ++k) {
                double r = (z(s, i) == z(s, k) ? 1.0 : 0.0) - cocluster(i, k);
                loss += r * r;
            }
        if (loss < best_loss) {
            best_loss = loss;
            best = static_cast<int>(s);
        }
    }
    return best;
}

double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw ShapeError("rand_index: partitions differ in length");
    const std::size_t n = a.size();
    if (n < 2) return 1.0;
    double agree = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k) agree += ((a[i] == a[k]) == (b[i] == b[k]));
    return agree / (0.5 * n * (n - 1.0));
}

InformationCriteria information_criteria(const Eigen::MatrixXd& loglik) {
    const Eigen::Index S = loglik.rows();
    if (S < 2) throw ShapeError("information_criteria: need at least two draws");
    InformationCriteria ic;
    const double logS = std::log(static_cast<double>(S));
    for (Eigen::Index i = 0; i < loglik.cols(); ++i) {
        Eigen::VectorXd l = loglik.col(i);
        double mx = l.maxCoeff();
        ic.lppd += mx + std::log((l.array() - mx).exp().sum()) - logS;
        double mean = l.mean();
        ic.p_waic += (l.array() - mean).square().sum() / (S - 1.0);
        // log CPO = -log mean exp(-l)
        double mn = (-l).maxCoeff();
        ic.lpml -= mn + std::log((-l.array() - mn).exp().sum()) - logS;
    }
    ic.waic = -2.0 * (ic.lppd - ic.p_waic);
    return ic;
}

ClusterCounts cluster_counts(const Eigen::MatrixXi& z) {
    ClusterCounts c;
    c.clusters.resize(z.rows());
    c.singletons.resize(z.rows());
    for (Eigen::Index s = 0; s < z.rows(); ++s) {
        std::map<int, int> sizes;
        for (Eigen::Index i = 0; i < z.cols(); ++i) ++sizes[z(s, i)];
        c.clusters(s) = static_cast<int>(sizes.size());
        int single = 0;
        for (const auto& kv : sizes) single += kv.second == 1;
        c.singletons(s) = single;
    }
    if (z.rows() > 0) {
        c.mean_clusters = c.clusters.cast<double>().mean();
        c.mean_singletons = c.singletons.cast<double>().mean();
    }
    return c;
}

Eigen::MatrixXd pairwise_theta_distances(const PosteriorDraws& draws, const RepulsionSpec& spec) {
    const Eigen::Index S = static_cast<Eigen::Index>(draws.components.size());
    Eigen::MatrixXd out(S, draws.D);
    for (Eigen::Index s = 0; s < S; ++s) {
        const auto& comps = draws.components[s];
        for (int d = 0; d < draws.D; ++d) {
            double sum = 0.0;
            int n = 0;
            for (std::size_t a = 0; a < comps.size(); ++a)
                for (std::size_t b = a + 1; b < comps.size(); ++b) {
                    sum += curve_distance(spec, comps[a].theta.col(d), comps[b].theta.col(d));
                    ++n;
                }
            out(s, d) = n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return out;
}

double median(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<int> row_labels(const Eigen::MatrixXi& z, int row) {
    std::vector<int> out(z.cols());
    for (Eigen::Index i = 0; i < z.cols(); ++i) out[i] = z(row, i);
    return out;
}

}  // namespace mfrm
