#include "mfrm/simgen.hpp"

#include <cmath>
#include <string>

#include "mfrm/basis.hpp"
#include "mfrm/errors.hpp"
#include "mfrm/randdist.hpp"

namespace mfrm {

Eigen::MatrixXd simulation_correlation(int D, double rho) {
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(D, D);
    if (D >= 2) R(0, 1) = R(1, 0) = rho;
    if (D >= 3) {
        R(0, 2) = R(2, 0) = -rho;
        R(1, 2) = R(2, 1) = -rho;
    }
    return R;
}

CurveDataset simulate_dataset(const SimulationSpec& spec, std::uint64_t seed) {
    Rng rng(seed, 0x5157);
    const int D = spec.D, p = spec.p, n = spec.n;
    const int K = static_cast<int>(spec.sizes.size());
    Eigen::MatrixXd R = simulation_correlation(D, spec.rho);
    Eigen::LLT<Eigen::MatrixXd> rl(R);
    if (rl.info() != Eigen::Success) throw NumericalError("simulation correlation is not positive definite");
    const Eigen::MatrixXd H = build_design<double>(n, p);

    std::vector<Eigen::MatrixXd> theta(K, Eigen::MatrixXd(p, D));
    for (auto& t : theta)
        for (int d = 0; d < D; ++d) t.col(d) = std::sqrt(spec.theta_var) * rng.normal_vector(p);

    CurveDataset data;
    data.covariates.names = {"x_cont", "x_cat"};
    data.covariates.categorical = {false, true};
    data.covariates.levels.resize(2);
    for (int k = 0; k < K; ++k) data.covariates.levels[1].push_back(std::to_string(k + 1));
    int m = 0;
    for (int s : spec.sizes) m += s;
    data.covariates.values.resize(m, 2);

    int i = 0;
    for (int k = 0; k < K; ++k) {
        for (int r = 0; r < spec.sizes[k]; ++r, ++i) {
            Eigen::MatrixXd B(p, D);
            for (int d = 0; d < D; ++d) B.col(d) = theta[k].col(d) + std::sqrt(spec.coef_var) * rng.normal_vector(p);
            Eigen::VectorXd beta0(D), sd(D);
            for (int d = 0; d < D; ++d) {
                beta0(d) = spec.beta0_mean + std::sqrt(spec.beta0_var) * rng.normal();
                sd(d) = std::sqrt(spec.sigma2_lo + (spec.sigma2_hi - spec.sigma2_lo) * rng.uniform());
            }
            Eigen::MatrixXd Sigma = sd.asDiagonal() * R * sd.asDiagonal();
            Eigen::MatrixXd E = sample_matrix_normal(Eigen::MatrixXd::Zero(n, D), Eigen::MatrixXd::Identity(n, n), Sigma, rng);
            Eigen::MatrixXd Y = H * B + E;
            Y.rowwise() += beta0.transpose();
            data.Y.push_back(Y);
            data.ids.push_back("c" + std::to_string(i + 1));
            data.truth.push_back(k);
            data.covariates.values(i, 0) = (k + 1) + std::sqrt(spec.covariate_var) * rng.normal();
            data.covariates.values(i, 1) = k;
        }
    }
    return data;
}

}  // namespace mfrm
