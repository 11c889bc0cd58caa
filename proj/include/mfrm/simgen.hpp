#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mfrm/model.hpp"

namespace mfrm {

struct SimulationSpec {
    int D = 4;
    int n = 30;
    int p = 4;
    std::vector<int> sizes{8, 8, 12, 12};
    double theta_var = 200.0;
    double coef_var = 100.0;
    double beta0_mean = 10.0;
    double beta0_var = 4.0;
    double sigma2_lo = 0.1;
    double sigma2_hi = 4.0;
    double rho = 0.9;  // corr(1,2) = rho, corr(1,3) = corr(2,3) = -rho
    double covariate_var = 0.1;
};

Eigen::MatrixXd simulation_correlation(int D, double rho);

// Curves with true labels and two covariates (continuous around the label, categorical = label).
CurveDataset simulate_dataset(const SimulationSpec& spec, std::uint64_t seed);

}  // namespace mfrm
