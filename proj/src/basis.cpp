#include "mfrm/basis.hpp"

namespace mfrm {

SplineBasis make_spline_basis(int n, int p) {
    SplineBasis b;
    b.n = n;
    b.p = p;
    b.H = build_design<double>(n, p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.H.transpose() * b.H);
    b.Q = es.eigenvectors();
    b.g = es.eigenvalues().cwiseMax(0.0);
    b.Ht1 = b.H.transpose() * Eigen::VectorXd::Ones(n);
    return b;
}

}  // namespace mfrm
