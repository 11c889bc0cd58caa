#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfrm/errors.hpp"

namespace mfrm {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Cubic unless fewer than four functions are requested, then degree p - 1.
inline int spline_degree(int p) { return std::min(3, p - 1); }

// Clamped knot vector on [0, 1] with equally spaced interior knots.
template <typename Scalar = double>
std::vector<Scalar> spline_knots(int p) {
    const int k = spline_degree(p);
    std::vector<Scalar> u;
    u.reserve(p + k + 1);
    for (int i = 0; i <= k; ++i) u.push_back(Scalar(0));
    const int interior = p - k - 1;
    for (int j = 1; j <= interior; ++j) u.push_back(Scalar(j) / Scalar(interior + 1));
    for (int i = 0; i <= k; ++i) u.push_back(Scalar(1));
    return u;
}

// Row of all basis function values at x in [0, 1].
template <typename Scalar = double>
Vec<Scalar> spline_row(const std::vector<Scalar>& u, int p, Scalar x) {
    const int k = spline_degree(p);
    int span = k;
    if (x >= u[p]) {
        span = p - 1;
    } else {
        while (span < p - 1 && x >= u[span + 1]) ++span;
    }
    std::vector<Scalar> N(k + 1, Scalar(0)), left(k + 1), right(k + 1);
    N[0] = Scalar(1);
    for (int j = 1; j <= k; ++j) {
        left[j] = x - u[span + 1 - j];
        right[j] = u[span + j] - x;
        Scalar saved(0);
        for (int r = 0; r < j; ++r) {
            Scalar tmp = N[r] / (right[r + 1] + left[j - r]);
            N[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        N[j] = saved;
    }
    Vec<Scalar> row = Vec<Scalar>::Zero(p);
    for (int j = 0; j <= k; ++j) row(span - k + j) = N[j];
    return row;
}

// n x p design evaluated at t / n, t = 1..n.
template <typename Scalar = double>
Mat<Scalar> build_design(int n, int p) {
    if (p < 2) throw ShapeError("build_design: p must be at least 2");
    if (n < p + 4) throw ShapeError("build_design: need n >= p + 4");
    auto u = spline_knots<Scalar>(p);
    Mat<Scalar> H(n, p);
    for (int t = 1; t <= n; ++t) H.row(t - 1) = spline_row<Scalar>(u, p, Scalar(t) / Scalar(n)).transpose();
    return H;
}

// Design with column means removed; used for curve distances.
template <typename Scalar = double>
Mat<Scalar> build_centered_design(int n, int p) {
    Mat<Scalar> H = build_design<Scalar>(n, p);
    H.rowwise() -= H.colwise().mean();
    return H;
}

// First-difference precision with a free first coefficient: tridiag(-1, 2, -1), last diagonal 1.
template <typename Scalar = double>
Mat<Scalar> build_penalty(int p) {
    if (p < 2) throw ShapeError("build_penalty: p must be at least 2");
    Mat<Scalar> K = Mat<Scalar>::Zero(p, p);
    for (int l = 0; l < p; ++l) {
        K(l, l) = l == p - 1 ? Scalar(1) : Scalar(2);
        if (l + 1 < p) K(l, l + 1) = K(l + 1, l) = Scalar(-1);
    }
    return K;
}

// Eigendecomposition of H^T H, cached per curve length.
struct SplineBasis {
    int n = 0;
    int p = 0;
    Eigen::MatrixXd H;      // n x p
    Eigen::MatrixXd Q;      // eigenvectors of H^T H
    Eigen::VectorXd g;      // eigenvalues of H^T H
    Eigen::VectorXd Ht1;    // H^T 1
};

SplineBasis make_spline_basis(int n, int p);

}  // namespace mfrm
