#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace testutil {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                     double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, Eigen::Index n) {
  const Eigen::MatrixXd a = random_matrix(rng, n, n);
  return 0.5 * (a + a.transpose());
}

inline Eigen::MatrixXd random_skew(std::mt19937_64& rng, Eigen::Index n) {
  const Eigen::MatrixXd a = random_matrix(rng, n, n);
  return 0.5 * (a - a.transpose());
}

// Haar-ish orthogonal matrix from a QR factorisation; determinant may be -1.
inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, Eigen::Index n) {
  const Eigen::MatrixXd a = random_matrix(rng, n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i)
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  return q;
}

// Squared pairwise distances by explicit loops.
inline Eigen::MatrixXd brute_distances(const Eigen::MatrixXd& p) {
  Eigen::MatrixXd d(p.rows(), p.rows());
  for (Eigen::Index u = 0; u < p.rows(); ++u)
    for (Eigen::Index v = 0; v < p.rows(); ++v) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < p.cols(); ++k) s += (p(u, k) - p(v, k)) * (p(u, k) - p(v, k));
      d(u, v) = s;
    }
  return d;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testutil
