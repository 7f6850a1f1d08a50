#include "edmik/manifold.hpp"

#include <cmath>

namespace edmik {

ManifoldPoint::ManifoldPoint(PointMatrix rep, double rank_tol)
    : rep_(std::move(rep)), rank_tol_(rank_tol) {
  const auto k = rep_.dim();
  if (k == 0 || rep_.n_points() < k) {
    throw RankDeficientBase("ManifoldPoint: need at least K rows");
  }
  if (!rep_.all_finite()) throw RankDeficientBase("ManifoldPoint: non-finite entries");
  const Eigen::MatrixXd metric = rep_.values.transpose() * rep_.values;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(metric);
  eigenvalues_ = eig.eigenvalues();
  eigenvectors_ = eig.eigenvectors();
  const double largest = eigenvalues_(k - 1);
  const double smallest = eigenvalues_(0);
  // Singular values of P are square roots of these eigenvalues.
  if (!(largest > 0.0) || !(smallest > rank_tol_ * rank_tol_ * largest)) {
    throw RankDeficientBase("ManifoldPoint: representative is rank deficient");
  }
}

double inner(const ManifoldPoint& /*base*/, const TangentVector& u, const TangentVector& v) {
  return (u.values.array() * v.values.array()).sum();
}

double norm(const ManifoldPoint& base, const TangentVector& u) {
  return std::sqrt(inner(base, u, u));
}

Eigen::MatrixXd vertical_component(const ManifoldPoint& base, const Eigen::MatrixXd& z) {
  const Eigen::MatrixXd& p = base.matrix();
  if (z.rows() != p.rows() || z.cols() != p.cols()) {
    throw DimensionMismatch("vertical_component: shape mismatch");
  }
  const Eigen::MatrixXd ptz = p.transpose() * z;
  const Eigen::MatrixXd rhs = ptz - ptz.transpose();
  const Eigen::MatrixXd& v = base.metric_eigenvectors();
  const Eigen::VectorXd& lambda = base.metric_eigenvalues();
  Eigen::MatrixXd s = v.transpose() * rhs * v;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) s(i, j) /= lambda(i) + lambda(j);
  }
  return v * s * v.transpose();
}

TangentVector project_horizontal(const ManifoldPoint& base, const Eigen::MatrixXd& z) {
  const Eigen::MatrixXd s = vertical_component(base, z);
  return TangentVector{z - base.matrix() * s};
}

ManifoldPoint retract(const ManifoldPoint& base, const TangentVector& step) {
  if (step.values.rows() != base.matrix().rows() || step.values.cols() != base.matrix().cols()) {
    throw DimensionMismatch("retract: shape mismatch");
  }
  try {
    return ManifoldPoint(PointMatrix{base.matrix() + step.values}, base.rank_tol());
  } catch (const RankDeficientBase&) {
    throw LeftManifold("retract: step leaves the full-rank set");
  }
}

TangentVector transport(const ManifoldPoint& /*from*/, const ManifoldPoint& to,
                        const TangentVector& v) {
  return project_horizontal(to, v.values);
}

bool same_class(const ManifoldPoint& a, const ManifoldPoint& b, double tol) {
  if (a.matrix().rows() != b.matrix().rows() || a.matrix().cols() != b.matrix().cols()) {
    return false;
  }
  const Eigen::MatrixXd ga = a.matrix() * a.matrix().transpose();
  const Eigen::MatrixXd gb = b.matrix() * b.matrix().transpose();
  return (ga - gb).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace edmik
