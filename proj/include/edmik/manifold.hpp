#pragma once

// Quotient geometry of full-rank N x K matrices modulo right multiplication by
// O(K). Uses the flat trace metric of the total space; horizontal vectors Z
// at P are those with P^T Z symmetric.

#include <Eigen/Dense>

#include "edmik/edm.hpp"

namespace edmik {

inline constexpr double kDefaultRankTol = 1e-9;

/// Full-rank representative of an equivalence class [P].
class ManifoldPoint {
 public:
  /// Throws RankDeficientBase when sigma_min <= rank_tol * sigma_max.
  explicit ManifoldPoint(PointMatrix rep, double rank_tol = kDefaultRankTol);

  const PointMatrix& rep() const { return rep_; }
  const Eigen::MatrixXd& matrix() const { return rep_.values; }
  double rank_tol() const { return rank_tol_; }

  // Eigendecomposition of P^T P, reused by the Sylvester solve.
  const Eigen::VectorXd& metric_eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& metric_eigenvectors() const { return eigenvectors_; }

 private:
  PointMatrix rep_;
  double rank_tol_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

struct TangentVector {
  Eigen::MatrixXd values;
};

double inner(const ManifoldPoint& base, const TangentVector& u, const TangentVector& v);
double norm(const ManifoldPoint& base, const TangentVector& u);

/// Skew S solving (P^T P) S + S (P^T P) = P^T Z - Z^T P.
Eigen::MatrixXd vertical_component(const ManifoldPoint& base, const Eigen::MatrixXd& z);

/// Z - P S, the metric projection onto the horizontal space at base.
TangentVector project_horizontal(const ManifoldPoint& base, const Eigen::MatrixXd& z);

/// [P + step]. Throws LeftManifold when the sum loses rank.
ManifoldPoint retract(const ManifoldPoint& base, const TangentVector& step);

/// Projection-based vector transport.
TangentVector transport(const ManifoldPoint& from, const ManifoldPoint& to, const TangentVector& v);

/// Class membership test: Gram matrices agree within tol.
bool same_class(const ManifoldPoint& a, const ManifoldPoint& b, double tol = 1e-9);

}  // namespace edmik
