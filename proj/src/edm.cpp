#include "edmik/edm.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace edmik {

namespace {

bool is_binary(const Eigen::MatrixXd& m) {
  return ((m.array() == 0.0) || (m.array() == 1.0)).all();
}

bool is_symmetric(const Eigen::MatrixXd& m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

void PartialEDM::validate() const {
  const auto n = template_values.rows();
  if (template_values.cols() != n || equality_mask.rows() != n || equality_mask.cols() != n ||
      lower_bound_mask.rows() != n || lower_bound_mask.cols() != n) {
    throw InvalidArgument("PartialEDM: template and masks must be square and of equal size");
  }
  if (n == 0) return;
  if (!is_binary(equality_mask) || !is_binary(lower_bound_mask)) {
    throw InvalidArgument("PartialEDM: masks must be binary");
  }
  if (!is_symmetric(equality_mask, 0.0) || !is_symmetric(lower_bound_mask, 0.0)) {
    throw InvalidArgument("PartialEDM: masks must be symmetric");
  }
  if ((equality_mask.array() * lower_bound_mask.array()).any()) {
    throw InvalidArgument("PartialEDM: equality and lower-bound masks overlap");
  }
  if (!(equality_mask.diagonal().array() == 1.0).all() ||
      !(template_values.diagonal().array() == 0.0).all()) {
    throw InvalidArgument("PartialEDM: diagonal must be known and zero");
  }
  if (!template_values.allFinite() || !is_symmetric(template_values, 0.0)) {
    throw InvalidArgument("PartialEDM: template must be finite and symmetric");
  }
  const Eigen::ArrayXXd masked =
      template_values.array() * (equality_mask + lower_bound_mask).array();
  if ((masked < 0.0).any()) {
    throw InvalidArgument("PartialEDM: masked template entries must be nonnegative");
  }
}

void AnchorSet::validate(Eigen::Index n_points) const {
  const auto m = static_cast<Eigen::Index>(indices.size());
  const auto k = positions.cols();
  if (positions.rows() != m) {
    throw InvalidArgument("AnchorSet: one position row per index required");
  }
  if (k < 2) throw InvalidArgument("AnchorSet: workspace dimension must be at least 2");
  if (m < k) {
    throw DegenerateAnchors("AnchorSet: need at least " + std::to_string(k) + " anchors");
  }
  std::set<Eigen::Index> seen;
  for (auto i : indices) {
    if (i < 0 || i >= n_points) throw InvalidArgument("AnchorSet: index out of range");
    if (!seen.insert(i).second) throw InvalidArgument("AnchorSet: duplicate index");
  }
  const Eigen::MatrixXd centred = positions.rowwise() - positions.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centred);
  const auto& s = svd.singularValues();
  // Affine rank must reach K-1: non-coincident in 2-D, non-collinear in 3-D.
  if (s(0) <= 1e-12 || s(k - 2) <= 1e-9 * s(0)) {
    throw DegenerateAnchors("AnchorSet: anchor positions are degenerate");
  }
}

GramMatrix gram(const PointMatrix& points) {
  return GramMatrix{points.values * points.values.transpose()};
}

DistanceMatrix kappa(const GramMatrix& x) {
  const Eigen::VectorXd diag = x.values.diagonal();
  const auto n = diag.size();
  Eigen::MatrixXd d = diag.replicate(1, n) + diag.transpose().replicate(n, 1) - 2.0 * x.values;
  return DistanceMatrix{std::move(d)};
}

Eigen::MatrixXd kappa_adjoint(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd out = -2.0 * a;
  out.diagonal() += 2.0 * a.rowwise().sum();
  return out;
}

DistanceMatrix squared_distances(const PointMatrix& points) {
  const auto n = points.n_points();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index u = 0; u < n; ++u) {
    d(u, u) = 0.0;
    for (Eigen::Index v = u + 1; v < n; ++v) {
      d(u, v) = d(v, u) = (points.values.row(u) - points.values.row(v)).squaredNorm();
    }
  }
  return DistanceMatrix{std::move(d)};
}

PointMatrix points_from_edm(const DistanceMatrix& d, Eigen::Index dim, const MdsOptions& options) {
  const auto n = d.values.rows();
  if (d.values.cols() != n) throw InvalidArgument("points_from_edm: matrix must be square");
  if (dim < 1) throw InvalidArgument("points_from_edm: dimension must be positive");
  if (n == 0) return PointMatrix{Eigen::MatrixXd(0, dim)};

  const Eigen::MatrixXd centring =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / double(n));
  Eigen::MatrixXd b = -0.5 * centring * d.values * centring;
  b = 0.5 * (b + b.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  const Eigen::VectorXd& lambda = eig.eigenvalues();  // ascending
  const double largest = std::max(lambda(n - 1), 0.0);
  if (n > dim && largest > 0.0 && lambda(n - 1 - dim) > options.rel_tol * largest) {
    throw EmbeddingDimensionExceeded("points_from_edm: EDM needs more than " +
                                     std::to_string(dim) + " dimensions");
  }

  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, dim);
  const auto kept = std::min(dim, n);
  for (Eigen::Index j = 0; j < kept; ++j) {
    const double l = lambda(n - 1 - j);
    if (l > 0.0) p.col(j) = eig.eigenvectors().col(n - 1 - j) * std::sqrt(l);
  }
  return PointMatrix{std::move(p)};
}

PointMatrix align_to_anchors(const PointMatrix& points, const AnchorSet& anchors,
                             const AlignOptions& options) {
  const auto k = points.dim();
  if (anchors.positions.cols() != k) {
    throw DimensionMismatch("align_to_anchors: anchor dimension differs from points");
  }
  anchors.validate(points.n_points());

  const auto m = static_cast<Eigen::Index>(anchors.indices.size());
  Eigen::MatrixXd source(m, k);
  for (Eigen::Index i = 0; i < m; ++i) source.row(i) = points.values.row(anchors.indices[i]);

  const Eigen::RowVectorXd source_centroid = source.colwise().mean();
  const Eigen::RowVectorXd target_centroid = anchors.positions.colwise().mean();
  const Eigen::MatrixXd cross = (source.rowwise() - source_centroid).transpose() *
                                (anchors.positions.rowwise() - target_centroid);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s(0) <= 0.0 || s(k - 2) <= options.rank_tol * s(0)) {
    throw DegenerateAnchors("align_to_anchors: cross-covariance is rank deficient");
  }
  // Column-vector form: y = R x with R = V U^T; row-wise that is X R^T = X U V^T.
  const Eigen::MatrixXd rt = svd.matrixU() * svd.matrixV().transpose();
  Eigen::MatrixXd out = (points.values.rowwise() - source_centroid) * rt;
  out.rowwise() += target_centroid;
  return PointMatrix{std::move(out)};
}

}  // namespace edmik
