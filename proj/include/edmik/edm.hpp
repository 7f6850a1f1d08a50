#pragma once

// Euclidean distance matrix algebra: Gram/EDM operators, classical MDS point
// recovery and Procrustes alignment into a world frame.
//
// Distance matrices hold SQUARED distances everywhere in this library.

#include <Eigen/Dense>

#include <vector>

#include "edmik/errors.hpp"

namespace edmik {

/// N x K matrix whose rows are points in a K-dimensional workspace.
struct PointMatrix {
  Eigen::MatrixXd values;

  PointMatrix() = default;
  explicit PointMatrix(Eigen::MatrixXd m) : values(std::move(m)) {}

  Eigen::Index n_points() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
  bool all_finite() const { return values.allFinite(); }
};

/// Symmetric PSD matrix X = P P^T.
struct GramMatrix {
  Eigen::MatrixXd values;
};

/// Matrix of squared pairwise distances.
struct DistanceMatrix {
  Eigen::MatrixXd values;
};

/// Squared-distance template with masks for known (equality) and
/// lower-bounded entries. Entries under neither mask are stored as 0.
struct PartialEDM {
  Eigen::MatrixXd template_values;
  Eigen::MatrixXd equality_mask;     // 0/1
  Eigen::MatrixXd lower_bound_mask;  // 0/1

  Eigen::Index size() const { return template_values.rows(); }

  // Throws InvalidArgument when any structural invariant is broken.
  void validate() const;
};

/// Points with known world positions.
struct AnchorSet {
  std::vector<Eigen::Index> indices;
  Eigen::MatrixXd positions;  // |indices| x K

  void validate(Eigen::Index n_points) const;
};

GramMatrix gram(const PointMatrix& points);

/// K(X)_uv = X_uu + X_vv - 2 X_uv.
DistanceMatrix kappa(const GramMatrix& gram);

/// Adjoint of kappa under the Frobenius inner product: 2 (Diag(A 1) - A).
Eigen::MatrixXd kappa_adjoint(const Eigen::MatrixXd& a);

/// Squared pairwise distances of a point set, computed directly.
DistanceMatrix squared_distances(const PointMatrix& points);

struct MdsOptions {
  // (K+1)-th eigenvalue above rel_tol * largest means the EDM does not embed
  // in K dimensions.
  double rel_tol = 1e-6;
};

/// Classical MDS. The result is centred (zero column means).
PointMatrix points_from_edm(const DistanceMatrix& d, Eigen::Index dim,
                            const MdsOptions& options = {});

struct AlignOptions {
  double rank_tol = 1e-9;
};

/// Rigidly moves `points` (rotation possibly with reflection, plus
/// translation) so the anchored rows best match the anchor positions in the
/// least-squares sense.
PointMatrix align_to_anchors(const PointMatrix& points, const AnchorSet& anchors,
                             const AlignOptions& options = {});

}  // namespace edmik
