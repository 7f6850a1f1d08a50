#pragma once

// Kinematic chains described by points rigidly attached to their links.
//
// Point schemes (row order of the point matrix):
//
//   planar_chain, n joints (K = 2), N = n + 2
//     0       joint 1 at the origin
//     1       base auxiliary point (-1, 0)
//     i + 1   end of link i (i = 1..n); row n + 1 is the end-effector
//
//   spherical_chain, n joints (K = 3), N = n + 3
//     0       joint 1 at the origin
//     1, 2    base auxiliary points (-1, 0, 0) and (0, 1, 0)
//     i + 2   end of link i
//
//   revolute_dh, n joints (K = 3), N = 4 n (N = 4 when n = 1)
//     0, 1    joint 1 axis: frame-0 origin and origin + s z0
//     2       base auxiliary point
//     ...     joint j axis (j = 2..n): origin of frame j-1 and origin + s z_{j-1}
//     2n + 1  end-effector auxiliary point, rigid with frame n
//     2n + 2b, 2n + 2b + 1   (b = 1..n-1) braces of link b: centroid of its
//             four axis points plus and minus s times the normal of their
//             best-fit plane
//   Both auxiliary points sit at distance s from the axis of the adjacent
//   joint, on the opposite side from the neighbouring link's points in the
//   zero configuration. Their distance to that link is then largest at zero
//   joint angle, which makes the joint-limit lower bound exact.
//   The braces make a link with coplanar axis points rigid to first order.
//   They are placed symmetrically about the plane, so a mirrored link only
//   swaps its two braces.
//
// For chains the end-effector orientation is the direction of the last link,
// so the end-effector group is the last link's two points. Spherical joints
// have no twist degree of freedom; only the pointing direction of the last
// link is controllable.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "edmik/edm.hpp"

namespace edmik {

enum class RobotKind { PlanarChain, SphericalChain, RevoluteDh };

const char* to_string(RobotKind kind);

struct DhRow {
  double a = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double theta_offset = 0.0;
};

struct RobotModel {
  RobotKind kind = RobotKind::PlanarChain;
  std::string name;
  std::vector<double> link_lengths;  // chains
  std::vector<DhRow> dh;             // revolute_dh
  // Symmetric per-joint bound |theta| <= limit. Empty vector: no limits.
  std::vector<std::optional<double>> limits;
  // Separation of the two points marking each revolute axis.
  double axis_spacing = 1.0;

  int joint_count() const;
  Eigen::Index dim() const { return kind == RobotKind::PlanarChain ? 2 : 3; }
  // Number of scalar joint variables (two per spherical joint).
  Eigen::Index variable_count() const;
  Eigen::Index point_count() const;
  std::optional<double> limit(int joint) const;
  bool has_limits() const;

  void validate() const;
};

/// Joint variables. Spherical chains interleave (azimuth_i, deviation_i).
struct Configuration {
  Eigen::VectorXd angles;
};

struct GoalPose {
  Eigen::VectorXd position;  // K
  Eigen::MatrixXd rotation;  // K x K

  /// Planar heading angle; only meaningful for K = 2.
  double planar_angle() const;
  void validate() const;
};

/// Homogeneous (K+1) x (K+1) frames 0..n and the end-effector pose.
struct Kinematics {
  std::vector<Eigen::MatrixXd> frames;
  GoalPose end_effector;
};

struct LimitPair {
  int joint = 0;  // 0-based
  Eigen::Index u = 0;
  Eigen::Index v = 0;
};

struct PointScheme {
  Eigen::Index n_points = 0;
  Eigen::Index dim = 0;
  std::vector<std::vector<Eigen::Index>> bodies;
  // Extra rows rigidly attached to bodies[i] that take part in the body's
  // distance constraints only (never anchors, limit pairs or recovery).
  std::vector<std::vector<Eigen::Index>> braces;
  std::vector<Eigen::Index> base_group;
  std::vector<Eigen::Index> end_effector_group;
  std::vector<LimitPair> limit_pairs;
};

PointScheme point_scheme(const RobotModel& robot);

Configuration zero_configuration(const RobotModel& robot);

Kinematics forward_kinematics(const RobotModel& robot, const Configuration& config);

PointMatrix attach_points(const RobotModel& robot, const Configuration& config);

/// Minimum squared distance between two points on either side of a joint
/// whose deviation from straight is limited to theta_max.
double joint_limit_bound(double l_a, double l_b, double theta_max);

/// Minimum of a squared-distance function of one joint angle over
/// [-theta_max, theta_max], by dense sampling plus local refinement.
double sampled_limit_bound(const std::function<double(double)>& squared_distance,
                           double theta_max, int samples = 10000);

struct PartialEdmBuild {
  PartialEDM partial;
  AnchorSet anchors;
};

PartialEdmBuild build_partial_edm(const RobotModel& robot, const GoalPose& goal);

/// Zero configuration with the anchored rows moved to their world positions.
/// A straight chain alone is collinear, and a distance gradient never leaves
/// the affine hull it starts in.
PointMatrix initial_points(const RobotModel& robot, const AnchorSet& anchors);

struct RecoveryOptions {
  double consistency_tol = 1e-3;  // meters
};

Configuration recover_configuration(const RobotModel& robot, const PointMatrix& points,
                                    const RecoveryOptions& options = {});

struct PoseError {
  double position = 0.0;     // meters
  double orientation = 0.0;  // radians
};

PoseError pose_error(const RobotModel& robot, const Configuration& config, const GoalPose& goal);

/// Largest joint-limit violation in radians (0 when within limits).
double limit_violation(const RobotModel& robot, const Configuration& config);

Configuration sample_configuration(const RobotModel& robot, std::mt19937_64& rng);

/// Rotation angle of a proper rotation matrix (2-D or 3-D), in [0, pi].
double rotation_angle(const Eigen::MatrixXd& rotation);

/// Wraps to (-pi, pi].
double wrap_angle(double angle);

/// Built-ins: planar-<n>, spherical-<n> (unit links, no limits) and robots
/// loaded from description files in the data directory (ur10).
RobotModel builtin_robot(const std::string& name);
std::vector<std::string> builtin_robot_names();

/// Directory holding robot description files. EDMIK_DATA_DIR overrides the
/// compiled-in default.
std::string robot_data_dir();

}  // namespace edmik
