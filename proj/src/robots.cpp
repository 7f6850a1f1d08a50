#include "edmik/robots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <string>

#include "edmik/robot_io.hpp"

#ifndef EDMIK_DEFAULT_DATA_DIR
#define EDMIK_DEFAULT_DATA_DIR "data/robots"
#endif

namespace edmik {

namespace {

constexpr double kPi = std::numbers::pi;

using Eigen::Index;
using Eigen::Matrix3d;
using Eigen::Matrix4d;
using Eigen::Vector3d;

Matrix3d rot_x(double t) { return Eigen::AngleAxisd(t, Vector3d::UnitX()).toRotationMatrix(); }
Matrix3d rot_z(double t) { return Eigen::AngleAxisd(t, Vector3d::UnitZ()).toRotationMatrix(); }

Eigen::Matrix2d rot_2d(double t) {
  Eigen::Matrix2d r;
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

Eigen::MatrixXd homogeneous(const Eigen::MatrixXd& r, const Eigen::VectorXd& p) {
  const auto k = r.rows();
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(k + 1, k + 1);
  t.topLeftCorner(k, k) = r;
  t.topRightCorner(k, 1) = p;
  return t;
}

Eigen::VectorXd apply(const Eigen::MatrixXd& t, const Eigen::VectorXd& x) {
  const auto k = x.size();
  return t.topLeftCorner(k, k) * x + t.topRightCorner(k, 1);
}

Eigen::MatrixXd inverse_rigid(const Eigen::MatrixXd& t) {
  const auto k = t.rows() - 1;
  const Eigen::MatrixXd rt = t.topLeftCorner(k, k).transpose();
  return homogeneous(rt, -rt * t.topRightCorner(k, 1));
}

Matrix4d dh_transform(const DhRow& row, double theta) {
  Matrix4d t = Matrix4d::Identity();
  t.topLeftCorner<3, 3>() = rot_z(theta + row.theta_offset) * rot_x(row.alpha);
  t.topRightCorner<3, 1>() = rot_z(theta + row.theta_offset) * Vector3d(row.a, 0.0, row.d);
  return t;
}

// Row indices of the revolute_dh scheme.
Index dh_axis_origin(int joint) { return joint == 0 ? 0 : 3 + 2 * (joint - 1); }
Index dh_axis_tip(int joint) { return joint == 0 ? 1 : 4 + 2 * (joint - 1); }

// Unit direction, perpendicular to the axis of `joint` and in the coordinates
// of the frame that axis belongs to, pointing from the axis toward the axis
// points of the neighbouring link at zero joint angle. `toward_base` picks the
// link before the joint instead of the one after it.
Vector3d dh_side_direction(const RobotModel& robot, int joint, bool toward_base) {
  const int n = robot.joint_count();
  const double s = robot.axis_spacing;
  Vector3d sum = Vector3d::Zero();
  if (!toward_base && joint + 1 < n) {
    const Matrix4d next = dh_transform(robot.dh[static_cast<std::size_t>(joint)], 0.0);
    sum = next.topRightCorner<3, 1>() * 2.0 + s * next.block<3, 1>(0, 2);
  } else if (toward_base && joint >= 1) {
    const Matrix4d prev = dh_transform(robot.dh[static_cast<std::size_t>(joint - 1)], 0.0);
    const Matrix4d back = inverse_rigid(prev);
    sum = back.topRightCorner<3, 1>() * 2.0 + s * back.block<3, 1>(0, 2);
  }
  sum(2) = 0.0;
  if (sum.norm() <= 1e-9 * s) return toward_base ? Vector3d(-1.0, 0.0, 0.0) : Vector3d::UnitX();
  return sum.normalized();
}

Index dh_brace(int n, int body, int which) { return 2 * n + 2 * body + which; }

// Brace positions of link `body` (1..n-1) in the coordinates of frame `body`.
std::pair<Vector3d, Vector3d> dh_brace_local(const RobotModel& robot, int body) {
  const double s = robot.axis_spacing;
  const Matrix4d back = inverse_rigid(dh_transform(robot.dh[static_cast<std::size_t>(body - 1)], 0.0));
  Eigen::Matrix<double, 4, 3> pts;
  pts.row(0) = back.topRightCorner<3, 1>().transpose();
  pts.row(1) = (back.topRightCorner<3, 1>() + s * back.block<3, 1>(0, 2)).transpose();
  pts.row(2) = Vector3d::Zero().transpose();
  pts.row(3) = Vector3d(0.0, 0.0, s).transpose();
  const Eigen::RowVector3d centroid = pts.colwise().mean();
  const Eigen::Matrix<double, 4, 3> centred = pts.rowwise() - centroid;
  Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>> svd(centred, Eigen::ComputeFullV);
  Vector3d normal = svd.matrixV().col(2);
  Eigen::Index lead = 0;
  normal.cwiseAbs().maxCoeff(&lead);
  if (normal(lead) < 0.0) normal = -normal;
  return {centroid.transpose() + s * normal, centroid.transpose() - s * normal};
}

void check_config(const RobotModel& robot, const Configuration& config) {
  if (config.angles.size() != robot.variable_count()) {
    throw DimensionMismatch("configuration has " + std::to_string(config.angles.size()) +
                            " variables, robot expects " +
                            std::to_string(robot.variable_count()));
  }
}

double joint_angle_for_limit(const RobotModel& robot, const Configuration& config, int joint) {
  if (robot.kind == RobotKind::SphericalChain) return config.angles(2 * joint + 1);
  if (robot.kind == RobotKind::RevoluteDh) return wrap_angle(config.angles(joint));
  return config.angles(joint);
}

}  // namespace

const char* to_string(RobotKind kind) {
  switch (kind) {
    case RobotKind::PlanarChain: return "planar_chain";
    case RobotKind::SphericalChain: return "spherical_chain";
    case RobotKind::RevoluteDh: return "revolute_dh";
  }
  return "unknown";
}

int RobotModel::joint_count() const {
  return static_cast<int>(kind == RobotKind::RevoluteDh ? dh.size() : link_lengths.size());
}

Index RobotModel::variable_count() const {
  return kind == RobotKind::SphericalChain ? 2 * joint_count() : joint_count();
}

Index RobotModel::point_count() const {
  switch (kind) {
    case RobotKind::PlanarChain: return joint_count() + 2;
    case RobotKind::SphericalChain: return joint_count() + 3;
    case RobotKind::RevoluteDh: return 2 * joint_count() + 2 + 2 * std::max(joint_count() - 1, 0);
  }
  return 0;
}

std::optional<double> RobotModel::limit(int joint) const {
  if (limits.empty()) return std::nullopt;
  return limits.at(static_cast<std::size_t>(joint));
}

bool RobotModel::has_limits() const {
  return std::any_of(limits.begin(), limits.end(), [](const auto& l) { return l.has_value(); });
}

void RobotModel::validate() const {
  const int n = joint_count();
  if (n < 1) throw InvalidArgument("robot '" + name + "' has no joints");
  if (kind == RobotKind::RevoluteDh) {
    if (!link_lengths.empty()) throw InvalidArgument("revolute_dh robots take DH rows, not lengths");
    for (const auto& row : dh) {
      if (!std::isfinite(row.a) || !std::isfinite(row.alpha) || !std::isfinite(row.d) ||
          !std::isfinite(row.theta_offset)) {
        throw InvalidArgument("DH rows must be finite");
      }
    }
    if (!(axis_spacing > 0.0) || !std::isfinite(axis_spacing)) {
      throw InvalidArgument("axis spacing must be positive");
    }
  } else {
    if (!dh.empty()) throw InvalidArgument("chain robots take link lengths, not DH rows");
    for (double l : link_lengths) {
      if (!(l > 0.0) || !std::isfinite(l)) throw InvalidArgument("link lengths must be positive");
    }
  }
  if (!limits.empty()) {
    if (static_cast<int>(limits.size()) != n) {
      throw InvalidArgument("limits must have one entry per joint");
    }
    for (const auto& l : limits) {
      if (l && !(*l > 0.0 && *l <= kPi)) {
        throw InvalidArgument("joint limits must lie in (0, pi]");
      }
    }
  }
}

double GoalPose::planar_angle() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

void GoalPose::validate() const {
  const auto k = position.size();
  if (rotation.rows() != k || rotation.cols() != k || (k != 2 && k != 3)) {
    throw DimensionMismatch("goal pose: position and rotation sizes disagree");
  }
  if (!position.allFinite() || !rotation.allFinite()) {
    throw InvalidArgument("goal pose must be finite");
  }
  const double orth = (rotation.transpose() * rotation - Eigen::MatrixXd::Identity(k, k))
                          .cwiseAbs()
                          .maxCoeff();
  if (orth > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw InvalidArgument("goal rotation must be a proper rotation");
  }
}

PointScheme point_scheme(const RobotModel& robot) {
  robot.validate();
  const int n = robot.joint_count();
  PointScheme s;
  s.n_points = robot.point_count();
  s.dim = robot.dim();

  switch (robot.kind) {
    case RobotKind::PlanarChain:
    case RobotKind::SphericalChain: {
      const Index first_link = robot.kind == RobotKind::PlanarChain ? 2 : 3;
      // Row of the point at the end of link i (i = 0 is joint 1 itself).
      const auto link_end = [&](int i) -> Index { return i == 0 ? 0 : first_link + i - 1; };
      s.base_group = robot.kind == RobotKind::PlanarChain ? std::vector<Index>{0, 1}
                                                          : std::vector<Index>{0, 1, 2};
      s.bodies.push_back(s.base_group);
      for (int i = 1; i <= n; ++i) s.bodies.push_back({link_end(i - 1), link_end(i)});
      s.end_effector_group = {link_end(n - 1), link_end(n)};
      for (int j = 0; j < n; ++j) {
        const Index before = j == 0 ? 1 : link_end(j - 1);
        s.limit_pairs.push_back({j, before, link_end(j + 1)});
      }
      break;
    }
    case RobotKind::RevoluteDh: {
      s.base_group = {0, 1, 2};
      s.bodies.push_back(s.base_group);
      for (int j = 0; j + 1 < n; ++j) {
        s.bodies.push_back(
            {dh_axis_origin(j), dh_axis_tip(j), dh_axis_origin(j + 1), dh_axis_tip(j + 1)});
      }
      s.end_effector_group = {dh_axis_origin(n - 1), dh_axis_tip(n - 1), 2 * n + 1};
      s.bodies.push_back(s.end_effector_group);
      s.braces.resize(s.bodies.size());
      for (int b = 1; b < n; ++b) {
        s.braces[static_cast<std::size_t>(b)] = {dh_brace(n, b, 0), dh_brace(n, b, 1)};
      }
      // Every point of the body before joint j paired with every point of the
      // body after it; pairs whose distance cannot change are dropped later.
      for (int j = 0; j < n; ++j) {
        for (Index u : s.bodies[static_cast<std::size_t>(j)]) {
          if (u == dh_axis_origin(j) || u == dh_axis_tip(j)) continue;
          for (Index v : s.bodies[static_cast<std::size_t>(j + 1)]) {
            if (v == dh_axis_origin(j) || v == dh_axis_tip(j)) continue;
            s.limit_pairs.push_back({j, u, v});
          }
        }
      }
      break;
    }
  }
  return s;
}

Configuration zero_configuration(const RobotModel& robot) {
  return Configuration{Eigen::VectorXd::Zero(robot.variable_count())};
}

Kinematics forward_kinematics(const RobotModel& robot, const Configuration& config) {
  robot.validate();
  check_config(robot, config);
  const int n = robot.joint_count();
  Kinematics out;
  out.frames.reserve(static_cast<std::size_t>(n) + 1);

  switch (robot.kind) {
    case RobotKind::PlanarChain: {
      double heading = 0.0;
      Eigen::Vector2d p = Eigen::Vector2d::Zero();
      out.frames.push_back(homogeneous(rot_2d(0.0), p));
      for (int i = 0; i < n; ++i) {
        heading += config.angles(i);
        p += robot.link_lengths[static_cast<std::size_t>(i)] *
             Eigen::Vector2d(std::cos(heading), std::sin(heading));
        out.frames.push_back(homogeneous(rot_2d(heading), p));
      }
      break;
    }
    case RobotKind::SphericalChain: {
      Matrix3d r = Matrix3d::Identity();
      Vector3d p = Vector3d::Zero();
      out.frames.push_back(homogeneous(r, p));
      for (int i = 0; i < n; ++i) {
        r = r * rot_x(config.angles(2 * i)) * rot_z(config.angles(2 * i + 1));
        p += robot.link_lengths[static_cast<std::size_t>(i)] * r.col(0);
        out.frames.push_back(homogeneous(r, p));
      }
      break;
    }
    case RobotKind::RevoluteDh: {
      Matrix4d t = Matrix4d::Identity();
      out.frames.push_back(t);
      for (int i = 0; i < n; ++i) {
        t = t * dh_transform(robot.dh[static_cast<std::size_t>(i)], config.angles(i));
        out.frames.push_back(t);
      }
      break;
    }
  }
  const auto k = robot.dim();
  const Eigen::MatrixXd& last = out.frames.back();
  out.end_effector.position = last.topRightCorner(k, 1);
  out.end_effector.rotation = last.topLeftCorner(k, k);
  return out;
}

PointMatrix attach_points(const RobotModel& robot, const Configuration& config) {
  const Kinematics kin = forward_kinematics(robot, config);
  const int n = robot.joint_count();
  const auto k = robot.dim();
  Eigen::MatrixXd p(robot.point_count(), k);
  const auto origin = [&](int frame) -> Eigen::VectorXd {
    return kin.frames[static_cast<std::size_t>(frame)].topRightCorner(k, 1);
  };

  switch (robot.kind) {
    case RobotKind::PlanarChain:
      p.row(0) = origin(0).transpose();
      p.row(1) << -1.0, 0.0;
      for (int i = 1; i <= n; ++i) p.row(i + 1) = origin(i).transpose();
      break;
    case RobotKind::SphericalChain:
      p.row(0) = origin(0).transpose();
      p.row(1) << -1.0, 0.0, 0.0;
      p.row(2) << 0.0, 1.0, 0.0;
      for (int i = 1; i <= n; ++i) p.row(i + 2) = origin(i).transpose();
      break;
    case RobotKind::RevoluteDh: {
      const double s = robot.axis_spacing;
      for (int j = 0; j < n; ++j) {
        const auto& f = kin.frames[static_cast<std::size_t>(j)];
        p.row(dh_axis_origin(j)) = origin(j).transpose();
        p.row(dh_axis_tip(j)) = (origin(j) + s * f.block(0, 2, 3, 1)).transpose();
      }
      p.row(2) = (origin(0) - s * dh_side_direction(robot, 0, false)).transpose();
      const Matrix3d last = kin.frames[static_cast<std::size_t>(n - 1)].topLeftCorner<3, 3>();
      for (int b = 1; b < n; ++b) {
        const auto& f = kin.frames[static_cast<std::size_t>(b)];
        const auto [up, down] = dh_brace_local(robot, b);
        p.row(dh_brace(n, b, 0)) = apply(f, up).transpose();
        p.row(dh_brace(n, b, 1)) = apply(f, down).transpose();
      }
      p.row(2 * n + 1) = (origin(n - 1) - s * last * rot_z(config.angles(n - 1)) *
                                                dh_side_direction(robot, n - 1, true))
                                .transpose();
      break;
    }
  }
  return PointMatrix{std::move(p)};
}

double joint_limit_bound(double l_a, double l_b, double theta_max) {
  if (!(l_a > 0.0) || !(l_b > 0.0) || !(theta_max > 0.0 && theta_max <= kPi)) {
    throw InvalidArgument("joint_limit_bound: lengths must be positive, limit in (0, pi]");
  }
  return std::max(0.0, l_a * l_a + l_b * l_b + 2.0 * l_a * l_b * std::cos(theta_max));
}

double sampled_limit_bound(const std::function<double(double)>& squared_distance,
                           double theta_max, int samples) {
  if (samples < 2) throw InvalidArgument("sampled_limit_bound: need at least two samples");
  const double h = 2.0 * theta_max / double(samples - 1);
  int best = 0;
  double best_value = squared_distance(-theta_max);
  for (int i = 1; i < samples; ++i) {
    const double v = squared_distance(-theta_max + h * i);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  // Golden-section search between the neighbouring samples catches interior
  // minima that fall between grid points.
  double lo = -theta_max + h * std::max(best - 1, 0);
  double hi = -theta_max + h * std::min(best + 1, samples - 1);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = squared_distance(x1);
  double f2 = squared_distance(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = squared_distance(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = squared_distance(x2);
    }
  }
  return std::min({best_value, f1, f2});
}

PartialEdmBuild build_partial_edm(const RobotModel& robot, const GoalPose& goal) {
  goal.validate();
  if (goal.position.size() != robot.dim()) {
    throw DimensionMismatch("goal dimension does not match the robot workspace");
  }
  const PointScheme scheme = point_scheme(robot);
  const auto n = scheme.n_points;
  const auto k = scheme.dim;
  const Configuration zero = zero_configuration(robot);
  const Kinematics zero_kin = forward_kinematics(robot, zero);
  const PointMatrix zero_points = attach_points(robot, zero);

  PartialEdmBuild out;
  auto& partial = out.partial;
  partial.template_values = Eigen::MatrixXd::Zero(n, n);
  partial.equality_mask = Eigen::MatrixXd::Identity(n, n);
  partial.lower_bound_mask = Eigen::MatrixXd::Zero(n, n);

  const auto set_known = [&](Index u, Index v, double value) {
    partial.template_values(u, v) = partial.template_values(v, u) = value;
    partial.equality_mask(u, v) = partial.equality_mask(v, u) = 1.0;
  };
  const auto dist2 = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).squaredNorm();
  };

  for (std::size_t i = 0; i < scheme.bodies.size(); ++i) {
    std::vector<Index> body = scheme.bodies[i];
    if (i < scheme.braces.size()) body.insert(body.end(), scheme.braces[i].begin(), scheme.braces[i].end());
    for (std::size_t a = 0; a < body.size(); ++a) {
      for (std::size_t b = a + 1; b < body.size(); ++b) {
        set_known(body[a], body[b],
                  dist2(zero_points.values.row(body[a]).transpose(),
                        zero_points.values.row(body[b]).transpose()));
      }
    }
  }

  // Anchors: the base group sits where it always does; the end-effector group
  // is carried to the goal by the goal pose.
  std::vector<Index> anchor_rows;
  std::map<Index, Eigen::VectorXd> anchor_pos;
  for (Index u : scheme.base_group) anchor_pos[u] = zero_points.values.row(u).transpose();
  Eigen::MatrixXd goal_frame = homogeneous(goal.rotation, goal.position);
  const Eigen::MatrixXd to_ee_local = inverse_rigid(zero_kin.frames.back());
  for (Index u : scheme.end_effector_group) {
    const Eigen::VectorXd local = apply(to_ee_local, zero_points.values.row(u).transpose());
    // Base rows keep their base position if the two groups share a point.
    if (!anchor_pos.count(u)) anchor_pos[u] = apply(goal_frame, local);
  }
  for (auto it = anchor_pos.begin(); it != anchor_pos.end(); ++it) {
    for (auto jt = std::next(it); jt != anchor_pos.end(); ++jt) {
      set_known(it->first, jt->first, dist2(it->second, jt->second));
    }
  }
  out.anchors.positions.resize(static_cast<Index>(anchor_pos.size()), k);
  Index row = 0;
  for (const auto& [u, pos] : anchor_pos) {
    out.anchors.indices.push_back(u);
    out.anchors.positions.row(row++) = pos.transpose();
  }

  for (const auto& pair : scheme.limit_pairs) {
    const auto limit = robot.limit(pair.joint);
    if (!limit) continue;
    if (partial.equality_mask(pair.u, pair.v) != 0.0) continue;
    double bound = 0.0;
    if (robot.kind == RobotKind::RevoluteDh) {
      const auto j = static_cast<std::size_t>(pair.joint);
      const Eigen::VectorXd u_local =
          apply(inverse_rigid(zero_kin.frames[j]), zero_points.values.row(pair.u).transpose());
      const Eigen::VectorXd v_local =
          apply(inverse_rigid(zero_kin.frames[j + 1]), zero_points.values.row(pair.v).transpose());
      const DhRow& dh_row = robot.dh[j];
      const auto d2 = [&](double theta) {
        return dist2(u_local, apply(dh_transform(dh_row, theta), v_local));
      };
      // Points on the joint axis keep their distance; no information.
      const double spread = std::abs(d2(0.0) - d2(kPi)) + std::abs(d2(0.5 * kPi) - d2(-0.5 * kPi));
      if (spread <= 1e-12 * (1.0 + d2(0.0))) continue;
      bound = sampled_limit_bound(d2, *limit);
    } else {
      const std::size_t j = static_cast<std::size_t>(pair.joint);
      const double before = j == 0 ? 1.0 : robot.link_lengths[j - 1];
      bound = joint_limit_bound(before, robot.link_lengths[j], *limit);
    }
    partial.template_values(pair.u, pair.v) =
        std::max(partial.template_values(pair.u, pair.v), bound);
    partial.template_values(pair.v, pair.u) = partial.template_values(pair.u, pair.v);
    partial.lower_bound_mask(pair.u, pair.v) = partial.lower_bound_mask(pair.v, pair.u) = 1.0;
  }
  return out;
}

PointMatrix initial_points(const RobotModel& robot, const AnchorSet& anchors) {
  PointMatrix p = attach_points(robot, zero_configuration(robot));
  anchors.validate(p.n_points());
  for (std::size_t i = 0; i < anchors.indices.size(); ++i) {
    p.values.row(anchors.indices[i]) = anchors.positions.row(static_cast<Index>(i));
  }
  return p;
}

Configuration recover_configuration(const RobotModel& robot, const PointMatrix& points,
                                    const RecoveryOptions& options) {
  robot.validate();
  if (points.n_points() != robot.point_count() || points.dim() != robot.dim()) {
    throw DimensionMismatch("recover_configuration: point matrix shape does not match robot");
  }
  const int n = robot.joint_count();
  const double tol = options.consistency_tol;
  Configuration out = zero_configuration(robot);
  const auto row = [&](Index i) -> Eigen::VectorXd { return points.values.row(i).transpose(); };
  const auto check_length = [&](const Eigen::VectorXd& v, double expected, const char* what) {
    const double len = v.norm();
    if (!(std::abs(len - expected) <= tol) || len <= 1e-12) {
      throw InconsistentPoints(std::string("recover_configuration: ") + what + " length " +
                               std::to_string(len) + " expected " + std::to_string(expected));
    }
  };

  switch (robot.kind) {
    case RobotKind::PlanarChain: {
      Eigen::VectorXd prev_dir = row(0) - row(1);
      check_length(prev_dir, 1.0, "base");
      Index prev = 0;
      for (int i = 0; i < n; ++i) {
        const Index cur = i + 2;
        const Eigen::VectorXd dir = row(cur) - row(prev);
        check_length(dir, robot.link_lengths[static_cast<std::size_t>(i)], "link");
        const double cross = prev_dir(0) * dir(1) - prev_dir(1) * dir(0);
        out.angles(i) = std::atan2(cross, prev_dir.dot(dir));
        prev_dir = dir;
        prev = cur;
      }
      break;
    }
    case RobotKind::SphericalChain: {
      const Eigen::Vector3d base_x = row(0) - row(1);
      const Eigen::Vector3d base_y = row(2) - row(0);
      check_length(base_x, 1.0, "base");
      check_length(base_y, 1.0, "base");
      Matrix3d r;
      r.col(0) = base_x.normalized();
      r.col(1) = (base_y - base_y.dot(r.col(0)) * r.col(0)).normalized();
      r.col(2) = r.col(0).cross(r.col(1));
      Index prev = 0;
      for (int i = 0; i < n; ++i) {
        const Index cur = i + 3;
        const Eigen::Vector3d dir = row(cur) - row(prev);
        check_length(dir, robot.link_lengths[static_cast<std::size_t>(i)], "link");
        const Eigen::Vector3d local = r.transpose() * dir.normalized();
        const double lateral = std::hypot(local(1), local(2));
        const double deviation = std::atan2(lateral, local(0));
        const double azimuth = lateral > 0.0 ? std::atan2(local(2), local(1)) : 0.0;
        out.angles(2 * i) = azimuth;
        out.angles(2 * i + 1) = deviation;
        r = r * rot_x(azimuth) * rot_z(deviation);
        prev = cur;
      }
      break;
    }
    case RobotKind::RevoluteDh: {
      const PointScheme scheme = point_scheme(robot);
      const Configuration zero = zero_configuration(robot);
      const Kinematics zero_kin = forward_kinematics(robot, zero);
      const PointMatrix zero_points = attach_points(robot, zero);
      Matrix4d t = Matrix4d::Identity();
      const auto check_body = [&](std::size_t body) {
        const auto& members = scheme.bodies[body];
        for (std::size_t a = 0; a < members.size(); ++a) {
          for (std::size_t b = a + 1; b < members.size(); ++b) {
            const double expected =
                (zero_points.values.row(members[a]) - zero_points.values.row(members[b])).norm();
            const double seen = (row(members[a]) - row(members[b])).norm();
            if (!(std::abs(seen - expected) <= tol)) {
              throw InconsistentPoints("recover_configuration: body " + std::to_string(body) +
                                       " is not rigid");
            }
          }
        }
      };
      check_body(0);
      for (int j = 0; j < n; ++j) {
        const auto body = static_cast<std::size_t>(j + 1);
        const DhRow& dh_row = robot.dh[static_cast<std::size_t>(j)];
        const Eigen::MatrixXd to_local = inverse_rigid(zero_kin.frames[body]);
        const Matrix4d fixed = dh_transform(DhRow{dh_row.a, dh_row.alpha, dh_row.d, 0.0}, 0.0);
        const Matrix4d world_to_prev = inverse_rigid(t);
        double s = 0.0;
        double c = 0.0;
        for (Index u : scheme.bodies[body]) {
          const Eigen::Vector3d q = apply(to_local, zero_points.values.row(u).transpose());
          const Eigen::Vector3d model = apply(fixed, q);   // in joint frame before rotation
          const Eigen::Vector3d seen = apply(world_to_prev, row(u));
          s += model(0) * seen(1) - model(1) * seen(0);
          c += model(0) * seen(0) + model(1) * seen(1);
        }
        if (std::hypot(s, c) <= 1e-12) {
          throw InconsistentPoints("recover_configuration: joint angle is unobservable");
        }
        out.angles(j) = wrap_angle(std::atan2(s, c) - dh_row.theta_offset);
        t = t * dh_transform(dh_row, out.angles(j));
        check_body(body);
      }
      break;
    }
  }
  return out;
}

double rotation_angle(const Eigen::MatrixXd& rotation) {
  if (rotation.rows() == 2) return std::abs(std::atan2(rotation(1, 0), rotation(0, 0)));
  const Matrix3d r = rotation;
  return std::abs(Eigen::AngleAxisd(r).angle());
}

double wrap_angle(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

PoseError pose_error(const RobotModel& robot, const Configuration& config, const GoalPose& goal) {
  const Kinematics kin = forward_kinematics(robot, config);
  PoseError e;
  e.position = (kin.end_effector.position - goal.position).norm();
  if (robot.kind == RobotKind::SphericalChain) {
    const Eigen::Vector3d a = kin.end_effector.rotation.col(0);
    const Eigen::Vector3d g = goal.rotation.col(0);
    e.orientation = std::atan2(a.cross(g).norm(), a.dot(g));
  } else {
    e.orientation = rotation_angle(goal.rotation.transpose() * kin.end_effector.rotation);
  }
  return e;
}

double limit_violation(const RobotModel& robot, const Configuration& config) {
  check_config(robot, config);
  double worst = 0.0;
  for (int j = 0; j < robot.joint_count(); ++j) {
    const auto l = robot.limit(j);
    if (!l) continue;
    worst = std::max(worst, std::abs(joint_angle_for_limit(robot, config, j)) - *l);
  }
  return worst;
}

Configuration sample_configuration(const RobotModel& robot, std::mt19937_64& rng) {
  robot.validate();
  Configuration c = zero_configuration(robot);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int j = 0; j < robot.joint_count(); ++j) {
    const double bound = robot.limit(j).value_or(kPi);
    if (robot.kind == RobotKind::SphericalChain) {
      c.angles(2 * j) = -kPi + 2.0 * kPi * unit(rng);
      c.angles(2 * j + 1) = bound * unit(rng);
    } else {
      c.angles(j) = -bound + 2.0 * bound * unit(rng);
    }
  }
  return c;
}

std::string robot_data_dir() {
  if (const char* env = std::getenv("EDMIK_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return EDMIK_DEFAULT_DATA_DIR;
}

std::vector<std::string> builtin_robot_names() {
  return {"planar-10", "planar-100", "spherical-10", "spherical-100", "ur10"};
}

RobotModel builtin_robot(const std::string& name) {
  const auto chain = [&](const std::string& prefix, RobotKind kind) -> std::optional<RobotModel> {
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    const std::string count = name.substr(prefix.size());
    if (count.empty() || count.find_first_not_of("0123456789") != std::string::npos ||
        count.size() > 5) {
      return std::nullopt;
    }
    const int n = std::stoi(count);
    if (n < 1) return std::nullopt;
    RobotModel r;
    r.kind = kind;
    r.name = name;
    r.link_lengths.assign(static_cast<std::size_t>(n), 1.0);
    return r;
  };
  if (auto r = chain("planar-", RobotKind::PlanarChain)) return *r;
  if (auto r = chain("spherical-", RobotKind::SphericalChain)) return *r;
  if (name == "ur10") return load_robot_file(robot_data_dir() + "/ur10.json");
  throw InvalidArgument("unknown robot '" + name + "'");
}

}  // namespace edmik
