#include "edmik/robot_io.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace edmik {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const char* where) {
  if (!obj.is_object()) throw ParseError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ParseError(std::string(where) + ": unknown field '" + key + "'");
    }
  }
}

double number(const json& v, const char* what) {
  if (!v.is_number()) throw ParseError(std::string(what) + " must be a number");
  return v.get<double>();
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

RobotKind parse_kind(const json& v) {
  if (!v.is_string()) throw ParseError("robot: 'kind' must be a string");
  const auto s = v.get<std::string>();
  if (s == "planar_chain") return RobotKind::PlanarChain;
  if (s == "spherical_chain") return RobotKind::SphericalChain;
  if (s == "revolute_dh") return RobotKind::RevoluteDh;
  throw ParseError("robot: unknown kind '" + s + "'");
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RobotModel parse_robot_description(const std::string& text) {
  const json doc = parse_json(text, "robot");
  reject_unknown(doc, {"name", "kind", "links", "limits", "point_scheme"}, "robot");
  if (!doc.contains("kind") || !doc.contains("links")) {
    throw ParseError("robot: 'kind' and 'links' are required");
  }
  RobotModel r;
  r.kind = parse_kind(doc.at("kind"));
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) throw ParseError("robot: 'name' must be a string");
    r.name = doc.at("name").get<std::string>();
  }
  const json& links = doc.at("links");
  if (!links.is_array() || links.empty()) throw ParseError("robot: 'links' must be a non-empty array");
  for (const auto& l : links) {
    if (r.kind == RobotKind::RevoluteDh) {
      if (!l.is_array() || l.size() != 4) {
        throw ParseError("robot: DH rows must be [a, alpha, d, theta_offset]");
      }
      r.dh.push_back({number(l[0], "a"), number(l[1], "alpha"), number(l[2], "d"),
                      number(l[3], "theta_offset")});
    } else {
      r.link_lengths.push_back(number(l, "link length"));
    }
  }
  if (doc.contains("limits")) {
    const json& limits = doc.at("limits");
    if (!limits.is_array()) throw ParseError("robot: 'limits' must be an array");
    for (const auto& l : limits) {
      if (l.is_null()) {
        r.limits.emplace_back(std::nullopt);
      } else {
        r.limits.emplace_back(number(l, "limit"));
      }
    }
  }
  if (doc.contains("point_scheme")) {
    const json& ps = doc.at("point_scheme");
    reject_unknown(ps, {"axis_spacing"}, "robot.point_scheme");
    if (r.kind != RobotKind::RevoluteDh) {
      throw ParseError("robot: point_scheme overrides apply to revolute_dh only");
    }
    if (ps.contains("axis_spacing")) r.axis_spacing = number(ps.at("axis_spacing"), "axis_spacing");
  }
  try {
    r.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("robot: ") + e.what());
  }
  return r;
}

RobotModel load_robot_file(const std::string& path) {
  RobotModel r = parse_robot_description(read_text_file(path));
  if (r.name.empty()) r.name = std::filesystem::path(path).stem().string();
  return r;
}

std::string robot_description_json(const RobotModel& robot) {
  json doc;
  doc["name"] = robot.name;
  doc["kind"] = to_string(robot.kind);
  json links = json::array();
  if (robot.kind == RobotKind::RevoluteDh) {
    for (const auto& row : robot.dh) links.push_back({row.a, row.alpha, row.d, row.theta_offset});
  } else {
    for (double l : robot.link_lengths) links.push_back(l);
  }
  doc["links"] = links;
  if (!robot.limits.empty()) {
    json limits = json::array();
    for (const auto& l : robot.limits) limits.push_back(l ? json(*l) : json(nullptr));
    doc["limits"] = limits;
  }
  if (robot.kind == RobotKind::RevoluteDh) doc["point_scheme"] = {{"axis_spacing", robot.axis_spacing}};
  return doc.dump(2);
}

GoalPose parse_goal(const RobotModel& robot, const std::string& text) {
  const json doc = parse_json(text, "goal");
  reject_unknown(doc, {"position", "orientation", "configuration"}, "goal");
  const auto k = robot.dim();
  if (doc.contains("configuration")) {
    if (doc.contains("position") || doc.contains("orientation")) {
      throw ParseError("goal: give either a configuration or a pose, not both");
    }
    const json& c = doc.at("configuration");
    if (!c.is_array()) throw ParseError("goal: 'configuration' must be an array");
    Configuration config{Eigen::VectorXd(static_cast<Eigen::Index>(c.size()))};
    for (std::size_t i = 0; i < c.size(); ++i) {
      config.angles(static_cast<Eigen::Index>(i)) = number(c[i], "configuration entry");
    }
    try {
      return forward_kinematics(robot, config).end_effector;
    } catch (const DimensionMismatch& e) {
      throw ParseError(std::string("goal: ") + e.what());
    }
  }
  if (!doc.contains("position") || !doc.contains("orientation")) {
    throw ParseError("goal: 'position' and 'orientation' are required");
  }
  GoalPose g;
  const json& p = doc.at("position");
  if (!p.is_array() || static_cast<Eigen::Index>(p.size()) != k) {
    throw ParseError("goal: position must have " + std::to_string(k) + " entries");
  }
  g.position.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) g.position(i) = number(p[static_cast<std::size_t>(i)], "position");
  const json& o = doc.at("orientation");
  if (k == 2) {
    const double angle = number(o, "orientation");
    g.rotation.resize(2, 2);
    g.rotation << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  } else {
    if (!o.is_array() || o.size() != 3) throw ParseError("goal: orientation must be 3x3 rows");
    g.rotation.resize(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
      if (!o[i].is_array() || o[i].size() != 3) throw ParseError("goal: orientation must be 3x3 rows");
      for (std::size_t j = 0; j < 3; ++j) {
        g.rotation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            number(o[i][j], "orientation entry");
      }
    }
  }
  try {
    g.validate();
  } catch (const Error& e) {
    throw ParseError(std::string("goal: ") + e.what());
  }
  return g;
}

GoalPose load_goal_file(const RobotModel& robot, const std::string& path) {
  return parse_goal(robot, read_text_file(path));
}

RobotModel resolve_robot(const std::string& name_or_path) {
  try {
    return builtin_robot(name_or_path);
  } catch (const InvalidArgument&) {
    if (std::filesystem::exists(name_or_path)) return load_robot_file(name_or_path);
    throw;
  }
}

}  // namespace edmik
