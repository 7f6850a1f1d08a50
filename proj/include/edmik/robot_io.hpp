#pragma once

// Robot description and goal files (JSON, UTF-8). Unknown fields are
// rejected.
//
// Robot description:
//   {
//     "name": "ur10",                          optional
//     "kind": "planar_chain" | "spherical_chain" | "revolute_dh",
//     "links": [1.0, ...]                      chains: link lengths (m)
//            | [[a, alpha, d, theta_offset], ...]   revolute_dh rows
//     "limits": [0.5, null, ...]               optional, radians, null = free
//     "point_scheme": { "axis_spacing": 1.0 }  optional, revolute_dh only
//   }
//
// Goal:
//   { "position": [x, y(, z)],
//     "orientation": angle (planar) | [[r00, r01, r02], [...], [...]] }
// or
//   { "configuration": [theta, ...] }          goal = forward kinematics

#include <string>

#include "edmik/robots.hpp"

namespace edmik {

RobotModel parse_robot_description(const std::string& text);
RobotModel load_robot_file(const std::string& path);
std::string robot_description_json(const RobotModel& robot);

GoalPose parse_goal(const RobotModel& robot, const std::string& text);
GoalPose load_goal_file(const RobotModel& robot, const std::string& path);

/// Built-in name, or a path to a description file when the name is not a
/// built-in.
RobotModel resolve_robot(const std::string& name_or_path);

std::string read_text_file(const std::string& path);

}  // namespace edmik
