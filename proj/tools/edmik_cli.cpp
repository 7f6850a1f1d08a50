// edmik: distance-geometric IK benchmark and single-instance solver.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>

#include "edmik/bench.hpp"
#include "edmik/report.hpp"
#include "edmik/robot_io.hpp"

namespace {

using namespace edmik;

void print_trace(std::uint64_t seed, const IterationTrace& t) {
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  std::fprintf(stderr, "seed=%llu iter=%d cost=%.6e grad=%.6e step=%.3e\n",
               static_cast<unsigned long long>(seed), t.iteration, t.cost, t.grad_norm, t.step);
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse kinematics by low-rank Euclidean distance matrix completion"};
  app.require_subcommand(1);

  std::string robot_name = "planar-10";
  int trials = 100;
  std::uint64_t seed = 0;
  bool limits = false;
  double tol_pos = 0.01;
  double tol_rot = 0.01;
  int max_iters = SolverConfig{}.max_iters;
  std::string format = "table";
  std::string output;
  bool trace = false;
  unsigned threads = 1;

  auto* bench = app.add_subcommand("bench", "Run seeded random IK trials and report success rates");
  bench->add_option("--robot", robot_name, "Built-in robot name or description file")->capture_default_str();
  bench->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--seed", seed, "Base seed; trial i uses seed + i")->capture_default_str();
  bench->add_flag("--limits", limits, "Draw random symmetric joint limits per trial");
  bench->add_option("--tol-pos", tol_pos, "Position tolerance (m)")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--tol-rot", tol_rot, "Orientation tolerance (rad)")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--max-iters", max_iters, "Solver iteration cap")->check(CLI::NonNegativeNumber)->capture_default_str();
  bench->add_option("--format", format, "Report format")->check(CLI::IsMember({"table", "csv", "json"}))->capture_default_str();
  bench->add_option("--output", output, "Report path (default stdout)");
  bench->add_flag("--trace", trace, "Print per-iteration solver trace to stderr");
  bench->add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();

  std::string goal_path;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a single IK instance for a goal file");
  solve_cmd->add_option("--robot", robot_name, "Built-in robot name or description file")->capture_default_str();
  solve_cmd->add_option("--goal", goal_path, "Goal file (JSON)")->required();
  solve_cmd->add_option("--max-iters", max_iters, "Solver iteration cap")->check(CLI::NonNegativeNumber)->capture_default_str();
  solve_cmd->add_option("--tol-pos", tol_pos, "Position tolerance (m)")->check(CLI::PositiveNumber)->capture_default_str();
  solve_cmd->add_option("--tol-rot", tol_rot, "Orientation tolerance (rad)")->check(CLI::PositiveNumber)->capture_default_str();
  solve_cmd->add_option("--output", output, "Result path (default stdout)");
  solve_cmd->add_flag("--trace", trace, "Print per-iteration solver trace to stderr");

  auto* robots = app.add_subcommand("robots", "List built-in robots");

  CLI11_PARSE(app, argc, argv);

  try {
    SolverConfig config;
    config.max_iters = max_iters;

    if (*robots) {
      std::printf("%-16s %-16s %7s %7s %3s\n", "name", "kind", "joints", "points", "K");
      for (const auto& name : builtin_robot_names()) {
        const RobotModel r = builtin_robot(name);
        std::printf("%-16s %-16s %7d %7ld %3ld\n", name.c_str(), to_string(r.kind), r.joint_count(),
                    static_cast<long>(r.point_count()), static_cast<long>(r.dim()));
      }
      return 0;
    }

    const RobotModel robot = resolve_robot(robot_name);

    if (*bench) {
      BatchOptions options;
      options.tol_pos = tol_pos;
      options.tol_rot = tol_rot;
      options.threads = threads;
      if (trace) options.trace = print_trace;
      const auto result = run_batch(robot_name, robot, trials, seed, limits, config, options);
      emit_report(result, report_format_from_string(format), output, std::cout);
      return 0;
    }

    // solve
    const GoalPose goal = load_goal_file(robot, goal_path);
    auto built = build_partial_edm(robot, goal);
    CompletionProblem problem;
    problem.partial = std::move(built.partial);
    problem.anchors = std::move(built.anchors);
    problem.dim = robot.dim();
    problem.initial = initial_points(robot, problem.anchors);
    TraceSink sink;
    if (trace) sink = [](const IterationTrace& t) { print_trace(0, t); };
    const SolveOutcome outcome = solve(problem, config, sink);

    nlohmann::json doc;
    doc["robot"] = robot.name.empty() ? robot_name : robot.name;
    doc["converged"] = outcome.converged;
    doc["solver_status"] = to_string(outcome.status);
    doc["iterations"] = outcome.iterations;
    doc["final_cost"] = outcome.final_cost;
    doc["grad_norm"] = outcome.grad_norm;
    doc["wall_time_s"] = outcome.wall_time;
    doc["points"] = matrix_json(outcome.points.values);
    try {
      const Configuration recovered = recover_configuration(robot, outcome.points);
      const PoseError e = pose_error(robot, recovered, goal);
      doc["configuration"] = std::vector<double>(recovered.angles.data(),
                                                 recovered.angles.data() + recovered.angles.size());
      doc["position_error"] = e.position;
      doc["orientation_error"] = e.orientation;
      doc["success"] = e.position < tol_pos && e.orientation < tol_rot &&
                       limit_violation(robot, recovered) <= kLimitSlack;
    } catch (const InconsistentPoints& e) {
      doc["configuration"] = nullptr;
      doc["success"] = false;
      doc["diagnostic"] = e.what();
    }
    const std::string text = doc.dump(2) + "\n";
    if (output.empty() || output == "-") {
      std::cout << text;
    } else {
      std::ofstream file(output, std::ios::binary | std::ios::trunc);
      if (!file || !(file << text)) throw IoError("cannot write '" + output + "'");
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "edmik: " << e.what() << "\n";
    return 1;
  }
}
