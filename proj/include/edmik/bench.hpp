#pragma once

// Seeded IK trials: sample a configuration, take its end-effector pose as the
// goal, complete the partial EDM from the zero configuration and score the
// recovered joint angles against the goal.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "edmik/robots.hpp"
#include "edmik/solver.hpp"

namespace edmik {

inline constexpr double kMinSampledLimit = 0.2;  // radians

struct TrialSpec {
  std::string robot_name;
  RobotModel robot;
  std::uint64_t seed = 0;
  bool use_limits = false;
  double tol_pos = 0.01;  // meters
  double tol_rot = 0.01;  // radians

  void validate() const;
};

enum class FailureKind { None, Tolerance, NonConverged, InconsistentPoints };

const char* to_string(FailureKind kind);
FailureKind failure_kind_from_string(const std::string& s);

struct TrialRecord {
  std::uint64_t seed = 0;
  bool success = false;
  // +inf when no configuration could be recovered.
  double position_error = 0.0;
  double orientation_error = 0.0;
  double limit_violation = 0.0;  // radians beyond the active limits
  int iterations = 0;
  double final_cost = 0.0;
  std::string solver_status;
  double wall_time = 0.0;  // seconds, solve call only
  FailureKind failure_kind = FailureKind::None;
};

inline constexpr double kLimitSlack = 1e-6;  // radians

/// Success rule shared by classification and re-checks of stored records.
bool is_success(const TrialRecord& record, double tol_pos, double tol_rot);

struct GeneratedTrial {
  RobotModel robot;  // with the trial's limits applied
  CompletionProblem problem;
  GoalPose goal;
  Configuration ground_truth;
  PointMatrix ground_truth_points;
};

GeneratedTrial generate_trial(const TrialSpec& spec);

TrialRecord run_trial(const TrialSpec& spec, const SolverConfig& config,
                      const TraceSink& trace = {});

struct TrialBatchResult {
  std::string robot_name;
  bool use_limits = false;
  std::uint64_t base_seed = 0;
  double tol_pos = 0.01;
  double tol_rot = 0.01;
  int n_trials = 0;
  double success_rate = 0.0;
  double mean_runtime = 0.0;  // seconds
  std::vector<TrialRecord> records;
};

struct BatchOptions {
  double tol_pos = 0.01;
  double tol_rot = 0.01;
  unsigned threads = 1;  // 0: hardware concurrency
  std::function<void(std::uint64_t seed, const IterationTrace&)> trace;
};

TrialBatchResult run_batch(const std::string& robot_name, const RobotModel& robot, int n_trials,
                           std::uint64_t base_seed, bool use_limits, const SolverConfig& config,
                           const BatchOptions& options = {});

/// Fills n_trials, success_rate and mean_runtime from records.
void aggregate(TrialBatchResult& result);

}  // namespace edmik
