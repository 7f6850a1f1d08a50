#include "edmik/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

namespace edmik {

void TrialSpec::validate() const {
  robot.validate();
  if (!(tol_pos > 0.0) || !(tol_rot > 0.0)) throw InvalidArgument("trial tolerances must be positive");
}

const char* to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::None: return "none";
    case FailureKind::Tolerance: return "tolerance";
    case FailureKind::NonConverged: return "non_converged";
    case FailureKind::InconsistentPoints: return "inconsistent_points";
  }
  return "unknown";
}

FailureKind failure_kind_from_string(const std::string& s) {
  for (auto k : {FailureKind::None, FailureKind::Tolerance, FailureKind::NonConverged,
                 FailureKind::InconsistentPoints}) {
    if (s == to_string(k)) return k;
  }
  throw ParseError("unknown failure kind '" + s + "'");
}

bool is_success(const TrialRecord& record, double tol_pos, double tol_rot) {
  return record.position_error < tol_pos && record.orientation_error < tol_rot &&
         record.limit_violation <= kLimitSlack;
}

GeneratedTrial generate_trial(const TrialSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  GeneratedTrial t;
  t.robot = spec.robot;
  t.robot.limits.clear();
  if (spec.use_limits) {
    std::uniform_real_distribution<double> limit(kMinSampledLimit, std::numbers::pi);
    for (int j = 0; j < t.robot.joint_count(); ++j) t.robot.limits.emplace_back(limit(rng));
  }
  t.ground_truth = sample_configuration(t.robot, rng);
  t.goal = forward_kinematics(t.robot, t.ground_truth).end_effector;
  t.ground_truth_points = attach_points(t.robot, t.ground_truth);

  auto built = build_partial_edm(t.robot, t.goal);
  PointMatrix initial = initial_points(t.robot, built.anchors);
  t.problem.partial = std::move(built.partial);
  t.problem.anchors = std::move(built.anchors);
  t.problem.dim = t.robot.dim();
  t.problem.initial = std::move(initial);
  return t;
}

TrialRecord run_trial(const TrialSpec& spec, const SolverConfig& config, const TraceSink& trace) {
  const GeneratedTrial trial = generate_trial(spec);
  const SolveOutcome outcome = solve(trial.problem, config, trace);

  TrialRecord r;
  r.seed = spec.seed;
  r.iterations = outcome.iterations;
  r.final_cost = outcome.final_cost;
  r.solver_status = to_string(outcome.status);
  r.wall_time = outcome.wall_time;

  bool inconsistent = false;
  try {
    const Configuration recovered = recover_configuration(trial.robot, outcome.points);
    const PoseError e = pose_error(trial.robot, recovered, trial.goal);
    r.position_error = e.position;
    r.orientation_error = e.orientation;
    r.limit_violation = std::max(0.0, limit_violation(trial.robot, recovered));
  } catch (const InconsistentPoints&) {
    inconsistent = true;
    r.position_error = std::numeric_limits<double>::infinity();
    r.orientation_error = std::numeric_limits<double>::infinity();
    r.limit_violation = 0.0;
  }

  r.success = is_success(r, spec.tol_pos, spec.tol_rot);
  if (r.success) {
    r.failure_kind = FailureKind::None;
  } else if (!outcome.converged) {
    r.failure_kind = FailureKind::NonConverged;
  } else if (inconsistent) {
    r.failure_kind = FailureKind::InconsistentPoints;
  } else {
    r.failure_kind = FailureKind::Tolerance;
  }
  return r;
}

void aggregate(TrialBatchResult& result) {
  result.n_trials = static_cast<int>(result.records.size());
  int successes = 0;
  double total_time = 0.0;
  for (const auto& r : result.records) {
    successes += r.success ? 1 : 0;
    total_time += r.wall_time;
  }
  result.success_rate = result.n_trials > 0 ? double(successes) / double(result.n_trials) : 0.0;
  result.mean_runtime = result.n_trials > 0 ? total_time / double(result.n_trials) : 0.0;
}

TrialBatchResult run_batch(const std::string& robot_name, const RobotModel& robot, int n_trials,
                           std::uint64_t base_seed, bool use_limits, const SolverConfig& config,
                           const BatchOptions& options) {
  if (n_trials < 1) throw InvalidArgument("run_batch: need at least one trial");
  robot.validate();
  config.validate();

  TrialBatchResult result;
  result.robot_name = robot_name;
  result.use_limits = use_limits;
  result.base_seed = base_seed;
  result.tol_pos = options.tol_pos;
  result.tol_rot = options.tol_rot;
  result.records.resize(static_cast<std::size_t>(n_trials));

  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next++; i < n_trials; i = next++) {
      TrialSpec spec{robot_name, robot, base_seed + static_cast<std::uint64_t>(i), use_limits,
                     options.tol_pos, options.tol_rot};
      TraceSink sink;
      if (options.trace) {
        sink = [&, seed = spec.seed](const IterationTrace& t) { options.trace(seed, t); };
      }
      result.records[static_cast<std::size_t>(i)] = run_trial(spec, config, sink);
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                          : options.threads;
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n_trials));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  aggregate(result);
  return result;
}

}  // namespace edmik
