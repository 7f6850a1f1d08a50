#pragma once

// Masked low-rank EDM completion:
//
//   f(P) = 1/2 || Omega o (D~ - K(P P^T)) ||_F^2
//        + 1/2 || max{ Psi o (D~ - K(P P^T)), 0 } ||_F^2
//
// minimised over [P] in R_*^{N x K} / O(K) by Riemannian conjugate gradient.

#include <Eigen/Dense>

#include <functional>
#include <string>

#include "edmik/edm.hpp"
#include "edmik/manifold.hpp"

namespace edmik {

struct CompletionProblem {
  PartialEDM partial;
  Eigen::Index dim = 0;
  AnchorSet anchors;
  PointMatrix initial;

  void validate() const;
};

struct LineSearchConfig {
  double initial_step = 1.0;  // norm of the very first trial step
  double backtrack_factor = 0.5;
  double sufficient_decrease_coefficient = 1e-4;
  int max_backtracks = 30;
};

struct SolverConfig {
  int max_iters = 2000;
  double grad_tol = 1e-8;
  double cost_tol = 1e-14;  // relative decrease over cost_window iterations
  int cost_window = 5;
  LineSearchConfig line_search;
  int cg_restart_period = 0;  // 0 means N * K
  double rank_tol = kDefaultRankTol;

  void validate() const;
};

struct IterationTrace {
  int iteration = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

using TraceSink = std::function<void(const IterationTrace&)>;

enum class SolveStatus {
  GradientTolerance,
  CostStagnation,
  MaxIterations,
  LineSearchStalled,
  RankDeficientBase,
  DegenerateAlignment,
};

const char* to_string(SolveStatus status);

struct SolveOutcome {
  PointMatrix points;  // aligned to the anchors when alignment succeeded
  double final_cost = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  double wall_time = 0.0;  // seconds
  SolveStatus status = SolveStatus::MaxIterations;
  std::string diagnostic;
};

double cost(const CompletionProblem& problem, const ManifoldPoint& p);

Eigen::MatrixXd euclidean_gradient(const CompletionProblem& problem, const ManifoldPoint& p);

TangentVector riemannian_gradient(const CompletionProblem& problem, const ManifoldPoint& p);

/// Cost and Euclidean gradient from one residual evaluation.
struct CostAndGradient {
  double cost = 0.0;
  Eigen::MatrixXd gradient;
};
CostAndGradient cost_and_gradient(const CompletionProblem& problem, const Eigen::MatrixXd& p);
double cost(const CompletionProblem& problem, const Eigen::MatrixXd& p);

SolveOutcome solve(const CompletionProblem& problem, const SolverConfig& config = {},
                   const TraceSink& trace = {});

}  // namespace edmik
