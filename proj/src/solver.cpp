#include "edmik/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

namespace edmik {

void CompletionProblem::validate() const {
  partial.validate();
  const auto n = partial.size();
  if (dim < 1) throw InvalidArgument("CompletionProblem: dimension must be positive");
  if (initial.n_points() != n || initial.dim() != dim) {
    throw DimensionMismatch("CompletionProblem: initial point shape does not match the EDM");
  }
  if (!initial.all_finite()) throw InvalidArgument("CompletionProblem: initial point not finite");
  if (anchors.positions.cols() != dim) {
    throw DimensionMismatch("CompletionProblem: anchor dimension mismatch");
  }
  anchors.validate(n);
}

void SolverConfig::validate() const {
  if (max_iters < 0) throw InvalidArgument("SolverConfig: max_iters must be nonnegative");
  if (!(grad_tol > 0.0) || !(cost_tol > 0.0) || !(rank_tol > 0.0) ||
      !(line_search.initial_step > 0.0)) {
    throw InvalidArgument("SolverConfig: tolerances and initial step must be positive");
  }
  const auto in_unit = [](double x) { return x > 0.0 && x < 1.0; };
  if (!in_unit(line_search.backtrack_factor) ||
      !in_unit(line_search.sufficient_decrease_coefficient)) {
    throw InvalidArgument("SolverConfig: line-search coefficients must lie in (0, 1)");
  }
  if (line_search.max_backtracks < 1 || cost_window < 1 || cg_restart_period < 0) {
    throw InvalidArgument("SolverConfig: counts out of range");
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::GradientTolerance: return "gradient_tolerance";
    case SolveStatus::CostStagnation: return "cost_stagnation";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::LineSearchStalled: return "line_search_stalled";
    case SolveStatus::RankDeficientBase: return "rank_deficient_base";
    case SolveStatus::DegenerateAlignment: return "degenerate_alignment";
  }
  return "unknown";
}

namespace {

// dcost/dD: Omega o (D - D~) - max{Psi o (D~ - D), 0}. Also returns the cost.
double residual(const CompletionProblem& problem, const Eigen::MatrixXd& p,
                Eigen::MatrixXd* dcost) {
  const auto& partial = problem.partial;
  const Eigen::MatrixXd d = kappa(GramMatrix{p * p.transpose()}).values;
  const Eigen::ArrayXXd diff = d.array() - partial.template_values.array();
  const Eigen::ArrayXXd equality = partial.equality_mask.array() * diff;
  const Eigen::ArrayXXd hinge = (-partial.lower_bound_mask.array() * diff).max(0.0);
  if (dcost != nullptr) *dcost = (equality - hinge).matrix();
  return 0.5 * (equality.square().sum() + hinge.square().sum());
}

}  // namespace

double cost(const CompletionProblem& problem, const Eigen::MatrixXd& p) {
  return residual(problem, p, nullptr);
}

double cost(const CompletionProblem& problem, const ManifoldPoint& p) {
  return cost(problem, p.matrix());
}

CostAndGradient cost_and_gradient(const CompletionProblem& problem, const Eigen::MatrixXd& p) {
  Eigen::MatrixXd r;
  CostAndGradient out;
  out.cost = residual(problem, p, &r);
  out.gradient = 2.0 * kappa_adjoint(r) * p;
  return out;
}

Eigen::MatrixXd euclidean_gradient(const CompletionProblem& problem, const ManifoldPoint& p) {
  return cost_and_gradient(problem, p.matrix()).gradient;
}

TangentVector riemannian_gradient(const CompletionProblem& problem, const ManifoldPoint& p) {
  return project_horizontal(p, euclidean_gradient(problem, p));
}

namespace {

// The cost only sees distances, so translating the representative is free.
// A collinear (2-D) or coplanar (3-D) start has a rank-deficient
// representative; shifting it off the origin along a coordinate axis can
// restore full rank.
std::optional<ManifoldPoint> full_rank_start(const PointMatrix& initial, double rank_tol) {
  try {
    return ManifoldPoint(initial, rank_tol);
  } catch (const RankDeficientBase&) {
  }
  const double scale = std::max(1.0, initial.values.cwiseAbs().maxCoeff());
  for (Eigen::Index axis = initial.dim() - 1; axis >= 0; --axis) {
    Eigen::MatrixXd shifted = initial.values;
    shifted.col(axis).array() += scale;
    try {
      return ManifoldPoint(PointMatrix{std::move(shifted)}, rank_tol);
    } catch (const RankDeficientBase&) {
    }
  }
  return std::nullopt;
}

// The same objective restricted to the masked upper-triangle pairs. Each
// unordered pair appears twice in the Frobenius norm, which cancels the 1/2.
class PairObjective {
 public:
  explicit PairObjective(const PartialEDM& partial) {
    const auto n = partial.size();
    for (Eigen::Index v = 0; v < n; ++v) {
      for (Eigen::Index u = 0; u < v; ++u) {
        if (partial.equality_mask(u, v) != 0.0) {
          pairs_.push_back({u, v, partial.template_values(u, v), false});
        } else if (partial.lower_bound_mask(u, v) != 0.0) {
          pairs_.push_back({u, v, partial.template_values(u, v), true});
        }
      }
    }
  }

  double cost(const Eigen::MatrixXd& p) const {
    double f = 0.0;
    for (const auto& e : pairs_) {
      const double r = weight(e, (p.row(e.u) - p.row(e.v)).squaredNorm() - e.target);
      f += r * r;
    }
    return f;
  }

  double cost_and_gradient(const Eigen::MatrixXd& p, Eigen::MatrixXd& grad) const {
    grad.setZero(p.rows(), p.cols());
    double f = 0.0;
    for (const auto& e : pairs_) {
      const Eigen::RowVectorXd diff = p.row(e.u) - p.row(e.v);
      const double r = weight(e, diff.squaredNorm() - e.target);
      f += r * r;
      if (r != 0.0) {
        grad.row(e.u) += (4.0 * r) * diff;
        grad.row(e.v) -= (4.0 * r) * diff;
      }
    }
    return f;
  }

  // Along p + t d every squared distance is a quadratic in t, so the cost is
  // a piecewise quartic. Returns the first local minimiser on t > 0, or 0
  // when none can be bracketed.
  double line_minimizer(const Eigen::MatrixXd& p, const Eigen::MatrixXd& d, double guess) const {
    struct Coef {
      double r0, b, c;
      bool hinge;
    };
    std::vector<Coef> coef;
    coef.reserve(pairs_.size());
    for (const auto& e : pairs_) {
      const Eigen::RowVectorXd dp = p.row(e.u) - p.row(e.v);
      const Eigen::RowVectorXd dd = d.row(e.u) - d.row(e.v);
      coef.push_back({dp.squaredNorm() - e.target, 2.0 * dp.dot(dd), dd.squaredNorm(), e.hinge});
    }
    const auto derivative = [&](double t) {
      double g = 0.0;
      for (const auto& c : coef) {
        double r = c.r0 + t * (c.b + t * c.c);
        if (c.hinge) r = std::min(r, 0.0);
        g += 2.0 * r * (c.b + 2.0 * t * c.c);
      }
      return g;
    };
    if (!(derivative(0.0) < 0.0)) return 0.0;
    double lo = 0.0;
    double hi = guess > 0.0 && std::isfinite(guess) ? guess : 1.0;
    int expansions = 0;
    while (derivative(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (++expansions > 60) return 0.0;
    }
    for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (derivative(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  struct Pair {
    Eigen::Index u, v;
    double target;
    bool hinge;
  };

  static double weight(const Pair& e, double residual) {
    return e.hinge ? std::min(residual, 0.0) : residual;
  }

  std::vector<Pair> pairs_;
};

}  // namespace

SolveOutcome solve(const CompletionProblem& problem, const SolverConfig& config,
                   const TraceSink& trace) {
  problem.validate();
  config.validate();

  const auto start = std::chrono::steady_clock::now();
  const PairObjective objective(problem.partial);
  SolveOutcome out;
  const auto finish = [&](const Eigen::MatrixXd& p) {
    out.points = PointMatrix{p};
    if (out.status != SolveStatus::RankDeficientBase) {
      try {
        out.points = align_to_anchors(PointMatrix{p}, problem.anchors);
      } catch (const DegenerateAnchors& e) {
        out.converged = false;
        out.status = SolveStatus::DegenerateAlignment;
        out.diagnostic = e.what();
      }
    }
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  };

  Eigen::MatrixXd egrad;
  // A stationary start needs no manifold structure; projection cannot make a
  // small gradient larger.
  {
    const double f0 = objective.cost_and_gradient(problem.initial.values, egrad);
    if (egrad.norm() <= config.grad_tol) {
      out.final_cost = f0;
      out.grad_norm = egrad.norm();
      out.converged = true;
      out.status = SolveStatus::GradientTolerance;
      if (trace) trace({0, out.final_cost, out.grad_norm, 0.0});
      return finish(problem.initial.values);
    }
  }

  auto start_point = full_rank_start(problem.initial, config.rank_tol);
  if (!start_point) {
    out.final_cost = objective.cost(problem.initial.values);
    out.grad_norm = std::numeric_limits<double>::infinity();
    out.status = SolveStatus::RankDeficientBase;
    out.diagnostic = "initial point is rank deficient";
    return finish(problem.initial.values);
  }

  ManifoldPoint x = std::move(*start_point);
  double f = objective.cost_and_gradient(x.matrix(), egrad);
  TangentVector grad = project_horizontal(x, egrad);
  double grad_norm = norm(x, grad);
  if (trace) trace({0, f, grad_norm, 0.0});

  const auto& ls = config.line_search;
  const int restart_period = config.cg_restart_period > 0
                                 ? config.cg_restart_period
                                 : static_cast<int>(x.matrix().rows() * x.matrix().cols());
  TangentVector direction{-grad.values};
  std::deque<double> recent_costs{f};
  double previous_step = 0.0;
  double previous_slope = 0.0;
  int since_restart = 0;

  out.status = grad_norm <= config.grad_tol ? SolveStatus::GradientTolerance
                                            : SolveStatus::MaxIterations;
  int iteration = 0;
  while (out.status == SolveStatus::MaxIterations && iteration < config.max_iters) {
    double slope = inner(x, grad, direction);
    if (!(slope < 0.0)) {
      direction.values = -grad.values;
      slope = -grad_norm * grad_norm;
      since_restart = 0;
    }

    // First trial step: exact minimiser of the quartic along the direction,
    // seeded by the previous step rescaled by the slope ratio.
    double guess = previous_step > 0.0 ? previous_step * previous_slope / slope
                                       : ls.initial_step / std::sqrt(-slope);
    if (!std::isfinite(guess) || guess <= 0.0) guess = ls.initial_step / std::sqrt(-slope);
    double step = objective.line_minimizer(x.matrix(), direction.values, guess);
    if (!(step > 0.0)) step = guess;

    std::optional<ManifoldPoint> candidate;
    double candidate_cost = f;
    for (int b = 0; b < ls.max_backtracks; ++b, step *= ls.backtrack_factor) {
      try {
        ManifoldPoint trial = retract(x, TangentVector{step * direction.values});
        const double trial_cost = objective.cost(trial.matrix());
        if (trial_cost <= f + ls.sufficient_decrease_coefficient * step * slope) {
          candidate.emplace(std::move(trial));
          candidate_cost = trial_cost;
          break;
        }
      } catch (const LeftManifold&) {
      }
    }
    if (!candidate) {
      out.status = SolveStatus::LineSearchStalled;
      out.diagnostic = "no sufficient decrease within max_backtracks";
      break;
    }

    ++iteration;
    objective.cost_and_gradient(candidate->matrix(), egrad);
    TangentVector new_grad;
    TangentVector old_grad_moved;
    TangentVector old_dir_moved;
    try {
      new_grad = project_horizontal(*candidate, egrad);
      old_grad_moved = transport(x, *candidate, grad);
      old_dir_moved = transport(x, *candidate, direction);
    } catch (const RankDeficientBase& e) {
      x = std::move(*candidate);
      f = candidate_cost;
      out.status = SolveStatus::RankDeficientBase;
      out.diagnostic = e.what();
      break;
    }

    const double new_grad_norm = norm(*candidate, new_grad);
    double beta = 0.0;
    if (++since_restart < restart_period) {
      const double num = inner(*candidate, new_grad,
                               TangentVector{new_grad.values - old_grad_moved.values});
      beta = std::max(0.0, num / (grad_norm * grad_norm));
    } else {
      since_restart = 0;
    }

    x = std::move(*candidate);
    f = candidate_cost;
    grad = std::move(new_grad);
    grad_norm = new_grad_norm;
    direction.values = -grad.values + beta * old_dir_moved.values;
    previous_step = step;
    previous_slope = slope;
    if (trace) trace({iteration, f, grad_norm, step});

    recent_costs.push_back(f);
    if (static_cast<int>(recent_costs.size()) > config.cost_window + 1) recent_costs.pop_front();

    if (grad_norm <= config.grad_tol || f == 0.0) {
      out.status = SolveStatus::GradientTolerance;
    } else if (static_cast<int>(recent_costs.size()) == config.cost_window + 1 &&
               recent_costs.front() - f <= config.cost_tol * recent_costs.front()) {
      out.status = SolveStatus::CostStagnation;
    }
  }

  out.final_cost = f;
  out.grad_norm = grad_norm;
  out.iterations = iteration;
  out.converged =
      out.status == SolveStatus::GradientTolerance || out.status == SolveStatus::CostStagnation;
  return finish(x.matrix());
}

}  // namespace edmik
