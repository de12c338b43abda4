#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <vector>

#include "bdris/errors.hpp"

namespace bdris {

struct SolverParams {
  double rho0 = 1.0;
  double epsilon0 = 1e-1;
  double gamma1 = 0.8;
  double gamma2 = 0.9;
  double gamma3 = 0.9;
  double eta_min = 1e-5;
  double epsilon_min = 1e-4;
  double sigma1 = 1e-4;
  double sigma2 = 0.4;
  double alpha_init = 1.0;
  double backtrack = 0.5;
  int max_inner = 500;
  int max_outer = 150;
  int max_linesearch = 40;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// A Riemannian manifold as seen by the CG engine.
template <class S>
concept RiemannianSpace = requires(const S& s, const typename S::Point& x,
                                   const typename S::Tangent& u) {
  { s.inner(u, u) } -> std::convertible_to<double>;
  { s.retract(x, u) } -> std::convertible_to<typename S::Point>;
  { s.transport(x, x, u) } -> std::convertible_to<typename S::Tangent>;
  { s.combine(1.0, u, 1.0, u) } -> std::convertible_to<typename S::Tangent>;
};

/// Cost value and Riemannian gradient at one point.
template <class Space>
struct Evaluation {
  double value = 0.0;
  typename Space::Tangent grad;
};

struct LineSearchRecord {
  double alpha = 0.0;
  int trials = 0;
  bool curvature_waived = false;
  /// L(x⁺) - L(x) - σ₁ α ⟨grad, D⟩; non-positive for an accepted step.
  double armijo_slack = 0.0;
  /// |⟨grad L(x⁺), Tran(D)⟩| - σ₂ |⟨grad L(x), D⟩|.
  double curvature_slack = 0.0;
};

/// One accepted inner iteration: values at the new iterate.
struct InnerRecord {
  double value = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  int linesearch_trials = 0;
  bool curvature_waived = false;
  bool restarted = false;
  double armijo_slack = 0.0;
};

struct InnerTrace {
  double start_value = 0.0;
  double start_grad_norm = 0.0;
  std::vector<InnerRecord> iterations;
  bool converged = false;
  bool linesearch_failed = false;
};

template <class Space>
struct StepResult {
  typename Space::Point point;
  Evaluation<Space> eval;
  LineSearchRecord record;
};

template <class Space>
struct CgResult {
  typename Space::Point point;
  Evaluation<Space> eval;
  InnerTrace trace;
};

/// ‖g_now‖² / ‖g_prev‖². Throws NumericError when g_prev = 0.
template <RiemannianSpace Space>
double fletcher_reeves_beta(const Space& space, const typename Space::Tangent& g_now,
                            const typename Space::Tangent& g_prev) {
  const double den = space.inner(g_prev, g_prev);
  if (!(den > 0.0)) throw NumericError("fletcher_reeves_beta: previous gradient is zero");
  return space.inner(g_now, g_now) / den;
}

/// Bracketing line search for the strong Wolfe conditions
///   L(x⁺) - L(x) ≤ σ₁ α ⟨g, D⟩,   |⟨g⁺, Tran(D)⟩| ≤ σ₂ |⟨g, D⟩|.
/// Failed sufficient decrease shrinks the step (by `backtrack`, or bisection
/// once a lower bracket exists); a too-short step expands by 2 until
/// bracketed. After max_linesearch trials the best sufficient-decrease step
/// is returned with curvature_waived set. Throws LineSearchError when no
/// trial decreased L enough.
template <RiemannianSpace Space, class Objective>
StepResult<Space> wolfe_step(const Space& space, Objective& objective,
                             const typename Space::Point& x, const Evaluation<Space>& at_x,
                             const typename Space::Tangent& direction, double alpha0,
                             const SolverParams& params) {
  const double slope0 = space.inner(at_x.grad, direction);
  if (!(slope0 < 0.0)) throw LineSearchError("wolfe_step: not a descent direction");
  const double curvature_bound = params.sigma2 * std::abs(slope0);

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double alpha = alpha0;
  std::optional<StepResult<Space>> best;

  for (int k = 1; k <= params.max_linesearch; ++k) {
    std::optional<typename Space::Point> trial;
    try {
      trial = space.retract(x, space.combine(alpha, direction, 0.0, direction));
    } catch (const DegenerateStepError&) {
      hi = alpha;
      alpha = lo > 0.0 ? 0.5 * (lo + hi) : alpha * params.backtrack;
      continue;
    }
    Evaluation<Space> e = objective(*trial);
    const double slack = e.value - at_x.value - params.sigma1 * alpha * slope0;
    if (!std::isfinite(e.value) || slack > 0.0) {
      hi = alpha;
      alpha = lo > 0.0 ? 0.5 * (lo + hi) : alpha * params.backtrack;
      continue;
    }
    const double slope = space.inner(e.grad, space.transport(x, *trial, direction));
    const double curvature_slack = std::abs(slope) - curvature_bound;
    LineSearchRecord rec{alpha, k, false, slack, curvature_slack};
    const bool improves = !best || e.value < best->eval.value;
    if (curvature_slack <= 0.0)
      return StepResult<Space>{std::move(*trial), std::move(e), rec};
    if (improves) best = StepResult<Space>{std::move(*trial), std::move(e), rec};
    if (slope < 0.0) {
      lo = alpha;
      alpha = std::isinf(hi) ? 2.0 * alpha : 0.5 * (lo + hi);
    } else {
      hi = alpha;
      alpha = 0.5 * (lo + hi);
    }
  }
  if (!best) throw LineSearchError("wolfe_step: no sufficient decrease");
  best->record.trials = params.max_linesearch;
  best->record.curvature_waived = true;
  return std::move(*best);
}

/// Riemannian conjugate gradient with Fletcher-Reeves β and transported
/// directions. Runs until ‖grad‖ < epsilon or params.max_inner iterations.
/// The first direction and every restart use -grad; a restart happens when
/// the CG direction is not a descent direction or its line search fails.
template <RiemannianSpace Space, class Objective>
CgResult<Space> conjugate_gradient(const Space& space, Objective&& objective,
                                   typename Space::Point start, double epsilon,
                                   const SolverParams& params) {
  using Tangent = typename Space::Tangent;
  CgResult<Space> out{std::move(start), {}, {}};
  out.eval = objective(out.point);
  double grad_sq = space.inner(out.eval.grad, out.eval.grad);
  out.trace.start_value = out.eval.value;
  out.trace.start_grad_norm = std::sqrt(grad_sq);

  std::optional<Tangent> prev_dir;   // transported into the current tangent space
  std::optional<Tangent> prev_grad;  // at the previous iterate
  double prev_alpha = 0.0;
  double prev_slope = 0.0;

  for (int q = 0; q < params.max_inner; ++q) {
    if (std::sqrt(grad_sq) < epsilon) {
      out.trace.converged = true;
      return out;
    }
    const Tangent& g = out.eval.grad;
    bool restarted = !prev_dir.has_value();
    Tangent dir = space.combine(-1.0, g, 0.0, g);
    if (prev_dir) {
      const double beta = fletcher_reeves_beta(space, g, *prev_grad);
      dir = space.combine(-1.0, g, beta, *prev_dir);
    }
    double slope = space.inner(g, dir);
    if (!(slope < 0.0)) {
      dir = space.combine(-1.0, g, 0.0, g);
      slope = -grad_sq;
      restarted = true;
    }

    double alpha0 = params.alpha_init;
    if (prev_alpha > 0.0) {
      const double guess = prev_alpha * prev_slope / slope;
      if (std::isfinite(guess) && guess > 0.0) alpha0 = guess;
    }

    std::optional<StepResult<Space>> step;
    try {
      step = wolfe_step(space, objective, out.point, out.eval, dir, alpha0, params);
    } catch (const LineSearchError&) {
      if (!restarted) {
        dir = space.combine(-1.0, g, 0.0, g);
        slope = -grad_sq;
        restarted = true;
        try {
          step = wolfe_step(space, objective, out.point, out.eval, dir, params.alpha_init,
                            params);
        } catch (const LineSearchError&) {
        }
      }
    }
    if (!step) {
      out.trace.linesearch_failed = true;
      return out;
    }

    prev_dir = space.transport(out.point, step->point, dir);
    prev_grad = std::move(out.eval.grad);
    prev_alpha = step->record.alpha;
    prev_slope = slope;
    out.point = std::move(step->point);
    out.eval = std::move(step->eval);
    grad_sq = space.inner(out.eval.grad, out.eval.grad);

    out.trace.iterations.push_back({out.eval.value, std::sqrt(grad_sq), step->record.alpha,
                                    step->record.trials, step->record.curvature_waived,
                                    restarted, step->record.armijo_slack});
  }
  out.trace.converged = std::sqrt(grad_sq) < epsilon;
  return out;
}

}  // namespace bdris
