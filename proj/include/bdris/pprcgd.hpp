#pragma once

#include <string_view>
#include <vector>

#include "bdris/objective.hpp"
#include "bdris/riemannian_cg.hpp"

namespace bdris {

enum class Termination { Converged, Budget, LineSearchFailure };

std::string_view termination_name(Termination t);

/// Perfect CSI, or imperfect CSI with normalized error level delta.
struct CsiMode {
  bool imperfect = false;
  double delta = 0.0;

  static CsiMode perfect() { return {}; }
  static CsiMode with_errors(double delta) { return {true, delta}; }
};

struct OuterRecord {
  double eta = 0.0;
  double rho = 0.0;
  double epsilon = 0.0;  // inner tolerance used by this outer iteration
  double sr = 0.0;
  int inner_iterations = 0;
  double grad_norm = 0.0;
  bool penalty_tightened = false;
};

struct SolveTrace {
  /// Inner traces, one per outer iteration.
  std::vector<InnerTrace> inner;
  std::vector<OuterRecord> outer;
  double initial_eta = 0.0;
  Termination termination = Termination::Budget;
};

/// Inner solve of one AL subproblem at tolerance al.epsilon.
struct InnerSolve {
  ProductPoint point;
  double value = 0.0;
  double grad_norm = 0.0;
  InnerTrace trace;
};
InnerSolve prcgd(const ObjectiveModel& model, ProductPoint start, const AlState& al,
                 const SolverParams& params);

/// Φ_g + (Ψ_g - Θ_g)/ρ for every group; ρ and ε are carried over.
AlState dual_update(const AlState& al, const std::vector<CMatrix>& theta,
                    const std::vector<CMatrix>& psi);

struct PprcgdResult {
  ProductPoint point;  // final iterate; point.w has unit norm
  CMatrix w_scaled;    // sqrt(P) point.w
  Capacities rates;
  double eta = 0.0;
  double grad_norm = 0.0;
  double unitarity_residual = 0.0;
  int outer_iterations = 0;
  SolveTrace trace;

  double sr() const { return rates.secrecy(); }
};

/// Penalty / dual / tolerance schedule around prcgd, starting from `start`.
/// Rates are evaluated with `cfg` under the model's CSI assumption.
PprcgdResult pprcgd(const ObjectiveModel& model, const SystemConfig& cfg, ProductPoint start,
                    const SolverParams& params);

/// Full solve from a random start drawn from `rng`, with `groups` blocks.
PprcgdResult pprcgd(const ChannelSet& cs, const SystemConfig& cfg, int groups,
                    const SolverParams& params, CsiMode csi, Rng& rng);

/// Rates of (w, theta) under the model's CSI assumption.
Capacities model_rates(const ObjectiveModel& model, const SystemConfig& cfg, const CMatrix& w,
                       const std::vector<CMatrix>& theta);

}  // namespace bdris
