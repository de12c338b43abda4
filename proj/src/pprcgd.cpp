#include "bdris/pprcgd.hpp"

#include "bdris/errors.hpp"

namespace bdris {

void SolverParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name, "must be finite and > 0");
  };
  auto unit_open = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(name, "must lie in (0, 1)");
  };
  auto count = [](int v, const char* name) {
    if (v <= 0) throw ConfigError(name, "must be a positive integer");
  };
  positive(rho0, "rho0");
  positive(epsilon0, "epsilon0");
  unit_open(gamma1, "gamma1");
  unit_open(gamma2, "gamma2");
  unit_open(gamma3, "gamma3");
  positive(eta_min, "eta_min");
  positive(epsilon_min, "epsilon_min");
  unit_open(sigma1, "sigma1");
  unit_open(sigma2, "sigma2");
  if (!(sigma2 < 0.5)) throw ConfigError("sigma2", "must be < 1/2");
  if (!(sigma1 < sigma2)) throw ConfigError("sigma1", "must be < sigma2");
  positive(alpha_init, "alpha_init");
  unit_open(backtrack, "backtrack");
  count(max_inner, "max_inner");
  count(max_outer, "max_outer");
  count(max_linesearch, "max_linesearch");
}

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::Converged:
      return "converged";
    case Termination::Budget:
      return "budget";
    case Termination::LineSearchFailure:
      return "linesearch_failure";
  }
  return "unknown";
}

InnerSolve prcgd(const ObjectiveModel& model, ProductPoint start, const AlState& al,
                 const SolverParams& params) {
  auto objective = [&](const ProductPoint& x) {
    AlEvaluation e = evaluate_al(model, x, al);
    return Evaluation<ProductManifold>{e.value, std::move(e.grad)};
  };
  CgResult<ProductManifold> r =
      conjugate_gradient(ProductManifold{}, objective, std::move(start), al.epsilon, params);
  InnerSolve out;
  out.point = std::move(r.point);
  out.value = r.eval.value;
  out.grad_norm = norm(r.eval.grad);
  out.trace = std::move(r.trace);
  return out;
}

AlState dual_update(const AlState& al, const std::vector<CMatrix>& theta,
                    const std::vector<CMatrix>& psi) {
  if (theta.size() != al.phi.size() || psi.size() != al.phi.size())
    throw ShapeError("dual_update: group counts differ");
  if (!(al.rho > 0.0)) throw DomainError("dual_update: rho must be positive");
  AlState out = al;
  for (std::size_t g = 0; g < out.phi.size(); ++g) out.phi[g] += (psi[g] - theta[g]) / al.rho;
  return out;
}

Capacities model_rates(const ObjectiveModel& model, const SystemConfig& cfg, const CMatrix& w,
                       const std::vector<CMatrix>& theta) {
  SystemConfig c = cfg;
  c.power = model.power;
  c.sigma_b2 = model.sigma_b2;
  c.sigma_e2 = model.sigma_e2;
  Capacities r = model.cee ? capacities_imcsi(w, theta, model.cs, c, *model.cee)
                           : capacities(w, theta, model.cs, c);
  if (model.legitimate_only) r.re = 0.0;
  return r;
}

PprcgdResult pprcgd(const ObjectiveModel& model, const SystemConfig& cfg, ProductPoint start,
                    const SolverParams& params) {
  params.validate();
  AlState al = AlState::initial(start.dims(), params.rho0, params.epsilon0);
  PprcgdResult out;
  out.point = std::move(start);
  double eta_prev = constraint_violation(out.point);
  out.trace.initial_eta = eta_prev;
  al.eta = eta_prev;
  bool last_failed = false;

  for (int p = 0; p < params.max_outer; ++p) {
    InnerSolve inner = prcgd(model, std::move(out.point), al, params);
    out.point = std::move(inner.point);
    out.grad_norm = inner.grad_norm;
    last_failed = inner.trace.linesearch_failed;
    const double eta = constraint_violation(out.point);

    OuterRecord rec;
    rec.eta = eta;
    rec.rho = al.rho;
    rec.epsilon = al.epsilon;
    rec.inner_iterations = static_cast<int>(inner.trace.iterations.size());
    rec.grad_norm = inner.grad_norm;
    rec.sr = model_rates(model, cfg, out.point.w, out.point.theta).secrecy();

    if (eta >= params.gamma3 * eta_prev) {
      al.rho *= params.gamma1;
      rec.penalty_tightened = true;
    } else {
      al = dual_update(al, out.point.theta, out.point.psi);
    }
    al.epsilon *= params.gamma2;
    al.eta = eta;
    eta_prev = eta;
    out.trace.outer.push_back(rec);
    out.trace.inner.push_back(std::move(inner.trace));
    out.outer_iterations = p + 1;

    if (eta < params.eta_min && al.epsilon < params.epsilon_min &&
        out.grad_norm < params.epsilon_min) {
      out.trace.termination = Termination::Converged;
      break;
    }
  }
  if (out.trace.termination != Termination::Converged)
    out.trace.termination = last_failed ? Termination::LineSearchFailure : Termination::Budget;

  out.eta = constraint_violation(out.point);
  out.unitarity_residual = theta_unitarity_residual(out.point.theta);
  out.rates = model_rates(model, cfg, out.point.w, out.point.theta);
  out.w_scaled = std::sqrt(model.power) * out.point.w;
  return out;
}

PprcgdResult pprcgd(const ChannelSet& cs, const SystemConfig& cfg, int groups,
                    const SolverParams& params, CsiMode csi, Rng& rng) {
  std::optional<CeeConfig> cee;
  if (csi.imperfect) cee = cee_variances(cs, csi.delta);
  const ObjectiveModel model = ObjectiveModel::make(cs, cfg, groups, cee);
  const Index m = cs.h_ai.rows();
  const ProductDims dims{cs.h_ai.cols(), static_cast<Index>(cfg.n_s), m / groups, groups};
  return pprcgd(model, cfg, random_point(dims, rng), params);
}

}  // namespace bdris
