#include "bdris/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numbers>

#include "bdris/errors.hpp"

namespace bdris {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

}  // namespace

SchemeId SchemeId::parse(std::string_view text) {
  const std::string s = upper(text);
  if (s == "FC") return {SchemeKind::FC, 1};
  if (s == "DRIS" || s == "D-RIS") return {SchemeKind::DRIS, 1};
  if (s == "RANDOM_FC" || s == "RANDOM") return {SchemeKind::RANDOM_FC, 1};
  if (s == "WO_RIS" || s == "WO") return {SchemeKind::WO_RIS, 1};
  if (s == "UPPER_FC" || s == "UPPER") return {SchemeKind::UPPER_FC, 1};
  if (s.size() > 2 && s.starts_with("GC")) {
    int g = 0;
    const char* first = s.data() + 2;
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, g);
    if (ec == std::errc{} && ptr == last && g > 0) return {SchemeKind::GC, g};
  }
  throw ConfigError("schemes", "unknown scheme '" + std::string(text) + "'");
}

std::string SchemeId::name() const {
  switch (kind) {
    case SchemeKind::FC:
      return "FC";
    case SchemeKind::GC:
      return "GC" + std::to_string(groups);
    case SchemeKind::DRIS:
      return "DRIS";
    case SchemeKind::RANDOM_FC:
      return "RANDOM_FC";
    case SchemeKind::WO_RIS:
      return "WO_RIS";
    case SchemeKind::UPPER_FC:
      return "UPPER_FC";
  }
  return "?";
}

CMatrix random_symmetric_unitary(Index m, Rng& rng) {
  if (m < 1) throw DomainError("random_symmetric_unitary: m must be >= 1");
  const CMatrix u = unitary_factor(complex_gaussian(m, m, rng));
  return u * u.transpose();
}

namespace {

CMatrix random_unit_w(Index n_t, Index n_s, Rng& rng) {
  for (;;) {
    CMatrix w = complex_gaussian(n_t, n_s, rng);
    const double n = w.norm();
    if (n > 0.0) return w / n;
  }
}

CMatrix project_sphere(const CMatrix& w, const CMatrix& u) {
  return u - w * real_inner(u, w);
}

// Unit Frobenius sphere of n_t x n_s matrices.
struct SphereSpace {
  using Point = CMatrix;
  using Tangent = CMatrix;

  double inner(const Tangent& u, const Tangent& v) const { return real_inner(u, v); }
  Point retract(const Point& x, const Tangent& d) const {
    CMatrix y = x + d;
    const double n = y.norm();
    if (n == 0.0) throw DegenerateStepError("retract: W + dW has zero norm");
    return y / n;
  }
  Tangent transport(const Point&, const Point& to, const Tangent& d) const {
    return project_sphere(to, d);
  }
  Tangent combine(double a, const Tangent& u, double b, const Tangent& v) const {
    return a * u + b * v;
  }
};

struct DrisBlocks {
  CMatrix w;
  CVector theta;
};

// Sphere x circle^M.
struct DrisSpace {
  using Point = DrisBlocks;
  using Tangent = DrisBlocks;

  static Tangent project(const Point& x, const DrisBlocks& u) {
    Tangent t;
    t.w = project_sphere(x.w, u.w);
    t.theta.resize(u.theta.size());
    for (Index k = 0; k < u.theta.size(); ++k)
      t.theta(k) = u.theta(k) - x.theta(k) * (std::conj(u.theta(k)) * x.theta(k)).real();
    return t;
  }
  double inner(const Tangent& u, const Tangent& v) const {
    return real_inner(u.w, v.w) + u.theta.dot(v.theta).real();
  }
  Point retract(const Point& x, const Tangent& d) const {
    Point y;
    y.w = x.w + d.w;
    const double n = y.w.norm();
    if (n == 0.0) throw DegenerateStepError("retract: W + dW has zero norm");
    y.w /= n;
    y.theta = x.theta + d.theta;
    for (Index k = 0; k < y.theta.size(); ++k) {
      const double r = std::abs(y.theta(k));
      if (r == 0.0) throw DegenerateStepError("retract: θ + dθ vanished");
      y.theta(k) /= r;
    }
    return y;
  }
  Tangent transport(const Point&, const Point& to, const Tangent& d) const {
    return project(to, d);
  }
  Tangent combine(double a, const Tangent& u, double b, const Tangent& v) const {
    return {a * u.w + b * v.w, a * u.theta + b * v.theta};
  }
};

std::vector<CMatrix> diagonal_blocks(const CVector& theta) {
  std::vector<CMatrix> out;
  out.reserve(theta.size());
  for (Index k = 0; k < theta.size(); ++k) out.push_back(CMatrix::Constant(1, 1, theta(k)));
  return out;
}

std::optional<CeeConfig> cee_for(const ChannelSet& cs, CsiMode csi) {
  if (!csi.imperfect) return std::nullopt;
  return cee_variances(cs, csi.delta);
}

Termination cg_termination(const InnerTrace& t) {
  if (t.converged) return Termination::Converged;
  return t.linesearch_failed ? Termination::LineSearchFailure : Termination::Budget;
}

SchemeResult solve_sphere(const ObjectiveModel& model, const SystemConfig& cfg,
                          const std::vector<CMatrix>& theta, const SolverParams& params,
                          Rng& rng) {
  auto objective = [&](const CMatrix& w) {
    RatioEvaluation r = evaluate_ratio(model, w, theta, true);
    return Evaluation<SphereSpace>{r.f, project_sphere(w, r.grad_w)};
  };
  const CMatrix start = random_unit_w(model.cs.h_ab.cols(), cfg.n_s, rng);
  CgResult<SphereSpace> r =
      conjugate_gradient(SphereSpace{}, objective, start, params.epsilon_min, params);
  SchemeResult out;
  out.w = std::move(r.point);
  out.theta = theta;
  out.rates = model_rates(model, cfg, out.w, out.theta);
  out.termination = cg_termination(r.trace);
  return out;
}

}  // namespace

SchemeResult optimize_fixed_theta(const ChannelSet& cs, const SystemConfig& cfg,
                                  const CMatrix& theta, const SolverParams& params, CsiMode csi,
                                  Rng& rng) {
  params.validate();
  if (theta.rows() != cs.h_ai.rows() || theta.cols() != cs.h_ai.rows())
    throw ShapeError("optimize_fixed_theta: Θ must be M x M");
  const ObjectiveModel model = ObjectiveModel::make(cs, cfg, 1, cee_for(cs, csi));
  SchemeResult out = solve_sphere(model, cfg, {theta}, params, rng);
  out.unitarity_residual = theta_unitarity_residual(out.theta);
  return out;
}

SchemeResult optimize_without_ris(const ChannelSet& cs, const SystemConfig& cfg,
                                  const SolverParams& params, CsiMode csi, Rng& rng) {
  params.validate();
  std::optional<CeeConfig> cee = cee_for(cs, csi);
  if (cee) {
    cee->var_ai = 0.0;
    cee->var_ib = 0.0;
    cee->var_ie = 0.0;
  }
  const ChannelSet bare = without_ris(cs);
  const ObjectiveModel model = ObjectiveModel::make(bare, cfg, 1, cee);
  const Index m = cs.h_ai.rows();
  return solve_sphere(model, cfg, {CMatrix::Zero(m, m)}, params, rng);
}

SchemeResult optimize_dris(const ChannelSet& cs, const SystemConfig& cfg,
                           const SolverParams& params, CsiMode csi, Rng& rng) {
  const Index m = cs.h_ai.rows();
  if (m == 0) return optimize_without_ris(cs, cfg, params, csi, rng);
  params.validate();
  const ObjectiveModel model =
      ObjectiveModel::make(cs, cfg, static_cast<int>(m), cee_for(cs, csi));

  auto objective = [&](const DrisBlocks& x) {
    RatioEvaluation r = evaluate_ratio(model, x.w, diagonal_blocks(x.theta), true);
    DrisBlocks g{std::move(r.grad_w), CVector(m)};
    for (Index k = 0; k < m; ++k) g.theta(k) = r.grad_theta[k](0, 0);
    return Evaluation<DrisSpace>{r.f, DrisSpace::project(x, g)};
  };
  DrisBlocks start;
  start.w = random_unit_w(cs.h_ab.cols(), cfg.n_s, rng);
  start.theta.resize(m);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (Index k = 0; k < m; ++k) start.theta(k) = std::polar(1.0, phase(rng));

  CgResult<DrisSpace> r =
      conjugate_gradient(DrisSpace{}, objective, start, params.epsilon_min, params);
  SchemeResult out;
  out.w = std::move(r.point.w);
  out.theta = diagonal_blocks(r.point.theta);
  out.rates = model_rates(model, cfg, out.w, out.theta);
  out.unitarity_residual = theta_unitarity_residual(out.theta);
  out.termination = cg_termination(r.trace);
  return out;
}

namespace {

SchemeResult from_pprcgd(PprcgdResult&& r) {
  SchemeResult out;
  out.w = std::move(r.point.w);
  out.theta = std::move(r.point.theta);
  out.rates = r.rates;
  out.eta = r.eta;
  out.unitarity_residual = r.unitarity_residual;
  out.outer_iterations = r.outer_iterations;
  out.termination = r.trace.termination;
  return out;
}

}  // namespace

SchemeResult optimize_bdris(const ChannelSet& cs, const SystemConfig& cfg, int groups,
                            const SolverParams& params, CsiMode csi, Rng& rng) {
  return from_pprcgd(pprcgd(cs, cfg, groups, params, csi, rng));
}

SchemeResult upper_bound(const ChannelSet& cs, const SystemConfig& cfg,
                         const SolverParams& params, CsiMode csi, Rng& rng) {
  ObjectiveModel model = ObjectiveModel::make(cs, cfg, 1, cee_for(cs, csi));
  model.legitimate_only = true;
  const Index m = cs.h_ai.rows();
  const ProductDims dims{cs.h_ai.cols(), static_cast<Index>(cfg.n_s), m, 1};
  return from_pprcgd(pprcgd(model, cfg, random_point(dims, rng), params));
}

SchemeResult run_scheme(const SchemeId& scheme, const ChannelSet& cs, const SystemConfig& cfg,
                        const SolverParams& params, CsiMode csi, Rng& rng) {
  switch (scheme.kind) {
    case SchemeKind::FC:
      return optimize_bdris(cs, cfg, 1, params, csi, rng);
    case SchemeKind::GC:
      if (cs.h_ai.rows() % scheme.groups != 0)
        throw ConfigError("schemes", scheme.name() + ": group count must divide m");
      return optimize_bdris(cs, cfg, scheme.groups, params, csi, rng);
    case SchemeKind::DRIS:
      return optimize_dris(cs, cfg, params, csi, rng);
    case SchemeKind::RANDOM_FC: {
      const CMatrix theta = random_symmetric_unitary(cs.h_ai.rows(), rng);
      return optimize_fixed_theta(cs, cfg, theta, params, csi, rng);
    }
    case SchemeKind::WO_RIS:
      return optimize_without_ris(cs, cfg, params, csi, rng);
    case SchemeKind::UPPER_FC:
      return upper_bound(cs, cfg, params, csi, rng);
  }
  throw ConfigError("schemes", "unhandled scheme");
}

}  // namespace bdris
