#include "bdris/objective.hpp"

#include <cmath>
#include <numbers>

#include "bdris/errors.hpp"

namespace bdris {

AlState AlState::initial(const ProductDims& dims, double rho, double epsilon) {
  AlState al;
  al.rho = rho;
  al.epsilon = epsilon;
  al.phi.assign(dims.groups, CMatrix::Zero(dims.block, dims.block));
  return al;
}

ObjectiveModel ObjectiveModel::make(const ChannelSet& cs, const SystemConfig& cfg, int groups,
                                    std::optional<CeeConfig> cee) {
  ObjectiveModel m;
  m.cs = cs;
  m.blocks = group_blocks(cs, groups);
  m.power = cfg.power;
  m.sigma_b2 = cfg.sigma_b2;
  m.sigma_e2 = cfg.sigma_e2;
  m.cee = cee;
  return m;
}

namespace {

void require_theta_shapes(const GroupBlocks& blocks, const std::vector<CMatrix>& theta) {
  if (theta.size() != blocks.ai.size())
    throw ShapeError("objective: number of Θ blocks does not match the grouping");
  for (std::size_t g = 0; g < theta.size(); ++g)
    if (theta[g].rows() != blocks.ai[g].rows() || theta[g].cols() != blocks.ai[g].rows())
      throw ShapeError("objective: Θ block has wrong dimensions");
}

// Σ_g H_ir^g Θ_g H_ai^g + H_ar, unnormalized.
CMatrix cascaded_channel(const std::vector<CMatrix>& h_ir, const std::vector<CMatrix>& h_ai,
                         const CMatrix& h_ar, const std::vector<CMatrix>& theta) {
  CMatrix h = h_ar;
  for (std::size_t g = 0; g < theta.size(); ++g) h.noalias() += (h_ir[g] * theta[g]) * h_ai[g];
  return h;
}

const std::vector<CMatrix>& ris_blocks(const GroupBlocks& b, Receiver r) {
  return r == Receiver::Bob ? b.ib : b.ie;
}

void require_finite(double v, const char* where) {
  if (!std::isfinite(v)) throw NumericError(std::string(where) + ": non-finite value");
}

// det and gradients of one receiver's factor f_r.
struct ReceiverTerm {
  double value = 1.0;
  CMatrix grad_w;
  std::vector<CMatrix> grad_theta;
};

// f_r = det(I + H̃ W Wᴴ H̃ᴴ), normalized channels.
ReceiverTerm perfect_term(const ObjectiveModel& model, Receiver r, const CMatrix& w,
                          const std::vector<CMatrix>& theta, const std::vector<CMatrix>& ai_w,
                          bool with_gradient) {
  const std::vector<CMatrix>& h_ir = ris_blocks(model.blocks, r);
  const CMatrix& h_ar = r == Receiver::Bob ? model.cs.h_ab : model.cs.h_ae;
  const double sigma2 = r == Receiver::Bob ? model.sigma_b2 : model.sigma_e2;
  const double scale = std::sqrt(model.power / sigma2);

  const CMatrix ht = scale * cascaded_channel(h_ir, model.blocks.ai, h_ar, theta);
  const CMatrix x = ht * w;
  CMatrix f = x * x.adjoint();
  f.diagonal().array() += 1.0;

  ReceiverTerm out;
  Eigen::LLT<CMatrix> llt(f);
  if (llt.info() != Eigen::Success) throw NumericError("objective: I + XXᴴ not positive definite");
  double log_det = 0.0;
  for (Index k = 0; k < f.rows(); ++k) log_det += std::log(llt.matrixLLT()(k, k).real());
  out.value = std::exp(2.0 * log_det);
  require_finite(out.value, "objective");
  if (!with_gradient) return out;

  // adj(F) X = det(F) F⁻¹ X
  const CMatrix adj_x = out.value * llt.solve(x);
  out.grad_w = 2.0 * ht.adjoint() * adj_x;
  out.grad_theta.reserve(theta.size());
  for (std::size_t g = 0; g < theta.size(); ++g)
    out.grad_theta.push_back((2.0 * scale) * (h_ir[g].adjoint() * adj_x) * ai_w[g].adjoint());
  return out;
}

struct NoiseModel {
  double c = 0.0;      // scalar part of J_r
  CMatrix d;           // σ_ai² P H_ir H_irᴴ
  double var_ir = 0.0;
};

NoiseModel noise_model(const ChannelSet& cs, const CeeConfig& cee, double power,
                       double sigma_r2, Receiver r, double ai_w_sq) {
  const CMatrix& h_ir = r == Receiver::Bob ? cs.h_ib : cs.h_ie;
  const double var_ir = r == Receiver::Bob ? cee.var_ib : cee.var_ie;
  const double var_ar = r == Receiver::Bob ? cee.var_ab : cee.var_ae;
  const double m = static_cast<double>(cs.h_ai.rows());
  NoiseModel n;
  n.var_ir = var_ir;
  n.c = cee.var_ai * var_ir * m * power + var_ir * power * ai_w_sq + var_ar * power + sigma_r2;
  n.d = (cee.var_ai * power) * (h_ir * h_ir.adjoint());
  return n;
}

// f_r = det(I + P H W Wᴴ Hᴴ J⁻¹) = det(J + P X Xᴴ) / det(J), unnormalized channels.
ReceiverTerm imperfect_term(const ObjectiveModel& model, Receiver r, const CMatrix& w,
                            const std::vector<CMatrix>& theta, const std::vector<CMatrix>& ai_w,
                            const CMatrix& full_ai_w, bool with_gradient) {
  const CeeConfig& cee = *model.cee;
  const std::vector<CMatrix>& h_ir = ris_blocks(model.blocks, r);
  const CMatrix& h_ar = r == Receiver::Bob ? model.cs.h_ab : model.cs.h_ae;
  const double sigma2 = r == Receiver::Bob ? model.sigma_b2 : model.sigma_e2;
  const double p = model.power;

  const NoiseModel nm = noise_model(model.cs, cee, p, sigma2, r, full_ai_w.squaredNorm());
  CMatrix j = nm.d;
  j.diagonal().array() += nm.c;

  const CMatrix h = cascaded_channel(h_ir, model.blocks.ai, h_ar, theta);
  const CMatrix x = h * w;
  const CMatrix a = j + p * (x * x.adjoint());

  Eigen::LLT<CMatrix> llt_a(a);
  Eigen::LLT<CMatrix> llt_j(j);
  if (llt_a.info() != Eigen::Success || llt_j.info() != Eigen::Success)
    throw NumericError("objective: noise covariance not positive definite");
  double log_f = 0.0;
  for (Index k = 0; k < a.rows(); ++k)
    log_f += 2.0 * (std::log(llt_a.matrixLLT()(k, k).real()) -
                    std::log(llt_j.matrixLLT()(k, k).real()));

  ReceiverTerm out;
  out.value = std::exp(log_f);
  require_finite(out.value, "objective");
  if (!with_gradient) return out;

  const Index n = a.rows();
  const CMatrix a_inv = llt_a.solve(CMatrix::Identity(n, n));
  const CMatrix j_inv = llt_j.solve(CMatrix::Identity(n, n));
  const CMatrix ainv_x = a_inv * x;
  // ∇ log f_r, then scale by f_r.
  CMatrix g_w = (2.0 * p) * (h.adjoint() * ainv_x);
  const double trace_gap = a_inv.trace().real() - j_inv.trace().real();
  if (nm.var_ir != 0.0)
    g_w += (trace_gap * 2.0 * nm.var_ir * p) * (model.cs.h_ai.adjoint() * full_ai_w);
  out.grad_w = out.value * g_w;
  out.grad_theta.reserve(theta.size());
  for (std::size_t g = 0; g < theta.size(); ++g)
    out.grad_theta.push_back((out.value * 2.0 * p) * (h_ir[g].adjoint() * ainv_x) *
                             ai_w[g].adjoint());
  return out;
}

}  // namespace

EffectiveChannels effective_channels(const GroupBlocks& blocks, const CMatrix& h_ae,
                                     const CMatrix& h_ab, const std::vector<CMatrix>& theta,
                                     double power, double sigma_e2, double sigma_b2) {
  require_theta_shapes(blocks, theta);
  EffectiveChannels ec;
  ec.ht_e = std::sqrt(power / sigma_e2) * cascaded_channel(blocks.ie, blocks.ai, h_ae, theta);
  ec.ht_b = std::sqrt(power / sigma_b2) * cascaded_channel(blocks.ib, blocks.ai, h_ab, theta);
  return ec;
}

CMatrix assemble_block_diagonal(const std::vector<CMatrix>& theta) {
  Index m = 0;
  for (const CMatrix& t : theta) m += t.rows();
  CMatrix full = CMatrix::Zero(m, m);
  Index off = 0;
  for (const CMatrix& t : theta) {
    full.block(off, off, t.rows(), t.cols()) = t;
    off += t.rows();
  }
  return full;
}

namespace {

double log2_det_identity_plus(const CMatrix& x, double inv_sigma2) {
  CMatrix f = inv_sigma2 * (x * x.adjoint());
  f.diagonal().array() += 1.0;
  return log_det_hpd(f) / std::numbers::ln2;
}

void require_finite_channels(const ChannelSet& cs) {
  for (const CMatrix* h : {&cs.h_ab, &cs.h_ae, &cs.h_ai, &cs.h_ib, &cs.h_ie})
    if (!h->allFinite()) throw NumericError("secrecy_rate: non-finite channel entries");
}

}  // namespace

Capacities capacities(const CMatrix& w, const std::vector<CMatrix>& theta,
                      const ChannelSet& cs, const SystemConfig& cfg) {
  require_finite_channels(cs);
  const CMatrix big_theta = assemble_block_diagonal(theta);
  if (big_theta.rows() != cs.h_ai.rows()) throw ShapeError("capacities: Θ size != M");
  const CMatrix w_p = std::sqrt(cfg.power) * w;
  const CMatrix x_b = (cs.h_ib * big_theta * cs.h_ai + cs.h_ab) * w_p;
  const CMatrix x_e = (cs.h_ie * big_theta * cs.h_ai + cs.h_ae) * w_p;
  return {log2_det_identity_plus(x_b, 1.0 / cfg.sigma_b2),
          log2_det_identity_plus(x_e, 1.0 / cfg.sigma_e2)};
}

double secrecy_rate(const CMatrix& w, const std::vector<CMatrix>& theta,
                    const ChannelSet& cs, const SystemConfig& cfg) {
  return capacities(w, theta, cs, cfg).secrecy();
}

CMatrix noise_covariance_imcsi(const CMatrix& w_scaled, const ChannelSet& cs,
                               const CeeConfig& cee, double sigma_r2, Receiver r) {
  const double tr_w = w_scaled.squaredNorm();
  const NoiseModel nm =
      noise_model(cs, cee, tr_w, sigma_r2, r, (cs.h_ai * w_scaled).squaredNorm() / (tr_w > 0 ? tr_w : 1.0));
  CMatrix j = nm.d;
  j.diagonal().array() += nm.c;
  return j;
}

Capacities capacities_imcsi(const CMatrix& w, const std::vector<CMatrix>& theta,
                            const ChannelSet& cs, const SystemConfig& cfg,
                            const CeeConfig& cee) {
  require_finite_channels(cs);
  const CMatrix big_theta = assemble_block_diagonal(theta);
  if (big_theta.rows() != cs.h_ai.rows()) throw ShapeError("capacities_imcsi: Θ size != M");
  const CMatrix w_p = std::sqrt(cfg.power) * w;
  auto rate = [&](const CMatrix& h_ir, const CMatrix& h_ar, double sigma2, Receiver r) {
    const CMatrix x = (h_ir * big_theta * cs.h_ai + h_ar) * w_p;
    const CMatrix j = noise_covariance_imcsi(w_p, cs, cee, sigma2, r);
    return (log_det_hpd(j + x * x.adjoint()) - log_det_hpd(j)) / std::numbers::ln2;
  };
  return {rate(cs.h_ib, cs.h_ab, cfg.sigma_b2, Receiver::Bob),
          rate(cs.h_ie, cs.h_ae, cfg.sigma_e2, Receiver::Eve)};
}

RatioEvaluation evaluate_ratio(const ObjectiveModel& model, const CMatrix& w,
                               const std::vector<CMatrix>& theta, bool with_gradient) {
  require_theta_shapes(model.blocks, theta);
  if (w.rows() != model.cs.h_ab.cols()) throw ShapeError("objective: W has wrong row count");

  std::vector<CMatrix> ai_w;
  ai_w.reserve(theta.size());
  for (const CMatrix& h : model.blocks.ai) ai_w.push_back(h * w);

  ReceiverTerm bob, eve;
  if (model.cee) {
    const CMatrix full_ai_w = model.cs.h_ai * w;
    bob = imperfect_term(model, Receiver::Bob, w, theta, ai_w, full_ai_w, with_gradient);
    if (!model.legitimate_only)
      eve = imperfect_term(model, Receiver::Eve, w, theta, ai_w, full_ai_w, with_gradient);
  } else {
    bob = perfect_term(model, Receiver::Bob, w, theta, ai_w, with_gradient);
    if (!model.legitimate_only)
      eve = perfect_term(model, Receiver::Eve, w, theta, ai_w, with_gradient);
  }

  RatioEvaluation out;
  out.f_b = bob.value;
  out.f_e = eve.value;
  out.f = eve.value / bob.value;
  if (!with_gradient) return out;

  // Quotient rule: (∇f_e f_b - ∇f_b f_e) / f_b².
  const double inv_b2 = 1.0 / (bob.value * bob.value);
  if (model.legitimate_only) {
    out.grad_w = (-eve.value * inv_b2) * bob.grad_w;
    for (const CMatrix& gb : bob.grad_theta) out.grad_theta.push_back((-eve.value * inv_b2) * gb);
  } else {
    out.grad_w = (eve.grad_w * bob.value - bob.grad_w * eve.value) * inv_b2;
    for (std::size_t g = 0; g < theta.size(); ++g)
      out.grad_theta.push_back(
          (eve.grad_theta[g] * bob.value - bob.grad_theta[g] * eve.value) * inv_b2);
  }
  return out;
}

double al_value(const ObjectiveModel& model, const ProductPoint& x, const AlState& al) {
  double v = evaluate_ratio(model, x.w, x.theta, false).f;
  for (std::size_t g = 0; g < x.theta.size(); ++g) {
    const CMatrix h = x.psi[g] - x.theta[g];
    v += h.squaredNorm() / (2.0 * al.rho) + real_inner(al.phi[g], h);
  }
  return v;
}

double al_value_completed_square(const ObjectiveModel& model, const ProductPoint& x,
                                 const AlState& al) {
  double v = evaluate_ratio(model, x.w, x.theta, false).f;
  for (std::size_t g = 0; g < x.theta.size(); ++g) {
    v += (x.psi[g] - x.theta[g] + al.rho * al.phi[g]).squaredNorm() / (2.0 * al.rho);
    v -= 0.5 * al.rho * al.phi[g].squaredNorm();
  }
  return v;
}

namespace {

AmbientBlocks assemble_gradient(const ProductPoint& x, const AlState& al,
                                RatioEvaluation&& r) {
  AmbientBlocks g;
  g.w = std::move(r.grad_w);
  g.theta.reserve(x.theta.size());
  g.psi.reserve(x.theta.size());
  for (std::size_t k = 0; k < x.theta.size(); ++k) {
    // (1/ρ)(Ψ - Θ + ρΦ)
    CMatrix shifted = (x.psi[k] - x.theta[k]) / al.rho + al.phi[k];
    g.theta.push_back(r.grad_theta[k] - shifted);
    g.psi.push_back(std::move(shifted));
  }
  return g;
}

void require_al_shapes(const ProductPoint& x, const AlState& al) {
  if (al.phi.size() != x.theta.size()) throw ShapeError("AL: dual count != group count");
  if (!(al.rho > 0.0)) throw DomainError("AL: rho must be positive");
}

}  // namespace

AmbientBlocks euclidean_gradient(const ObjectiveModel& model, const ProductPoint& x,
                                 const AlState& al) {
  require_al_shapes(x, al);
  return assemble_gradient(x, al, evaluate_ratio(model, x.w, x.theta, true));
}

TangentVector riemannian_gradient(const ObjectiveModel& model, const ProductPoint& x,
                                  const AlState& al) {
  return project_tangent(x, euclidean_gradient(model, x, al));
}

double al_value_imcsi(const ObjectiveModel& model, const ProductPoint& x, const AlState& al,
                      const CeeConfig& cee) {
  ObjectiveModel m = model;
  m.cee = cee;
  return al_value(m, x, al);
}

AmbientBlocks euclidean_gradient_imcsi(const ObjectiveModel& model, const ProductPoint& x,
                                       const AlState& al, const CeeConfig& cee) {
  ObjectiveModel m = model;
  m.cee = cee;
  return euclidean_gradient(m, x, al);
}

AlEvaluation evaluate_al(const ObjectiveModel& model, const ProductPoint& x, const AlState& al) {
  require_al_shapes(x, al);
  RatioEvaluation r = evaluate_ratio(model, x.w, x.theta, true);
  AlEvaluation out;
  out.value = r.f;
  for (std::size_t g = 0; g < x.theta.size(); ++g) {
    const CMatrix h = x.psi[g] - x.theta[g];
    out.value += h.squaredNorm() / (2.0 * al.rho) + real_inner(al.phi[g], h);
  }
  out.grad = project_tangent(x, assemble_gradient(x, al, std::move(r)));
  return out;
}

}  // namespace bdris
