#pragma once

#include <optional>
#include <vector>

#include "bdris/channel.hpp"
#include "bdris/manifold.hpp"

namespace bdris {

enum class Receiver { Bob, Eve };

/// Penalty, duals and inner tolerance of one augmented-Lagrangian subproblem.
struct AlState {
  double rho = 1.0;
  std::vector<CMatrix> phi;
  double epsilon = 1e-1;
  double eta = 0.0;

  static AlState initial(const ProductDims& dims, double rho, double epsilon);
};

/// Power-normalized effective channels sqrt(P/σ_r²)(Σ_g H_ir^g Θ_g H_ai^g + H_ar).
struct EffectiveChannels {
  CMatrix ht_e;
  CMatrix ht_b;
};

/// Immutable inputs of the objective: grouped channels, powers and, when
/// present, the error statistics of the imperfect-CSI model.
struct ObjectiveModel {
  ChannelSet cs;
  GroupBlocks blocks;
  double power = 1.0;
  double sigma_b2 = 1.0;
  double sigma_e2 = 1.0;
  std::optional<CeeConfig> cee;
  /// Drop Eve's term (f_e ≡ 1): maximizes Bob's rate alone.
  bool legitimate_only = false;

  static ObjectiveModel make(const ChannelSet& cs, const SystemConfig& cfg, int groups,
                             std::optional<CeeConfig> cee = std::nullopt);
  int groups() const { return static_cast<int>(blocks.ai.size()); }
  int ris_elements() const { return static_cast<int>(cs.h_ai.rows()); }
};

EffectiveChannels effective_channels(const GroupBlocks& blocks, const CMatrix& h_ae,
                                     const CMatrix& h_ab, const std::vector<CMatrix>& theta,
                                     double power, double sigma_e2, double sigma_b2);

CMatrix assemble_block_diagonal(const std::vector<CMatrix>& theta);

struct Capacities {
  double rb = 0.0;  // bits/s/Hz
  double re = 0.0;
  double secrecy() const { return rb > re ? rb - re : 0.0; }
};

/// log2 det(I + H_r W_p W_pᴴ H_rᴴ / σ_r²) for both receivers, with W_p = sqrt(P) w
/// and Θ = blkdiag(theta). `w` has unit Frobenius norm.
Capacities capacities(const CMatrix& w, const std::vector<CMatrix>& theta,
                      const ChannelSet& cs, const SystemConfig& cfg);

/// [R_b - R_e]^+.
double secrecy_rate(const CMatrix& w, const std::vector<CMatrix>& theta,
                    const ChannelSet& cs, const SystemConfig& cfg);

/// J_r = σ_ai²σ_ir² M Tr(WWᴴ) I + σ_ir² Tr(H_ai WWᴴ H_aiᴴ) I
///     + σ_ai² Tr(WWᴴ) H_ir H_irᴴ + σ_ar² Tr(WWᴴ) I + σ_r² I,
/// for a power-scaled beamformer (Tr(WWᴴ) = P).
CMatrix noise_covariance_imcsi(const CMatrix& w_scaled, const ChannelSet& cs,
                               const CeeConfig& cee, double sigma_r2, Receiver r);

/// log2 det(I + H_r W_p W_pᴴ H_rᴴ J_r⁻¹) for both receivers.
Capacities capacities_imcsi(const CMatrix& w, const std::vector<CMatrix>& theta,
                            const ChannelSet& cs, const SystemConfig& cfg,
                            const CeeConfig& cee);

/// Ratio objective f = f_e / f_b and its Euclidean gradients.
struct RatioEvaluation {
  double f = 0.0;
  double f_e = 1.0;
  double f_b = 1.0;
  CMatrix grad_w;
  std::vector<CMatrix> grad_theta;
};

/// `w` is the unit-norm beamformer. Gradients follow the convention
/// df = Re Tr(∇ᴴ dX) and are filled only when `with_gradient`.
RatioEvaluation evaluate_ratio(const ObjectiveModel& model, const CMatrix& w,
                               const std::vector<CMatrix>& theta, bool with_gradient);

/// f + (1/2ρ) Σ ‖Ψ_g - Θ_g‖² + Σ Re Tr(Φ_gᴴ(Ψ_g - Θ_g)).
double al_value(const ObjectiveModel& model, const ProductPoint& x, const AlState& al);

/// Same value through the completed square f + (1/2ρ)Σ‖Ψ-Θ+ρΦ‖² - (ρ/2)Σ‖Φ‖².
double al_value_completed_square(const ObjectiveModel& model, const ProductPoint& x,
                                 const AlState& al);

AmbientBlocks euclidean_gradient(const ObjectiveModel& model, const ProductPoint& x,
                                 const AlState& al);

TangentVector riemannian_gradient(const ObjectiveModel& model, const ProductPoint& x,
                                  const AlState& al);

/// Imperfect-CSI variants: the model's error statistics are replaced by `cee`.
double al_value_imcsi(const ObjectiveModel& model, const ProductPoint& x, const AlState& al,
                      const CeeConfig& cee);
AmbientBlocks euclidean_gradient_imcsi(const ObjectiveModel& model, const ProductPoint& x,
                                       const AlState& al, const CeeConfig& cee);

/// Value and Riemannian gradient in one pass.
struct AlEvaluation {
  double value = 0.0;
  TangentVector grad;
};
AlEvaluation evaluate_al(const ObjectiveModel& model, const ProductPoint& x, const AlState& al);

}  // namespace bdris
