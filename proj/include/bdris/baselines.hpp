#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bdris/pprcgd.hpp"

namespace bdris {

enum class SchemeKind { FC, GC, DRIS, RANDOM_FC, WO_RIS, UPPER_FC };

struct SchemeId {
  SchemeKind kind = SchemeKind::FC;
  int groups = 1;  // GC only

  /// Accepts the canonical names (FC, GC4, DRIS, RANDOM_FC, WO_RIS, UPPER_FC)
  /// and the CLI short forms (fc, gc4, dris, random, wo, upper), any case.
  /// Throws ConfigError on anything else.
  static SchemeId parse(std::string_view text);
  std::string name() const;

  friend bool operator==(const SchemeId&, const SchemeId&) = default;
};

struct SchemeResult {
  CMatrix w;  // unit norm
  std::vector<CMatrix> theta;
  Capacities rates;
  double eta = 0.0;
  double unitarity_residual = 0.0;
  int outer_iterations = 0;
  Termination termination = Termination::Converged;

  double sr() const { return rates.secrecy(); }
};

/// U Uᵀ with U the unitary factor of an m x m Gaussian draw.
CMatrix random_symmetric_unitary(Index m, Rng& rng);

/// Riemannian CG over W alone (sphere factor) with the full M x M `theta`
/// frozen. `rng` draws the starting beamformer.
SchemeResult optimize_fixed_theta(const ChannelSet& cs, const SystemConfig& cfg,
                                  const CMatrix& theta, const SolverParams& params, CsiMode csi,
                                  Rng& rng);

/// Beamforming without a RIS: the RIS links are zeroed and Θ = 0.
SchemeResult optimize_without_ris(const ChannelSet& cs, const SystemConfig& cfg,
                                  const SolverParams& params, CsiMode csi, Rng& rng);

/// Diagonal RIS with unit-modulus reflection coefficients, optimized jointly
/// with W by Riemannian CG over sphere x circle^M. theta holds M 1x1 blocks.
SchemeResult optimize_dris(const ChannelSet& cs, const SystemConfig& cfg,
                           const SolverParams& params, CsiMode csi, Rng& rng);

/// Fully-connected BD-RIS maximizing R_b alone; rates.re is 0, so the
/// reported secrecy rate equals R_b.
SchemeResult upper_bound(const ChannelSet& cs, const SystemConfig& cfg,
                         const SolverParams& params, CsiMode csi, Rng& rng);

/// FC and GC(G) through P-PRCGD.
SchemeResult optimize_bdris(const ChannelSet& cs, const SystemConfig& cfg, int groups,
                            const SolverParams& params, CsiMode csi, Rng& rng);

SchemeResult run_scheme(const SchemeId& scheme, const ChannelSet& cs, const SystemConfig& cfg,
                        const SolverParams& params, CsiMode csi, Rng& rng);

}  // namespace bdris
