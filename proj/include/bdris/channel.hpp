#pragma once

#include <vector>

#include "bdris/linalg.hpp"

namespace bdris {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

/// Path-loss exponents per link: Alice-RIS, RIS-Bob, RIS-Eve, Alice-Bob,
/// Alice-Eve.
struct PathlossExponents {
  double ai = 2.2;
  double ib = 2.5;
  double ie = 2.5;
  double ab = 3.5;
  double ae = 3.5;
};

/// Physical scenario. All powers in linear watts, distances in meters.
/// Defaults reproduce the reference geometry: 24/4/2 antennas, two streams,
/// 80 elements in 4 groups, 0 dBW transmit power, -40 dBm noise.
struct SystemConfig {
  int n_t = 24;
  int n_b = 4;
  int n_e = 2;
  int n_s = 2;
  int m = 80;
  int g = 4;
  double power = 1.0;
  double sigma_b2 = 1e-7;
  double sigma_e2 = 1e-7;
  Position alice{0.0, 0.0};
  Position ris{50.0, 2.0};
  Position bob{55.0, 0.0};
  Position eve{45.0, 0.0};
  PathlossExponents zeta{};
  double c0 = 1e-3;
  double d0 = 1.0;
  double kappa = 5.0;

  int block_size() const { return m / g; }

  /// Throws ConfigError with the offending field name.
  void validate() const;
};

/// H_ab: N_b x N_t, H_ae: N_e x N_t, H_ai: M x N_t, H_ib: N_b x M,
/// H_ie: N_e x M.
struct ChannelSet {
  CMatrix h_ab;
  CMatrix h_ae;
  CMatrix h_ai;
  CMatrix h_ib;
  CMatrix h_ie;
};

/// Column blocks of H_ib / H_ie and row blocks of H_ai, one per group.
struct GroupBlocks {
  std::vector<CMatrix> ai;
  std::vector<CMatrix> ib;
  std::vector<CMatrix> ie;
};

/// Per-entry channel-estimation error variances.
struct CeeConfig {
  double delta = 0.0;
  double var_ai = 0.0;
  double var_ib = 0.0;
  double var_ie = 0.0;
  double var_ab = 0.0;
  double var_ae = 0.0;
};

/// C0 (d/D0)^(-ζ). Throws DomainError for d <= 0.
double path_loss(double d, double zeta, double c0, double d0);

/// [1, e^{iπ sin ψ}, ..., e^{iπ(n-1) sin ψ}]ᵀ.
CVector steering_vector(Index n, double psi);

/// Draws all five channels from `rng`: direct links first (i.i.d. CN(0,1)
/// small-scale), then the Rician RIS links (Alice-RIS, RIS-Bob, RIS-Eve),
/// each scaled by sqrt(L(d)) on the amplitude.
ChannelSet draw_channels(const SystemConfig& cfg, Rng& rng);

/// Splits the RIS links into `groups` contiguous blocks.
GroupBlocks group_blocks(const ChannelSet& cs, int groups);

/// Error variance of each family = delta x mean |entry|² of the nominal
/// channel.
CeeConfig cee_variances(const ChannelSet& cs, double delta);

/// Same channels with the RIS links zeroed (dimensions preserved).
ChannelSet without_ris(const ChannelSet& cs);

/// Stable 64-bit digest of the channel entries, used to audit that paired
/// schemes see identical channels.
std::uint64_t channel_digest(const ChannelSet& cs);

double db_to_linear(double db);
double dbm_to_watts(double dbm);

}  // namespace bdris
