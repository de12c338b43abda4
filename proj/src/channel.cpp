#include "bdris/channel.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "bdris/errors.hpp"

namespace bdris {

void SystemConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ConfigError(name, "must be a positive integer");
  };
  positive(n_t, "n_t");
  positive(n_b, "n_b");
  positive(n_e, "n_e");
  positive(n_s, "n_s");
  positive(g, "g");
  if (m < 0) throw ConfigError("m", "must be non-negative");
  if (m % g != 0) throw ConfigError("g", "must divide m");
  if (n_s > std::min(n_t, n_b)) throw ConfigError("n_s", "must not exceed min(n_t, n_b)");
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(name, "must be finite and >= 0");
  };
  nonneg(power, "power");
  nonneg(kappa, "kappa");
  nonneg(c0, "c0");
  if (!(sigma_b2 > 0.0)) throw ConfigError("sigma_b2", "must be > 0");
  if (!(sigma_e2 > 0.0)) throw ConfigError("sigma_e2", "must be > 0");
  if (!(d0 > 0.0)) throw ConfigError("d0", "must be > 0");
}

double path_loss(double d, double zeta, double c0, double d0) {
  if (!(d > 0.0)) throw DomainError("path_loss: distance must be positive");
  return c0 * std::pow(d / d0, -zeta);
}

CVector steering_vector(Index n, double psi) {
  CVector a(n);
  const double phase = std::numbers::pi * std::sin(psi);
  for (Index k = 0; k < n; ++k) a(k) = std::polar(1.0, phase * static_cast<double>(k));
  return a;
}

namespace {

double distance(const Position& a, const Position& b) {
  return std::hypot(b.x - a.x, b.y - a.y);
}

// Angle of departure from tx towards rx, atan(Δy/Δx).
double departure_angle(const Position& tx, const Position& rx) {
  const double dx = rx.x - tx.x;
  const double dy = rx.y - tx.y;
  if (dx == 0.0) return std::copysign(std::numbers::pi / 2, dy);
  return std::atan(dy / dx);
}

CMatrix gaussian_link(Index rows, Index cols, const Position& tx, const Position& rx,
                      double zeta, const SystemConfig& cfg, Rng& rng) {
  const double d = distance(tx, rx);
  if (d == 0.0) throw DomainError("draw_channels: coincident transceiver positions");
  return std::sqrt(path_loss(d, zeta, cfg.c0, cfg.d0)) * complex_gaussian(rows, cols, rng);
}

CMatrix rician_link(Index rows, Index cols, const Position& tx, const Position& rx,
                    double zeta, const SystemConfig& cfg, Rng& rng) {
  const double d = distance(tx, rx);
  if (d == 0.0) throw DomainError("draw_channels: coincident transceiver positions");
  const double psi_t = departure_angle(tx, rx);
  const double psi_r = std::numbers::pi - psi_t;
  const CMatrix los = steering_vector(rows, psi_r) * steering_vector(cols, psi_t).adjoint();
  const CMatrix nlos = complex_gaussian(rows, cols, rng);
  const double k = cfg.kappa;
  const double w_los = std::isinf(k) ? 1.0 : std::sqrt(k / (1.0 + k));
  const double w_nlos = std::isinf(k) ? 0.0 : std::sqrt(1.0 / (1.0 + k));
  return std::sqrt(path_loss(d, zeta, cfg.c0, cfg.d0)) * (w_los * los + w_nlos * nlos);
}

double mean_power(const CMatrix& h) {
  return h.size() == 0 ? 0.0 : h.squaredNorm() / static_cast<double>(h.size());
}

}  // namespace

ChannelSet draw_channels(const SystemConfig& cfg, Rng& rng) {
  ChannelSet cs;
  cs.h_ab = gaussian_link(cfg.n_b, cfg.n_t, cfg.alice, cfg.bob, cfg.zeta.ab, cfg, rng);
  cs.h_ae = gaussian_link(cfg.n_e, cfg.n_t, cfg.alice, cfg.eve, cfg.zeta.ae, cfg, rng);
  cs.h_ai = rician_link(cfg.m, cfg.n_t, cfg.alice, cfg.ris, cfg.zeta.ai, cfg, rng);
  cs.h_ib = rician_link(cfg.n_b, cfg.m, cfg.ris, cfg.bob, cfg.zeta.ib, cfg, rng);
  cs.h_ie = rician_link(cfg.n_e, cfg.m, cfg.ris, cfg.eve, cfg.zeta.ie, cfg, rng);
  return cs;
}

GroupBlocks group_blocks(const ChannelSet& cs, int groups) {
  const Index m = cs.h_ai.rows();
  if (groups <= 0 || m % groups != 0)
    throw ConfigError("g", "number of groups must divide the number of RIS elements");
  const Index b = m / groups;
  GroupBlocks out;
  for (int g = 0; g < groups; ++g) {
    out.ai.push_back(cs.h_ai.middleRows(g * b, b));
    out.ib.push_back(cs.h_ib.middleCols(g * b, b));
    out.ie.push_back(cs.h_ie.middleCols(g * b, b));
  }
  return out;
}

CeeConfig cee_variances(const ChannelSet& cs, double delta) {
  if (!(delta >= 0.0)) throw DomainError("cee_variances: delta must be >= 0");
  CeeConfig c;
  c.delta = delta;
  c.var_ai = delta * mean_power(cs.h_ai);
  c.var_ib = delta * mean_power(cs.h_ib);
  c.var_ie = delta * mean_power(cs.h_ie);
  c.var_ab = delta * mean_power(cs.h_ab);
  c.var_ae = delta * mean_power(cs.h_ae);
  return c;
}

ChannelSet without_ris(const ChannelSet& cs) {
  ChannelSet out = cs;
  out.h_ai.setZero();
  out.h_ib.setZero();
  out.h_ie.setZero();
  return out;
}

std::uint64_t channel_digest(const ChannelSet& cs) {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  auto feed = [&h](const CMatrix& m) {
    h = mix64(h ^ static_cast<std::uint64_t>(m.rows()));
    h = mix64(h ^ static_cast<std::uint64_t>(m.cols()));
    for (Index k = 0; k < m.size(); ++k) {
      h = mix64(h ^ std::bit_cast<std::uint64_t>(m.data()[k].real()));
      h = mix64(h ^ std::bit_cast<std::uint64_t>(m.data()[k].imag()));
    }
  };
  feed(cs.h_ab);
  feed(cs.h_ae);
  feed(cs.h_ai);
  feed(cs.h_ib);
  feed(cs.h_ie);
  return h;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace bdris
