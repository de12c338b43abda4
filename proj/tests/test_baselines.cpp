#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bdris/baselines.hpp"
#include "bdris/errors.hpp"
#include "test_support.hpp"

using namespace bdris;
using namespace bdris::testing;

namespace {

ChannelSet draw(const SystemConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  return draw_channels(cfg, rng);
}

CMatrix full_channel(const ChannelSet& cs, const CMatrix& h_ir, const CMatrix& h_ar,
                     const CMatrix& theta) {
  return h_ir * theta * cs.h_ai + h_ar;
}

// Best single-stream secrecy rate for fixed channels: the generalized
// eigenvalue λ_max(I + P/σ_b² H_bᴴH_b, I + P/σ_e² H_eᴴH_e).
double single_stream_oracle(const CMatrix& hb, const CMatrix& he, const SystemConfig& cfg) {
  const Index n = hb.cols();
  const CMatrix a = CMatrix::Identity(n, n) + cfg.power / cfg.sigma_b2 * hb.adjoint() * hb;
  const CMatrix b = CMatrix::Identity(n, n) + cfg.power / cfg.sigma_e2 * he.adjoint() * he;
  const Eigen::LLT<CMatrix> llt(b);
  const CMatrix l_inv = llt.matrixL().solve(CMatrix::Identity(n, n));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(l_inv * a * l_inv.adjoint());
  return std::max(0.0, std::log2(es.eigenvalues().maxCoeff()));
}

}  // namespace

TEST(SchemeId, ParseAndName) {
  EXPECT_EQ(SchemeId::parse("fc").name(), "FC");
  EXPECT_EQ(SchemeId::parse("gc4").name(), "GC4");
  EXPECT_EQ(SchemeId::parse("GC4").groups, 4);
  EXPECT_EQ(SchemeId::parse("dris").name(), "DRIS");
  EXPECT_EQ(SchemeId::parse("random").name(), "RANDOM_FC");
  EXPECT_EQ(SchemeId::parse("wo").name(), "WO_RIS");
  EXPECT_EQ(SchemeId::parse("upper").name(), "UPPER_FC");
  EXPECT_EQ(SchemeId::parse("UPPER_FC").kind, SchemeKind::UPPER_FC);
  EXPECT_THROW(SchemeId::parse("gc"), ConfigError);
  EXPECT_THROW(SchemeId::parse("gc0"), ConfigError);
  EXPECT_THROW(SchemeId::parse("bogus"), ConfigError);
}

TEST(RandomSymmetricUnitary, Feasible) {
  Rng rng(1);
  const CMatrix one = random_symmetric_unitary(1, rng);
  EXPECT_NEAR(std::abs(one(0, 0)), 1.0, 1e-14);
  for (int k = 0; k < 50; ++k) {
    const CMatrix t = random_symmetric_unitary(7, rng);
    EXPECT_LE((t - t.transpose()).norm(), 1e-10);
    EXPECT_LE((t * t.adjoint() - CMatrix::Identity(7, 7)).norm(), 1e-10);
  }
  EXPECT_THROW(random_symmetric_unitary(0, rng), DomainError);
}

TEST(RandomSymmetricUnitary, EntriesAverageToZero) {
  Rng rng(2);
  CMatrix acc = CMatrix::Zero(4, 4);
  for (int k = 0; k < 500; ++k) acc += random_symmetric_unitary(4, rng);
  acc /= 500.0;
  EXPECT_LE(acc.cwiseAbs().maxCoeff(), 0.1);
}

TEST(FixedTheta, MatchesSvdWithoutEavesdropper) {
  SystemConfig cfg = small_config();
  cfg.n_s = 1;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ChannelSet cs = draw(cfg, 10 + seed);
    cs.h_ae.setZero();
    cs.h_ie.setZero();
    Rng rng(seed);
    const CMatrix theta = random_symmetric_unitary(cfg.m, rng);
    const SchemeResult r = optimize_fixed_theta(cs, cfg, theta, SolverParams{}, CsiMode::perfect(), rng);
    const CMatrix hb = full_channel(cs, cs.h_ib, cs.h_ab, theta);
    Eigen::JacobiSVD<CMatrix> svd(hb);
    const double s = svd.singularValues()(0);
    EXPECT_NEAR(r.sr(), std::log2(1 + cfg.power * s * s / cfg.sigma_b2), 1e-4);
    EXPECT_NEAR(r.w.norm(), 1.0, 1e-12);
  }
}

TEST(FixedTheta, MatchesGeneralizedEigenvalueWithEavesdropper) {
  SystemConfig cfg = small_config();
  cfg.n_s = 1;
  const ChannelSet cs = draw(cfg, 30);
  Rng rng(31);
  const CMatrix theta = random_symmetric_unitary(cfg.m, rng);
  const SchemeResult r = optimize_fixed_theta(cs, cfg, theta, SolverParams{}, CsiMode::perfect(), rng);
  const double oracle = single_stream_oracle(full_channel(cs, cs.h_ib, cs.h_ab, theta),
                                             full_channel(cs, cs.h_ie, cs.h_ae, theta), cfg);
  EXPECT_NEAR(r.sr(), oracle, 1e-4);
}

TEST(WithoutRis, NoBobDirectLinkMeansNoSecrecy) {
  SystemConfig cfg = small_config();
  ChannelSet cs = draw(cfg, 3);
  cs.h_ab.setZero();
  Rng rng(3);
  const SchemeResult r = optimize_without_ris(cs, cfg, SolverParams{}, CsiMode::perfect(), rng);
  EXPECT_EQ(r.sr(), 0.0);
}

TEST(WithoutRis, Deterministic) {
  const SystemConfig cfg = small_config();
  const ChannelSet cs = draw(cfg, 4);
  Rng a(9), b(9);
  const SchemeResult ra = optimize_without_ris(cs, cfg, SolverParams{}, CsiMode::perfect(), a);
  const SchemeResult rb = optimize_without_ris(cs, cfg, SolverParams{}, CsiMode::perfect(), b);
  EXPECT_NEAR(ra.sr(), rb.sr(), 1e-10);
}

TEST(Dris, NoElementsEqualsWithoutRis) {
  SystemConfig cfg = small_config();
  cfg.m = 0;
  cfg.g = 1;
  const ChannelSet cs = draw(cfg, 5);
  Rng a(6), b(6);
  const SchemeResult d = optimize_dris(cs, cfg, SolverParams{}, CsiMode::perfect(), a);
  const SchemeResult w = optimize_without_ris(cs, cfg, SolverParams{}, CsiMode::perfect(), b);
  EXPECT_NEAR(d.sr(), w.sr(), 1e-12);
}

TEST(Dris, SingleElementMatchesPhaseGrid) {
  SystemConfig cfg = small_config();
  cfg.m = 1;
  cfg.g = 1;
  cfg.n_s = 1;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const ChannelSet cs = draw(cfg, 40 + seed);
    double best = 0.0;
    for (int k = 0; k < 4096; ++k) {
      const CMatrix theta = CMatrix::Constant(1, 1, std::polar(1.0, 2 * std::numbers::pi * k / 4096));
      best = std::max(best, single_stream_oracle(full_channel(cs, cs.h_ib, cs.h_ab, theta),
                                                 full_channel(cs, cs.h_ie, cs.h_ae, theta), cfg));
    }
    Rng rng(seed);
    const SchemeResult r = optimize_dris(cs, cfg, SolverParams{}, CsiMode::perfect(), rng);
    EXPECT_NEAR(r.sr(), best, 1e-3);
    EXPECT_NEAR(std::abs(r.theta[0](0, 0)), 1.0, 1e-10);
  }
}

TEST(Dris, RealRankOneAlignsCascadedPath) {
  SystemConfig cfg = small_config();
  cfg.m = 1;
  cfg.g = 1;
  cfg.n_s = 1;
  cfg.sigma_b2 = cfg.sigma_e2 = 1.0;
  ChannelSet cs;
  cs.h_ai = CMatrix::Constant(1, 4, 0.5);
  cs.h_ib = CMatrix::Constant(2, 1, 0.4);
  cs.h_ab = CMatrix::Constant(2, 4, 0.1);
  cs.h_ae = CMatrix::Zero(2, 4);
  cs.h_ie = CMatrix::Zero(2, 1);
  Rng rng(7);
  const SchemeResult r = optimize_dris(cs, cfg, SolverParams{}, CsiMode::perfect(), rng);
  // Positive real channels add coherently at θ = 1.
  EXPECT_NEAR(std::arg(r.theta[0](0, 0)), 0.0, 1e-3);
}

TEST(Dris, UnitModulusAtExit) {
  const SystemConfig cfg = small_config();
  const ChannelSet cs = draw(cfg, 8);
  Rng rng(8);
  const SchemeResult r = optimize_dris(cs, cfg, SolverParams{}, CsiMode::perfect(), rng);
  ASSERT_EQ(static_cast<int>(r.theta.size()), cfg.m);
  for (const CMatrix& t : r.theta) EXPECT_NEAR(std::abs(t(0, 0)), 1.0, 1e-10);
  EXPECT_LE(r.unitarity_residual, 1e-10);
}

TEST(UpperBound, DominatesOtherSchemes) {
  const SystemConfig cfg = small_config();
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const ChannelSet cs = draw(cfg, 60 + seed);
    Rng rng(seed);
    const SchemeResult up = upper_bound(cs, cfg, SolverParams{}, CsiMode::perfect(), rng);
    EXPECT_EQ(up.rates.re, 0.0);
    EXPECT_EQ(up.sr(), up.rates.rb);
    for (const char* name : {"fc", "dris", "random", "wo"}) {
      Rng r2(seed + 100);
      const SchemeResult other =
          run_scheme(SchemeId::parse(name), cs, cfg, SolverParams{}, CsiMode::perfect(), r2);
      EXPECT_GE(up.sr() + 1e-6, other.sr()) << name;
    }
  }
}

TEST(UpperBound, ZeroRisMatchesBeamformingWithoutEavesdropper) {
  SystemConfig cfg = small_config();
  cfg.n_s = 1;
  ChannelSet cs = without_ris(draw(cfg, 70));
  Rng a(1), b(1);
  const SchemeResult up = upper_bound(cs, cfg, SolverParams{}, CsiMode::perfect(), a);
  cs.h_ae.setZero();
  const SchemeResult w = optimize_fixed_theta(cs, cfg, CMatrix::Zero(cfg.m, cfg.m), SolverParams{},
                                              CsiMode::perfect(), b);
  EXPECT_NEAR(up.rates.rb, w.sr(), 1e-4);
}

TEST(Pprcgd, ZeroRisEqualsWithoutRis) {
  const SystemConfig cfg = small_config();
  const ChannelSet cs = without_ris(draw(cfg, 80));
  Rng a(2), b(2);
  const SchemeResult fc = optimize_bdris(cs, cfg, 1, SolverParams{}, CsiMode::perfect(), a);
  const SchemeResult wo = optimize_without_ris(cs, cfg, SolverParams{}, CsiMode::perfect(), b);
  EXPECT_NEAR(fc.sr(), wo.sr(), 1e-3);
}

TEST(RunScheme, GroupCountMustDivide) {
  const SystemConfig cfg = small_config();
  const ChannelSet cs = draw(cfg, 90);
  Rng rng(1);
  EXPECT_THROW(run_scheme(SchemeId::parse("gc3"), cs, cfg, SolverParams{}, CsiMode::perfect(), rng),
               ConfigError);
}

TEST(RunScheme, ImperfectCsiRatesAreReported) {
  const SystemConfig cfg = small_config();
  const ChannelSet cs = draw(cfg, 91);
  for (const char* name : {"fc", "dris", "random", "wo", "upper"}) {
    Rng rng(1);
    const SchemeResult r =
        run_scheme(SchemeId::parse(name), cs, cfg, SolverParams{}, CsiMode::with_errors(0.05), rng);
    EXPECT_TRUE(std::isfinite(r.sr())) << name;
    EXPECT_GE(r.sr(), 0.0) << name;
  }
}
