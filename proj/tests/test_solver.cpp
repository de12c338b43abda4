#include <gtest/gtest.h>

#include <cmath>

#include "bdris/errors.hpp"
#include "bdris/pprcgd.hpp"
#include "test_support.hpp"

using namespace bdris;
using namespace bdris::testing;

namespace {

struct Problem {
  SystemConfig cfg;
  ChannelSet cs;
  ObjectiveModel model;
  ProductPoint x;
};

Problem small_problem(std::uint64_t seed) {
  Problem p;
  p.cfg = small_config();
  Rng rng(seed);
  p.cs = draw_channels(p.cfg, rng);
  p.model = ObjectiveModel::make(p.cs, p.cfg, p.cfg.g);
  p.x = random_point(dims_of(p.cfg, p.cfg.g), rng);
  return p;
}

// f ≡ 1: all channels zero.
Problem penalty_only(std::uint64_t seed) {
  Problem p = small_problem(seed);
  p.cs.h_ab.setZero();
  p.cs.h_ae.setZero();
  p.cs.h_ai.setZero();
  p.cs.h_ib.setZero();
  p.cs.h_ie.setZero();
  p.model = ObjectiveModel::make(p.cs, p.cfg, p.cfg.g);
  return p;
}

auto al_objective(const ObjectiveModel& model, const AlState& al) {
  return [&model, &al](const ProductPoint& x) {
    AlEvaluation e = evaluate_al(model, x, al);
    return Evaluation<ProductManifold>{e.value, std::move(e.grad)};
  };
}

// Unit sphere in C^n, minimizing xᴴ A x.
struct VectorSphere {
  using Point = CMatrix;
  using Tangent = CMatrix;
  double inner(const Tangent& u, const Tangent& v) const { return real_inner(u, v); }
  Point retract(const Point& x, const Tangent& d) const { return (x + d).normalized(); }
  Tangent transport(const Point&, const Point& to, const Tangent& d) const {
    return d - to * real_inner(to, d);
  }
  Tangent combine(double a, const Tangent& u, double b, const Tangent& v) const {
    return a * u + b * v;
  }
};

}  // namespace

TEST(FletcherReeves, RatioOfSquaredNorms) {
  Rng rng(1);
  const ProductPoint x = random_point({4, 2, 2, 2}, rng);
  const TangentVector a = random_tangent(x, rng);
  const TangentVector b = random_tangent(x, rng);
  const ProductManifold space;
  EXPECT_DOUBLE_EQ(fletcher_reeves_beta(space, a, a), 1.0);
  EXPECT_EQ(fletcher_reeves_beta(space, TangentVector::zeros(x.dims()), a), 0.0);
  auto flat_sq = [](const TangentVector& t) {
    double s = t.w.cwiseAbs2().sum();
    for (std::size_t g = 0; g < t.theta.size(); ++g)
      s += t.theta[g].cwiseAbs2().sum() + t.psi[g].cwiseAbs2().sum();
    return s;
  };
  EXPECT_NEAR(fletcher_reeves_beta(space, a, b), flat_sq(a) / flat_sq(b), 1e-12);
  EXPECT_THROW(fletcher_reeves_beta(space, a, TangentVector::zeros(x.dims())), NumericError);
}

TEST(WolfeStep, PenaltyOnlySteepestDescentDecreases) {
  const Problem p = penalty_only(2);
  const AlState al = AlState::initial(p.x.dims(), 1.0, 0.1);
  auto obj = al_objective(p.model, al);
  const Evaluation<ProductManifold> e = obj(p.x);
  const StepResult<ProductManifold> s =
      wolfe_step(ProductManifold{}, obj, p.x, e, -e.grad, 1.0, SolverParams{});
  EXPECT_LT(s.eval.value, e.value);
}

TEST(WolfeStep, LoggedInequalitiesHold) {
  SolverParams params;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Problem p = small_problem(10 + seed);
    Rng rng(seed);
    const AlState al = random_al(p.x.dims(), rng);
    auto obj = al_objective(p.model, al);
    const Evaluation<ProductManifold> e = obj(p.x);
    const TangentVector d = -e.grad;
    const StepResult<ProductManifold> s =
        wolfe_step(ProductManifold{}, obj, p.x, e, d, 1.0, params);
    const double slope = inner_product(e.grad, d);
    EXPECT_LE(s.eval.value - e.value, params.sigma1 * s.record.alpha * slope + 1e-12);
    EXPECT_LE(s.record.armijo_slack, 0.0);
    if (!s.record.curvature_waived) {
      const double new_slope =
          inner_product(s.eval.grad, transport(p.x, s.point, d));
      EXPECT_LE(std::abs(new_slope), params.sigma2 * std::abs(slope) + 1e-12);
    }
  }
}

TEST(WolfeStep, ScaledDirectionGivesSamePoint) {
  const Problem p = small_problem(20);
  const AlState al = AlState::initial(p.x.dims(), 1.0, 0.1);
  auto obj = al_objective(p.model, al);
  const Evaluation<ProductManifold> e = obj(p.x);
  const StepResult<ProductManifold> a =
      wolfe_step(ProductManifold{}, obj, p.x, e, -e.grad, 1.0, SolverParams{});
  const StepResult<ProductManifold> b =
      wolfe_step(ProductManifold{}, obj, p.x, e, -2.0 * e.grad, 0.5, SolverParams{});
  EXPECT_NEAR(a.eval.value, b.eval.value, 1e-8 * std::abs(a.eval.value));
  EXPECT_NEAR(b.record.alpha, 0.5 * a.record.alpha, 1e-12 * a.record.alpha);
}

TEST(WolfeStep, AscentDirectionRejected) {
  const Problem p = small_problem(21);
  const AlState al = AlState::initial(p.x.dims(), 1.0, 0.1);
  auto obj = al_objective(p.model, al);
  const Evaluation<ProductManifold> e = obj(p.x);
  EXPECT_THROW(wolfe_step(ProductManifold{}, obj, p.x, e, e.grad, 1.0, SolverParams{}),
               LineSearchError);
}

TEST(ConjugateGradient, RayleighQuotientOnSphere) {
  Rng rng(3);
  const CMatrix b = complex_gaussian(8, 8, rng);
  const CMatrix a = b * b.adjoint();
  auto obj = [&](const CMatrix& x) {
    const CMatrix ax = a * x;
    CMatrix g = 2.0 * ax;
    g -= x * real_inner(x, g);
    return Evaluation<VectorSphere>{real_inner(x, ax), g};
  };
  SolverParams params;
  params.max_inner = 2000;
  const CgResult<VectorSphere> r =
      conjugate_gradient(VectorSphere{}, obj, complex_gaussian(8, 1, rng).normalized(), 1e-6, params);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
  EXPECT_TRUE(r.trace.converged);
  EXPECT_NEAR(r.eval.value, es.eigenvalues()(0), 1e-10 * es.eigenvalues().maxCoeff());
  ASSERT_FALSE(r.trace.iterations.empty());
  EXPECT_TRUE(r.trace.iterations.front().restarted);
}

TEST(Prcgd, SmallGradientStartReturnsImmediately) {
  const Problem p = small_problem(4);
  AlState al = AlState::initial(p.x.dims(), 1.0, 1e300);
  const InnerSolve s = prcgd(p.model, p.x, al, SolverParams{});
  EXPECT_TRUE(s.trace.iterations.empty());
  EXPECT_TRUE(s.trace.converged);
  EXPECT_EQ(s.point.w, p.x.w);
}

TEST(Prcgd, PenaltyOnlyConvergesToFeasiblePair) {
  const Problem p = penalty_only(5);
  AlState al = AlState::initial(p.x.dims(), 1.0, 1e-7);
  SolverParams params;
  params.max_inner = 5000;
  const InnerSolve s = prcgd(p.model, p.x, al, params);
  EXPECT_TRUE(s.trace.converged);
  EXPECT_LE(constraint_violation(s.point), 1e-6);
  EXPECT_LT(s.grad_norm, 1e-7);
}

TEST(Prcgd, TraceIsMonotoneAndEndsBelowTolerance) {
  const Problem p = small_problem(6);
  Rng rng(6);
  const AlState al = random_al(p.x.dims(), rng);
  SolverParams params;
  params.max_inner = 5000;
  AlState tight = al;
  tight.epsilon = 1e-6;
  const InnerSolve s = prcgd(p.model, p.x, tight, params);
  ASSERT_TRUE(s.trace.converged);
  double prev = s.trace.start_value;
  for (const InnerRecord& r : s.trace.iterations) {
    EXPECT_LE(r.value, prev);
    EXPECT_LE(r.armijo_slack, 0.0);
    prev = r.value;
  }
  EXPECT_LT(s.grad_norm, 1e-6);
  const PointResiduals res = point_residuals(s.point);
  EXPECT_LT(res.sphere + res.symmetry + res.unitarity, 1e-8);
}

TEST(DualUpdate, Cases) {
  Rng rng(7);
  const ProductDims d{4, 2, 3, 2};
  const ProductPoint x = random_point(d, rng);
  AlState al = random_al(d, rng);
  const AlState same = dual_update(al, x.theta, x.theta);
  for (std::size_t g = 0; g < 2; ++g) EXPECT_EQ(same.phi[g], al.phi[g]);

  AlState zero = AlState::initial(d, 1.0, 0.1);
  const AlState upd = dual_update(zero, x.theta, x.psi);
  for (std::size_t g = 0; g < 2; ++g) EXPECT_LT((upd.phi[g] - (x.psi[g] - x.theta[g])).norm(), 1e-15);
  EXPECT_EQ(upd.rho, zero.rho);
  EXPECT_EQ(upd.epsilon, zero.epsilon);
}

TEST(DualUpdate, PsiGradientEqualsUpdatedDual) {
  const Problem p = small_problem(8);
  Rng rng(8);
  const AlState al = random_al(p.x.dims(), rng);
  const AmbientBlocks g = euclidean_gradient(p.model, p.x, al);
  const AlState next = dual_update(al, p.x.theta, p.x.psi);
  for (std::size_t k = 0; k < g.psi.size(); ++k)
    EXPECT_LT((g.psi[k] - next.phi[k]).norm(), 1e-12 * (1 + next.phi[k].norm()));
}

TEST(Pprcgd, SmallInstanceConverges) {
  const Problem p = small_problem(9);
  const PprcgdResult r = pprcgd(p.model, p.cfg, p.x, SolverParams{});
  EXPECT_EQ(r.trace.termination, Termination::Converged);
  EXPECT_LT(r.eta, 1e-5);
  EXPECT_LT(r.grad_norm, 1e-4);
  EXPECT_LE(r.unitarity_residual, 1e-3);
  EXPECT_EQ(static_cast<int>(r.trace.outer.size()), r.outer_iterations);
  EXPECT_EQ(r.trace.inner.size(), r.trace.outer.size());
  EXPECT_NEAR(r.sr(), secrecy_rate(r.point.w, r.point.theta, p.cs, p.cfg), 1e-12);
  EXPECT_NEAR(r.w_scaled.squaredNorm(), p.cfg.power, 1e-12);
  EXPECT_GE(r.sr(), secrecy_rate(p.x.w, p.x.theta, p.cs, p.cfg));
}

TEST(Pprcgd, SecrecyImprovesOnMostStarts) {
  int improved = 0;
  const int runs = 20;
  for (int s = 0; s < runs; ++s) {
    const Problem p = small_problem(500 + s);
    const PprcgdResult r = pprcgd(p.model, p.cfg, p.x, SolverParams{});
    if (r.sr() >= secrecy_rate(p.x.w, p.x.theta, p.cs, p.cfg)) ++improved;
  }
  EXPECT_GE(improved, 19);
}

TEST(Pprcgd, BudgetExhaustionIsReported) {
  const Problem p = small_problem(10);
  SolverParams params;
  params.max_outer = 2;
  const PprcgdResult r = pprcgd(p.model, p.cfg, p.x, params);
  EXPECT_EQ(r.trace.termination, Termination::Budget);
  EXPECT_EQ(r.outer_iterations, 2);
}

TEST(SolverParams, ValidationNamesTheField) {
  SolverParams p;
  EXPECT_NO_THROW(p.validate());
  p.sigma2 = 0.6;
  try {
    p.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "sigma2");
  }
  p = SolverParams{};
  p.sigma1 = 0.45;
  EXPECT_THROW(p.validate(), ConfigError);
  p = SolverParams{};
  p.max_inner = 0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Termination, Names) {
  EXPECT_EQ(termination_name(Termination::Converged), "converged");
  EXPECT_EQ(termination_name(Termination::Budget), "budget");
  EXPECT_EQ(termination_name(Termination::LineSearchFailure), "linesearch_failure");
}
