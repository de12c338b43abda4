#include "bdris/manifold.hpp"

#include <cmath>
#include <string>

#include "bdris/errors.hpp"

namespace bdris {

namespace {

CMatrix project_sphere(const CMatrix& w, const CMatrix& u) {
  return u - w * real_inner(u, w);
}

CMatrix project_symmetric(const CMatrix& u) { return 0.5 * (u + u.transpose()); }

CMatrix project_unitary(const CMatrix& psi, const CMatrix& u) {
  const CMatrix s = u.adjoint() * psi;
  return u - psi * (0.5 * (s + s.adjoint()));
}

}  // namespace

void require_same_shape(const ProductDims& a, const ProductDims& b, const char* where) {
  if (a.n_t != b.n_t || a.n_s != b.n_s || a.groups != b.groups ||
      (a.groups > 0 && a.block != b.block))
    throw ShapeError(std::string(where) + ": block dimensions differ");
}

double inner_product(const TangentVector& u, const TangentVector& v) {
  return block_inner(u, v);
}

double norm(const TangentVector& u) { return std::sqrt(inner_product(u, u)); }

TangentVector project_tangent(const ProductPoint& base, const AmbientBlocks& ambient) {
  require_same_shape(base.dims(), ambient.dims(), "project_tangent");
  TangentVector out;
  out.w = project_sphere(base.w, ambient.w);
  out.theta.reserve(base.theta.size());
  out.psi.reserve(base.psi.size());
  for (std::size_t g = 0; g < base.theta.size(); ++g) {
    out.theta.push_back(project_symmetric(ambient.theta[g]));
    out.psi.push_back(project_unitary(base.psi[g], ambient.psi[g]));
  }
  return out;
}

ProductPoint retract(const ProductPoint& base, const TangentVector& step) {
  require_same_shape(base.dims(), step.dims(), "retract");
  ProductPoint out;
  CMatrix w = base.w + step.w;
  const double n = w.norm();
  if (n == 0.0) throw DegenerateStepError("retract: W + dW has zero norm");
  out.w = w / n;
  out.theta.reserve(base.theta.size());
  out.psi.reserve(base.psi.size());
  for (std::size_t g = 0; g < base.theta.size(); ++g) {
    out.theta.push_back(base.theta[g] + step.theta[g]);
    out.psi.push_back(unitary_factor(base.psi[g] + step.psi[g]));
  }
  return out;
}

TangentVector transport(const ProductPoint& from, const ProductPoint& to,
                        const TangentVector& d) {
  require_same_shape(from.dims(), to.dims(), "transport");
  require_same_shape(to.dims(), d.dims(), "transport");
  return project_tangent(to, d.as<AmbientTag>());
}

ProductPoint random_point(const ProductDims& dims, Rng& rng) {
  ProductPoint p;
  for (;;) {
    p.w = complex_gaussian(dims.n_t, dims.n_s, rng);
    const double n = p.w.norm();
    if (n > 0.0) {
      p.w /= n;
      break;
    }
  }
  p.theta.reserve(dims.groups);
  p.psi.reserve(dims.groups);
  for (Index g = 0; g < dims.groups; ++g) {
    const CMatrix a = complex_gaussian(dims.block, dims.block, rng);
    p.theta.push_back(0.5 * (a + a.transpose()));
  }
  for (Index g = 0; g < dims.groups; ++g) {
    for (;;) {
      const CMatrix a = complex_gaussian(dims.block, dims.block, rng);
      Eigen::HouseholderQR<CMatrix> qr(a);
      if (qr.matrixQR().diagonal().cwiseAbs().minCoeff() > 1e-12) {
        p.psi.push_back(unitary_factor(a));
        break;
      }
    }
  }
  return p;
}

TangentVector random_tangent(const ProductPoint& base, Rng& rng) {
  const ProductDims d = base.dims();
  AmbientBlocks a;
  a.w = complex_gaussian(d.n_t, d.n_s, rng);
  for (Index g = 0; g < d.groups; ++g) {
    a.theta.push_back(complex_gaussian(d.block, d.block, rng));
    a.psi.push_back(complex_gaussian(d.block, d.block, rng));
  }
  return project_tangent(base, a);
}

PointResiduals point_residuals(const ProductPoint& p) {
  PointResiduals r;
  r.sphere = std::abs(p.w.squaredNorm() - 1.0);
  for (std::size_t g = 0; g < p.theta.size(); ++g) {
    r.symmetry = std::max(r.symmetry, (p.theta[g] - p.theta[g].transpose()).norm());
    const Index b = p.psi[g].rows();
    r.unitarity = std::max(
        r.unitarity, (p.psi[g] * p.psi[g].adjoint() - CMatrix::Identity(b, b)).norm());
  }
  return r;
}

TangentResiduals tangent_residuals(const ProductPoint& base, const TangentVector& t) {
  require_same_shape(base.dims(), t.dims(), "tangent_residuals");
  TangentResiduals r;
  r.sphere = std::abs(real_inner(t.w, base.w));
  for (std::size_t g = 0; g < t.theta.size(); ++g) {
    r.symmetry = std::max(r.symmetry, (t.theta[g] - t.theta[g].transpose()).norm());
    r.unitarity = std::max(r.unitarity, (t.psi[g].adjoint() * base.psi[g] +
                                         base.psi[g].adjoint() * t.psi[g])
                                            .norm());
  }
  return r;
}

double constraint_violation(const ProductPoint& p) {
  double eta = 0.0;
  for (std::size_t g = 0; g < p.theta.size(); ++g)
    eta = std::max(eta, max_abs_entry(p.psi[g] - p.theta[g]));
  return eta;
}

double theta_unitarity_residual(const std::vector<CMatrix>& theta) {
  double r = 0.0;
  for (const CMatrix& t : theta)
    r = std::max(r, (t * t.adjoint() - CMatrix::Identity(t.rows(), t.rows())).norm());
  return r;
}

}  // namespace bdris
