#pragma once

#include <type_traits>
#include <vector>

#include "bdris/linalg.hpp"

namespace bdris {

/// Shape of the product manifold
///   sphere(n_t x n_s) x sym(b x b)^groups x U(b)^groups.
/// groups == 0 leaves only the sphere factor.
struct ProductDims {
  Index n_t = 0;
  Index n_s = 0;
  Index block = 0;
  Index groups = 0;

  friend bool operator==(const ProductDims&, const ProductDims&) = default;
};

struct PointTag {};
struct TangentTag {};
struct AmbientTag {};

/// One matrix per factor: the beamformer block, the G symmetric blocks and
/// the G unitary copies. The tag separates manifold points, tangent vectors
/// and unconstrained ambient matrices at the type level.
template <class Tag>
struct BlockSet {
  CMatrix w;
  std::vector<CMatrix> theta;
  std::vector<CMatrix> psi;

  ProductDims dims() const {
    return {w.rows(), w.cols(), theta.empty() ? Index{0} : theta.front().rows(),
            static_cast<Index>(theta.size())};
  }

  static BlockSet zeros(const ProductDims& d) {
    BlockSet out;
    out.w = CMatrix::Zero(d.n_t, d.n_s);
    out.theta.assign(d.groups, CMatrix::Zero(d.block, d.block));
    out.psi.assign(d.groups, CMatrix::Zero(d.block, d.block));
    return out;
  }

  /// Reinterprets the same matrices under another tag.
  template <class Other>
  BlockSet<Other> as() const {
    return {w, theta, psi};
  }
};

using ProductPoint = BlockSet<PointTag>;
using TangentVector = BlockSet<TangentTag>;
using AmbientBlocks = BlockSet<AmbientTag>;

template <class Tag>
concept LinearBlockTag = !std::is_same_v<Tag, PointTag>;

void require_same_shape(const ProductDims& a, const ProductDims& b, const char* where);

template <class Tag>
  requires LinearBlockTag<Tag>
BlockSet<Tag>& operator+=(BlockSet<Tag>& a, const BlockSet<Tag>& b) {
  require_same_shape(a.dims(), b.dims(), "operator+=");
  a.w += b.w;
  for (std::size_t g = 0; g < a.theta.size(); ++g) {
    a.theta[g] += b.theta[g];
    a.psi[g] += b.psi[g];
  }
  return a;
}

template <class Tag>
  requires LinearBlockTag<Tag>
BlockSet<Tag>& operator*=(BlockSet<Tag>& a, double s) {
  a.w *= s;
  for (std::size_t g = 0; g < a.theta.size(); ++g) {
    a.theta[g] *= s;
    a.psi[g] *= s;
  }
  return a;
}

template <class Tag>
  requires LinearBlockTag<Tag>
BlockSet<Tag> operator+(BlockSet<Tag> a, const BlockSet<Tag>& b) {
  return a += b;
}

template <class Tag>
  requires LinearBlockTag<Tag>
BlockSet<Tag> operator-(BlockSet<Tag> a, BlockSet<Tag> b) {
  return a += (b *= -1.0);
}

template <class Tag>
  requires LinearBlockTag<Tag>
BlockSet<Tag> operator*(double s, BlockSet<Tag> a) {
  return a *= s;
}

template <class Tag>
  requires LinearBlockTag<Tag>
BlockSet<Tag> operator-(BlockSet<Tag> a) {
  return a *= -1.0;
}

/// Σ over blocks of Re Tr(Uᴴ V), for any pair of tags.
template <class TagA, class TagB>
double block_inner(const BlockSet<TagA>& u, const BlockSet<TagB>& v) {
  require_same_shape(u.dims(), v.dims(), "inner_product");
  double acc = real_inner(u.w, v.w);
  for (std::size_t g = 0; g < u.theta.size(); ++g)
    acc += real_inner(u.theta[g], v.theta[g]) + real_inner(u.psi[g], v.psi[g]);
  return acc;
}

/// The product metric: Re Tr(·ᴴ·) summed over blocks.
double inner_product(const TangentVector& u, const TangentVector& v);
double norm(const TangentVector& u);

/// Orthogonal projection of ambient matrices onto T_base M:
///   sphere  U - W Re Tr(Uᴴ W)
///   sym     (U + Uᵀ)/2
///   unitary U - Ψ (UᴴΨ + ΨᴴU)/2
TangentVector project_tangent(const ProductPoint& base, const AmbientBlocks& ambient);

/// Sphere: normalize by the Frobenius norm. Symmetric: identity.
/// Unitary: Q factor with positive-diagonal R. Throws DegenerateStepError
/// when W + dW vanishes.
ProductPoint retract(const ProductPoint& base, const TangentVector& step);

/// Projection-based transport of d (tangent at `from`) into T_to M.
TangentVector transport(const ProductPoint& from, const ProductPoint& to,
                        const TangentVector& d);

/// Gaussian draws projected onto each factor: W normalized, Θ_g = (A+Aᵀ)/2,
/// Ψ_g the unitary factor of a Gaussian matrix.
ProductPoint random_point(const ProductDims& dims, Rng& rng);

/// Gaussian ambient draw projected onto T_base M.
TangentVector random_tangent(const ProductPoint& base, Rng& rng);

struct PointResiduals {
  double sphere = 0.0;     // | ‖W‖² - 1 |
  double symmetry = 0.0;   // max_g ‖Θ_g - Θ_gᵀ‖
  double unitarity = 0.0;  // max_g ‖Ψ_g Ψ_gᴴ - I‖
};
PointResiduals point_residuals(const ProductPoint& p);

struct TangentResiduals {
  double sphere = 0.0;     // |Re Tr(dWᴴ W)|
  double symmetry = 0.0;   // max_g ‖dΘ_g - dΘ_gᵀ‖
  double unitarity = 0.0;  // max_g ‖dΨᴴΨ + ΨᴴdΨ‖
};
TangentResiduals tangent_residuals(const ProductPoint& base, const TangentVector& t);

/// Entrywise max |Ψ_g - Θ_g| over all groups.
double constraint_violation(const ProductPoint& p);

/// max_g ‖Θ_g Θ_gᴴ - I‖ (Frobenius).
double theta_unitarity_residual(const std::vector<CMatrix>& theta);

/// Adapter exposing the product manifold to the generic CG engine.
struct ProductManifold {
  using Point = ProductPoint;
  using Tangent = TangentVector;

  double inner(const Tangent& u, const Tangent& v) const { return inner_product(u, v); }
  Point retract(const Point& x, const Tangent& d) const { return bdris::retract(x, d); }
  Tangent transport(const Point& from, const Point& to, const Tangent& d) const {
    return bdris::transport(from, to, d);
  }
  /// a u + b v
  Tangent combine(double a, const Tangent& u, double b, const Tangent& v) const {
    return a * u + b * v;
  }
};

}  // namespace bdris
