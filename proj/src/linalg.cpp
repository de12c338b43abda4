#include "bdris/linalg.hpp"

#include <cmath>

#include "bdris/errors.hpp"

namespace bdris {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(master);
  for (std::uint64_t c : path) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

CMatrix complex_gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMatrix out(rows, cols);
  // Column-major fill keeps the draw order independent of Eigen internals.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      out(i, j) = cplx(re, im);
    }
  return out;
}

double real_inner(const CMatrix& a, const CMatrix& b) {
  return (a.array().conjugate() * b.array()).real().sum();
}

CMatrix unitary_factor(const CMatrix& a) {
  Eigen::HouseholderQR<CMatrix> qr(a);
  CMatrix q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (Index k = 0; k < a.cols(); ++k) {
    const cplx d = r(k, k);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(k) *= d / mag;
  }
  return q;
}

double log_det_hpd(const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericError("log_det_hpd: matrix is not positive definite");
  double acc = 0.0;
  for (Index k = 0; k < a.rows(); ++k)
    acc += std::log(llt.matrixLLT()(k, k).real());
  return 2.0 * acc;
}

double max_abs_entry(const CMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

}  // namespace bdris
