#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace bdris {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Master RNG type. Streams are derived per trial with derive_seed().
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent stream seed from a master seed and a path of
/// counters (trial index, start index, ...). Order of evaluation of trials
/// does not matter: each stream depends only on its own coordinates.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) noexcept;

/// Matrix of i.i.d. CN(0, 1) entries.
CMatrix complex_gaussian(Index rows, Index cols, Rng& rng);

/// Re Tr(A^H B), the real trace inner product.
double real_inner(const CMatrix& a, const CMatrix& b);

/// Q factor of the QR factorization of a square matrix, with the phases of
/// the triangular factor's diagonal moved into Q so that R has a positive
/// real diagonal. Deterministic for full-rank input.
CMatrix unitary_factor(const CMatrix& a);

/// log det of a Hermitian positive-definite matrix (natural log). Throws
/// NumericError when the Cholesky factorization fails.
double log_det_hpd(const CMatrix& a);

/// Maximum entry modulus, the ‖·‖_∞ used for constraint violations.
double max_abs_entry(const CMatrix& a);

}  // namespace bdris
