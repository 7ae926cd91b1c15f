// Copyright 2026 The cqsw Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense complex Hermitian linear algebra on small Hilbert spaces.
//
// Everything here is a pure function of its arguments. Validated wrappers
// (DensityOperator, Povm) are immutable once constructed.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cqsw/errors.hpp"

namespace cqsw {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tol {
inline constexpr double kHermitian = 1e-10;
inline constexpr double kPsd = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kCompleteness = 1e-8;
inline constexpr double kPseudoInverse = 1e-12;
// Eigenvalues closer than this (relative to max(1, |spectrum|)) share a block.
inline constexpr double kDegenerate = 1e-9;
}  // namespace tol

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& m, double tolerance = tol::kHermitian) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tolerance;
}

inline ComplexMatrix identity(std::size_t dim) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(dim),
                                 static_cast<Eigen::Index>(dim));
}

/// |v><v| for a (not necessarily normalized) vector.
inline ComplexMatrix outer(const ComplexVector& v) { return v * v.adjoint(); }

/// Kronecker product, index convention (i*dim_b + k, j*dim_b + l).
inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

inline ComplexMatrix tensor_product(std::span<const ComplexMatrix> factors) {
  if (factors.empty()) return ComplexMatrix::Identity(1, 1);
  ComplexMatrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = tensor_product(out, factors[k]);
  return out;
}

/// Marginal of `m` on the tensor factors listed in `keep` (any order, kept in
/// ascending factor order in the result).
inline ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                                   std::span<const std::size_t> keep) {
  if (m.rows() != m.cols()) throw DimensionError("partial_trace: matrix is not square");
  std::size_t total = 1;
  for (auto d : dims) {
    if (d == 0) throw DimensionError("partial_trace: zero factor dimension");
    total *= d;
  }
  if (total != static_cast<std::size_t>(m.rows()))
    throw DimensionError("partial_trace: product of dims " + std::to_string(total) +
                         " does not match matrix dimension " + std::to_string(m.rows()));

  const std::size_t factors = dims.size();
  std::vector<bool> kept(factors, false);
  for (auto k : keep) {
    if (k >= factors) throw DimensionError("partial_trace: keep index out of range");
    kept[k] = true;
  }
  // Row-major strides of the full index.
  std::vector<std::size_t> stride(factors, 1);
  for (std::size_t k = factors; k-- > 1;) stride[k - 1] = stride[k] * dims[k];

  std::vector<std::size_t> kept_dims, traced_dims, kept_stride, traced_stride;
  for (std::size_t k = 0; k < factors; ++k) {
    (kept[k] ? kept_dims : traced_dims).push_back(dims[k]);
    (kept[k] ? kept_stride : traced_stride).push_back(stride[k]);
  }
  auto offsets = [](const std::vector<std::size_t>& ds, const std::vector<std::size_t>& st) {
    std::size_t count = 1;
    for (auto d : ds) count *= d;
    std::vector<std::size_t> out(count, 0);
    for (std::size_t idx = 0; idx < count; ++idx) {
      std::size_t rem = idx, off = 0;
      for (std::size_t k = ds.size(); k-- > 0;) {
        off += (rem % ds[k]) * st[k];
        rem /= ds[k];
      }
      out[idx] = off;
    }
    return out;
  };
  const auto kept_off = offsets(kept_dims, kept_stride);
  const auto traced_off = offsets(traced_dims, traced_stride);

  const auto out_dim = static_cast<Eigen::Index>(kept_off.size());
  ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);
  for (Eigen::Index a = 0; a < out_dim; ++a)
    for (Eigen::Index b = 0; b < out_dim; ++b) {
      Complex acc{0.0, 0.0};
      for (auto t : traced_off)
        acc += m(static_cast<Eigen::Index>(kept_off[a] + t), static_cast<Eigen::Index>(kept_off[b] + t));
      out(a, b) = acc;
    }
  return out;
}

/// Eigenvalues sorted descending, eigenvectors as orthonormal columns.
struct HermitianSpectrum {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;

  ComplexMatrix reconstruct() const {
    return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
  }
};

namespace detail {

inline void require_hermitian(const ComplexMatrix& m, const char* who) {
  if (m.rows() != m.cols())
    throw DimensionError(std::string(who) + ": matrix is not square");
  if (!is_hermitian(m))
    throw ValidationError(std::string(who) + ": matrix is not Hermitian (max |M - M^dagger| = " +
                          std::to_string(max_abs(m - m.adjoint())) + ")");
}

// Raw solver output, descending, no basis canonicalization.
inline HermitianSpectrum raw_spectrum(const ComplexMatrix& m) {
  const ComplexMatrix sym = (m + m.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) throw ConstructionError("eigensolver did not converge");
  const auto dim = sym.rows();
  HermitianSpectrum out{RealVector(dim), ComplexMatrix(dim, dim)};
  for (Eigen::Index k = 0; k < dim; ++k) {
    out.eigenvalues(k) = solver.eigenvalues()(dim - 1 - k);
    out.eigenvectors.col(k) = solver.eigenvectors().col(dim - 1 - k);
  }
  return out;
}

inline RealVector raw_eigenvalues(const ComplexMatrix& m) {
  const ComplexMatrix sym = (m + m.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConstructionError("eigensolver did not converge");
  return solver.eigenvalues().reverse();
}

// Replace the columns of `block` (an orthonormal basis of one eigenspace) by the
// Gram-Schmidt basis obtained from projecting canonical basis vectors e_0, e_1, ...
// in index order. The accepted pivot component of each vector is real positive.
inline ComplexMatrix canonical_block_basis(const ComplexMatrix& block) {
  constexpr double kAccept = 1e-5;
  const auto dim = block.rows();
  const auto size = block.cols();
  ComplexMatrix out(dim, size);
  Eigen::Index found = 0;
  for (Eigen::Index k = 0; k < dim && found < size; ++k) {
    ComplexVector w = block * block.row(k).adjoint();
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < found; ++j) w -= out.col(j) * out.col(j).dot(w);
    const double norm = w.norm();
    if (norm <= kAccept) continue;
    w /= norm;
    const Complex pivot = w(k);
    if (std::abs(pivot) > 0.0) w *= std::conj(pivot) / std::abs(pivot);
    out.col(found++) = w;
  }
  if (found != size) throw ConstructionError("degenerate eigenspace canonicalization failed");
  return out;
}

}  // namespace detail

/// Full spectrum of a Hermitian matrix. Eigenvalues are descending; each
/// degenerate eigenspace gets the canonical Gram-Schmidt basis so results are
/// reproducible run to run.
inline HermitianSpectrum eig_hermitian(const ComplexMatrix& m) {
  detail::require_hermitian(m, "eig_hermitian");
  HermitianSpectrum spec = detail::raw_spectrum(m);
  const auto dim = spec.eigenvalues.size();
  if (dim == 0) return spec;
  const double scale = std::max(1.0, spec.eigenvalues.cwiseAbs().maxCoeff());
  Eigen::Index start = 0;
  while (start < dim) {
    Eigen::Index stop = start + 1;
    while (stop < dim &&
           spec.eigenvalues(stop - 1) - spec.eigenvalues(stop) <= tol::kDegenerate * scale)
      ++stop;
    const ComplexMatrix block = spec.eigenvectors.middleCols(start, stop - start);
    spec.eigenvectors.middleCols(start, stop - start) = detail::canonical_block_basis(block);
    start = stop;
  }
  return spec;
}

/// f applied to the eigenvalues of a PSD matrix. Eigenvalues in [-1e-10, 0)
/// are clamped to zero before f is applied.
inline ComplexMatrix psd_function(const ComplexMatrix& m, const std::function<double(double)>& f) {
  detail::require_hermitian(m, "psd_function");
  HermitianSpectrum spec = detail::raw_spectrum(m);
  if (spec.eigenvalues.size() > 0) {
    const double min_eig = spec.eigenvalues.minCoeff();
    if (min_eig < -tol::kPsd)
      throw ValidationError("psd_function: matrix has negative eigenvalue " + std::to_string(min_eig));
  }
  for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k)
    spec.eigenvalues(k) = f(std::max(0.0, spec.eigenvalues(k)));
  return spec.reconstruct();
}

inline ComplexMatrix sqrt_psd(const ComplexMatrix& m) {
  return psd_function(m, [](double x) { return std::sqrt(x); });
}

/// Pseudo-inverse square root: eigenvalues below 1e-12 map to zero.
inline ComplexMatrix inv_sqrt_psd(const ComplexMatrix& m) {
  return psd_function(m, [](double x) { return x < tol::kPseudoInverse ? 0.0 : 1.0 / std::sqrt(x); });
}

/// Shannon entropy in bits of a spectrum; non-positive entries contribute 0.
inline double spectrum_entropy(std::span<const double> values) {
  double h = 0.0;
  for (double v : values)
    if (v > 0.0) h -= v * std::log2(v);
  return std::max(0.0, h);
}

/// Positive unit-trace Hermitian matrix.
class DensityOperator {
 public:
  static DensityOperator from_matrix(ComplexMatrix m) {
    if (m.rows() == 0 || m.rows() != m.cols())
      throw DimensionError("density operator must be a non-empty square matrix");
    if (!is_hermitian(m))
      throw ValidationError("density operator is not Hermitian");
    const double trace = m.trace().real();
    if (std::abs(trace - 1.0) > tol::kTrace)
      throw ValidationError("density operator violates unit trace (trace = " + std::to_string(trace) + ")");
    const double min_eig = detail::raw_eigenvalues(m).minCoeff();
    if (min_eig < -tol::kPsd)
      throw ValidationError("density operator is not positive semidefinite (min eigenvalue = " +
                            std::to_string(min_eig) + ")");
    return DensityOperator(std::move(m));
  }

  static DensityOperator pure(const ComplexVector& ket) {
    const double norm = ket.norm();
    if (norm == 0.0) throw ValidationError("pure state from zero vector");
    const ComplexVector unit = ket / norm;
    return DensityOperator(outer(unit));
  }

  static DensityOperator maximally_mixed(std::size_t dim) {
    return DensityOperator(identity(dim) / static_cast<double>(dim));
  }

  /// Tensor product of valid states; valid by construction so not re-checked.
  static DensityOperator product(std::span<const DensityOperator> factors) {
    if (factors.empty()) throw ValidationError("empty tensor product of states");
    ComplexMatrix out = factors.front().matrix();
    for (std::size_t k = 1; k < factors.size(); ++k) out = tensor_product(out, factors[k].matrix());
    return DensityOperator(std::move(out));
  }

  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }

 private:
  explicit DensityOperator(ComplexMatrix m) : matrix_(std::move(m)) {}

  // Mixtures and other closed operations that preserve validity.
  friend DensityOperator mix(std::span<const double>, std::span<const DensityOperator>);
  friend DensityOperator trusted_state(ComplexMatrix);

  ComplexMatrix matrix_;
};

/// Convex combination of states; weights must already be a distribution.
inline DensityOperator mix(std::span<const double> weights, std::span<const DensityOperator> states) {
  if (weights.size() != states.size() || states.empty())
    throw DimensionError("mix: weight/state count mismatch");
  ComplexMatrix acc = ComplexMatrix::Zero(states.front().matrix().rows(), states.front().matrix().cols());
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].dim() != states.front().dim()) throw DimensionError("mix: states differ in dimension");
    acc += weights[k] * states[k].matrix();
  }
  return DensityOperator((acc + acc.adjoint()) * 0.5);
}

/// For internal constructions known to yield a state up to rounding; Hermitian
/// part taken, trace renormalized.
inline DensityOperator trusted_state(ComplexMatrix m) {
  ComplexMatrix h = (m + m.adjoint()) * 0.5;
  const double tr = h.trace().real();
  if (!(tr > 0.0)) throw ConstructionError("trusted_state: non-positive trace");
  return DensityOperator(h / tr);
}

/// Positive operator-valued measure: PSD elements summing to the identity.
class Povm {
 public:
  static Povm from_elements(std::vector<ComplexMatrix> elements, std::vector<std::string> labels = {}) {
    if (elements.empty()) throw ValidationError("POVM has no elements");
    if (labels.empty()) {
      labels.reserve(elements.size());
      for (std::size_t k = 0; k < elements.size(); ++k) labels.push_back(std::to_string(k));
    }
    if (labels.size() != elements.size()) throw DimensionError("POVM label count mismatch");
    const auto dim = elements.front().rows();
    ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
    for (std::size_t k = 0; k < elements.size(); ++k) {
      const auto& e = elements[k];
      if (e.rows() != dim || e.cols() != dim)
        throw DimensionError("POVM element " + std::to_string(k) + " has wrong shape");
      if (!is_hermitian(e))
        throw ValidationError("POVM element " + std::to_string(k) + " is not Hermitian");
      const double min_eig = detail::raw_eigenvalues(e).minCoeff();
      if (min_eig < -tol::kPsd)
        throw ValidationError("POVM element " + std::to_string(k) + " is not PSD (min eigenvalue = " +
                              std::to_string(min_eig) + ")");
      sum += e;
    }
    const double defect = max_abs(sum - ComplexMatrix::Identity(dim, dim));
    if (defect > tol::kCompleteness)
      throw ValidationError("POVM elements do not sum to identity (max deviation " + std::to_string(defect) + ")");
    return Povm(std::move(elements), std::move(labels));
  }

  const std::vector<ComplexMatrix>& elements() const noexcept { return elements_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return elements_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(elements_.front().rows()); }

  /// Born probabilities Tr(rho Lambda_j).
  std::vector<double> probabilities(const ComplexMatrix& rho) const {
    std::vector<double> out;
    out.reserve(elements_.size());
    for (const auto& e : elements_) out.push_back((rho * e).trace().real());
    return out;
  }

 private:
  Povm(std::vector<ComplexMatrix> elements, std::vector<std::string> labels)
      : elements_(std::move(elements)), labels_(std::move(labels)) {}

  std::vector<ComplexMatrix> elements_;
  std::vector<std::string> labels_;
};

/// Trace norm of rho - sigma, in [0, 2].
inline double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("trace_distance: dimension mismatch");
  return detail::raw_eigenvalues(rho.matrix() - sigma.matrix()).cwiseAbs().sum();
}

/// Trace norm of an arbitrary Hermitian matrix.
inline double trace_norm(const ComplexMatrix& m) {
  detail::require_hermitian(m, "trace_norm");
  return detail::raw_eigenvalues(m).cwiseAbs().sum();
}

/// -Tr rho log2 rho in bits.
inline double von_neumann_entropy(const DensityOperator& rho) {
  const RealVector ev = detail::raw_eigenvalues(rho.matrix());
  return spectrum_entropy(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size())));
}

// A few standard kets.
namespace kets {
inline ComplexVector basis(std::size_t dim, std::size_t index) {
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}
inline ComplexVector zero() { return basis(2, 0); }
inline ComplexVector one() { return basis(2, 1); }
inline ComplexVector plus() {
  ComplexVector v(2);
  v << M_SQRT1_2, M_SQRT1_2;
  return v;
}
inline ComplexVector minus() {
  ComplexVector v(2);
  v << M_SQRT1_2, -M_SQRT1_2;
  return v;
}
inline ComplexVector plus_i() {
  ComplexVector v(2);
  v << M_SQRT1_2, Complex(0.0, M_SQRT1_2);
  return v;
}
inline ComplexVector minus_i() {
  ComplexVector v(2);
  v << M_SQRT1_2, Complex(0.0, -M_SQRT1_2);
  return v;
}
}  // namespace kets

}  // namespace cqsw
