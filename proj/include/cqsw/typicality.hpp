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

// Typical sequence sets and (conditionally) typical subspace projectors.
//
// Sequences use strong (letter-frequency) typicality:
//   x^n typical  <=>  |N(x|x^n)/n - p(x)| <= delta for all x, and N(x|x^n) = 0 if p(x) = 0.
// Subspaces use entropy typicality on eigenvalue products:
//   |-(1/n) log2(lambda_{i1} ... lambda_{in}) - H(rho)| <= delta.
// Products are accumulated in log space.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cqsw/cq_system.hpp"
#include "cqsw/errors.hpp"
#include "cqsw/linalg.hpp"

namespace cqsw {

inline constexpr std::size_t kDefaultMaxDenseDim = 8192;
inline constexpr std::uint64_t kDefaultMaxEnumeration = std::uint64_t{1} << 24;

namespace detail {
// Slack on typicality windows so that values landing exactly on an edge are
// classified the same way on every platform.
inline constexpr double kWindowSlack = 1e-12;
// Eigenvalues at or below this are treated as exact zeros.
inline constexpr double kZeroEigenvalue = 1e-14;

inline void check_typicality_args(std::size_t n, double delta) {
  if (n == 0) throw ValidationError("typicality: n must be >= 1");
  if (!(delta > 0.0)) throw ValidationError("typicality: delta must be > 0");
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 r = static_cast<unsigned __int128>(a) * b;
  if (r > std::numeric_limits<std::uint64_t>::max()) throw CapExceeded("integer count overflow");
  return static_cast<std::uint64_t>(r);
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max()) throw CapExceeded("binomial overflow");
  }
  return static_cast<std::uint64_t>(r);
}

/// Calls fn(counts) for every composition of n into `parts` non-negative parts.
template <class Fn>
void for_each_composition(std::size_t n, std::size_t parts, Fn&& fn) {
  std::vector<std::size_t> counts(parts, 0);
  auto rec = [&](auto&& self, std::size_t part, std::size_t remaining) -> void {
    if (part + 1 == parts) {
      counts[part] = remaining;
      fn(std::as_const(counts));
      return;
    }
    for (std::size_t c = 0; c <= remaining; ++c) {
      counts[part] = c;
      self(self, part + 1, remaining - c);
    }
  };
  rec(rec, 0, n);
}

inline std::uint64_t multinomial(const std::vector<std::size_t>& counts) {
  std::uint64_t total = 0, out = 1;
  for (auto c : counts) {
    total += c;
    out = checked_mul(out, binomial(total, c));
  }
  return out;
}

/// Entropy-typicality of one eigen-index type: counts[j] copies of eigenvalue j.
struct SpectralWindow {
  std::vector<double> log2_eigenvalues;  // -inf for zero eigenvalues
  double entropy = 0.0;
  double delta = 0.0;

  static SpectralWindow from_spectrum(const RealVector& eigenvalues, double delta) {
    SpectralWindow w;
    w.delta = delta;
    std::vector<double> clamped;
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
      const double v = eigenvalues(k) <= kZeroEigenvalue ? 0.0 : eigenvalues(k);
      clamped.push_back(v);
      w.log2_eigenvalues.push_back(v > 0.0 ? std::log2(v) : -std::numeric_limits<double>::infinity());
    }
    w.entropy = spectrum_entropy(clamped);
    return w;
  }

  bool typical(const std::vector<std::size_t>& counts, std::size_t length) const {
    double log_product = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      if (counts[j] == 0) continue;
      if (!std::isfinite(log2_eigenvalues[j])) return false;
      log_product += static_cast<double>(counts[j]) * log2_eigenvalues[j];
    }
    const double rate = -log_product / static_cast<double>(length);
    return std::abs(rate - entropy) <= delta + kWindowSlack;
  }

  double log2_probability(const std::vector<std::size_t>& counts) const {
    double log_product = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j)
      if (counts[j] > 0) log_product += static_cast<double>(counts[j]) * log2_eigenvalues[j];
    return log_product;
  }
};

}  // namespace detail

// --------------------------------------------------------------------------
// Typical sequences

/// Strong typicality test for one sequence; no enumeration.
inline bool is_typical_sequence(std::span<const double> probs, const Sequence& xn, double delta) {
  if (xn.empty()) return false;
  std::vector<std::size_t> counts(probs.size(), 0);
  for (auto x : xn) {
    if (x >= probs.size()) throw ValidationError("sequence index outside alphabet");
    ++counts[x];
  }
  const double n = static_cast<double>(xn.size());
  for (std::size_t x = 0; x < probs.size(); ++x) {
    if (probs[x] == 0.0 && counts[x] > 0) return false;
    if (std::abs(static_cast<double>(counts[x]) / n - probs[x]) > delta + detail::kWindowSlack) return false;
  }
  return true;
}

/// delta' = delta * sum_x |log2 p(x)| over the support: the entropy slack that
/// strong delta-typicality implies.
inline double implied_entropy_delta(std::span<const double> probs, double delta) {
  double s = 0.0;
  for (double p : probs)
    if (p > 0.0) s += std::abs(std::log2(p));
  return delta * s;
}

struct TypicalSet {
  std::size_t n = 0;
  double delta = 0.0;
  double implied_delta = 0.0;
  double entropy = 0.0;
  std::vector<Sequence> members;  // lexicographic order
  double total_prob = 0.0;

  double log2_lower_bound() const { return static_cast<double>(n) * (entropy - implied_delta); }
  double log2_upper_bound() const { return static_cast<double>(n) * (entropy + implied_delta); }
  double log2_size() const {
    return members.empty() ? -std::numeric_limits<double>::infinity()
                           : std::log2(static_cast<double>(members.size()));
  }
  bool lower_bound_holds() const { return log2_size() >= log2_lower_bound() - 1e-9; }
  bool upper_bound_holds() const { return log2_size() <= log2_upper_bound() + 1e-9; }
};

inline TypicalSet typical_set(std::span<const double> probs, std::size_t n, double delta,
                              std::uint64_t max_enumeration = kDefaultMaxEnumeration) {
  detail::check_typicality_args(n, delta);
  validate_distribution(probs);
  const std::uint64_t count = sequence_count(probs.size(), n, max_enumeration);
  TypicalSet out;
  out.n = n;
  out.delta = delta;
  out.implied_delta = implied_entropy_delta(probs, delta);
  out.entropy = spectrum_entropy(probs);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    Sequence xn = sequence_from_index(idx, probs.size(), n);
    if (!is_typical_sequence(probs, xn, delta)) continue;
    double p = 1.0;
    for (auto x : xn) p *= probs[x];
    out.total_prob += p;
    out.members.push_back(std::move(xn));
  }
  if (!out.upper_bound_holds())
    throw std::logic_error("typical_set: cardinality exceeds 2^{n(H+delta')}");
  return out;
}

// --------------------------------------------------------------------------
// Typical subspaces

/// Projector onto a span of product eigenvectors. Stored in factored form: one
/// local eigenbasis per tensor position plus a selection mask over eigen-index
/// tuples (lexicographic, position 0 most significant). `matrix()` materializes.
class TypicalProjector {
 public:
  std::size_t n() const noexcept { return n_; }
  double delta() const noexcept { return delta_; }
  std::size_t subspace_dim() const noexcept { return subspace_dim_; }
  std::size_t dim() const noexcept { return mask_.size(); }
  const std::vector<ComplexMatrix>& local_bases() const noexcept { return local_bases_; }
  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }

  /// log2 of the dimension window [lower, upper] that the construction targets.
  double log2_lower_bound() const noexcept { return log2_lower_; }
  double log2_upper_bound() const noexcept { return log2_upper_; }
  double log2_dim() const {
    return subspace_dim_ == 0 ? -std::numeric_limits<double>::infinity()
                              : std::log2(static_cast<double>(subspace_dim_));
  }
  bool lower_bound_holds() const { return log2_dim() >= log2_lower_ - 1e-9; }
  bool upper_bound_holds() const { return log2_dim() <= log2_upper_ + 1e-9; }

  /// Orthonormal columns spanning the subspace.
  ComplexMatrix basis() const {
    const auto dim = static_cast<Eigen::Index>(mask_.size());
    ComplexMatrix cols(dim, static_cast<Eigen::Index>(subspace_dim_));
    std::vector<std::size_t> digits(n_, 0);
    Eigen::Index c = 0;
    for (std::size_t t = 0; t < mask_.size(); ++t) {
      if (mask_[t]) {
        ComplexVector v = local_bases_[0].col(static_cast<Eigen::Index>(digits[0]));
        for (std::size_t k = 1; k < n_; ++k)
          v = Eigen::kroneckerProduct(v, local_bases_[k].col(static_cast<Eigen::Index>(digits[k]))).eval();
        cols.col(c++) = v;
      }
      increment(digits);
    }
    return cols;
  }

  ComplexMatrix matrix() const {
    const ComplexMatrix b = basis();
    return b * b.adjoint();
  }

  /// Tr(state * projector).
  double capture(const ComplexMatrix& state) const {
    if (static_cast<std::size_t>(state.rows()) != mask_.size()) throw DimensionError("capture: dimension mismatch");
    const ComplexMatrix b = basis();
    return (b.adjoint() * state * b).trace().real();
  }

 private:
  friend TypicalProjector typical_projector(const DensityOperator&, std::size_t, double, std::size_t);
  friend TypicalProjector cond_typical_projector(const CqEnsemble&, const Sequence&, double, std::size_t);

  void increment(std::vector<std::size_t>& digits) const {
    for (std::size_t k = n_; k-- > 0;) {
      if (++digits[k] < static_cast<std::size_t>(local_bases_[k].cols())) return;
      digits[k] = 0;
    }
  }

  void finish() {
    subspace_dim_ = 0;
    for (auto m : mask_) subspace_dim_ += m;
    if (!upper_bound_holds())
      throw std::logic_error("typical projector dimension exceeds its entropy upper bound");
  }

  std::size_t n_ = 0;
  double delta_ = 0.0;
  std::vector<ComplexMatrix> local_bases_;
  std::vector<std::uint8_t> mask_;
  std::size_t subspace_dim_ = 0;
  double log2_lower_ = 0.0;
  double log2_upper_ = 0.0;
};

inline std::size_t checked_power(std::size_t base, std::size_t n, std::size_t cap, const char* what) {
  std::size_t out = 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (out > cap / base)
      throw CapExceeded(std::string(what) + ": dimension " + std::to_string(base) + "^" + std::to_string(n) +
                        " exceeds the dense cap " + std::to_string(cap));
    out *= base;
  }
  return out;
}

/// Rank of the delta-typical subspace of rho^{(x)n}, counted by eigen-index type
/// classes (no enumeration of the d^n product eigenvalues).
inline std::uint64_t typical_subspace_dimension(const RealVector& eigenvalues, std::size_t n, double delta) {
  detail::check_typicality_args(n, delta);
  const auto window = detail::SpectralWindow::from_spectrum(eigenvalues, delta);
  std::uint64_t dim = 0;
  detail::for_each_composition(n, static_cast<std::size_t>(eigenvalues.size()),
                               [&](const std::vector<std::size_t>& counts) {
                                 if (window.typical(counts, n)) dim += detail::multinomial(counts);
                               });
  return dim;
}

/// Tr(rho^{(x)n} Pi) from the spectrum alone, by type classes.
inline double typical_subspace_capture(const RealVector& eigenvalues, std::size_t n, double delta) {
  detail::check_typicality_args(n, delta);
  const auto window = detail::SpectralWindow::from_spectrum(eigenvalues, delta);
  double mass = 0.0;
  detail::for_each_composition(n, static_cast<std::size_t>(eigenvalues.size()),
                               [&](const std::vector<std::size_t>& counts) {
                                 if (!window.typical(counts, n)) return;
                                 mass += static_cast<double>(detail::multinomial(counts)) *
                                         std::exp2(window.log2_probability(counts));
                               });
  return mass;
}

inline TypicalProjector typical_projector(const DensityOperator& rho, std::size_t n, double delta,
                                          std::size_t max_dim = kDefaultMaxDenseDim) {
  detail::check_typicality_args(n, delta);
  const std::size_t d = rho.dim();
  const std::size_t total = checked_power(d, n, max_dim, "typical_projector");
  const HermitianSpectrum spec = eig_hermitian(rho.matrix());
  const auto window = detail::SpectralWindow::from_spectrum(spec.eigenvalues, delta);

  TypicalProjector out;
  out.n_ = n;
  out.delta_ = delta;
  out.local_bases_.assign(n, spec.eigenvectors);
  out.mask_.assign(total, 0);
  out.log2_lower_ = static_cast<double>(n) * (window.entropy - delta);
  out.log2_upper_ = static_cast<double>(n) * (window.entropy + delta);

  std::vector<std::size_t> digits(n, 0), counts(d, 0);
  for (std::size_t t = 0; t < total; ++t) {
    std::fill(counts.begin(), counts.end(), 0);
    for (auto j : digits) ++counts[j];
    out.mask_[t] = window.typical(counts, n) ? 1 : 0;
    out.increment(digits);
  }
  out.finish();
  if (out.subspace_dim_ != typical_subspace_dimension(spec.eigenvalues, n, delta))
    throw std::logic_error("typical_projector: tuple mask disagrees with type-class count");
  return out;
}

/// Conditionally typical projector for x^n: on the positions carrying letter x,
/// the delta-typical subspace of rho_x^{(x)N(x|x^n)}; tensor product over letters,
/// laid out in sequence position order.
inline TypicalProjector cond_typical_projector(const CqEnsemble& e, const Sequence& xn, double delta,
                                               std::size_t max_dim = kDefaultMaxDenseDim) {
  const std::size_t n = xn.size();
  detail::check_typicality_args(n, delta);
  const std::size_t d = e.dim();
  const std::size_t total = checked_power(d, n, max_dim, "cond_typical_projector");

  std::vector<std::size_t> letter_count(e.size(), 0);
  for (auto x : xn) {
    if (x >= e.size()) throw ValidationError("sequence index outside alphabet");
    ++letter_count[x];
  }
  std::vector<HermitianSpectrum> spectra;
  std::vector<detail::SpectralWindow> windows;
  for (std::size_t x = 0; x < e.size(); ++x) {
    spectra.push_back(eig_hermitian(e.states()[x].matrix()));
    windows.push_back(detail::SpectralWindow::from_spectrum(spectra.back().eigenvalues, delta));
  }

  TypicalProjector out;
  out.n_ = n;
  out.delta_ = delta;
  for (auto x : xn) out.local_bases_.push_back(spectra[x].eigenvectors);
  out.mask_.assign(total, 0);
  double centre = 0.0;
  for (std::size_t x = 0; x < e.size(); ++x) centre += static_cast<double>(letter_count[x]) * windows[x].entropy;
  out.log2_lower_ = centre - static_cast<double>(n) * delta;
  out.log2_upper_ = centre + static_cast<double>(n) * delta;

  std::vector<std::size_t> digits(n, 0);
  std::vector<std::vector<std::size_t>> counts(e.size(), std::vector<std::size_t>(d, 0));
  for (std::size_t t = 0; t < total; ++t) {
    for (auto& c : counts) std::fill(c.begin(), c.end(), 0);
    for (std::size_t k = 0; k < n; ++k) ++counts[xn[k]][digits[k]];
    bool typical = true;
    for (std::size_t x = 0; x < e.size() && typical; ++x)
      if (letter_count[x] > 0) typical = windows[x].typical(counts[x], letter_count[x]);
    out.mask_[t] = typical ? 1 : 0;
    out.increment(digits);
  }
  out.finish();

  std::uint64_t expected = 1;
  for (std::size_t x = 0; x < e.size(); ++x)
    if (letter_count[x] > 0)
      expected *= typical_subspace_dimension(spectra[x].eigenvalues, letter_count[x], delta);
  if (out.subspace_dim_ != expected)
    throw std::logic_error("cond_typical_projector: tuple mask disagrees with type-class count");
  return out;
}

/// The coarser window 2^{n[H(Q|X) +- K delta]} with K = number of distinct
/// letters in x^n, relative to the ensemble's H(Q|X).
struct ConditionalDimensionWindow {
  double log2_lower;
  double log2_upper;
  std::size_t k;
};

inline ConditionalDimensionWindow conditional_dimension_window(const CqEnsemble& e, const Sequence& xn,
                                                               double delta) {
  std::vector<bool> seen(e.size(), false);
  std::size_t k = 0;
  for (auto x : xn)
    if (!seen.at(x)) {
      seen[x] = true;
      ++k;
    }
  const double n = static_cast<double>(xn.size());
  const double h = conditional_q_entropy(e);
  return {n * (h - static_cast<double>(k) * delta), n * (h + static_cast<double>(k) * delta), k};
}

}  // namespace cqsw
