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

// Classical-quantum systems XQ: ensembles {p(x), rho_x}, their block-diagonal
// embedding, and the entropic rate quantities. All entropies are in bits.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cqsw/errors.hpp"
#include "cqsw/linalg.hpp"

namespace cqsw {

/// x^n as alphabet indices.
using Sequence = std::vector<std::uint32_t>;

inline constexpr double kProbabilityTolerance = 1e-10;

/// Throws unless `probs` is a distribution within 1e-10. Never renormalizes.
inline void validate_distribution(std::span<const double> probs, const std::string& what = "probability vector") {
  if (probs.empty()) throw ValidationError(what + " is empty");
  double sum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (!std::isfinite(probs[k]) || probs[k] < 0.0)
      throw ValidationError(what + "[" + std::to_string(k) + "] is negative or not finite");
    sum += probs[k];
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance)
    throw ValidationError(what + " sums to " + std::to_string(sum) + ", not 1");
}

/// h2(p) in bits.
inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("binary_entropy: p outside [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

inline double shannon_entropy(std::span<const double> probs) {
  validate_distribution(probs);
  return spectrum_entropy(probs);
}

/// Ensemble {p(x), rho_x} over a finite alphabet; all states share one dimension.
class CqEnsemble {
 public:
  static CqEnsemble create(std::vector<std::string> alphabet, std::vector<double> probs,
                           std::vector<DensityOperator> states) {
    if (alphabet.size() != probs.size() || probs.size() != states.size())
      throw DimensionError("ensemble: alphabet, probs and states must have equal length");
    validate_distribution(probs, "probs");
    for (std::size_t k = 1; k < states.size(); ++k)
      if (states[k].dim() != states.front().dim())
        throw DimensionError("ensemble: state " + std::to_string(k) + " has dimension " +
                             std::to_string(states[k].dim()) + ", expected " +
                             std::to_string(states.front().dim()));
    return CqEnsemble(std::move(alphabet), std::move(probs), std::move(states));
  }

  /// Alphabet labels default to "0", "1", ...
  static CqEnsemble create(std::vector<double> probs, std::vector<DensityOperator> states) {
    std::vector<std::string> alphabet;
    for (std::size_t k = 0; k < probs.size(); ++k) alphabet.push_back(std::to_string(k));
    return create(std::move(alphabet), std::move(probs), std::move(states));
  }

  const std::vector<std::string>& alphabet() const noexcept { return alphabet_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  const std::vector<DensityOperator>& states() const noexcept { return states_; }
  std::size_t size() const noexcept { return probs_.size(); }
  std::size_t dim() const noexcept { return states_.front().dim(); }

  /// sum_x p(x) rho_x
  DensityOperator average_state() const { return mix(probs_, states_); }

  std::string label(const Sequence& xn) const {
    std::string out;
    const bool single_chars = std::all_of(alphabet_.begin(), alphabet_.end(),
                                          [](const std::string& s) { return s.size() == 1; });
    for (std::size_t k = 0; k < xn.size(); ++k) {
      if (k > 0 && !single_chars) out += ' ';
      out += alphabet_.at(xn[k]);
    }
    return out;
  }

 private:
  CqEnsemble(std::vector<std::string> alphabet, std::vector<double> probs, std::vector<DensityOperator> states)
      : alphabet_(std::move(alphabet)), probs_(std::move(probs)), states_(std::move(states)) {}

  std::vector<std::string> alphabet_;
  std::vector<double> probs_;
  std::vector<DensityOperator> states_;
};

/// Block-diagonal sum_x p(x) |x><x| (x) rho_x on dimension |X| * d.
inline DensityOperator ehs_state(const CqEnsemble& e) {
  const auto d = static_cast<Eigen::Index>(e.dim());
  const auto total = static_cast<Eigen::Index>(e.size()) * d;
  ComplexMatrix m = ComplexMatrix::Zero(total, total);
  for (std::size_t x = 0; x < e.size(); ++x) {
    const auto off = static_cast<Eigen::Index>(x) * d;
    m.block(off, off, d, d) = e.probs()[x] * e.states()[x].matrix();
  }
  return trusted_state(std::move(m));
}

/// sum_x p(x) H(rho_x)
inline double conditional_q_entropy(const CqEnsemble& e) {
  double h = 0.0;
  for (std::size_t x = 0; x < e.size(); ++x)
    if (e.probs()[x] > 0.0) h += e.probs()[x] * von_neumann_entropy(e.states()[x]);
  return h;
}

/// chi = H(sum_x p(x) rho_x) - sum_x p(x) H(rho_x)
inline double holevo_information(const CqEnsemble& e) {
  return std::max(0.0, von_neumann_entropy(e.average_state()) - conditional_q_entropy(e));
}

/// H(X|Q) = H(X) - chi, the optimal compression rate with side information.
inline double cqsw_rate(const CqEnsemble& e) {
  return std::max(0.0, shannon_entropy(e.probs()) - holevo_information(e));
}

/// All entropic quantities of the EHS state, computed from joint and marginals.
struct EhsEntropies {
  double h_a;   // = H(X)
  double h_q;
  double h_aq;

  double q_given_a() const { return h_aq - h_a; }
  double a_given_q() const { return h_aq - h_q; }
  double mutual_information() const { return h_a + h_q - h_aq; }
};

inline EhsEntropies ehs_entropies(const CqEnsemble& e) {
  const DensityOperator joint = ehs_state(e);
  const std::size_t dims[] = {e.size(), e.dim()};
  const std::size_t keep_a[] = {0};
  const std::size_t keep_q[] = {1};
  return EhsEntropies{
      von_neumann_entropy(trusted_state(partial_trace(joint.matrix(), dims, keep_a))),
      von_neumann_entropy(trusted_state(partial_trace(joint.matrix(), dims, keep_q))),
      von_neumann_entropy(joint)};
}

/// Ensemble of (outcome, reference) correlations when a POVM acts on one half
/// of the purification of rho:
///   p(x) = Tr(rho Lambda_x),  rho_x = [sqrt(rho) Lambda_x sqrt(rho)]^* / p(x),
/// with complex conjugation taken in the eigenbasis of rho (descending order).
/// Outcomes with p(x) <= 1e-12 are dropped.
inline CqEnsemble induced_ensemble(const DensityOperator& rho, const Povm& povm) {
  if (povm.dim() != rho.dim()) throw DimensionError("induced_ensemble: POVM/state dimension mismatch");
  const HermitianSpectrum spec = eig_hermitian(rho.matrix());
  const ComplexMatrix& basis = spec.eigenvectors;
  const ComplexMatrix root = sqrt_psd(rho.matrix());

  std::vector<std::string> labels;
  std::vector<double> probs;
  std::vector<ComplexMatrix> unnormalized;
  for (std::size_t k = 0; k < povm.size(); ++k) {
    const ComplexMatrix& element = povm.elements()[k];
    const double p = (rho.matrix() * element).trace().real();
    if (p <= tol::kPseudoInverse) continue;
    const ComplexMatrix in_basis = basis.adjoint() * (root * element * root) * basis;
    unnormalized.push_back(basis * in_basis.conjugate() * basis.adjoint());
    probs.push_back(p);
    labels.push_back(povm.labels()[k]);
  }
  // Dropped outcomes leave the kept mass short of 1 by at most their total.
  double kept = 0.0;
  for (double p : probs) kept += p;
  std::vector<DensityOperator> states;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    states.push_back(trusted_state(unnormalized[k] / probs[k]));
    probs[k] /= kept;
  }
  return CqEnsemble::create(std::move(labels), std::move(probs), std::move(states));
}

/// rho_{x^n} together with its weight p(x^n).
struct SequenceState {
  Sequence sequence;
  DensityOperator state;
  double probability;
};

inline double sequence_probability(const CqEnsemble& e, const Sequence& xn) {
  double p = 1.0;
  for (auto x : xn) {
    if (x >= e.size()) throw ValidationError("sequence index " + std::to_string(x) + " outside alphabet");
    p *= e.probs()[x];
  }
  return p;
}

inline SequenceState sequence_state(const CqEnsemble& e, const Sequence& xn) {
  if (xn.empty()) throw ValidationError("sequence_state: empty sequence");
  std::vector<DensityOperator> factors;
  factors.reserve(xn.size());
  for (auto x : xn) {
    if (x >= e.size()) throw ValidationError("sequence index " + std::to_string(x) + " outside alphabet");
    factors.push_back(e.states()[x]);
  }
  return SequenceState{xn, DensityOperator::product(factors), sequence_probability(e, xn)};
}

/// Decode a flat lexicographic index into x^n (position 0 most significant).
inline Sequence sequence_from_index(std::uint64_t index, std::size_t alphabet, std::size_t n) {
  Sequence out(n, 0);
  for (std::size_t k = n; k-- > 0;) {
    out[k] = static_cast<std::uint32_t>(index % alphabet);
    index /= alphabet;
  }
  return out;
}

inline std::uint64_t sequence_index(const Sequence& xn, std::size_t alphabet) {
  std::uint64_t idx = 0;
  for (auto x : xn) idx = idx * alphabet + x;
  return idx;
}

/// |X|^n, or throws CapExceeded when it passes `cap`.
inline std::uint64_t sequence_count(std::size_t alphabet, std::size_t n, std::uint64_t cap) {
  std::uint64_t count = 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (count > cap / alphabet)
      throw CapExceeded("|X|^n = " + std::to_string(alphabet) + "^" + std::to_string(n) +
                        " exceeds the enumeration cap " + std::to_string(cap));
    count *= alphabet;
  }
  return count;
}

/// The n-fold extension X^n Q^n as an ensemble over |X|^n sequences.
inline CqEnsemble product_ensemble(const CqEnsemble& e, std::size_t n, std::uint64_t cap = 4096) {
  const auto count = sequence_count(e.size(), n, cap);
  std::vector<std::string> labels;
  std::vector<double> probs;
  std::vector<DensityOperator> states;
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    auto s = sequence_state(e, sequence_from_index(idx, e.size(), n));
    labels.push_back(e.label(s.sequence));
    probs.push_back(s.probability);
    states.push_back(std::move(s.state));
  }
  // Products of a distribution sum to 1 only up to rounding; restore exactly.
  double sum = 0.0;
  for (double p : probs) sum += p;
  for (double& p : probs) p /= sum;
  return CqEnsemble::create(std::move(labels), std::move(probs), std::move(states));
}

namespace presets {

inline CqEnsemble bb84() {
  return CqEnsemble::create({"0", "1", "+", "-"}, {0.25, 0.25, 0.25, 0.25},
                            {DensityOperator::pure(kets::zero()), DensityOperator::pure(kets::one()),
                             DensityOperator::pure(kets::plus()), DensityOperator::pure(kets::minus())});
}

inline CqEnsemble orthogonal_pair() {
  return CqEnsemble::create({"0", "1"}, {0.5, 0.5},
                            {DensityOperator::pure(kets::zero()), DensityOperator::pure(kets::one())});
}

inline CqEnsemble zero_plus() {
  return CqEnsemble::create({"0", "+"}, {0.5, 0.5},
                            {DensityOperator::pure(kets::zero()), DensityOperator::pure(kets::plus())});
}

/// The BB84 measurement {1/2 |0><0|, 1/2 |1><1|, 1/2 |+><+|, 1/2 |-><-|}.
inline Povm bb84_measurement() {
  return Povm::from_elements({0.5 * outer(kets::zero()), 0.5 * outer(kets::one()),
                              0.5 * outer(kets::plus()), 0.5 * outer(kets::minus())},
                             {"0", "1", "+", "-"});
}

}  // namespace presets

}  // namespace cqsw
