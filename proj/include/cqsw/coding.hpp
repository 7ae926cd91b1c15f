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

// Channel codes with square-root-measurement decoders, and the greedy cover of
// the typical set by disjoint channel codes that yields a Slepian-Wolf code
// with quantum side information.
//
// Indices into a CqswCode are 1-based, matching f: X^n -> [M] = {1, ..., M}.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cqsw/cq_system.hpp"
#include "cqsw/errors.hpp"
#include "cqsw/instrument.hpp"
#include "cqsw/linalg.hpp"
#include "cqsw/rng.hpp"
#include "cqsw/typicality.hpp"

namespace cqsw {

/// Codewords plus decoder. The decoder has one element per codeword, in
/// codeword order, followed by a single "fail" element.
struct ChannelCode {
  std::size_t n = 0;
  double epsilon = 0.0;
  std::vector<Sequence> codewords;
  Povm decoder;
  std::vector<double> per_codeword_error;

  std::size_t size() const noexcept { return codewords.size(); }
  std::size_t fail_outcome() const noexcept { return codewords.size(); }
  double rate() const { return std::log2(static_cast<double>(codewords.size())) / static_cast<double>(n); }
  double max_error() const {
    return per_codeword_error.empty() ? 0.0
                                      : *std::max_element(per_codeword_error.begin(), per_codeword_error.end());
  }
};

struct CodingOptions {
  /// Minimum Pr{x^n in A} for a candidate set.
  double eta = 1e-3;
  std::size_t max_dim = kDefaultMaxDenseDim;
  std::uint64_t max_enumeration = kDefaultMaxEnumeration;
  /// Consecutive rejected candidates tolerated: factor * max(|C|, 1).
  std::size_t patience_factor = 4;
  /// Drop the reserved "otherwise" index when the cover leaves zero residual.
  bool drop_reserved_when_exact = false;
};

/// Shared state for square-root-measurement decoders of one (ensemble, n, delta):
/// the typical projector of the average state and a cache of the
/// typicality-sandwiched codeword operators Pi Pi_c Pi.
class SrmContext {
 public:
  SrmContext(CqEnsemble ensemble, std::size_t n, double delta, std::size_t max_dim = kDefaultMaxDenseDim)
      : ensemble_(std::move(ensemble)), n_(n), delta_(delta), max_dim_(max_dim) {
    average_projector_ = typical_projector(ensemble_.average_state(), n_, delta_, max_dim_).matrix();
  }

  const CqEnsemble& ensemble() const noexcept { return ensemble_; }
  std::size_t n() const noexcept { return n_; }
  double delta() const noexcept { return delta_; }
  std::size_t max_dim() const noexcept { return max_dim_; }

  const ComplexMatrix& sandwiched(const Sequence& c) { return entry(c).sandwiched; }
  const ComplexMatrix& state(const Sequence& c) { return entry(c).state; }

  /// Lambda_c = S^{-1/2} S_c S^{-1/2}, S = sum_c S_c (pseudo-inverse on the
  /// support of S), plus the fail element 1 - sum_c Lambda_c.
  Povm decoder(std::span<const Sequence> codewords) {
    if (codewords.empty()) throw ValidationError("srm_decoder: no codewords");
    {
      std::vector<Sequence> sorted(codewords.begin(), codewords.end());
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ValidationError("srm_decoder: codewords are not distinct");
    }
    const auto dim = average_projector_.rows();
    ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
    for (const auto& c : codewords) total += sandwiched(c);

    const HermitianSpectrum spec = detail::raw_spectrum(total);
    const double top = spec.eigenvalues.size() ? spec.eigenvalues(0) : 0.0;
    if (!(top > tol::kPseudoInverse))
      throw ConstructionError("srm_decoder: sandwiched codeword operators vanish on the typical subspace", 1.0);
    RealVector inv_root(spec.eigenvalues.size());
    for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) {
      const double v = spec.eigenvalues(k);
      if (v > tol::kPseudoInverse && v / top < 1e-12)
        throw ConstructionError("srm_decoder: pathological conditioning on the support", v / top);
      inv_root(k) = v > tol::kPseudoInverse ? 1.0 / std::sqrt(v) : 0.0;
    }
    const ComplexMatrix r = spec.eigenvectors * inv_root.cast<Complex>().asDiagonal() * spec.eigenvectors.adjoint();

    std::vector<ComplexMatrix> elements;
    std::vector<std::string> labels;
    ComplexMatrix fail = ComplexMatrix::Identity(dim, dim);
    for (const auto& c : codewords) {
      ComplexMatrix lambda = r * sandwiched(c) * r;
      lambda = (lambda + lambda.adjoint()) * 0.5;
      fail -= lambda;
      elements.push_back(std::move(lambda));
      labels.push_back(ensemble_.label(c));
    }
    elements.push_back((fail + fail.adjoint()) * 0.5);
    labels.emplace_back("fail");
    return Povm::from_elements(std::move(elements), std::move(labels));
  }

  /// 1 - Tr(rho_c Lambda_c) for each codeword.
  std::vector<double> errors(const Povm& decoder, std::span<const Sequence> codewords) {
    std::vector<double> out;
    out.reserve(codewords.size());
    for (std::size_t k = 0; k < codewords.size(); ++k)
      out.push_back(1.0 - (state(codewords[k]) * decoder.elements()[k]).trace().real());
    return out;
  }

 private:
  struct Entry {
    ComplexMatrix state;
    ComplexMatrix sandwiched;
  };

  Entry& entry(const Sequence& c) {
    if (c.size() != n_) throw ValidationError("codeword length differs from block length");
    auto it = cache_.find(c);
    if (it != cache_.end()) return it->second;
    Entry fresh;
    fresh.state = sequence_state(ensemble_, c).state.matrix();
    const ComplexMatrix cond = cond_typical_projector(ensemble_, c, delta_, max_dim_).matrix();
    fresh.sandwiched = average_projector_ * cond * average_projector_;
    fresh.sandwiched = (fresh.sandwiched + fresh.sandwiched.adjoint()) * 0.5;
    return cache_.emplace(c, std::move(fresh)).first->second;
  }

  CqEnsemble ensemble_;
  std::size_t n_;
  double delta_;
  std::size_t max_dim_;
  ComplexMatrix average_projector_;
  std::map<Sequence, Entry> cache_;
};

/// Square-root measurement over typicality-sandwiched codeword states.
inline Povm srm_decoder(const CqEnsemble& e, std::span<const Sequence> codewords, double delta,
                        std::size_t max_dim = kDefaultMaxDenseDim) {
  if (codewords.empty()) throw ValidationError("srm_decoder: no codewords");
  SrmContext ctx(e, codewords.front().size(), delta, max_dim);
  return ctx.decoder(codewords);
}

namespace detail {

/// p-weighted order without replacement (Efraimidis-Spirakis keys log(u)/w,
/// descending). Zero-weight candidates go last; ties keep input order.
inline std::vector<std::size_t> weighted_order(std::span<const double> weights, std::uint64_t seed) {
  SubstreamRng rng(seed, streams::kCandidateOrder);
  std::vector<double> keys(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double u = rng.uniform_open();
    keys[k] = weights[k] > 0.0 ? std::log(u) / weights[k] : -std::numeric_limits<double>::infinity();
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
  return order;
}

struct Trial {
  std::vector<Sequence> codewords;
  std::optional<Povm> decoder;
  std::vector<double> errors;
};

/// Decoder for `codewords`, evicting the worst codeword until every error is
/// within epsilon.
inline Trial expurgate(SrmContext& ctx, std::vector<Sequence> codewords, double epsilon) {
  Trial t;
  t.codewords = std::move(codewords);
  while (!t.codewords.empty()) {
    t.decoder = ctx.decoder(t.codewords);
    t.errors = ctx.errors(*t.decoder, t.codewords);
    const auto worst = std::max_element(t.errors.begin(), t.errors.end());
    if (*worst <= epsilon) return t;
    const auto pos = static_cast<std::ptrdiff_t>(worst - t.errors.begin());
    t.codewords.erase(t.codewords.begin() + pos);
  }
  t.decoder.reset();
  t.errors.clear();
  return t;
}

inline ChannelCode build_code(SrmContext& ctx, std::span<const Sequence> candidates, double epsilon,
                              std::uint64_t seed, const CodingOptions& options) {
  std::vector<double> weights;
  weights.reserve(candidates.size());
  double mass = 0.0;
  for (const auto& c : candidates) {
    weights.push_back(sequence_probability(ctx.ensemble(), c));
    mass += weights.back();
  }
  if (mass < options.eta)
    throw ValidationError("build_channel_code: Pr{x^n in A} = " + std::to_string(mass) + " is below eta = " +
                          std::to_string(options.eta));

  std::vector<Sequence> code;
  std::optional<Povm> decoder;
  std::vector<double> errors;
  double best_singleton_error = std::numeric_limits<double>::infinity();
  std::size_t misses = 0;
  for (std::size_t idx : weighted_order(weights, seed)) {
    if (misses >= options.patience_factor * std::max<std::size_t>(code.size(), 1)) break;
    std::vector<Sequence> grown = code;
    grown.push_back(candidates[idx]);
    Trial t;
    try {
      t = expurgate(ctx, std::move(grown), epsilon);
    } catch (const ConstructionError& err) {
      // a decoder that cannot be built rejects the candidate
      if (code.empty()) best_singleton_error = std::min(best_singleton_error, err.offending_value());
      ++misses;
      continue;
    }
    if (code.empty()) {
      const std::span<const Sequence> one(&candidates[idx], 1);
      best_singleton_error = std::min(best_singleton_error, ctx.errors(ctx.decoder(one), one).front());
    }
    if (t.codewords.size() > code.size()) {
      code = std::move(t.codewords);
      decoder = std::move(t.decoder);
      errors = std::move(t.errors);
      misses = 0;
    } else {
      ++misses;
    }
  }
  if (code.empty())
    throw ConstructionError("build_channel_code: no singleton code meets epsilon = " + std::to_string(epsilon) +
                                " (smallest singleton error " + std::to_string(best_singleton_error) + ")",
                            best_singleton_error);
  return ChannelCode{ctx.n(), epsilon, std::move(code), std::move(*decoder), std::move(errors)};
}

}  // namespace detail

/// Greedy randomized (n, epsilon) channel code inside the candidate set:
/// candidates enter in p-weighted random order; after each addition the
/// decoder is rebuilt and the worst offenders are evicted; a candidate is kept
/// only if the code grows. Stops after 4*|C| consecutive rejections or when
/// candidates run out. Every stored error is an exact Born computation.
inline ChannelCode build_channel_code(const CqEnsemble& e, std::size_t n, double epsilon, double delta,
                                      std::span<const Sequence> candidates, std::uint64_t seed,
                                      const CodingOptions& options = {}) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("build_channel_code: epsilon must lie in (0, 1)");
  for (const auto& c : candidates)
    if (c.size() != n) throw ValidationError("build_channel_code: candidate length differs from n");
  SrmContext ctx(e, n, delta, options.max_dim);
  return detail::build_code(ctx, candidates, epsilon, seed, options);
}

enum class CoverStop { residual_below_epsilon, constructor_failed, candidates_exhausted, fixed_cover };

inline const char* to_string(CoverStop s) {
  switch (s) {
    case CoverStop::residual_below_epsilon: return "residual_below_epsilon";
    case CoverStop::constructor_failed: return "constructor_failed";
    case CoverStop::candidates_exhausted: return "candidates_exhausted";
    case CoverStop::fixed_cover: return "fixed_cover";
  }
  return "unknown";
}

/// Family of disjoint channel codes with encoder f and decoder g.
class CqswCode {
 public:
  std::size_t n() const noexcept { return n_; }
  const std::vector<ChannelCode>& codes() const noexcept { return codes_; }
  bool has_reserved_index() const noexcept { return reserved_; }

  /// Number of encoder indices: one per code plus the reserved "otherwise"
  /// index unless it was dropped for an exact cover.
  std::size_t M() const noexcept { return codes_.size() + (reserved_ ? 1 : 0); }
  /// Index returned for sequences outside every code.
  std::size_t otherwise_index() const noexcept { return codes_.size() + 1; }
  double rate() const { return std::log2(static_cast<double>(M())) / static_cast<double>(n_); }

  /// f(x^n): i if x^n is in code i (1-based), else otherwise_index().
  std::size_t encode(const Sequence& xn) const {
    auto it = index_.find(xn);
    return it == index_.end() ? otherwise_index() : it->second;
  }

  /// g(i, j): the codeword behind outcome j of decoder i, or nothing for the
  /// fail outcome and for the otherwise index.
  std::optional<Sequence> decode(std::size_t i, std::size_t j) const {
    if (i == 0 || i > codes_.size()) return std::nullopt;
    const auto& c = codes_[i - 1];
    if (j >= c.size()) return std::nullopt;
    return c.codewords[j];
  }

  // Diagnostics of the construction.
  CoverStop stop = CoverStop::fixed_cover;
  double delta = 0.0;
  double epsilon = 0.0;
  double typical_mass = 0.0;    // Pr{X^n in T}
  double residual = 0.0;        // Pr{x^n outside every code}
  double residual_bound = 0.0;  // Pr{X^n not in T} + epsilon
  double failure_value = 0.0;   // offending error when the constructor failed
  std::string failure;

  bool residual_ok() const { return residual <= residual_bound + 1e-12; }

  static CqswCode assemble(std::size_t n, std::vector<ChannelCode> codes, bool reserved) {
    CqswCode out;
    out.n_ = n;
    out.codes_ = std::move(codes);
    out.reserved_ = reserved;
    for (std::size_t i = 0; i < out.codes_.size(); ++i)
      for (const auto& c : out.codes_[i].codewords)
        if (!out.index_.emplace(c, i + 1).second)
          throw ValidationError("CqswCode: codes are not disjoint (" + std::to_string(i + 1) + ")");
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::vector<ChannelCode> codes_;
  bool reserved_ = true;
  std::map<Sequence, std::size_t> index_;
};

inline double code_mass(const CqEnsemble& e, const ChannelCode& c) {
  double m = 0.0;
  for (const auto& x : c.codewords) m += sequence_probability(e, x);
  return m;
}

/// Disjoint codes C_1, C_2, ... with C_i drawn from A_i = T \ (C_1 u ... u C_{i-1}),
/// until Pr{A_i} <= epsilon or the constructor fails. Candidate sets follow the
/// eta = epsilon threshold of the covering argument.
inline CqswCode greedy_cover(const CqEnsemble& e, std::size_t n, double epsilon, double delta, std::uint64_t seed,
                             const CodingOptions& options = {}) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("greedy_cover: epsilon must lie in (0, 1)");
  const TypicalSet typical = typical_set(e.probs(), n, delta, options.max_enumeration);
  SrmContext ctx(e, n, delta, options.max_dim);
  CodingOptions inner = options;
  inner.eta = epsilon;

  std::vector<Sequence> remaining = typical.members;
  std::vector<ChannelCode> codes;
  CoverStop stop = CoverStop::candidates_exhausted;
  std::string failure;
  double failure_value = 0.0;
  auto mass_of = [&](const std::vector<Sequence>& s) {
    double m = 0.0;
    for (const auto& x : s) m += sequence_probability(e, x);
    return m;
  };
  double remaining_mass = mass_of(remaining);
  for (std::uint64_t round = 0;; ++round) {
    if (remaining_mass <= epsilon) {
      stop = CoverStop::residual_below_epsilon;
      break;
    }
    if (remaining.empty()) break;
    try {
      ChannelCode code = detail::build_code(ctx, remaining, epsilon, derive_seed(seed, round), inner);
      std::vector<Sequence> members = code.codewords;
      std::sort(members.begin(), members.end());
      std::erase_if(remaining, [&](const Sequence& x) { return std::binary_search(members.begin(), members.end(), x); });
      codes.push_back(std::move(code));
      remaining_mass = mass_of(remaining);
    } catch (const ConstructionError& err) {
      stop = CoverStop::constructor_failed;
      failure = err.what();
      failure_value = err.offending_value();
      break;
    } catch (const ValidationError& err) {
      stop = CoverStop::constructor_failed;
      failure = err.what();
      break;
    }
  }

  const double outside = std::max(0.0, 1.0 - typical.total_prob);
  const double residual = outside + remaining_mass;
  const bool reserved = !(options.drop_reserved_when_exact && residual == 0.0) || codes.empty();
  CqswCode out = CqswCode::assemble(n, std::move(codes), reserved);
  out.stop = stop;
  out.delta = delta;
  out.epsilon = epsilon;
  out.typical_mass = typical.total_prob;
  out.residual = residual;
  out.residual_bound = outside + epsilon;
  out.failure = std::move(failure);
  out.failure_value = failure_value;
  return out;
}

/// A cover from caller-supplied codeword sets, each decoded by its square-root
/// measurement. Residual is computed by enumerating X^n.
inline CqswCode cover_from_codes(const CqEnsemble& e, std::size_t n, const std::vector<std::vector<Sequence>>& sets,
                                 double epsilon, double delta, const CodingOptions& options = {}) {
  SrmContext ctx(e, n, delta, options.max_dim);
  std::vector<ChannelCode> codes;
  for (const auto& s : sets) {
    Povm dec = ctx.decoder(s);
    auto errs = ctx.errors(dec, s);
    codes.push_back(ChannelCode{n, epsilon, s, std::move(dec), std::move(errs)});
  }
  double covered = 0.0;
  for (const auto& c : codes) covered += code_mass(e, c);
  const double residual = std::max(0.0, 1.0 - covered);
  const bool exact = residual <= 1e-15;
  CqswCode out = CqswCode::assemble(n, std::move(codes), !(options.drop_reserved_when_exact && exact));
  out.stop = CoverStop::fixed_cover;
  out.delta = delta;
  out.epsilon = epsilon;
  const TypicalSet typical = typical_set(e.probs(), n, delta, options.max_enumeration);
  out.typical_mass = typical.total_prob;
  out.residual = exact ? 0.0 : residual;
  out.residual_bound = std::max(0.0, 1.0 - typical.total_prob) + epsilon;
  return out;
}

/// Exact protocol figures of merit.
struct CodeMetrics {
  double error_probability = 0.0;  // P_e
  double disturbance = 0.0;        // Delta
  double covered_mass = 0.0;
  double max_deficit = 0.0;   // max over codewords of 1 - Tr(rho Lambda)
  double mean_deficit = 0.0;  // p-weighted over covered sequences
};

/// P_e and Delta by enumerating every x^n. Sequences mapped to the otherwise
/// index count as errors and are left undisturbed (trivial measurement).
inline CodeMetrics exact_code_metrics(const CqswCode& code, const CqEnsemble& e,
                                      std::uint64_t max_enumeration = std::uint64_t{1} << 20) {
  const std::size_t n = code.n();
  std::uint64_t count;
  try {
    count = sequence_count(e.size(), n, max_enumeration);
  } catch (const CapExceeded&) {
    throw CapExceeded("exact_code_metrics: |X|^n exceeds the enumeration cap; use the Monte Carlo path");
  }
  std::vector<std::vector<ComplexMatrix>> roots;
  for (const auto& c : code.codes()) roots.push_back(kraus_roots(c.decoder.elements()));

  CodeMetrics m;
  double deficit_mass = 0.0;
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    const Sequence xn = sequence_from_index(idx, e.size(), n);
    const double p = sequence_probability(e, xn);
    const std::size_t i = code.encode(xn);
    if (i > code.codes().size()) {
      m.error_probability += p;
      continue;
    }
    const auto& c = code.codes()[i - 1];
    const auto pos = static_cast<std::size_t>(std::find(c.codewords.begin(), c.codewords.end(), xn) - c.codewords.begin());
    const DensityOperator rho = sequence_state(e, xn).state;
    const double success = (rho.matrix() * c.decoder.elements()[pos]).trace().real();
    const double deficit = 1.0 - success;
    const ComplexMatrix residual = averaged_residual(rho.matrix(), roots[i - 1]);
    m.error_probability += p * deficit;
    m.disturbance += p * trace_norm((residual - rho.matrix() + (residual - rho.matrix()).adjoint()) * 0.5);
    m.covered_mass += p;
    deficit_mass += p * deficit;
    m.max_deficit = std::max(m.max_deficit, deficit);
  }
  m.mean_deficit = m.covered_mass > 0.0 ? deficit_mass / m.covered_mass : 0.0;
  m.error_probability = std::clamp(m.error_probability, 0.0, 1.0);
  return m;
}

}  // namespace cqsw
