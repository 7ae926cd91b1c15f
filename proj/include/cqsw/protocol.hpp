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

// End-to-end protocol execution: Monte Carlo trials, the converse inequality
// ledger, the gentle-measurement check and the two BB84 one-shot demos.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cqsw/coding.hpp"
#include "cqsw/cq_system.hpp"
#include "cqsw/instrument.hpp"
#include "cqsw/linalg.hpp"
#include "cqsw/rng.hpp"

namespace cqsw {

// --------------------------------------------------------------------------
// Monte Carlo

struct TrialRecord {
  Sequence xn;
  std::size_t encoded_index = 0;
  std::size_t outcome = 0;
  std::optional<Sequence> decoded;
  bool correct = false;
  double disturbance = 0.0;
};

struct TrialOptions {
  /// 0 picks std::thread::hardware_concurrency().
  std::size_t workers = 0;
  bool keep_records = false;
};

struct MonteCarloResult {
  std::size_t trials = 0;
  double error_rate = 0.0;  // P_e estimate
  double error_rate_se = 0.0;
  double disturbance = 0.0;  // Delta estimate
  double disturbance_se = 0.0;
  std::vector<TrialRecord> records;
};

/// Index of the outcome selected by u in [0, 1) under `probs` (inverse CDF).
inline std::size_t sample_index(const std::vector<double>& probs, double u) {
  double total = 0.0;
  for (double p : probs) total += std::max(0.0, p);
  double acc = 0.0;
  const double target = u * total;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += std::max(0.0, probs[k]);
    if (target < acc) return k;
  }
  return probs.size() - 1;
}

namespace detail {

template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < count; k += workers) fn(k);
    });
  for (auto& t : pool) t.join();
}

struct SequenceOutlook {
  std::size_t index = 0;          // f(x^n)
  std::vector<double> born;       // outcome distribution of decoder f(x^n)
  double disturbance = 0.0;       // || rho_hat - rho ||_1
};

}  // namespace detail

/// i.i.d. x^n ~ p^n, outcome j from the Born distribution of the decoder f(x^n)
/// on rho_{x^n}. Trial t draws from its own substream (seed, t), and sums run
/// in trial order, so results do not depend on `workers`.
inline MonteCarloResult run_trials(const CqswCode& code, const CqEnsemble& e, std::size_t trials, std::uint64_t seed,
                                   const TrialOptions& options = {}) {
  if (trials == 0) throw ValidationError("run_trials: trials must be >= 1");
  const std::size_t n = code.n();
  std::vector<double> cdf(e.probs().size());
  std::partial_sum(e.probs().begin(), e.probs().end(), cdf.begin());

  std::vector<Sequence> drawn(trials);
  std::vector<double> outcome_u(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    SubstreamRng rng(seed, streams::kTrials, t);
    Sequence xn(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double u = rng.uniform() * cdf.back();
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      xn[k] = static_cast<std::uint32_t>(std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1));
    }
    outcome_u[t] = rng.uniform();
    drawn[t] = std::move(xn);
  }

  std::map<Sequence, std::size_t> slot;
  std::vector<Sequence> distinct;
  for (const auto& xn : drawn)
    if (slot.emplace(xn, distinct.size()).second) distinct.push_back(xn);

  std::vector<std::vector<ComplexMatrix>> roots;
  for (const auto& c : code.codes()) roots.push_back(kraus_roots(c.decoder.elements()));

  std::vector<detail::SequenceOutlook> outlook(distinct.size());
  detail::parallel_for(distinct.size(), options.workers, [&](std::size_t k) {
    const Sequence& xn = distinct[k];
    auto& o = outlook[k];
    o.index = code.encode(xn);
    if (o.index > code.codes().size()) {
      o.born = {1.0};
      return;
    }
    const ComplexMatrix rho = sequence_state(e, xn).state.matrix();
    o.born = code.codes()[o.index - 1].decoder.probabilities(rho);
    const ComplexMatrix diff = averaged_residual(rho, roots[o.index - 1]) - rho;
    o.disturbance = trace_norm((diff + diff.adjoint()) * 0.5);
  });

  MonteCarloResult out;
  out.trials = trials;
  double errors = 0.0, dist_sum = 0.0, dist_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto& o = outlook[slot.at(drawn[t])];
    const std::size_t j = sample_index(o.born, outcome_u[t]);
    auto decoded = code.decode(o.index, j);
    const bool correct = decoded.has_value() && *decoded == drawn[t];
    errors += correct ? 0.0 : 1.0;
    dist_sum += o.disturbance;
    dist_sq += o.disturbance * o.disturbance;
    if (options.keep_records)
      out.records.push_back(TrialRecord{drawn[t], o.index, j, std::move(decoded), correct, o.disturbance});
  }
  const double N = static_cast<double>(trials);
  out.error_rate = errors / N;
  out.error_rate_se = std::sqrt(out.error_rate * (1.0 - out.error_rate) / N);
  out.disturbance = dist_sum / N;
  const double var = trials > 1 ? std::max(0.0, (dist_sq - N * out.disturbance * out.disturbance) / (N - 1.0)) : 0.0;
  out.disturbance_se = std::sqrt(var / N);
  return out;
}

// --------------------------------------------------------------------------
// Converse

/// h2(P_e) + P_e log2(|X|^n - 1), with |X|^n handled in log space.
inline double fano_bound(double error_probability, std::size_t n, std::size_t alphabet_size) {
  if (!(error_probability >= 0.0 && error_probability <= 1.0))
    throw ValidationError("fano_bound: P_e outside [0, 1]");
  if (alphabet_size == 0 || n == 0) throw ValidationError("fano_bound: empty alphabet or block");
  const double h = binary_entropy(error_probability);
  if (error_probability == 0.0 || alphabet_size == 1) return h;
  const double log_count = static_cast<double>(n) * std::log2(static_cast<double>(alphabet_size));
  // log2(K - 1) = log2 K + log2(1 - 1/K)
  const double log_count_minus_one = log_count + std::log1p(-std::exp2(-log_count)) / std::log(2.0);
  return h + error_probability * log_count_minus_one;
}

struct ChainLine {
  std::string expression;
  std::optional<double> value;
};

struct ConverseLedger {
  std::size_t n = 0;
  double rate = 0.0;
  double error_probability = 0.0;
  double h_x = 0.0;
  double chi = 0.0;
  double fano = 0.0;
  std::vector<ChainLine> chain;  // lhs followed by the right-hand sides, top to bottom
  std::string note;
  bool chain_monotone = true;
  bool verdict = false;
};

struct ConverseOptions {
  bool exact_joint = true;
  std::uint64_t max_enumeration = std::uint64_t{1} << 16;
};

namespace detail {

inline double entropy_of(const std::map<std::vector<std::uint64_t>, double>& dist) {
  double h = 0.0;
  for (const auto& [key, p] : dist)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

}  // namespace detail

/// Numerical audit of
///   nR + n chi >= H(I) + I(X^n;J) = H(X^n) + H(I|X^nJ) + I(I;J) - H(X^n|IJ)
///             >= n H(X) - H(X^n|IJ) >= n (H(X) - 1/n - P_e log2|X|).
/// The verdict compares the two ends. Middle lines need the joint law of
/// (X^n, I, J) and are filled when `exact_joint` is set and X^n is enumerable;
/// J is the outcome index of the decoder selected by I.
inline ConverseLedger converse_audit(const CqswCode& code, const CqEnsemble& e, double error_probability,
                                     const ConverseOptions& options = {}) {
  ConverseLedger l;
  l.n = code.n();
  l.rate = code.rate();
  l.error_probability = error_probability;
  l.h_x = shannon_entropy(e.probs());
  l.chi = holevo_information(e);
  l.fano = fano_bound(error_probability, l.n, e.size());
  const double n = static_cast<double>(l.n);
  const double lhs = n * l.rate + n * l.chi;
  const double rhs = n * (l.h_x - 1.0 / n - error_probability * std::log2(static_cast<double>(e.size())));

  std::array<std::optional<double>, 3> middle;
  if (!options.exact_joint) {
    l.note = "intermediate lines omitted: exact joint evaluation disabled";
  } else {
    try {
      const auto count = sequence_count(e.size(), l.n, options.max_enumeration);
      std::map<std::vector<std::uint64_t>, double> p_i, p_j, p_xj, p_ij, p_x;
      for (std::uint64_t idx = 0; idx < count; ++idx) {
        const Sequence xn = sequence_from_index(idx, e.size(), l.n);
        const double px = sequence_probability(e, xn);
        if (px <= 0.0) continue;
        const std::size_t i = code.encode(xn);
        std::vector<double> born{1.0};
        if (i <= code.codes().size())
          born = code.codes()[i - 1].decoder.probabilities(sequence_state(e, xn).state.matrix());
        p_x[{idx}] += px;
        p_i[{i}] += px;
        for (std::size_t j = 0; j < born.size(); ++j) {
          const double pj = px * std::max(0.0, born[j]);
          if (pj <= 0.0) continue;
          p_j[{j}] += pj;
          p_xj[{idx, j}] += pj;
          p_ij[{i, j}] += pj;
        }
      }
      const double h_xn = detail::entropy_of(p_x);
      const double h_i = detail::entropy_of(p_i);
      const double h_j = detail::entropy_of(p_j);
      const double h_xj = detail::entropy_of(p_xj);
      const double h_ij = detail::entropy_of(p_ij);
      const double i_xj = h_xn + h_j - h_xj;
      const double h_x_given_ij = h_xj - h_ij;  // I is a function of X^n
      const double i_ij = h_i + h_j - h_ij;
      const double h_i_given_xj = 0.0;
      middle[0] = h_i + i_xj;
      middle[1] = h_xn + h_i_given_xj + i_ij - h_x_given_ij;
      middle[2] = n * l.h_x - h_x_given_ij;
    } catch (const CapExceeded&) {
      l.note = "intermediate lines omitted: |X|^n exceeds the enumeration cap";
    }
  }

  l.chain = {{"nR + nI(X;Q)", lhs},
             {"H(I) + I(X^n;J)", middle[0]},
             {"H(X^n) + H(I|X^nJ) + I(I;J) - H(X^n|IJ)", middle[1]},
             {"nH(X) - H(X^n|IJ)", middle[2]},
             {"n(H(X) - 1/n - P_e log|X|)", rhs}};
  std::optional<double> prev;
  for (const auto& line : l.chain) {
    if (!line.value) continue;
    if (prev && *line.value > *prev + 1e-8) l.chain_monotone = false;
    prev = line.value;
  }
  l.verdict = lhs >= rhs - 1e-8;
  return l;
}

// --------------------------------------------------------------------------
// Gentle measurement

struct GentleCheck {
  double epsilon = 0.0;
  double disturbance = 0.0;
  double bound = 0.0;  // sqrt(8 eps) + eps
  bool passes = false;
};

inline GentleCheck gentle_measurement_check(double epsilon, double disturbance) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ValidationError("gentle_measurement_check: epsilon outside [0, 1)");
  GentleCheck g{epsilon, disturbance, std::sqrt(8.0 * epsilon) + epsilon, false};
  g.passes = disturbance <= g.bound + 1e-8;
  return g;
}

// --------------------------------------------------------------------------
// BB84 demos

struct Bb84OneShotReport {
  double h_x = 0.0;
  double chi = 0.0;
  double h_x_given_q = 0.0;
  std::size_t M = 0;
  double rate = 0.0;
  double error_probability = 0.0;
  double disturbance = 0.0;
  bool passes = false;
};

/// Two basis subcodes {0,1} and {+,-}; Alice sends the basis (1 bit), Bob
/// measures in it.
inline Bb84OneShotReport bb84_oneshot() {
  const CqEnsemble e = presets::bb84();
  CodingOptions opts;
  opts.drop_reserved_when_exact = true;
  const CqswCode code = cover_from_codes(e, 1, {{{0}, {1}}, {{2}, {3}}}, 0.01, 1.0, opts);
  const CodeMetrics m = exact_code_metrics(code, e);
  Bb84OneShotReport r;
  r.h_x = shannon_entropy(e.probs());
  r.chi = holevo_information(e);
  r.h_x_given_q = cqsw_rate(e);
  r.M = code.M();
  r.rate = code.rate();
  r.error_probability = m.error_probability;
  r.disturbance = m.disturbance;
  constexpr double tol = 1e-10;
  r.passes = std::abs(r.rate - 1.0) <= tol && std::abs(r.error_probability) <= tol &&
             std::abs(r.disturbance) <= tol && std::abs(r.h_x - 2.0) <= tol && std::abs(r.chi - 1.0) <= tol &&
             std::abs(r.h_x_given_q - 1.0) <= tol;
  return r;
}

/// Unnormalized reference-system operator Tr_A[(element (x) 1) |Phi><Phi|] for the
/// purification |Phi> = sum_i sqrt(r_i) |v_i>_A |i>_R of rho.
inline ComplexMatrix purified_reference(const DensityOperator& rho, const ComplexMatrix& element) {
  const HermitianSpectrum spec = eig_hermitian(rho.matrix());
  const auto d = static_cast<Eigen::Index>(rho.dim());
  ComplexVector phi = ComplexVector::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double r = std::max(0.0, spec.eigenvalues(i));
    phi += std::sqrt(r) * Eigen::kroneckerProduct(spec.eigenvectors.col(i), kets::basis(rho.dim(), i)).eval();
  }
  const ComplexMatrix joint = tensor_product(element, identity(rho.dim())) * outer(phi);
  const std::size_t dims[] = {rho.dim(), rho.dim()};
  const std::size_t keep[] = {1};
  return partial_trace(joint, dims, keep);
}

struct MeasurementCompressionReport {
  std::vector<std::string> outcomes;
  std::vector<double> direct_probs;
  std::vector<double> simulated_probs;
  std::vector<double> reference_state_diffs;  // max |.| between the two reference states
  double max_prob_diff = 0.0;
  double max_state_diff = 0.0;
  double formula_state_diff = 0.0;  // direct route vs the closed-form induced ensemble
  double direct_bits = 0.0;
  double simulated_comm_bits = 0.0;
  double shared_random_bits = 0.0;
  double chi = 0.0;
  double h_x_given_q = 0.0;
  bool passes = false;
};

/// BB84 measurement on I/2 performed directly (2-bit outcome) and simulated by
/// 1 shared random bit choosing the basis plus a 1-bit basis measurement. Both
/// are run on the purification and the induced outcome/reference correlations
/// are compared.
inline MeasurementCompressionReport bb84_measurement_compression() {
  const DensityOperator rho = DensityOperator::maximally_mixed(2);
  const Povm direct = presets::bb84_measurement();
  const std::array<Povm, 2> bases = {
      Povm::from_elements({outer(kets::zero()), outer(kets::one())}, {"0", "1"}),
      Povm::from_elements({outer(kets::plus()), outer(kets::minus())}, {"+", "-"})};

  MeasurementCompressionReport r;
  const CqEnsemble formula = induced_ensemble(rho, direct);
  for (std::size_t x = 0; x < direct.size(); ++x) {
    const ComplexMatrix direct_ref = purified_reference(rho, direct.elements()[x]);
    const double p_direct = direct_ref.trace().real();

    const std::size_t basis = x / 2, bit = x % 2;
    const ComplexMatrix sim_ref = 0.5 * purified_reference(rho, bases[basis].elements()[bit]);
    const double p_sim = sim_ref.trace().real();

    r.outcomes.push_back(direct.labels()[x]);
    r.direct_probs.push_back(p_direct);
    r.simulated_probs.push_back(p_sim);
    const double state_diff = max_abs(direct_ref / p_direct - sim_ref / p_sim);
    r.reference_state_diffs.push_back(state_diff);
    r.max_prob_diff = std::max(r.max_prob_diff, std::abs(p_direct - p_sim));
    r.max_state_diff = std::max(r.max_state_diff, state_diff);
    r.formula_state_diff =
        std::max(r.formula_state_diff, max_abs(direct_ref / p_direct - formula.states()[x].matrix()));
  }
  r.direct_bits = std::log2(static_cast<double>(direct.size()));
  r.simulated_comm_bits = std::log2(static_cast<double>(bases[0].size()));
  r.shared_random_bits = std::log2(static_cast<double>(bases.size()));
  r.chi = holevo_information(formula);
  r.h_x_given_q = cqsw_rate(formula);
  constexpr double tol = 1e-10;
  r.passes = r.max_prob_diff <= tol && r.max_state_diff <= tol && r.formula_state_diff <= tol;
  return r;
}

}  // namespace cqsw
