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

// Acceptance suite. One PASS/FAIL line per criterion.
//   acceptance            run all criteria
//   acceptance --only K   run criterion K

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cqsw/cqsw.hpp"
#include "cqsw/experiment.hpp"
#include "oracles.hpp"

using namespace cqsw;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string violations;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      violations += " [violated: " + what + "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string g(double v) { return io::fmt(v); }

// Pinned configuration for the zero-plus cover criteria.
constexpr double kCoverEpsilon = 0.2;
constexpr double kCoverDelta = 0.5;
constexpr std::uint64_t kCoverSeed = 7;
constexpr std::uint64_t kTrialSeed = 11;
constexpr std::size_t kTrials = 100000;

std::map<std::size_t, CqswCode>& cover_cache() {
  static std::map<std::size_t, CqswCode> cache;
  return cache;
}

const CqswCode& zero_plus_cover(std::size_t n) {
  auto& cache = cover_cache();
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, greedy_cover(presets::zero_plus(), n, kCoverEpsilon, kCoverDelta, kCoverSeed)).first;
  return it->second;
}

// 1
Outcome bb84_one_shot() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto r = bb84_oneshot();
  const double t = seconds_since(t0);
  constexpr double tol = 1e-10;
  o.require(std::abs(r.rate - 1.0) <= tol, "rate = 1");
  o.require(std::abs(r.error_probability) <= tol, "P_e = 0");
  o.require(std::abs(r.disturbance) <= tol, "Delta = 0");
  o.require(std::abs(r.h_x - 2.0) <= tol, "H(X) = 2");
  o.require(std::abs(r.chi - 1.0) <= tol, "chi = 1");
  o.require(std::abs(r.h_x_given_q - 1.0) <= tol, "H(X|Q) = 1");
  o.require(t < 1.0, "runtime < 1 s");
  o.detail << "rate=" << g(r.rate) << " P_e=" << g(r.error_probability) << " Delta=" << g(r.disturbance)
           << " H(X)=" << g(r.h_x) << " chi=" << g(r.chi) << " H(X|Q)=" << g(r.h_x_given_q) << " t=" << g(t) << "s";
  return o;
}

// 2
Outcome orthogonal_cover() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto e = presets::orthogonal_pair();
  const auto code = greedy_cover(e, 4, 0.01, 0.5, 1);
  const auto m = exact_code_metrics(code, e);
  const double t = seconds_since(t0);
  o.require(code.codes().size() == 1, "M - 1 = 1");
  o.require(std::abs(m.error_probability) <= 1e-10, "P_e = 0");
  o.require(std::abs(m.disturbance) <= 1e-10, "Delta = 0");
  o.require(t < 5.0, "runtime < 5 s");
  o.detail << "codes=" << code.codes().size() << " M=" << code.M() << " R=" << g(code.rate())
           << " (overhead (1/n)log2 2 = " << g(0.25) << ") P_e=" << g(m.error_probability)
           << " Delta=" << g(m.disturbance) << " t=" << g(t) << "s";
  return o;
}

// 3
Outcome entropic_identities() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2026);
  std::uniform_int_distribution<int> size(1, 4);
  double worst = 0.0, chi_low = 0.0, chi_high = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int k = size(gen);
    std::vector<DensityOperator> states;
    for (int x = 0; x < k; ++x) states.push_back(DensityOperator::from_matrix(oracle::random_qubit(gen)));
    const auto e = CqEnsemble::create(oracle::random_probs(gen, k), states);
    const double h_x = shannon_entropy(e.probs());
    const double chi = holevo_information(e);
    const auto ehs = ehs_entropies(e);
    const double definitional = ehs.a_given_q();
    const double chi_route = h_x - chi;
    const double ehs_route = h_x - ehs.mutual_information();
    worst = std::max({worst, std::abs(definitional - chi_route), std::abs(definitional - ehs_route),
                      std::abs(chi_route - ehs_route)});
    chi_low = std::min(chi_low, chi);
    chi_high = std::max(chi_high, chi - std::min(h_x, 1.0));
  }
  const double t = seconds_since(t0);
  o.require(worst <= 1e-8, "three routes agree within 1e-8");
  o.require(chi_low >= -1e-12, "chi >= 0");
  o.require(chi_high <= 1e-12, "chi <= min(H(X), 1)");
  o.require(t < 10.0, "runtime < 10 s");
  o.detail << "ensembles=200 max_route_gap=" << g(worst) << " min_chi=" << g(chi_low)
           << " max(chi-min(H,1))=" << g(chi_high) << " t=" << g(t) << "s";
  return o;
}

// 4
Outcome typicality_oracles() {
  Outcome o;
  std::size_t checks = 0;
  std::size_t set_low = 0, proj_low = 0;
  std::ostringstream first;
  bool set_ok = true, rank_ok = true, upper_ok = true;
  const std::vector<double> deltas{0.05, 0.1, 0.2, 0.3, 0.5};
  for (double p0 : {0.5, 0.75, 0.9}) {
    const std::vector<double> p{p0, 1.0 - p0};
    ComplexMatrix rho_m = ComplexMatrix::Zero(2, 2);
    rho_m(0, 0) = p0;
    rho_m(1, 1) = 1.0 - p0;
    const auto rho = DensityOperator::from_matrix(rho_m);
    for (int n = 1; n <= 12; ++n) {
      for (double delta : deltas) {
        const auto set = typical_set(p, static_cast<std::size_t>(n), delta);
        std::vector<Sequence> expected;
        for (const auto& xn : oracle::all_sequences(2, n))
          if (oracle::typical(p, xn, delta)) expected.emplace_back(xn.begin(), xn.end());
        set_ok = set_ok && set.members == expected;
        const auto proj = typical_projector(rho, static_cast<std::size_t>(n), delta);
        rank_ok = rank_ok && proj.subspace_dim() == oracle::typical_rank(p, n, delta);
        upper_ok = upper_ok && set.upper_bound_holds() && proj.upper_bound_holds();
        if (!set.lower_bound_holds()) ++set_low;
        if (!proj.lower_bound_holds()) {
          if (proj_low++ == 0)
            first << " first: p0=" << p0 << " n=" << n << " delta=" << delta << " dim=" << proj.subspace_dim()
                  << " log2_lower=" << g(proj.log2_lower_bound());
        }
        ++checks;
      }
    }
  }
  o.require(set_ok, "typical_set equals exhaustive enumeration");
  o.require(rank_ok, "projector rank equals eigenvalue-product enumeration");
  o.require(upper_ok, "upper dimension bounds, every delta");
  o.require(set_low == 0 && proj_low == 0, "lower dimension bounds, every delta");
  o.detail << "configs=" << checks << " (p0 in {0.5,0.75,0.9}, n=1..12, delta in {0.05,0.1,0.2,0.3,0.5})"
           << " lower-bound misses: set=" << set_low << " projector=" << proj_low << first.str();
  return o;
}

// 5
Outcome capture_trend() {
  Outcome o;
  ComplexMatrix rho_m = ComplexMatrix::Zero(2, 2);
  rho_m(0, 0) = 0.85355;
  rho_m(1, 1) = 0.14645;
  const auto rho = DensityOperator::from_matrix(rho_m);
  double prev = -1.0;
  bool monotone = true;
  double last = 0.0;
  for (std::size_t n : {2u, 4u, 6u, 8u}) {
    const auto proj = typical_projector(rho, n, 0.2);
    const ComplexMatrix dense = DensityOperator::product(std::vector<DensityOperator>(n, rho)).matrix();
    const double capture = proj.capture(dense);
    o.detail << "n=" << n << ":" << g(capture) << " ";
    monotone = monotone && capture >= prev - 1e-12;
    prev = last = capture;
  }
  o.require(monotone, "non-decreasing over n in {2,4,6,8}");
  o.require(last > 0.9, "capture > 0.9 at n = 8");
  o.detail << "(delta=0.2)";
  return o;
}

// 6
Outcome cover_soundness() {
  Outcome o;
  const auto e = presets::zero_plus();
  o.detail << "chi=" << g(holevo_information(e)) << " H(X|Q)=" << g(cqsw_rate(e));
  for (std::size_t n : {4u, 6u}) {
    const auto t0 = Clock::now();
    const auto& code = zero_plus_cover(n);
    double worst = 0.0, drift = 0.0;
    for (const auto& c : code.codes())
      for (std::size_t k = 0; k < c.size(); ++k) {
        const ComplexMatrix rho = sequence_state(e, c.codewords[k]).state.matrix();
        const double err = 1.0 - (rho * c.decoder.elements()[k]).trace().real();
        worst = std::max(worst, err);
        drift = std::max(drift, std::abs(err - c.per_codeword_error[k]));
      }
    const auto m = exact_code_metrics(code, e);
    const auto ledger = converse_audit(code, e, m.error_probability);
    const double t = seconds_since(t0);
    const std::string tag = "n=" + std::to_string(n) + ": ";
    o.require(!code.codes().empty(), tag + "nonempty cover");
    o.require(worst <= kCoverEpsilon, tag + "per-codeword errors <= epsilon");
    o.require(drift <= 1e-8, tag + "stored errors match recomputation");
    o.require(code.residual_ok(), tag + "residual <= Pr{not T} + epsilon");
    o.require(ledger.verdict, tag + "converse verdict");
    if (n == 6) o.require(t < 120.0, "runtime < 2 min at n = 6");
    o.detail << " | n=" << n << " codes=" << code.codes().size() << " M=" << code.M() << " R=" << g(code.rate())
             << " max_err=" << g(worst) << " residual=" << g(code.residual) << "<=" << g(code.residual_bound)
             << " verdict=" << (ledger.verdict ? "true" : "false") << " t=" << g(t) << "s";
  }
  o.detail << " (epsilon=" << g(kCoverEpsilon) << " delta=" << g(kCoverDelta) << " seed=" << kCoverSeed << ")";
  return o;
}

// 7
Outcome monte_carlo_agreement() {
  Outcome o;
  const auto e = presets::zero_plus();
  for (std::size_t n : {4u, 6u}) {
    const auto& code = zero_plus_cover(n);
    const auto m = exact_code_metrics(code, e);
    const auto mc = run_trials(code, e, kTrials, kTrialSeed);
    const double z_pe = std::abs(mc.error_rate - m.error_probability) / mc.error_rate_se;
    const double z_d = std::abs(mc.disturbance - m.disturbance) / mc.disturbance_se;
    const std::string tag = "n=" + std::to_string(n) + ": ";
    o.require(z_pe <= 3.0, tag + "P_e within 3 se");
    o.require(z_d <= 3.0, tag + "Delta within 3 se");
    o.detail << " | n=" << n << " P_e exact=" << g(m.error_probability) << " mc=" << g(mc.error_rate) << "+-"
             << g(mc.error_rate_se) << " (z=" << g(z_pe) << ") Delta exact=" << g(m.disturbance)
             << " mc=" << g(mc.disturbance) << "+-" << g(mc.disturbance_se) << " (z=" << g(z_d) << ")";
  }
  o.detail << " trials=" << kTrials << " seed=" << kTrialSeed;
  return o;
}

// 8
Outcome gentle_measurement() {
  Outcome o;
  std::vector<std::pair<std::string, std::pair<CqswCode, CqEnsemble>>> runs;
  runs.push_back({"orthogonal n=4", {greedy_cover(presets::orthogonal_pair(), 4, 0.01, 0.5, 1),
                                     presets::orthogonal_pair()}});
  CodingOptions drop;
  drop.drop_reserved_when_exact = true;
  runs.push_back({"bb84 n=1", {cover_from_codes(presets::bb84(), 1, {{{0}, {1}}, {{2}, {3}}}, 0.01, 1.0, drop),
                               presets::bb84()}});
  for (std::size_t n : {2u, 3u, 4u, 5u, 6u})
    runs.push_back({"zero-plus n=" + std::to_string(n), {zero_plus_cover(n), presets::zero_plus()}});
  for (const auto& [name, run] : runs) {
    const auto m = exact_code_metrics(run.first, run.second);
    const auto realized = gentle_measurement_check(m.max_deficit, m.disturbance);
    const auto design = gentle_measurement_check(run.first.epsilon, m.disturbance);
    o.require(realized.passes, name + ": Delta <= sqrt(8 eps_hat) + eps_hat");
    o.detail << " | " << name << ": Delta=" << g(m.disturbance) << " eps_hat=" << g(m.max_deficit)
             << " bound=" << g(realized.bound) << " design_bound=" << g(design.bound);
  }
  return o;
}

// 9
Outcome measurement_compression() {
  Outcome o;
  const auto r = bb84_measurement_compression();
  o.require(r.max_prob_diff <= 1e-10, "outcome distributions equal");
  o.require(r.max_state_diff <= 1e-10, "per-outcome reference states within 1e-10");
  o.require(r.simulated_comm_bits == 1.0 && r.shared_random_bits == 1.0 && r.direct_bits == 2.0,
            "1 bit + 1 shared random bit vs 2 bits");
  o.detail << "max|dp|=" << g(r.max_prob_diff) << " max|drho|=" << g(r.max_state_diff)
           << " comm=" << g(r.simulated_comm_bits) << " shared=" << g(r.shared_random_bits)
           << " direct=" << g(r.direct_bits);
  return o;
}

// 10
Outcome determinism() {
  Outcome o;
  const auto zp = presets::zero_plus();
  std::size_t identical = 0, total = 0;
  for (const auto& command : subcommands()) {
    RunConfig cfg;
    cfg.command = command;
    cfg.seed = 7;
    cfg.n = 4;
    cfg.delta = 0.5;
    cfg.epsilon = 0.2;
    cfg.trials = 20000;
    cfg.mode = "both";
    const std::optional<CqEnsemble> e = needs_ensemble(command) ? std::optional<CqEnsemble>(zp) : std::nullopt;
    cfg.workers = 1;
    const auto a = run_experiment(cfg, e);
    const auto b = run_experiment(cfg, e);
    cfg.workers = 4;
    const auto c = run_experiment(cfg, e);
    const bool same = a.csv == b.csv && a.csv == c.csv && a.manifest == c.manifest;
    o.require(same, command + " byte-identical");
    identical += same;
    ++total;
  }
  o.detail << identical << "/" << total << " subcommands byte-identical across repeats and worker counts 1/4";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int k = 1; k < argc; ++k) {
    const std::string a = argv[k];
    if (a == "--only" && k + 1 < argc) only = std::atoi(argv[++k]);
  }
  const std::vector<Criterion> criteria = {
      {1, "bb84-oneshot", bb84_one_shot},
      {2, "orthogonal-ensemble", orthogonal_cover},
      {3, "entropic-identities", entropic_identities},
      {4, "typicality-oracles", typicality_oracles},
      {5, "trace-capture-trend", capture_trend},
      {6, "cover-soundness", cover_soundness},
      {7, "monte-carlo-vs-exact", monte_carlo_agreement},
      {8, "gentle-measurement", gentle_measurement},
      {9, "measurement-compression", measurement_compression},
      {10, "determinism", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& err) {
      o.pass = false;
      o.detail << "exception: " << err.what();
    }
    std::printf("%s %2d %-24s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, (o.detail.str() + o.violations).c_str());
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
