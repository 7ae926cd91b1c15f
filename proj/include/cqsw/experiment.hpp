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

// Batch runs behind the command-line tool. A run is a pure function of its
// RunConfig and ensemble: it returns the results CSV, the manifest and the
// assertion outcomes, and writes nothing itself.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cqsw/coding.hpp"
#include "cqsw/cq_system.hpp"
#include "cqsw/errors.hpp"
#include "cqsw/io.hpp"
#include "cqsw/protocol.hpp"
#include "cqsw/typicality.hpp"

#ifndef CQSW_VERSION
#define CQSW_VERSION "0.0.0"
#endif

namespace cqsw {

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"rates",    "typical",        "build-code",   "cover",
                                                 "simulate", "converse-audit", "bb84-oneshot", "bb84-measure-sim"};
  return names;
}

/// True when the subcommand reads an ensemble (the BB84 demos build their own).
inline bool needs_ensemble(const std::string& command) {
  return command != "bb84-oneshot" && command != "bb84-measure-sim";
}

struct RunConfig {
  std::string command;
  std::optional<std::size_t> n;
  std::optional<double> delta;
  std::optional<double> epsilon;
  std::uint64_t seed = 0;
  std::size_t trials = 100000;
  std::string mode = "exact";  // exact | mc | both
  std::size_t max_dim = kDefaultMaxDenseDim;
  std::uint64_t max_enumeration = kDefaultMaxEnumeration;
  std::size_t workers = 0;  // not part of the config hash
  std::string out;          // not part of the config hash
};

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunResult {
  std::string config_hash;
  std::string csv;
  std::string manifest;
  std::vector<Assertion> assertions;

  bool all_passed() const {
    for (const auto& a : assertions)
      if (!a.passed) return false;
    return true;
  }
  int exit_code() const { return all_passed() ? 0 : 3; }
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

inline bool uses(const std::string& command, const char* field) {
  const std::string f = field;
  if (!needs_ensemble(command) || command == "rates") return false;
  if (f == "n" || f == "delta") return true;
  if (f == "epsilon") return command != "typical";
  if (f == "trials" || f == "mode") return command == "simulate" || command == "converse-audit";
  return false;
}

inline void validate_config(const RunConfig& cfg) {
  bool known = false;
  for (const auto& s : subcommands()) known = known || s == cfg.command;
  require(known, "unknown subcommand \"" + cfg.command + "\"");
  if (uses(cfg.command, "n")) {
    require(cfg.n.has_value(), "--n is required for " + cfg.command);
    require(*cfg.n >= 1 && *cfg.n <= 64, "--n must lie in [1, 64]");
  }
  if (uses(cfg.command, "delta")) {
    require(cfg.delta.has_value(), "--delta is required for " + cfg.command);
    require(std::isfinite(*cfg.delta) && *cfg.delta > 0.0, "--delta must be > 0");
  }
  if (uses(cfg.command, "epsilon")) {
    require(cfg.epsilon.has_value(), "--epsilon is required for " + cfg.command);
    require(*cfg.epsilon > 0.0 && *cfg.epsilon < 1.0, "--epsilon must lie in (0, 1)");
  }
  require(cfg.trials >= 1, "--trials must be >= 1");
  require(cfg.mode == "exact" || cfg.mode == "mc" || cfg.mode == "both", "--mode must be exact, mc or both");
  require(cfg.max_dim >= 1, "--max-dim must be >= 1");
  require(cfg.max_enumeration >= 1, "--max-enum must be >= 1");
}

/// Canonical config: every field that can change the output, nothing else.
inline io::json canonical_config(const RunConfig& cfg, const std::optional<CqEnsemble>& e) {
  io::json j;
  j["command"] = cfg.command;
  j["seed"] = cfg.seed;
  j["max_dim"] = cfg.max_dim;
  j["max_enumeration"] = cfg.max_enumeration;
  if (uses(cfg.command, "n")) j["n"] = *cfg.n;
  if (uses(cfg.command, "delta")) j["delta"] = *cfg.delta;
  if (uses(cfg.command, "epsilon")) j["epsilon"] = *cfg.epsilon;
  if (uses(cfg.command, "trials")) {
    j["trials"] = cfg.trials;
    j["mode"] = cfg.mode;
  }
  if (e) j["ensemble"] = io::ensemble_to_json(*e);
  return j;
}

inline std::string sequence_label(const CqEnsemble& e, const Sequence& xn) {
  std::string s;
  for (std::size_t k = 0; k < xn.size(); ++k) s += (k ? " " : "") + e.alphabet()[xn[k]];
  return s;
}

inline CodingOptions coding_options(const RunConfig& cfg) {
  CodingOptions o;
  o.max_dim = cfg.max_dim;
  o.max_enumeration = cfg.max_enumeration;
  return o;
}

inline std::string opt(const std::optional<double>& v) { return v ? io::fmt(*v) : ""; }

// ---- subcommands ----------------------------------------------------------

inline io::CsvTable run_rates(const RunConfig&, const CqEnsemble& e, const std::string& hash, std::uint64_t seed,
                              std::vector<Assertion>&) {
  io::CsvTable t("rates", hash, seed,
                 {"alphabet_size", "dim", "H_X", "H_Q", "H_Q_given_X", "chi", "H_X_given_Q",
                  "H_X_given_Q_definitional", "H_X_given_Q_chi", "H_X_given_Q_ehs"});
  const double h_x = shannon_entropy(e.probs());
  const double chi = holevo_information(e);
  const EhsEntropies ehs = ehs_entropies(e);
  t.add_row({std::to_string(e.size()), std::to_string(e.dim()), io::fmt(h_x), io::fmt(ehs.h_q),
             io::fmt(conditional_q_entropy(e)), io::fmt(chi), io::fmt(cqsw_rate(e)), io::fmt(ehs.a_given_q()),
             io::fmt(h_x - chi), io::fmt(h_x - ehs.mutual_information())});
  return t;
}

inline io::CsvTable run_typical(const RunConfig& cfg, const CqEnsemble& e, const std::string& hash,
                                std::uint64_t seed, std::vector<Assertion>& checks) {
  io::CsvTable t("typical", hash, seed,
                 {"object", "n", "delta", "implied_delta", "entropy", "count", "probability", "log2_count",
                  "log2_lower", "log2_upper", "lower_ok", "upper_ok"});
  const std::size_t n = *cfg.n;
  const double delta = *cfg.delta;
  const TypicalSet set = typical_set(e.probs(), n, delta, cfg.max_enumeration);
  t.add_row({"sequences", std::to_string(n), io::fmt(delta), io::fmt(set.implied_delta), io::fmt(set.entropy),
             std::to_string(set.members.size()), io::fmt(set.total_prob), io::fmt(set.log2_size()),
             io::fmt(set.log2_lower_bound()), io::fmt(set.log2_upper_bound()), io::fmt(set.lower_bound_holds()),
             io::fmt(set.upper_bound_holds())});

  const RealVector spectrum = eig_hermitian(e.average_state().matrix()).eigenvalues;
  const double h_q = spectrum_entropy(std::vector<double>(spectrum.data(), spectrum.data() + spectrum.size()));
  const std::uint64_t dim = typical_subspace_dimension(spectrum, n, delta);
  const double log2_dim = dim == 0 ? -INFINITY : std::log2(static_cast<double>(dim));
  const double nd = static_cast<double>(n);
  const double lo = nd * (h_q - delta), hi = nd * (h_q + delta);
  t.add_row({"subspace", std::to_string(n), io::fmt(delta), io::fmt(delta), io::fmt(h_q), std::to_string(dim),
             io::fmt(typical_subspace_capture(spectrum, n, delta)), io::fmt(log2_dim), io::fmt(lo), io::fmt(hi),
             io::fmt(log2_dim >= lo - 1e-9), io::fmt(log2_dim <= hi + 1e-9)});
  checks.push_back({"typical_set_upper_bound", set.upper_bound_holds(), "|T| <= 2^{n(H+delta')}"});
  checks.push_back({"typical_subspace_upper_bound", log2_dim <= hi + 1e-9, "rank <= 2^{n(H+delta)}"});
  return t;
}

inline io::CsvTable run_build_code(const RunConfig& cfg, const CqEnsemble& e, const std::string& hash,
                                   std::uint64_t seed, std::vector<Assertion>& checks) {
  io::CsvTable t("build-code", hash, seed,
                 {"n", "delta", "epsilon", "codeword_index", "codeword", "probability", "error", "code_size", "rate",
                  "max_error", "chi", "audit_log2_target", "audit_met"});
  const std::size_t n = *cfg.n;
  const double delta = *cfg.delta, eps = *cfg.epsilon;
  const TypicalSet set = typical_set(e.probs(), n, delta, cfg.max_enumeration);
  const ChannelCode code = build_channel_code(e, n, eps, delta, set.members, seed, coding_options(cfg));
  const double chi = holevo_information(e);
  // rate target n(chi - delta) is reported only
  const double target = static_cast<double>(n) * (chi - delta);
  const bool met = std::log2(static_cast<double>(code.size())) >= target - 1e-12;
  for (std::size_t k = 0; k < code.size(); ++k)
    t.add_row({std::to_string(n), io::fmt(delta), io::fmt(eps), std::to_string(k),
               sequence_label(e, code.codewords[k]), io::fmt(sequence_probability(e, code.codewords[k])),
               io::fmt(code.per_codeword_error[k]), std::to_string(code.size()), io::fmt(code.rate()),
               io::fmt(code.max_error()), io::fmt(chi), io::fmt(target), io::fmt(met)});
  checks.push_back({"max_codeword_error", code.max_error() <= eps + 1e-12,
                    "max error " + io::fmt(code.max_error()) + " vs epsilon " + io::fmt(eps)});
  return t;
}

inline std::vector<std::string> cover_columns() {
  return {"n", "delta", "epsilon", "code_index", "code_size", "code_probability", "code_max_error", "M", "rate",
          "H_X_given_Q", "typical_mass", "residual", "residual_bound", "residual_ok", "stop_reason",
          "failure_value"};
}

inline void check_cover(const CqswCode& code, std::vector<Assertion>& checks) {
  checks.push_back({"cover_residual", code.residual_ok(),
                    "residual " + io::fmt(code.residual) + " vs bound " + io::fmt(code.residual_bound)});
  double worst = 0.0;
  for (const auto& c : code.codes()) worst = std::max(worst, c.max_error());
  checks.push_back({"max_codeword_error", worst <= code.epsilon + 1e-12,
                    "max error " + io::fmt(worst) + " vs epsilon " + io::fmt(code.epsilon)});
}

inline io::CsvTable run_cover(const RunConfig& cfg, const CqEnsemble& e, const std::string& hash,
                              std::uint64_t seed, std::vector<Assertion>& checks) {
  io::CsvTable t("cover", hash, seed, cover_columns());
  const CqswCode code = greedy_cover(e, *cfg.n, *cfg.epsilon, *cfg.delta, seed, coding_options(cfg));
  const double rate = cqsw_rate(e);
  auto row = [&](const std::string& index, const std::string& size, const std::string& prob,
                 const std::string& err) {
    t.add_row({std::to_string(code.n()), io::fmt(code.delta), io::fmt(code.epsilon), index, size, prob, err,
               std::to_string(code.M()), io::fmt(code.rate()), io::fmt(rate), io::fmt(code.typical_mass),
               io::fmt(code.residual), io::fmt(code.residual_bound), io::fmt(code.residual_ok()),
               to_string(code.stop), io::fmt(code.failure_value)});
  };
  for (std::size_t i = 0; i < code.codes().size(); ++i) {
    const auto& c = code.codes()[i];
    row(std::to_string(i + 1), std::to_string(c.size()), io::fmt(code_mass(e, c)), io::fmt(c.max_error()));
  }
  if (code.has_reserved_index()) row(std::to_string(code.otherwise_index()), "0", io::fmt(code.residual), "");
  check_cover(code, checks);
  return t;
}

inline io::CsvTable run_simulate(const RunConfig& cfg, const CqEnsemble& e, const std::string& hash,
                                 std::uint64_t seed, std::vector<Assertion>& checks) {
  io::CsvTable t("simulate", hash, seed,
                 {"method", "n", "delta", "epsilon", "M", "rate", "trials", "P_e", "P_e_se", "Delta", "Delta_se",
                  "eps_hat", "gentle_bound", "gentle_ok", "gentle_bound_design", "gentle_ok_design", "residual",
                  "residual_bound", "residual_ok", "converse_verdict"});
  const CqswCode code = greedy_cover(e, *cfg.n, *cfg.epsilon, *cfg.delta, seed, coding_options(cfg));
  check_cover(code, checks);
  double eps_hat = 0.0;
  for (const auto& c : code.codes()) eps_hat = std::max(eps_hat, c.max_error());

  auto emit = [&](const std::string& method, std::size_t trials, double pe, std::optional<double> pe_se,
                  double dist, std::optional<double> dist_se) {
    const GentleCheck g = gentle_measurement_check(eps_hat, dist);
    const GentleCheck gd = gentle_measurement_check(code.epsilon, dist);
    const ConverseLedger l = converse_audit(code, e, pe, {false, 0});
    checks.push_back({"gentle_bound_" + method, g.passes,
                      "Delta " + io::fmt(dist) + " vs " + io::fmt(g.bound) + " at eps_hat " + io::fmt(eps_hat)});
    checks.push_back({"converse_floor_" + method, l.verdict, "P_e " + io::fmt(pe)});
    t.add_row({method, std::to_string(code.n()), io::fmt(code.delta), io::fmt(code.epsilon),
               std::to_string(code.M()), io::fmt(code.rate()), trials ? std::to_string(trials) : "", io::fmt(pe),
               opt(pe_se), io::fmt(dist), opt(dist_se), io::fmt(eps_hat), io::fmt(g.bound), io::fmt(g.passes),
               io::fmt(gd.bound), io::fmt(gd.passes), io::fmt(code.residual), io::fmt(code.residual_bound),
               io::fmt(code.residual_ok()), io::fmt(l.verdict)});
  };
  if (cfg.mode != "mc") {
    const CodeMetrics m = exact_code_metrics(code, e, cfg.max_enumeration);
    emit("exact", 0, m.error_probability, std::nullopt, m.disturbance, std::nullopt);
  }
  if (cfg.mode != "exact") {
    TrialOptions to;
    to.workers = cfg.workers;
    const MonteCarloResult mc = run_trials(code, e, cfg.trials, seed, to);
    emit("mc", cfg.trials, mc.error_rate, mc.error_rate_se, mc.disturbance, mc.disturbance_se);
  }
  return t;
}

inline io::CsvTable run_converse(const RunConfig& cfg, const CqEnsemble& e, const std::string& hash,
                                 std::uint64_t seed, std::vector<Assertion>& checks) {
  io::CsvTable t("converse-audit", hash, seed,
                 {"n", "delta", "epsilon", "rate", "P_e", "P_e_source", "H_X", "chi", "fano", "line", "expression",
                  "value", "chain_monotone", "verdict", "note"});
  const CqswCode code = greedy_cover(e, *cfg.n, *cfg.epsilon, *cfg.delta, seed, coding_options(cfg));
  double pe;
  std::string source;
  if (cfg.mode == "mc") {
    TrialOptions to;
    to.workers = cfg.workers;
    pe = run_trials(code, e, cfg.trials, seed, to).error_rate;
    source = "mc";
  } else {
    pe = exact_code_metrics(code, e, cfg.max_enumeration).error_probability;
    source = "exact";
  }
  ConverseOptions co;
  co.max_enumeration = std::min<std::uint64_t>(cfg.max_enumeration, co.max_enumeration);
  const ConverseLedger l = converse_audit(code, e, pe, co);
  for (std::size_t k = 0; k < l.chain.size(); ++k)
    t.add_row({std::to_string(l.n), io::fmt(code.delta), io::fmt(code.epsilon), io::fmt(l.rate),
               io::fmt(l.error_probability), source, io::fmt(l.h_x), io::fmt(l.chi), io::fmt(l.fano),
               std::to_string(k), l.chain[k].expression, opt(l.chain[k].value), io::fmt(l.chain_monotone),
               io::fmt(l.verdict), l.note});
  checks.push_back({"converse_floor", l.verdict, "nR + n chi >= n(H(X) - 1/n - P_e log|X|)"});
  return t;
}

inline io::CsvTable run_bb84_oneshot(const std::string& hash, std::uint64_t seed, std::vector<Assertion>& checks) {
  io::CsvTable t("bb84-oneshot", hash, seed,
                 {"H_X", "chi", "H_X_given_Q", "M", "rate", "P_e", "Delta", "passes"});
  const Bb84OneShotReport r = bb84_oneshot();
  t.add_row({io::fmt(r.h_x), io::fmt(r.chi), io::fmt(r.h_x_given_q), std::to_string(r.M), io::fmt(r.rate),
             io::fmt(r.error_probability), io::fmt(r.disturbance), io::fmt(r.passes)});
  checks.push_back({"bb84_oneshot", r.passes, "rate 1, P_e 0, Delta 0"});
  return t;
}

inline io::CsvTable run_bb84_measure(const std::string& hash, std::uint64_t seed, std::vector<Assertion>& checks) {
  io::CsvTable t("bb84-measure-sim", hash, seed,
                 {"outcome", "p_direct", "p_simulated", "reference_state_diff", "direct_bits", "comm_bits",
                  "shared_random_bits", "chi", "H_X_given_Q", "passes"});
  const MeasurementCompressionReport r = bb84_measurement_compression();
  for (std::size_t k = 0; k < r.outcomes.size(); ++k)
    t.add_row({r.outcomes[k], io::fmt(r.direct_probs[k]), io::fmt(r.simulated_probs[k]),
               io::fmt(r.reference_state_diffs[k]), io::fmt(r.direct_bits), io::fmt(r.simulated_comm_bits),
               io::fmt(r.shared_random_bits), io::fmt(r.chi), io::fmt(r.h_x_given_q), io::fmt(r.passes)});
  checks.push_back({"measurement_simulation", r.passes, "distribution and reference states within 1e-10"});
  return t;
}

}  // namespace detail

/// Execute one subcommand. Throws ValidationError for bad configs and
/// CapExceeded when a dense dimension or enumeration is over its cap; failed
/// assertions are reported in the result, not thrown.
inline RunResult run_experiment(const RunConfig& cfg, const std::optional<CqEnsemble>& ensemble) {
  detail::validate_config(cfg);
  if (needs_ensemble(cfg.command) && !ensemble) throw ValidationError("--ensemble is required for " + cfg.command);
  const std::optional<CqEnsemble> e = needs_ensemble(cfg.command) ? ensemble : std::nullopt;

  const io::json config = detail::canonical_config(cfg, e);
  RunResult r;
  r.config_hash = io::fnv1a_hex(config.dump());
  const std::string& c = cfg.command;
  const std::uint64_t s = cfg.seed;
  auto table = [&]() -> io::CsvTable {
    if (c == "rates") return detail::run_rates(cfg, *e, r.config_hash, s, r.assertions);
    if (c == "typical") return detail::run_typical(cfg, *e, r.config_hash, s, r.assertions);
    if (c == "build-code") return detail::run_build_code(cfg, *e, r.config_hash, s, r.assertions);
    if (c == "cover") return detail::run_cover(cfg, *e, r.config_hash, s, r.assertions);
    if (c == "simulate") return detail::run_simulate(cfg, *e, r.config_hash, s, r.assertions);
    if (c == "converse-audit") return detail::run_converse(cfg, *e, r.config_hash, s, r.assertions);
    if (c == "bb84-oneshot") return detail::run_bb84_oneshot(r.config_hash, s, r.assertions);
    return detail::run_bb84_measure(r.config_hash, s, r.assertions);
  }();
  r.csv = table.str();

  io::json manifest;
  manifest["artifact"] = "cqsw";
  manifest["version"] = CQSW_VERSION;
  manifest["csv_schema"] = io::kCsvSchema;
  manifest["command"] = c;
  manifest["seed"] = s;
  manifest["config"] = config;
  manifest["config_hash"] = r.config_hash;
  manifest["instrument"] = kInstrumentConvention;
  manifest["rows"] = table.rows();
  io::json checks = io::json::array();
  for (const auto& a : r.assertions) checks.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  manifest["assertions"] = checks;
  manifest["passed"] = r.all_passed();
  r.manifest = manifest.dump(2) + "\n";
  return r;
}

}  // namespace cqsw
