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

// cqsw: batch front-end. Exit codes: 0 ok, 2 validation, 3 assertion, 4 cap.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cqsw/experiment.hpp"
#include "cqsw/io.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitAssertion = 3;
constexpr int kExitCap = 4;

struct Cli {
  std::string ensemble;
  std::size_t n = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  cqsw::RunConfig cfg;
};

void add_options(CLI::App* sub, Cli& cli) {
  const std::string& name = sub->get_name();
  sub->add_option("--seed", cli.seed, "master seed (u64)")->required();
  if (cqsw::needs_ensemble(name))
    sub->add_option("--ensemble", cli.ensemble, "ensemble JSON file, or preset:<bb84|orthogonal-pair|zero-plus>")
        ->required();
  if (cqsw::detail::uses(name, "n")) sub->add_option("--n", cli.n, "block length")->required();
  if (cqsw::detail::uses(name, "delta")) sub->add_option("--delta", cli.delta, "typicality slack")->required();
  if (cqsw::detail::uses(name, "epsilon"))
    sub->add_option("--epsilon", cli.epsilon, "per-codeword error target")->required();
  if (cqsw::detail::uses(name, "trials")) {
    sub->add_option("--trials", cli.cfg.trials, "Monte Carlo trials")->capture_default_str();
    sub->add_option("--mode", cli.cfg.mode, "exact | mc | both")
        ->check(CLI::IsMember({"exact", "mc", "both"}))
        ->capture_default_str();
  }
  sub->add_option("--out", cli.cfg.out, "results CSV path (manifest goes to <out>.manifest.json)");
  sub->add_option("--workers", cli.cfg.workers, "worker threads, 0 = all cores")->capture_default_str();
  sub->add_option("--max-dim", cli.cfg.max_dim, "cap on dense operator dimension")->capture_default_str();
  sub->add_option("--max-enum", cli.cfg.max_enumeration, "cap on enumerated sequences")->capture_default_str();
}

std::optional<cqsw::CqEnsemble> load_ensemble(const std::string& arg) {
  if (arg.empty()) return std::nullopt;
  if (arg.rfind("preset:", 0) == 0) return cqsw::io::ensemble_preset(arg.substr(7));
  return cqsw::io::parse_ensemble(arg);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cqsw::ValidationError(path + ": cannot open for writing");
  out << text;
  if (!out) throw cqsw::ValidationError(path + ": write failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cqsw: classical compression with quantum side information"};
  app.set_version_flag("--version", std::string(CQSW_VERSION));
  app.require_subcommand(1);
  Cli cli;
  const std::map<std::string, std::string> blurbs = {
      {"rates", "entropies and the optimal rate H(X|Q)"},
      {"typical", "typical set and typical subspace sizes"},
      {"build-code", "one greedy code with exact codeword errors"},
      {"cover", "greedy disjoint-code cover of the typical set"},
      {"simulate", "exact and Monte Carlo protocol metrics"},
      {"converse-audit", "Fano/Holevo chain for a constructed cover"},
      {"bb84-oneshot", "one-bit BB84 basis scheme"},
      {"bb84-measure-sim", "BB84 measurement simulation with shared randomness"}};
  for (const auto& name : cqsw::subcommands()) add_options(app.add_subcommand(name, blurbs.at(name)), cli);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    cqsw::RunConfig cfg = cli.cfg;
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.seed = cli.seed;
    if (cqsw::detail::uses(cfg.command, "n")) cfg.n = cli.n;
    if (cqsw::detail::uses(cfg.command, "delta")) cfg.delta = cli.delta;
    if (cqsw::detail::uses(cfg.command, "epsilon")) cfg.epsilon = cli.epsilon;

    const auto result = cqsw::run_experiment(cfg, load_ensemble(cli.ensemble));
    if (cfg.out.empty()) {
      std::cout << result.csv;
    } else {
      write_file(cfg.out, result.csv);
      write_file(cfg.out + ".manifest.json", result.manifest);
    }
    for (const auto& a : result.assertions)
      if (!a.passed) std::cerr << "cqsw: assertion failed: " << a.name << " (" << a.detail << ")\n";
    return result.exit_code();
  } catch (const cqsw::CapExceeded& err) {
    std::cerr << "cqsw: resource cap: " << err.what() << "\n"
              << "cqsw: lower --n or raise --max-dim / --max-enum\n";
    return kExitCap;
  } catch (const cqsw::ValidationError& err) {
    std::cerr << "cqsw: invalid input: " << err.what() << "\n";
    return kExitValidation;
  } catch (const cqsw::ConstructionError& err) {
    std::cerr << "cqsw: construction failed: " << err.what() << " (offending value "
              << cqsw::io::fmt(err.offending_value()) << ")\n";
    return kExitAssertion;
  } catch (const std::exception& err) {
    std::cerr << "cqsw: internal error: " << err.what() << "\n";
    return 1;
  }
}
