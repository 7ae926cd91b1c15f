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

// Ensemble documents (JSON) and results tables (CSV). See docs/formats.md.

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cqsw/cq_system.hpp"
#include "cqsw/errors.hpp"
#include "cqsw/linalg.hpp"

namespace cqsw::io {

using nlohmann::json;

inline constexpr const char* kCsvSchema = "cqsw-csv/1";

namespace detail {

inline std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

[[noreturn]] inline void fail(const std::string& source, const std::string& path, const std::string& msg) {
  throw ValidationError(source + ": " + (path.empty() ? "" : path + ": ") + msg);
}

inline double number_at(const json& j, const std::string& source, const std::string& path) {
  if (!j.is_number()) fail(source, path, "expected a number");
  return j.get<double>();
}

inline ComplexVector state_ket(const std::string& name) {
  if (name == "zero") return kets::zero();
  if (name == "one") return kets::one();
  if (name == "plus") return kets::plus();
  if (name == "minus") return kets::minus();
  if (name == "plus-i") return kets::plus_i();
  if (name == "minus-i") return kets::minus_i();
  return {};
}

inline DensityOperator parse_state(const json& j, const std::string& source, const std::string& path) {
  if (!j.is_object()) fail(source, path, "expected an object with \"matrix\" or \"preset\"");
  const bool has_matrix = j.contains("matrix"), has_preset = j.contains("preset");
  if (has_matrix == has_preset) fail(source, path, "exactly one of \"matrix\" or \"preset\" is required");
  if (has_preset) {
    const auto& p = j.at("preset");
    if (!p.is_string()) fail(source, path + ".preset", "expected a string");
    const auto name = p.get<std::string>();
    if (name == "mixed") return DensityOperator::maximally_mixed(2);
    const ComplexVector ket = state_ket(name);
    if (ket.size() == 0) fail(source, path + ".preset", "unknown state preset \"" + name + "\"");
    return DensityOperator::pure(ket);
  }
  const auto& rows = j.at("matrix");
  const std::string mpath = path + ".matrix";
  if (!rows.is_array() || rows.empty()) fail(source, mpath, "expected a non-empty array of rows");
  const auto dim = static_cast<Eigen::Index>(rows.size());
  ComplexMatrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    const std::string rpath = mpath + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim)
      fail(source, rpath, "expected a row of " + std::to_string(dim) + " [re, im] pairs");
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto& z = row[static_cast<std::size_t>(c)];
      const std::string zpath = rpath + "[" + std::to_string(c) + "]";
      if (!z.is_array() || z.size() != 2) fail(source, zpath, "expected [re, im]");
      m(r, c) = Complex(number_at(z[0], source, zpath + "[0]"), number_at(z[1], source, zpath + "[1]"));
    }
  }
  try {
    return DensityOperator::from_matrix(std::move(m));
  } catch (const ValidationError& err) {
    fail(source, mpath, err.what());
  }
}

}  // namespace detail

inline CqEnsemble ensemble_preset(const std::string& name) {
  if (name == "bb84") return presets::bb84();
  if (name == "orthogonal-pair") return presets::orthogonal_pair();
  if (name == "zero-plus") return presets::zero_plus();
  throw ValidationError("unknown ensemble preset \"" + name + "\" (expected bb84, orthogonal-pair or zero-plus)");
}

/// Parse an ensemble document. Errors name the source and the offending field.
inline CqEnsemble parse_ensemble_text(std::string_view text, const std::string& source = "<input>") {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& err) {
    throw ValidationError(source + ": " + detail::line_col(text, err.byte) + ": malformed JSON (" + err.what() + ")");
  }
  if (!doc.is_object()) detail::fail(source, "", "top level must be an object");
  if (doc.contains("preset")) {
    if (doc.size() != 1) detail::fail(source, "preset", "an ensemble preset takes no other fields");
    if (!doc["preset"].is_string()) detail::fail(source, "preset", "expected a string");
    try {
      return ensemble_preset(doc["preset"].get<std::string>());
    } catch (const ValidationError& err) {
      detail::fail(source, "preset", err.what());
    }
  }
  for (const char* key : {"alphabet", "probs", "states"})
    if (!doc.contains(key)) detail::fail(source, key, "missing required field");
  for (const auto& [key, value] : doc.items())
    if (key != "alphabet" && key != "probs" && key != "states") detail::fail(source, key, "unknown field");

  const auto& alphabet_j = doc["alphabet"];
  const auto& probs_j = doc["probs"];
  const auto& states_j = doc["states"];
  if (!alphabet_j.is_array() || alphabet_j.empty()) detail::fail(source, "alphabet", "expected a non-empty array");
  if (!probs_j.is_array() || probs_j.size() != alphabet_j.size())
    detail::fail(source, "probs", "expected an array with one entry per alphabet symbol");
  if (!states_j.is_array() || states_j.size() != alphabet_j.size())
    detail::fail(source, "states", "expected an array with one entry per alphabet symbol");

  std::vector<std::string> alphabet;
  std::vector<double> probs;
  std::vector<DensityOperator> states;
  for (std::size_t k = 0; k < alphabet_j.size(); ++k) {
    const std::string idx = "[" + std::to_string(k) + "]";
    if (!alphabet_j[k].is_string()) detail::fail(source, "alphabet" + idx, "expected a string");
    alphabet.push_back(alphabet_j[k].get<std::string>());
    probs.push_back(detail::number_at(probs_j[k], source, "probs" + idx));
    states.push_back(detail::parse_state(states_j[k], source, "states" + idx));
  }
  try {
    return CqEnsemble::create(std::move(alphabet), std::move(probs), std::move(states));
  } catch (const DimensionError& err) {
    detail::fail(source, "states", err.what());
  } catch (const ValidationError& err) {
    detail::fail(source, "probs", err.what());
  }
}

inline CqEnsemble parse_ensemble(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open ensemble file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ensemble_text(buf.str(), path);
}

/// Explicit-matrix document; doubles are written with round-trip precision.
inline json ensemble_to_json(const CqEnsemble& e) {
  json states = json::array();
  for (const auto& s : e.states()) {
    json rows = json::array();
    const auto& m = s.matrix();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
      rows.push_back(std::move(row));
    }
    states.push_back({{"matrix", std::move(rows)}});
  }
  return {{"alphabet", e.alphabet()}, {"probs", e.probs()}, {"states", std::move(states)}};
}

inline std::string serialize_ensemble(const CqEnsemble& e) { return ensemble_to_json(e).dump(2) + "\n"; }

/// %.12g, the precision of every float in results tables.
inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string fmt(bool v) { return v ? "true" : "false"; }

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Results table. Every row is prefixed with schema, command, config hash and seed.
class CsvTable {
 public:
  CsvTable(std::string command, std::string config_hash, std::uint64_t seed, std::vector<std::string> columns)
      : command_(std::move(command)), hash_(std::move(config_hash)), seed_(seed), columns_(std::move(columns)) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size())
      throw std::logic_error("CsvTable: row has " + std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(columns_.size()));
    rows_.push_back(std::move(cells));
  }

  std::string str() const {
    std::string out = "schema,command,config_hash,seed";
    for (const auto& c : columns_) out += "," + escape(c);
    out += "\n";
    for (const auto& row : rows_) {
      out += std::string(kCsvSchema) + "," + escape(command_) + "," + hash_ + "," + std::to_string(seed_);
      for (const auto& cell : row) out += "," + escape(cell);
      out += "\n";
    }
    return out;
  }

  std::size_t rows() const noexcept { return rows_.size(); }

 private:
  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }

  std::string command_;
  std::string hash_;
  std::uint64_t seed_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace cqsw::io
