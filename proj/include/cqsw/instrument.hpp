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

// Post-measurement maps. A POVM fixes outcome statistics only; the state
// update used throughout is the square-root Kraus (Lueders-type) instrument
//   Lambda_j : rho -> sqrt(Lambda_j) rho sqrt(Lambda_j).

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cqsw/linalg.hpp"

namespace cqsw {

inline constexpr const char* kInstrumentConvention = "square-root Kraus (Lueders): sqrt(L) rho sqrt(L)";

struct PostMeasurement {
  double prob;
  std::optional<DensityOperator> state;  // empty when prob <= 1e-12
};

inline PostMeasurement post_measurement_state(const DensityOperator& rho, const ComplexMatrix& element) {
  if (static_cast<std::size_t>(element.rows()) != rho.dim() || element.rows() != element.cols())
    throw DimensionError("post_measurement_state: element/state dimension mismatch");
  const double prob = (rho.matrix() * element).trace().real();
  if (prob <= tol::kPseudoInverse) return {prob, std::nullopt};
  const ComplexMatrix root = sqrt_psd(element);
  return {prob, trusted_state(root * rho.matrix() * root)};
}

/// sqrt of every element, computed once per POVM.
inline std::vector<ComplexMatrix> kraus_roots(std::span<const ComplexMatrix> elements) {
  std::vector<ComplexMatrix> roots;
  roots.reserve(elements.size());
  for (const auto& e : elements) roots.push_back(sqrt_psd(e));
  return roots;
}

/// Outcome-averaged residual sum_j sqrt(L_j) rho sqrt(L_j); trace preserving.
inline ComplexMatrix averaged_residual(const ComplexMatrix& rho, std::span<const ComplexMatrix> roots) {
  ComplexMatrix acc = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& r : roots) acc.noalias() += r * rho * r;
  return acc;
}

}  // namespace cqsw
