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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cqsw/typicality.hpp"
#include "oracles.hpp"

using namespace cqsw;
using Catch::Approx;

namespace {

ComplexMatrix diag2(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

void check_projector(const TypicalProjector& p) {
  const ComplexMatrix m = p.matrix();
  CHECK(max_abs(m * m - m) < 1e-8);
  CHECK(max_abs(m - m.adjoint()) < 1e-8);
  CHECK(std::abs(m.trace().real() - static_cast<double>(p.subspace_dim())) < 1e-8);
}

}  // namespace

TEST_CASE("typical set examples", "[typicality]") {
  const std::vector<double> uniform{0.5, 0.5};
  const auto all = typical_set(uniform, 4, 0.5);
  CHECK(all.members.size() == 16);
  CHECK(all.total_prob == Approx(1.0).margin(1e-12));

  const std::vector<double> skew{0.75, 0.25};
  const auto t = typical_set(skew, 8, 0.1);
  CHECK(t.members.size() == 28);
  for (const auto& xn : t.members) CHECK(std::count(xn.begin(), xn.end(), 1u) == 2);
  CHECK(t.total_prob == Approx(28.0 * std::pow(0.75, 6) * std::pow(0.25, 2)).margin(1e-12));

  const std::vector<double> det{1.0, 0.0};
  const auto d = typical_set(det, 5, 0.1);
  REQUIRE(d.members.size() == 1);
  CHECK(d.members[0] == Sequence(5, 0));
}

TEST_CASE("typical set arguments and caps", "[typicality]") {
  const std::vector<double> p{0.5, 0.5};
  CHECK_THROWS_AS(typical_set(p, 0, 0.1), ValidationError);
  CHECK_THROWS_AS(typical_set(p, 4, 0.0), ValidationError);
  CHECK_THROWS_AS(typical_set(p, 30, 0.1), CapExceeded);
  CHECK_THROWS_AS(typical_set(p, 12, 0.1, 1000), CapExceeded);
  // membership needs no enumeration
  CHECK(is_typical_sequence(p, Sequence(40, 0), 0.5));
  CHECK_FALSE(is_typical_sequence(p, Sequence(40, 0), 0.1));
}

TEST_CASE("property: typical set equals exhaustive frequency counting", "[typicality][property]") {
  for (double p0 : {0.5, 0.75, 0.9}) {
    const std::vector<double> p{p0, 1.0 - p0};
    for (int n = 1; n <= 12; ++n)
      for (double delta : {0.05, 0.1, 0.2, 0.35, 0.5}) {
        const auto t = typical_set(p, static_cast<std::size_t>(n), delta);
        std::vector<Sequence> expected;
        double mass = 0.0;
        for (const auto& xn : oracle::all_sequences(2, n))
          if (oracle::typical(p, xn, delta)) {
            expected.emplace_back(xn.begin(), xn.end());
            double q = 1.0;
            for (int x : xn) q *= p[static_cast<std::size_t>(x)];
            mass += q;
          }
        CHECK(t.members == expected);
        CHECK(t.total_prob == Approx(mass).margin(1e-10));
        CHECK(t.upper_bound_holds());
      }
  }
  // ternary alphabet
  const std::vector<double> q{0.5, 0.3, 0.2};
  for (int n = 1; n <= 6; ++n) {
    const auto t = typical_set(q, static_cast<std::size_t>(n), 0.2);
    std::size_t count = 0;
    for (const auto& xn : oracle::all_sequences(3, n)) count += oracle::typical(q, xn, 0.2);
    CHECK(t.members.size() == count);
  }
}

TEST_CASE("implied entropy slack", "[typicality]") {
  const std::vector<double> p{0.75, 0.25};
  CHECK(implied_entropy_delta(p, 0.1) == Approx(0.1 * (std::log2(4.0 / 3.0) + 2.0)).margin(1e-14));
  const std::vector<double> det{1.0, 0.0};
  CHECK(implied_entropy_delta(det, 0.3) == 0.0);
}

TEST_CASE("typical projector examples", "[typicality]") {
  const auto pure = typical_projector(DensityOperator::pure(kets::plus()), 3, 0.1);
  CHECK(pure.subspace_dim() == 1);
  const ComplexVector plus3 = oracle::kron(oracle::kron(kets::plus(), kets::plus()), kets::plus());
  CHECK(max_abs(pure.matrix() - outer(plus3)) < 1e-10);

  for (std::size_t n : {1u, 3u, 5u}) {
    const auto flat = typical_projector(DensityOperator::maximally_mixed(2), n, 0.01);
    CHECK(flat.subspace_dim() == (std::size_t{1} << n));
    CHECK(max_abs(flat.matrix() - identity(std::size_t{1} << n)) < 1e-10);
  }

  const auto rho = DensityOperator::from_matrix(diag2(0.85355, 0.14645));
  const auto p = typical_projector(rho, 6, 0.35);
  CHECK(p.subspace_dim() == oracle::typical_rank({0.85355, 0.14645}, 6, 0.35));
  check_projector(p);
}

TEST_CASE("typical projector respects the dense cap", "[typicality]") {
  CHECK_THROWS_AS(typical_projector(DensityOperator::maximally_mixed(2), 14, 0.1), CapExceeded);
  CHECK_THROWS_AS(typical_projector(DensityOperator::maximally_mixed(2), 6, 0.1, 32), CapExceeded);
}

TEST_CASE("property: projector rank equals eigenvalue-product enumeration", "[typicality][property]") {
  std::mt19937_64 g(21);
  for (int trial = 0; trial < 12; ++trial) {
    const auto rho = DensityOperator::from_matrix(oracle::random_qubit(g));
    const auto lambda = oracle::eigenvalues(rho.matrix());
    for (int n : {2, 5, 8, 12})
      for (double delta : {0.05, 0.2, 0.5}) {
        const auto expected = oracle::typical_rank(lambda, n, delta);
        CHECK(typical_subspace_dimension(eig_hermitian(rho.matrix()).eigenvalues, static_cast<std::size_t>(n),
                                         delta) == expected);
        if (n <= 8) CHECK(typical_projector(rho, static_cast<std::size_t>(n), delta).subspace_dim() == expected);
      }
  }
  // qutrit, d^n = 729
  ComplexMatrix qm = ComplexMatrix::Zero(3, 3);
  qm.diagonal() << 0.5, 0.3, 0.2;
  const auto q = DensityOperator::from_matrix(qm);
  const auto lambda = oracle::eigenvalues(q.matrix());
  CHECK(typical_projector(q, 6, 0.2).subspace_dim() == oracle::typical_rank(lambda, 6, 0.2));
}

TEST_CASE("property: projectors are idempotent and capture matches dense evaluation", "[typicality][property]") {
  std::mt19937_64 g(22);
  for (int trial = 0; trial < 6; ++trial) {
    const auto rho = DensityOperator::from_matrix(oracle::random_qubit(g));
    for (std::size_t n : {2u, 4u, 6u}) {
      const auto p = typical_projector(rho, n, 0.3);
      check_projector(p);
      const ComplexMatrix dense = oracle::power(rho.matrix(), n);
      const double direct = (dense * p.matrix()).trace().real();
      CHECK(p.capture(dense) == Approx(direct).margin(1e-10));
      CHECK(typical_subspace_capture(eig_hermitian(rho.matrix()).eigenvalues, n, 0.3) ==
            Approx(direct).margin(1e-10));
      // the projector commutes with rho^{(x)n}
      CHECK(max_abs(dense * p.matrix() - p.matrix() * dense) < 1e-10);
    }
  }
}

TEST_CASE("dimension bounds", "[typicality][property]") {
  // upper bounds, every delta
  for (double p0 : {0.5, 0.75, 0.9}) {
    const auto rho = DensityOperator::from_matrix(diag2(p0, 1 - p0));
    const std::vector<double> p{p0, 1 - p0};
    for (std::size_t n = 1; n <= 12; ++n)
      for (double delta : {0.05, 0.1, 0.2, 0.5}) {
        CHECK(typical_set(p, n, delta).upper_bound_holds());
        CHECK(typical_projector(rho, n, delta).upper_bound_holds());
      }
  }
  // lower bounds need delta wide enough for a type class to land in the window
  for (double p0 : {0.5, 0.75, 0.9}) {
    const auto rho = DensityOperator::from_matrix(diag2(p0, 1 - p0));
    const std::vector<double> p{p0, 1 - p0};
    for (std::size_t n = 2; n <= 12; ++n) {
      CHECK(typical_set(p, n, 0.5).lower_bound_holds());
      CHECK(typical_projector(rho, n, 0.5).lower_bound_holds());
    }
  }
  // and they can fail at small delta: no type class at all at n = 2, delta = 0.05
  const auto rho = DensityOperator::from_matrix(diag2(0.75, 0.25));
  CHECK(typical_projector(rho, 2, 0.05).subspace_dim() == 0);
}

TEST_CASE("conditionally typical projector examples", "[typicality]") {
  const auto bb = presets::bb84();
  const Sequence xn{0, 2, 3};
  const auto p = cond_typical_projector(bb, xn, 0.1);
  CHECK(p.subspace_dim() == 1);
  CHECK(max_abs(p.matrix() - sequence_state(bb, xn).state.matrix()) < 1e-10);

  const auto e = CqEnsemble::create({0.5, 0.5}, {DensityOperator::from_matrix(diag2(0.8, 0.2)),
                                                 DensityOperator::pure(kets::zero())});
  const auto same = cond_typical_projector(e, Sequence(4, 0), 0.3);
  const auto direct = typical_projector(e.states()[0], 4, 0.3);
  CHECK(same.subspace_dim() == direct.subspace_dim());
  CHECK(max_abs(same.matrix() - direct.matrix()) < 1e-10);
}

TEST_CASE("conditionally typical projector on a mixed-letter sequence", "[typicality]") {
  const auto e = CqEnsemble::create({0.5, 0.5}, {DensityOperator::maximally_mixed(2),
                                                 DensityOperator::pure(kets::zero())});
  const Sequence xn{0, 1, 0, 1, 1};
  const auto p = cond_typical_projector(e, xn, 0.1);
  CHECK(p.subspace_dim() == 4);
  check_projector(p);
  // oracle: I/2 blocks keep everything, |0> blocks keep |0>; the projector is the
  // support projector of rho_{x^n}, computed by direct eigen-enumeration
  const ComplexMatrix rho = sequence_state(e, xn).state.matrix();
  const auto lambda = oracle::eigenvalues(rho);
  std::size_t support = 0;
  for (double v : lambda) support += v > 1e-12;
  CHECK(support == 4);
  CHECK(max_abs(p.matrix() - rho * 8.0 / 2.0) < 1e-10);
  CHECK(p.capture(rho) == Approx(1.0).margin(1e-12));
}

TEST_CASE("conditional dimension window uses K distinct letters", "[typicality]") {
  const auto e = presets::zero_plus();
  const auto w = conditional_dimension_window(e, {0, 1, 1, 0}, 0.2);
  CHECK(w.k == 2);
  CHECK(w.log2_lower == Approx(-1.6));
  CHECK(w.log2_upper == Approx(1.6));
  CHECK(conditional_dimension_window(e, {1, 1, 1}, 0.2).k == 1);
}

TEST_CASE("capture trend values for the zero-plus average state", "[typicality]") {
  // entropy-typical capture at delta = 0.2; exact values recorded from the type-class sum
  const RealVector lambda = eig_hermitian(presets::zero_plus().average_state().matrix()).eigenvalues;
  CHECK(typical_subspace_capture(lambda, 2, 0.2) == Approx(0.0).margin(1e-12));
  CHECK(typical_subspace_capture(lambda, 4, 0.2) == Approx(0.0).margin(1e-12));
  // n = 6: only k = 1 of the minority eigenvalue is in the window
  const double c = lambda(0), s = lambda(1);
  CHECK(typical_subspace_capture(lambda, 6, 0.2) == Approx(6 * std::pow(c, 5) * s).margin(1e-12));
  CHECK(typical_subspace_capture(lambda, 8, 0.2) == Approx(8 * std::pow(c, 7) * s).margin(1e-12));
}
