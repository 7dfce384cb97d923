// Copyright 2026 The dpfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpf/norms.hpp"

#include <doctest.h>

#include "oracles.hpp"

using namespace dpf;

namespace {

StateSpaceSystem scalar_lag() {
  Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << 0.5;
  B << 1.0;
  C << 1.0;
  D << 0.0;
  return StateSpaceSystem(A, B, C, D);
}

}  // namespace

TEST_CASE("scalar lag H2 matches impulse energy") {
  const StateSpaceSystem s = scalar_lag();
  // Oracle: impulse energy sum_k 0.25^k = 4/3.
  CHECK(test::h2_impulse_oracle(s, 200) == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-12));
  CHECK(h2_norm(s) == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("scalar lag peak gain sits at zero frequency") {
  const StateSpaceSystem s = scalar_lag();
  CHECK(test::hinf_sweep_oracle(s, 20001) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(hinf_norm(s) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("moving average norms") {
  for (int l : {2, 4, 10}) {
    const StateSpaceSystem ma = moving_average_fir(l);
    CHECK(h2_norm_sq(ma) == doctest::Approx(1.0 / l).epsilon(1e-9));
    CHECK(hinf_norm(ma) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("static system norms equal the gain magnitude") {
  Eigen::MatrixXd D(1, 1);
  D << -3.0;
  const StateSpaceSystem s = static_gain(D);
  CHECK(h2_norm(s) == doctest::Approx(3.0));
  CHECK(hinf_norm(s) == doctest::Approx(3.0));
}

TEST_CASE("Gramian H2 agrees with quadrature on random systems") {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 25; ++trial) {
    const StateSpaceSystem s = test::random_stable_system(gen);
    const double viaGramian = h2_norm(s);
    const double viaQuadrature = test::h2_quadrature_oracle(s);
    CHECK(std::abs(viaGramian - viaQuadrature) <= 1e-6 * std::max(1e-9, viaQuadrature));
  }
}

TEST_CASE("norms are invariant under state similarity") {
  std::mt19937 gen(11);
  for (int trial = 0; trial < 10; ++trial) {
    const StateSpaceSystem s = test::random_stable_system(gen);
    Eigen::MatrixXd T;
    do {
      T = test::random_matrix(gen, static_cast<int>(s.state_dim()),
                              static_cast<int>(s.state_dim()));
    } while (std::abs(T.determinant()) < 0.1);
    const StateSpaceSystem st = similarity_transform(s, T);
    CHECK(h2_norm(st) == doctest::Approx(h2_norm(s)).epsilon(1e-8));
    CHECK(hinf_norm(st) == doctest::Approx(hinf_norm(s)).epsilon(1e-8));
  }
}

TEST_CASE("unstable systems are rejected") {
  Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << 1.001;
  B << 1.0;
  C << 1.0;
  D << 0.0;
  const StateSpaceSystem s(A, B, C, D);
  CHECK_THROWS_AS(h2_norm(s), std::domain_error);
  CHECK_THROWS_AS(hinf_norm(s), std::domain_error);
}
