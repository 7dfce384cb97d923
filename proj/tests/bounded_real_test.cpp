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

#include "dpf/bounded_real.hpp"

#include <doctest.h>

#include "dpf/norms.hpp"
#include "oracles.hpp"

using namespace dpf;

TEST_CASE("scalar lag certified peak gain") {
  Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << 0.5;
  B << 1.0;
  C << 1.0;
  D << 0.0;
  const StateSpaceSystem s(A, B, C, D);
  CHECK(bounded_real_feasible(s, 2.1));
  CHECK_FALSE(bounded_real_feasible(s, 1.9));
  CHECK(hinf_norm_bisection(s) == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("static and FIR systems") {
  Eigen::MatrixXd D(1, 1);
  D << -3.0;
  CHECK(hinf_norm_bisection(static_gain(D)) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(hinf_norm_bisection(moving_average_fir(4)) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("bisection agrees with the grid evaluation on random systems") {
  std::mt19937 gen(23);
  for (int trial = 0; trial < 25; ++trial) {
    const StateSpaceSystem s = test::random_stable_system(gen);
    const double grid = hinf_norm(s);
    const double certified = hinf_norm_bisection(s, 1e-5);
    CHECK(std::abs(grid - certified) <= 1e-4 * std::max(grid, 1e-9));
  }
}
