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

#include "dpf/sdp.hpp"

#include <doctest.h>

#include <sstream>

#include "oracles.hpp"

using namespace dpf;

TEST_CASE("scalar bound: minimize x subject to x >= 1") {
  SdpProblem prob;
  const VarRef x = prob.add_variable("x", 1, 1, false);
  const int blk = prob.add_block(1);
  prob.add_term(blk, 0, 0, Eigen::MatrixXd(), x, false, Eigen::MatrixXd());
  prob.add_const(blk, 0, 0, Eigen::MatrixXd::Constant(1, 1, -1.0));
  prob.add_objective_scalar(x, 1.0);
  const SdpSolution sol = solve_sdp(prob);
  REQUIRE(sol.ok());
  CHECK(sol.values.at("x")(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("crossed scalar constraints are infeasible") {
  SdpProblem prob;
  const VarRef x = prob.add_variable("x", 1, 1, false);
  const int b1 = prob.add_block(1);
  prob.add_term(b1, 0, 0, Eigen::MatrixXd(), x, false, Eigen::MatrixXd());
  prob.add_const(b1, 0, 0, Eigen::MatrixXd::Constant(1, 1, -1.0));
  const int b2 = prob.add_block(1);
  prob.add_term(b2, 0, 0, Eigen::MatrixXd(), x, false, Eigen::MatrixXd(), -1.0);
  prob.add_const(b2, 0, 0, Eigen::MatrixXd::Constant(1, 1, -1.0));
  prob.add_objective_scalar(x, 1.0);
  const SdpSolution sol = solve_sdp(prob);
  CHECK(sol.status == SdpSolution::Status::kInfeasible);
  // Best uniform margin for x >= 1 and -x >= 1 is attained at x = 0: -1.
  CHECK(sol.best_min_eig == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("trace minimization over a matrix lower bound") {
  std::mt19937 gen(21);
  const Eigen::MatrixXd R = test::random_matrix(gen, 3, 3);
  const Eigen::MatrixXd A0 = 0.5 * (R + R.transpose());  // indefinite in general
  SdpProblem prob;
  const VarRef P = prob.add_variable("P", 3, 3, true);
  const int blk = prob.add_block(3);
  prob.add_term(blk, 0, 0, Eigen::MatrixXd(), P, false, Eigen::MatrixXd());
  prob.add_const(blk, 0, 0, -A0);
  prob.add_objective(P, Eigen::MatrixXd::Identity(3, 3));
  const SdpSolution sol = solve_sdp(prob);
  REQUIRE(sol.ok());
  CHECK(sol.objective == doctest::Approx(A0.trace()).epsilon(1e-4));
  CHECK(test::min_eigenvalue(sol.values.at("P") - A0) >= -1e-6);
}

TEST_CASE("mixed terms assemble the declared affine expression") {
  // Constraint block [2 - x, x y-row ...]: spot-check block_value against a
  // hand assembly for a random assignment.
  std::mt19937 gen(2);
  SdpProblem prob;
  const VarRef X = prob.add_variable("X", 2, 2, true);
  const VarRef g = prob.add_variable("g", 2, 1, false);
  Eigen::MatrixXd A = test::random_matrix(gen, 2, 2);
  Eigen::MatrixXd Cm = test::random_matrix(gen, 1, 2);
  const int blk = prob.add_block(4);
  prob.add_term(blk, 0, 0, Eigen::MatrixXd(), X, false, Eigen::MatrixXd());
  prob.add_term_sym(blk, 0, 2, Eigen::MatrixXd(), X, false, A);
  prob.add_term_sym(blk, 0, 2, Eigen::MatrixXd(), g, false, Cm, -1.0);
  prob.add_const(blk, 2, 2, Eigen::MatrixXd::Identity(2, 2));

  Eigen::VectorXd x(prob.scalar_dim());
  for (int i = 0; i < x.size(); ++i) x(i) = 0.1 * (i + 1);
  const Eigen::MatrixXd F = prob.block_value(blk, x);

  Eigen::MatrixXd Xv(2, 2);
  Xv << x(0), x(1), x(1), x(2);
  Eigen::MatrixXd gv(2, 1);
  gv << x(3), x(4);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(4, 4);
  expect.topLeftCorner(2, 2) = Xv;
  expect.topRightCorner(2, 2) = Xv * A - gv * Cm;
  expect.bottomLeftCorner(2, 2) = (Xv * A - gv * Cm).transpose();
  expect.bottomRightCorner(2, 2).setIdentity();
  CHECK((F - expect).norm() <= 1e-14);
  CHECK((F - F.transpose()).norm() == 0.0);
}

TEST_CASE("triplet dump lists variables, objective and entries") {
  SdpProblem prob;
  const VarRef x = prob.add_variable("x", 1, 1, false);
  const int blk = prob.add_block(1);
  prob.add_term(blk, 0, 0, Eigen::MatrixXd(), x, false, Eigen::MatrixXd(), 2.0);
  prob.add_const(blk, 0, 0, Eigen::MatrixXd::Constant(1, 1, -3.0));
  prob.add_objective_scalar(x, 1.0);
  std::ostringstream os;
  prob.dump(os);
  const std::string text = os.str();
  CHECK(text.find("var 0 x 1 1 0 0 1") != std::string::npos);
  CHECK(text.find("obj 0 1") != std::string::npos);
  CHECK(text.find("entry 0 0 0 0 2") != std::string::npos);
  CHECK(text.find("f0 0 0 0 -3") != std::string::npos);
}
