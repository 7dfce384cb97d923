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

#include "dpf/state_space.hpp"

#include <complex>
#include <stdexcept>

namespace dpf {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

StateSpaceSystem::StateSpaceSystem(Eigen::MatrixXd A_in, Eigen::MatrixXd B_in,
                                   Eigen::MatrixXd C_in, Eigen::MatrixXd D_in)
    : A(std::move(A_in)), B(std::move(B_in)), C(std::move(C_in)), D(std::move(D_in)) {
  require(A.rows() == A.cols(), "StateSpaceSystem: A must be square");
  require(B.rows() == A.rows(), "StateSpaceSystem: B must have as many rows as A");
  require(C.cols() == A.cols(), "StateSpaceSystem: C must have as many columns as A");
  require(D.rows() == C.rows() && D.cols() == B.cols(),
          "StateSpaceSystem: D must be output_dim x input_dim");
  require(A.allFinite() && B.allFinite() && C.allFinite() && D.allFinite(),
          "StateSpaceSystem: entries must be finite");
}

Eigen::MatrixXcd StateSpaceSystem::eval(double omega) const {
  const auto n = state_dim();
  if (n == 0) return D.cast<std::complex<double>>();
  const std::complex<double> z(std::cos(omega), std::sin(omega));
  Eigen::MatrixXcd M = z * Eigen::MatrixXcd::Identity(n, n) - A.cast<std::complex<double>>();
  return C.cast<std::complex<double>>() * M.partialPivLu().solve(B.cast<std::complex<double>>()) +
         D.cast<std::complex<double>>();
}

StateSpaceSystem static_gain(const Eigen::MatrixXd& D) {
  return StateSpaceSystem(Eigen::MatrixXd::Zero(0, 0), Eigen::MatrixXd::Zero(0, D.cols()),
                          Eigen::MatrixXd::Zero(D.rows(), 0), D);
}

StateSpaceSystem moving_average_fir(int window) {
  if (window < 1) throw std::invalid_argument("moving_average_fir: window must be >= 1");
  const int n = window - 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  if (n > 1) A.block(1, 0, n - 1, n - 1).setIdentity();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, 1);
  if (n > 0) B(0, 0) = 1.0;
  Eigen::MatrixXd C = Eigen::MatrixXd::Constant(1, n, 1.0 / window);
  Eigen::MatrixXd D = Eigen::MatrixXd::Constant(1, 1, 1.0 / window);
  return StateSpaceSystem(A, B, C, D);
}

double spectral_radius(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("spectral_radius: matrix must be square");
  if (!A.allFinite()) throw std::invalid_argument("spectral_radius: entries must be finite");
  if (A.rows() == 0) return 0.0;
  return A.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_schur_stable(const Eigen::MatrixXd& A, double margin) {
  return spectral_radius(A) < 1.0 - margin;
}

StateSpaceSystem similarity_transform(const StateSpaceSystem& sys, const Eigen::MatrixXd& T) {
  if (T.rows() != sys.state_dim() || T.cols() != sys.state_dim())
    throw std::invalid_argument("similarity_transform: T must be state_dim x state_dim");
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(T);
  const Eigen::MatrixXd Tinv = lu.solve(Eigen::MatrixXd::Identity(T.rows(), T.cols()));
  return StateSpaceSystem(T * sys.A * Tinv, T * sys.B, sys.C * Tinv, sys.D);
}

namespace {

// Rank of [A - lambda I ; C] (or its transpose analog) at every eigenvalue
// with |lambda| >= 1 must be full for detectability / stabilizability.
bool pbh_full_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M, bool stack_below) {
  const Eigen::Index n = A.rows();
  if (n == 0) return true;
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::complex<double> lam = es.eigenvalues()(k);
    if (std::abs(lam) < 1.0 - 1e-12) continue;
    Eigen::MatrixXcd P;
    if (stack_below) {
      P.resize(n + M.rows(), n);
      P.topRows(n) = A.cast<std::complex<double>>() - lam * Eigen::MatrixXcd::Identity(n, n);
      P.bottomRows(M.rows()) = M.cast<std::complex<double>>();
    } else {
      P.resize(n, n + M.cols());
      P.leftCols(n) = A.cast<std::complex<double>>() - lam * Eigen::MatrixXcd::Identity(n, n);
      P.rightCols(M.cols()) = M.cast<std::complex<double>>();
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(P);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10 * sv(0)) return false;
  }
  return true;
}

}  // namespace

bool is_detectable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C) {
  return pbh_full_rank(A, C, /*stack_below=*/true);
}

bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  return pbh_full_rank(A, B, /*stack_below=*/false);
}

}  // namespace dpf
