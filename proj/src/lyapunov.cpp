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

#include "dpf/lyapunov.hpp"

#include <complex>
#include <stdexcept>

#include "dpf/state_space.hpp"

namespace dpf {

Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || Q.rows() != n || Q.cols() != n)
    throw std::invalid_argument("solve_discrete_lyapunov: A and Q must be square of equal size");
  if (n == 0) return Eigen::MatrixXd::Zero(0, 0);
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + Q.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("solve_discrete_lyapunov: Q must be symmetric");
  if (!is_schur_stable(A)) throw std::domain_error("Lyapunov requires Schur stability");

  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(A.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("solve_discrete_lyapunov: Schur factorization failed");
  const Eigen::MatrixXcd& T = schur.matrixT();
  const Eigen::MatrixXcd& U = schur.matrixU();
  const Eigen::MatrixXcd Qs = U.adjoint() * Q.cast<std::complex<double>>() * U;

  // T X T^* - X + Qs = 0 with T upper triangular; entries are resolved in
  // decreasing (i, j) order so every referenced X(k, l) is already known.
  Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      std::complex<double> s(0.0, 0.0);
      for (Eigen::Index k = i; k < n; ++k) {
        for (Eigen::Index l = j; l < n; ++l) {
          if (k == i && l == j) continue;
          s += T(i, k) * X(k, l) * std::conj(T(j, l));
        }
      }
      X(i, j) = (Qs(i, j) + s) / (1.0 - T(i, i) * std::conj(T(j, j)));
    }
  }
  Eigen::MatrixXd P = (U * X * U.adjoint()).real();
  return 0.5 * (P + P.transpose());
}

}  // namespace dpf
