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

#include "dpf/riccati.hpp"

#include <sstream>
#include <stdexcept>

namespace dpf {

namespace {

constexpr double kRelTol = 1e-12;
constexpr int kMaxIter = 100000;

Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                             const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                             const Eigen::MatrixXd& S, const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd APC = A * P * C.transpose() + S;
  const Eigen::MatrixXd innov = C * P * C.transpose() + R;
  Eigen::MatrixXd next =
      A * P * A.transpose() + Q - APC * innov.ldlt().solve(APC.transpose());
  return 0.5 * (next + next.transpose());
}

}  // namespace

RiccatiSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                           const Eigen::MatrixXd& Qproc, const Eigen::MatrixXd& Rmeas,
                           const Eigen::MatrixXd& Scross) {
  const Eigen::Index n = A.rows();
  const Eigen::Index p = C.rows();
  if (A.cols() != n || C.cols() != n || Qproc.rows() != n || Qproc.cols() != n ||
      Rmeas.rows() != p || Rmeas.cols() != p || Scross.rows() != n || Scross.cols() != p)
    throw std::invalid_argument("solve_dare: inconsistent dimensions");

  // R must be positive definite for the innovation inverse to exist.
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (Rmeas + Rmeas.transpose()));
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("measurement noise must be full rank");

  RiccatiSolution out;
  Eigen::MatrixXd P = 0.5 * (Qproc + Qproc.transpose());
  double rel = 0.0;
  int it = 0;
  for (; it < kMaxIter; ++it) {
    const Eigen::MatrixXd next = riccati_step(A, C, Qproc, Rmeas, Scross, P);
    rel = (next - P).norm() / std::max(next.norm(), 1e-300);
    P = next;
    if (rel <= kRelTol) break;
  }
  if (rel > kRelTol) {
    std::ostringstream os;
    os << "solve_dare: no convergence after " << kMaxIter
       << " iterations, relative residual " << rel;
    throw std::runtime_error(os.str());
  }

  out.P = P;
  out.iterations = it + 1;
  out.residual = (riccati_step(A, C, Qproc, Rmeas, Scross, P) - P).norm() /
                 std::max(P.norm(), 1e-300);
  const Eigen::MatrixXd innov = C * P * C.transpose() + Rmeas;
  const auto innov_ldlt = innov.ldlt();
  out.gain = innov_ldlt.solve((A * P * C.transpose() + Scross).transpose()).transpose();
  out.gain_filtered = innov_ldlt.solve(C * P).transpose();
  out.P_filtered = P - P * C.transpose() * innov_ldlt.solve(C * P);
  out.P_filtered = 0.5 * (out.P_filtered + out.P_filtered.transpose());
  return out;
}

}  // namespace dpf
