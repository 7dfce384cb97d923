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

#ifndef DPF_RICCATI_HPP_
#define DPF_RICCATI_HPP_

#include <Eigen/Dense>

namespace dpf {

/// Steady-state solution of the filtering Riccati recursion
///
///   P+ = A P A^T + Q - (A P C^T + S)(C P C^T + R)^{-1}(A P C^T + S)^T
///
/// P is the one-step prediction error covariance. `gain` is the predictor
/// gain (A P C^T + S)(C P C^T + R)^{-1}; `gain_filtered` and `P_filtered`
/// are the current-time measurement-update gain and covariance.
struct RiccatiSolution {
  Eigen::MatrixXd P;
  Eigen::MatrixXd gain;
  Eigen::MatrixXd gain_filtered;
  Eigen::MatrixXd P_filtered;
  int iterations = 0;
  double residual = 0.0;
};

/// Fixed-point iteration with relative threshold 1e-12 and a 1e5 iteration
/// cap. Requires R positive definite ("measurement noise must be full rank")
/// and (A, C) detectable for convergence; non-convergence raises with the
/// residual in the message.
RiccatiSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                           const Eigen::MatrixXd& Qproc, const Eigen::MatrixXd& Rmeas,
                           const Eigen::MatrixXd& Scross);

}  // namespace dpf

#endif  // DPF_RICCATI_HPP_
