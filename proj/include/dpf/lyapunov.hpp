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

#ifndef DPF_LYAPUNOV_HPP_
#define DPF_LYAPUNOV_HPP_

#include <Eigen/Dense>

namespace dpf {

/// Solves A P A^T - P + Q = 0 for symmetric P with A Schur stable and Q
/// symmetric PSD. Bartels-Stewart on the complex Schur form of A.
/// Throws std::domain_error("Lyapunov requires Schur stability") for
/// spectral_radius(A) >= 1.
Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& A,
                                        const Eigen::MatrixXd& Q);

}  // namespace dpf

#endif  // DPF_LYAPUNOV_HPP_
