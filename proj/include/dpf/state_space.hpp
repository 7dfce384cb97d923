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

#ifndef DPF_STATE_SPACE_HPP_
#define DPF_STATE_SPACE_HPP_

#include <Eigen/Dense>

namespace dpf {

/// Discrete-time real LTI system
///
///   x_{t+1} = A x_t + B w_t
///   y_t     = C x_t + D w_t
///
/// A zero-dimensional state (A is 0x0) is allowed and describes the static
/// system y = D w. Construction validates shape consistency and finiteness.
struct StateSpaceSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;

  StateSpaceSystem(Eigen::MatrixXd A_in, Eigen::MatrixXd B_in,
                   Eigen::MatrixXd C_in, Eigen::MatrixXd D_in);

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index input_dim() const { return D.cols(); }
  Eigen::Index output_dim() const { return D.rows(); }

  /// Frequency response C (e^{i w} I - A)^{-1} B + D.
  Eigen::MatrixXcd eval(double omega) const;
};

/// Static system y = D w (no state).
StateSpaceSystem static_gain(const Eigen::MatrixXd& D);

/// Length-l moving average y_t = (1/l) * sum_{k=t-l+1}^{t} u_k.
StateSpaceSystem moving_average_fir(int window);

/// Largest eigenvalue magnitude of a square matrix.
double spectral_radius(const Eigen::MatrixXd& A);

/// True when spectral_radius(A) < 1 - margin.
bool is_schur_stable(const Eigen::MatrixXd& A, double margin = 0.0);

/// State substitution x' = T x: (A,B,C,D) -> (T A T^-1, T B, C T^-1, D).
/// Input/output behavior, and hence all system norms, are unchanged.
StateSpaceSystem similarity_transform(const StateSpaceSystem& sys,
                                      const Eigen::MatrixXd& T);

/// PBH-style tests over the closed unit disk complement.
bool is_detectable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C);
bool is_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

}  // namespace dpf

#endif  // DPF_STATE_SPACE_HPP_
