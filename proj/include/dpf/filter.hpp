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

#ifndef DPF_FILTER_HPP_
#define DPF_FILTER_HPP_

#include "dpf/state_space.hpp"

namespace dpf {

/// Linear estimator
///
///   xf_{t+1} = F xf_t + G y_t
///   zf_t     = H xf_t + K y_t
struct FilterRealization {
  Eigen::MatrixXd F;
  Eigen::MatrixXd G;
  Eigen::MatrixXd H;
  Eigen::MatrixXd K;

  FilterRealization(Eigen::MatrixXd F_in, Eigen::MatrixXd G_in,
                    Eigen::MatrixXd H_in, Eigen::MatrixXd K_in);

  Eigen::Index state_dim() const { return F.rows(); }
  Eigen::Index meas_dim() const { return G.cols(); }
  Eigen::Index output_dim() const { return H.rows(); }

  /// Zero filter (outputs 0 regardless of measurements).
  static FilterRealization zero(Eigen::Index n_f, Eigen::Index n_y, Eigen::Index n_z);

  StateSpaceSystem as_system() const { return StateSpaceSystem(F, G, H, K); }
};

/// Combined dynamics from the plant noise w to the estimation error
/// e = L x - zf when the filter runs on y = C x + D w:
///
///   At = [A 0; G C  F],  Bt = [B; G D],  Ct = [L - K C, -H],  Dt = -K D.
StateSpaceSystem build_error_system(const StateSpaceSystem& plant, const Eigen::MatrixXd& L,
                                    const FilterRealization& filter);

/// Response of the filter output to a deviation of the protected state
/// coordinates: the system (F, G C T, H, K C T) with T a diagonal 0/1
/// selection matrix. Its H-infinity norm is the l2-sensitivity per unit of
/// allowed deviation.
StateSpaceSystem build_sensitivity_system(const FilterRealization& filter,
                                          const Eigen::MatrixXd& C, const Eigen::MatrixXd& T);

}  // namespace dpf

#endif  // DPF_FILTER_HPP_
