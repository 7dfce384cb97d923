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

#include "dpf/filter.hpp"

#include <stdexcept>

namespace dpf {

FilterRealization::FilterRealization(Eigen::MatrixXd F_in, Eigen::MatrixXd G_in,
                                     Eigen::MatrixXd H_in, Eigen::MatrixXd K_in)
    : F(std::move(F_in)), G(std::move(G_in)), H(std::move(H_in)), K(std::move(K_in)) {
  if (F.rows() != F.cols()) throw std::invalid_argument("FilterRealization: F must be square");
  if (G.rows() != F.rows()) throw std::invalid_argument("FilterRealization: G rows must match F");
  if (H.cols() != F.cols())
    throw std::invalid_argument("FilterRealization: H columns must match F");
  if (K.rows() != H.rows() || K.cols() != G.cols())
    throw std::invalid_argument("FilterRealization: K must be output_dim x meas_dim");
  if (!F.allFinite() || !G.allFinite() || !H.allFinite() || !K.allFinite())
    throw std::invalid_argument("FilterRealization: entries must be finite");
}

FilterRealization FilterRealization::zero(Eigen::Index n_f, Eigen::Index n_y, Eigen::Index n_z) {
  return FilterRealization(Eigen::MatrixXd::Zero(n_f, n_f), Eigen::MatrixXd::Zero(n_f, n_y),
                           Eigen::MatrixXd::Zero(n_z, n_f), Eigen::MatrixXd::Zero(n_z, n_y));
}

StateSpaceSystem build_error_system(const StateSpaceSystem& plant, const Eigen::MatrixXd& L,
                                    const FilterRealization& filter) {
  const Eigen::Index nx = plant.state_dim();
  const Eigen::Index nf = filter.state_dim();
  const Eigen::Index nw = plant.input_dim();
  const Eigen::Index ny = plant.output_dim();
  const Eigen::Index nz = filter.output_dim();
  if (L.rows() != nz || L.cols() != nx)
    throw std::invalid_argument("build_error_system: L must be filter_output_dim x state_dim");
  if (filter.meas_dim() != ny)
    throw std::invalid_argument("build_error_system: filter measurement dim mismatch");

  Eigen::MatrixXd At = Eigen::MatrixXd::Zero(nx + nf, nx + nf);
  At.topLeftCorner(nx, nx) = plant.A;
  At.bottomLeftCorner(nf, nx) = filter.G * plant.C;
  At.bottomRightCorner(nf, nf) = filter.F;

  Eigen::MatrixXd Bt(nx + nf, nw);
  Bt.topRows(nx) = plant.B;
  Bt.bottomRows(nf) = filter.G * plant.D;

  Eigen::MatrixXd Ct(nz, nx + nf);
  Ct.leftCols(nx) = L - filter.K * plant.C;
  Ct.rightCols(nf) = -filter.H;

  Eigen::MatrixXd Dt = -filter.K * plant.D;
  return StateSpaceSystem(At, Bt, Ct, Dt);
}

StateSpaceSystem build_sensitivity_system(const FilterRealization& filter,
                                          const Eigen::MatrixXd& C, const Eigen::MatrixXd& T) {
  if (C.rows() != filter.meas_dim())
    throw std::invalid_argument("build_sensitivity_system: C rows must match filter meas dim");
  if (T.rows() != T.cols() || T.cols() != C.cols())
    throw std::invalid_argument("build_sensitivity_system: T must be square, state-sized");
  for (Eigen::Index i = 0; i < T.rows(); ++i) {
    for (Eigen::Index j = 0; j < T.cols(); ++j) {
      const double v = T(i, j);
      const bool ok = (i == j) ? (v == 0.0 || v == 1.0) : (v == 0.0);
      if (!ok)
        throw std::invalid_argument("build_sensitivity_system: T must be diagonal with 0/1 entries");
    }
  }
  return StateSpaceSystem(filter.F, filter.G * C * T, filter.H, filter.K * C * T);
}

}  // namespace dpf
