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

#ifndef DPF_NORMS_HPP_
#define DPF_NORMS_HPP_

#include "dpf/state_space.hpp"

namespace dpf {

/// H2 norm via the controllability Gramian:
/// ||G||_2^2 = Tr(C P C^T + D D^T) with A P A^T - P + B B^T = 0.
/// Requires a Schur-stable system.
double h2_norm(const StateSpaceSystem& sys);
double h2_norm_sq(const StateSpaceSystem& sys);

/// H-infinity norm: peak of sigma_max(G(e^{iw})) over [0, pi], located on a
/// 4096-point grid and sharpened by golden-section search around the top
/// peaks. Requires a Schur-stable system.
double hinf_norm(const StateSpaceSystem& sys);

}  // namespace dpf

#endif  // DPF_NORMS_HPP_
