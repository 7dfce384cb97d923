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

#ifndef DPF_BOUNDED_REAL_HPP_
#define DPF_BOUNDED_REAL_HPP_

#include "dpf/state_space.hpp"

namespace dpf {

/// Whether ||G||_inf < gamma holds, certified by feasibility of the discrete
/// bounded-real inequality in P:
///   [ A^T P A - P + C^T C   A^T P B          ]
///   [ B^T P A               B^T P B + D^T D - gamma^2 I ]  negative definite.
bool bounded_real_feasible(const StateSpaceSystem& sys, double gamma);

/// H-infinity norm by bisection on the bounded-real feasibility test.
/// Bracket found by exponential search; interval reduced to rel_tol.
double hinf_norm_bisection(const StateSpaceSystem& sys, double rel_tol = 1e-5);

}  // namespace dpf

#endif  // DPF_BOUNDED_REAL_HPP_
