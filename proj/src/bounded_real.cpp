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

#include "dpf/bounded_real.hpp"

#include <cmath>
#include <stdexcept>

#include "dpf/sdp.hpp"

namespace dpf {

namespace {

double sigma_max(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

}  // namespace

namespace internal {

bool bounded_real_feasible_warm(const StateSpaceSystem& sys, double gamma,
                                Eigen::VectorXd* warm_io);

}  // namespace internal

bool bounded_real_feasible(const StateSpaceSystem& sys, double gamma) {
  return internal::bounded_real_feasible_warm(sys, gamma, nullptr);
}

bool internal::bounded_real_feasible_warm(const StateSpaceSystem& sys, double gamma,
                                          Eigen::VectorXd* warm_io) {
  const Eigen::Index n = sys.state_dim();
  const Eigen::Index m = sys.input_dim();
  if (n == 0) return sigma_max(sys.D) < gamma;
  if (!is_schur_stable(sys.A)) return false;

  // Feasibility problem in P (symmetric): the negated BRL matrix must be PD.
  SdpProblem prob;
  VarRef P = prob.add_variable("P", static_cast<int>(n), static_cast<int>(n), true);

  const int brl = prob.add_block(static_cast<int>(n + m));
  // (1,1): P - A^T P A - C^T C
  prob.add_term(brl, 0, 0, Eigen::MatrixXd(), P, false, Eigen::MatrixXd());
  prob.add_term(brl, 0, 0, sys.A.transpose(), P, false, sys.A, -1.0);
  prob.add_const(brl, 0, 0, -sys.C.transpose() * sys.C);
  // (1,2): -(A^T P B + C^T D)  (mirrored)
  prob.add_term_sym(brl, 0, static_cast<int>(n), sys.A.transpose(), P, false, sys.B, -1.0);
  prob.add_const_sym(brl, 0, static_cast<int>(n), -sys.C.transpose() * sys.D);
  // (2,2): gamma^2 I - B^T P B - D^T D
  prob.add_term(brl, static_cast<int>(n), static_cast<int>(n), sys.B.transpose(), P, false,
                sys.B, -1.0);
  prob.add_const(brl, static_cast<int>(n), static_cast<int>(n),
                 gamma * gamma * Eigen::MatrixXd::Identity(m, m) -
                     sys.D.transpose() * sys.D);

  const int pos = prob.add_block(static_cast<int>(n));
  prob.add_term(pos, 0, 0, Eigen::MatrixXd(), P, false, Eigen::MatrixXd());

  const double scale = 1.0 + gamma * gamma;
  SdpOptions opt;
  opt.max_newton_total = 2500;
  const Eigen::VectorXd* warm = (warm_io && warm_io->size() > 0) ? warm_io : nullptr;
  FeasibilityReport rep = check_feasibility(prob, 1e-10 * scale, opt, warm);
  if (rep.feasible && warm_io) *warm_io = rep.x;
  return rep.feasible;
}

double hinf_norm_bisection(const StateSpaceSystem& sys, double rel_tol) {
  if (sys.state_dim() > 0 && !is_schur_stable(sys.A))
    throw std::domain_error("hinf_norm_bisection requires a Schur-stable system");
  if (sys.state_dim() == 0) return sigma_max(sys.D);

  // Feasible certificates are carried along the bisection: near the norm the
  // feasible set gets thin and a cold interior-point start can stall.
  Eigen::VectorXd warm;
  double lo = sigma_max(sys.D);
  double hi = std::max(1.0, 2.0 * lo + 1.0);
  int guard = 0;
  while (!internal::bounded_real_feasible_warm(sys, hi, &warm)) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 60) throw std::runtime_error("hinf_norm_bisection: no feasible upper bound");
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    Eigen::VectorXd probe = warm;
    if (internal::bounded_real_feasible_warm(sys, mid, &probe)) {
      hi = mid;
      warm = probe;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace dpf
