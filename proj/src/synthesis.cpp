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

#include "dpf/synthesis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dpf/norms.hpp"

namespace dpf {

namespace {

using Eigen::MatrixXd;

MatrixXd unit_row(int dim, int i) {
  MatrixXd e = MatrixXd::Zero(1, dim);
  e(0, i) = 1.0;
  return e;
}

// constraint: block_value += scale * <M, V> placed at (0,0) of a 1x1 block.
void add_inner(SdpProblem& prob, int block, VarRef v, const MatrixXd& M, double scale) {
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      if (M(i, j) != 0.0)
        prob.add_term(block, 0, 0, unit_row(M.rows(), i), v, false,
                      unit_row(M.cols(), j).transpose(), scale * M(i, j));
}

// lambda / rho^2 * I of size dim at (off, off): either a variable (1x1) or a
// fixed value.
void add_lambda_diag(SdpProblem& prob, int block, int off, int dim, double inv_rho_sq,
                     const std::optional<VarRef>& lambda_var, double lambda_fixed) {
  if (lambda_var) {
    for (int i = 0; i < dim; ++i)
      prob.add_term(block, off + i, off + i, MatrixXd::Identity(1, 1), *lambda_var, false,
                    MatrixXd::Identity(1, 1), inv_rho_sq);
  } else {
    prob.add_const(block, off, off, lambda_fixed * inv_rho_sq * MatrixXd::Identity(dim, dim));
  }
}

VerifiedNorms verify_norms(const FilterRealization& filter, const StateSpaceSystem& plant,
                           const MatrixXd& L, const AdjacencyPolicy& policy) {
  VerifiedNorms out;
  out.filter_spectral_radius = spectral_radius(filter.F);
  out.h2_sq = h2_norm_sq(build_error_system(plant, L, filter));
  const MatrixXd T = policy.selection_matrix(plant.state_dim());
  const StateSpaceSystem sens = build_sensitivity_system(filter, plant.C, T);
  const bool zero_sens = sens.B.norm() == 0.0 && sens.D.norm() == 0.0;
  out.hinf = zero_sens ? 0.0 : (is_schur_stable(filter.F) ? hinf_norm(sens) : 0.0);
  return out;
}

}  // namespace

FilterRealization recover_filter_uv(const MatrixXd& Z, const MatrixXd& Fhat, const MatrixXd& Ghat,
                                    const MatrixXd& Hhat, const MatrixXd& Khat,
                                    const MatrixXd& U, const MatrixXd& V) {
  Eigen::FullPivLU<MatrixXd> vlu(V);
  Eigen::FullPivLU<MatrixXd> ulu(U.transpose());
  if (!vlu.isInvertible() || !ulu.isInvertible())
    throw std::runtime_error("degenerate certificate; perturb and re-solve");
  const MatrixXd Zi = Z.ldlt().solve(MatrixXd::Identity(Z.rows(), Z.cols()));
  const MatrixXd F = vlu.solve(Fhat) * Zi * ulu.solve(MatrixXd::Identity(U.rows(), U.cols()));
  const MatrixXd G = vlu.solve(Ghat);
  const MatrixXd H = Hhat * Zi * ulu.solve(MatrixXd::Identity(U.rows(), U.cols()));
  return FilterRealization(F, G, H, Khat);
}

FilterRealization recover_filter(const MatrixXd& Z, const MatrixXd& Y, const MatrixXd& Fhat,
                                 const MatrixXd& Ghat, const MatrixXd& Hhat,
                                 const MatrixXd& Khat) {
  Eigen::LLT<MatrixXd> zllt(Z);
  Eigen::LLT<MatrixXd> yllt(Y);
  if (zllt.info() != Eigen::Success || yllt.info() != Eigen::Success)
    throw std::runtime_error("degenerate certificate; perturb and re-solve");
  const MatrixXd U = Z.ldlt().solve(MatrixXd::Identity(Z.rows(), Z.cols()));
  const MatrixXd V = Z - Y;  // V U^T = (Z - Y) Z^{-1} = I - Y Z^{-1}
  return recover_filter_uv(Z, Fhat, Ghat, Hhat, Khat, U, V);
}

SynthesisResult synth_stable(const StateSpaceSystem& plant, const MatrixXd& L,
                             const AdjacencyPolicy& policy, const PrivacyBudget& budget,
                             const SynthesisOptions& options) {
  const int nx = static_cast<int>(plant.state_dim());
  const int nw = static_cast<int>(plant.input_dim());
  const int ny = static_cast<int>(plant.output_dim());
  const int nz = static_cast<int>(L.rows());
  if (L.cols() != nx) throw std::invalid_argument("synth_stable: L must be n_z x n_x");
  if (!is_schur_stable(plant.A))
    throw std::invalid_argument("synth_stable requires a Schur-stable plant; use synth_unstable");
  if (!(policy.rho > 0.0)) throw std::domain_error("synth_stable: rho must be positive");

  const MatrixXd& A = plant.A;
  const MatrixXd& B = plant.B;
  const MatrixXd& C = plant.C;
  const MatrixXd& D = plant.D;
  const MatrixXd CT = C * policy.selection_matrix(nx);
  const double inv_rho_sq = 1.0 / (policy.rho * policy.rho);
  const bool capped = options.lambda_cap.has_value();

  SdpProblem prob;
  VarRef W = prob.add_variable("W", nz, nz, true);
  VarRef Z = prob.add_variable("Z", nx, nx, true);
  VarRef Y = prob.add_variable("Y", nx, nx, true);
  VarRef Fh = prob.add_variable("Fhat", nx, nx, false);
  VarRef Gh = prob.add_variable("Ghat", nx, ny, false);
  VarRef Hh = prob.add_variable("Hhat", nz, nx, false);
  std::optional<VarRef> Kh;
  if (options.feedthrough) Kh = prob.add_variable("Khat", nz, ny, false);
  VarRef mu = prob.add_variable("mu", 1, 1, false);
  std::optional<VarRef> lam;
  if (!capped) lam = prob.add_variable("lambda", 1, 1, false);

  const MatrixXd none;

  // mu - Tr(W) >= 0.
  const int trace_blk = prob.add_block(1);
  prob.add_term(trace_blk, 0, 0, none, mu, false, none);
  add_inner(prob, trace_blk, W, MatrixXd::Identity(nz, nz), -1.0);

  // H2 output block:
  // [ W   L-KC-H   L-KC   -KD ]
  // [ *   Z        Z       0  ]
  // [ *   *        Y       0  ]
  // [ *   *        *       I  ]
  const int m1 = prob.add_block(nz + 2 * nx + nw);
  {
    const int c1 = nz, c2 = nz + nx, c3 = nz + 2 * nx;
    prob.add_term(m1, 0, 0, none, W, false, none);
    prob.add_const_sym(m1, 0, c1, L);
    prob.add_term_sym(m1, 0, c1, none, Hh, false, none, -1.0);
    prob.add_const_sym(m1, 0, c2, L);
    if (Kh) {
      prob.add_term_sym(m1, 0, c1, none, *Kh, false, C, -1.0);
      prob.add_term_sym(m1, 0, c2, none, *Kh, false, C, -1.0);
      prob.add_term_sym(m1, 0, c3, none, *Kh, false, D, -1.0);
    }
    prob.add_term(m1, c1, c1, none, Z, false, none);
    prob.add_term_sym(m1, c1, c2, none, Z, false, none);
    prob.add_term(m1, c2, c2, none, Y, false, none);
    prob.add_const(m1, c3, c3, MatrixXd::Identity(nw, nw));
  }

  // Sensitivity block:
  // [ Z   Z   0        0    0   0    ]
  // [ *   Y   0        Fhat 0   GhCT ]
  // [ *   *   l/r^2 I  Hhat 0   KhCT ]
  // [ *   *   *        Z    Z   0    ]
  // [ *   *   *        *    Y   0    ]
  // [ *   *   *        *    *   I    ]
  const int m2 = prob.add_block(5 * nx + nz);
  {
    const int r1 = nx, r2 = 2 * nx, r3 = 2 * nx + nz, r4 = 3 * nx + nz, r5 = 4 * nx + nz;
    prob.add_term(m2, 0, 0, none, Z, false, none);
    prob.add_term_sym(m2, 0, r1, none, Z, false, none);
    prob.add_term(m2, r1, r1, none, Y, false, none);
    prob.add_term_sym(m2, r1, r3, none, Fh, false, none);
    prob.add_term_sym(m2, r1, r5, none, Gh, false, CT);
    add_lambda_diag(prob, m2, r2, nz, inv_rho_sq, lam, capped ? *options.lambda_cap : 0.0);
    prob.add_term_sym(m2, r2, r3, none, Hh, false, none);
    if (Kh) prob.add_term_sym(m2, r2, r5, none, *Kh, false, CT);
    prob.add_term(m2, r3, r3, none, Z, false, none);
    prob.add_term_sym(m2, r3, r4, none, Z, false, none);
    prob.add_term(m2, r4, r4, none, Y, false, none);
    prob.add_const(m2, r5, r5, MatrixXd::Identity(nx, nx));
  }

  // Stability/H2 dynamics block:
  // [ Z   Z   ZA          ZA        ZB        ]
  // [ *   Y   YA+GhC+Fh   YA+GhC    YB+GhD    ]
  // [ *   *   Z           Z         0         ]
  // [ *   *   *           Y         0         ]
  // [ *   *   *           *         I         ]
  const int m3 = prob.add_block(4 * nx + nw);
  {
    const int r1 = nx, r2 = 2 * nx, r3 = 3 * nx, r4 = 4 * nx;
    prob.add_term(m3, 0, 0, none, Z, false, none);
    prob.add_term_sym(m3, 0, r1, none, Z, false, none);
    prob.add_term_sym(m3, 0, r2, none, Z, false, A);
    prob.add_term_sym(m3, 0, r3, none, Z, false, A);
    prob.add_term_sym(m3, 0, r4, none, Z, false, B);
    prob.add_term(m3, r1, r1, none, Y, false, none);
    prob.add_term_sym(m3, r1, r2, none, Y, false, A);
    prob.add_term_sym(m3, r1, r2, none, Gh, false, C);
    prob.add_term_sym(m3, r1, r2, none, Fh, false, none);
    prob.add_term_sym(m3, r1, r3, none, Y, false, A);
    prob.add_term_sym(m3, r1, r3, none, Gh, false, C);
    prob.add_term_sym(m3, r1, r4, none, Y, false, B);
    prob.add_term_sym(m3, r1, r4, none, Gh, false, D);
    prob.add_term(m3, r2, r2, none, Z, false, none);
    prob.add_term_sym(m3, r2, r3, none, Z, false, none);
    prob.add_term(m3, r3, r3, none, Y, false, none);
    prob.add_const(m3, r4, r4, MatrixXd::Identity(nw, nw));
  }

  const double scale = 1.0 + A.norm() + B.norm() + L.norm();
  for (int b : {m1, m2, m3}) prob.shift_block(b, options.strict_shift * scale);

  prob.add_objective_scalar(mu, 1.0);
  if (lam) prob.add_objective_scalar(*lam, budget.kappa() * budget.kappa());
  if (options.dump_problem) prob.dump(*options.dump_problem);

  SdpSolution sol = solve_sdp(prob, options.sdp);
  SynthesisResult res{FilterRealization::zero(nx, ny, nz)};
  res.solver_status = sol.status;
  res.newton_iterations = sol.newton_iterations;
  if (sol.status == SdpSolution::Status::kInfeasible ||
      sol.status == SdpSolution::Status::kFailure) {
    res.mu = res.lambda = res.objective = std::numeric_limits<double>::quiet_NaN();
    res.certificates["phase1_margin"] = MatrixXd::Constant(1, 1, sol.best_min_eig);
    return res;
  }

  const MatrixXd Zv = sol.values.at("Z");
  const MatrixXd Yv = sol.values.at("Y");
  const MatrixXd Khv = Kh ? sol.values.at("Khat") : MatrixXd::Zero(nz, ny);
  res.filter =
      recover_filter(Zv, Yv, sol.values.at("Fhat"), sol.values.at("Ghat"), sol.values.at("Hhat"), Khv);
  res.mu = sol.values.at("mu")(0, 0);
  res.lambda = capped ? *options.lambda_cap : sol.values.at("lambda")(0, 0);
  res.objective = res.mu + budget.kappa() * budget.kappa() * res.lambda;
  res.certificates = sol.values;
  res.verified = verify_norms(res.filter, plant, L, policy);
  return res;
}

namespace {

SynthesisResult solve_unstable_problem(const StateSpaceSystem& plant, const MatrixXd& L,
                                       const AdjacencyPolicy& policy, const PrivacyBudget& budget,
                                       const SynthesisOptions& options, bool minimize_lambda_only,
                                       std::optional<double> lambda_fixed) {
  const int nx = static_cast<int>(plant.state_dim());
  const int nw = static_cast<int>(plant.input_dim());
  const int ny = static_cast<int>(plant.output_dim());
  const int nz = static_cast<int>(L.rows());
  const MatrixXd& A = plant.A;
  const MatrixXd& B = plant.B;
  const MatrixXd& C = plant.C;
  const MatrixXd& D = plant.D;
  const MatrixXd CT = C * policy.selection_matrix(nx);
  const double inv_rho_sq = 1.0 / (policy.rho * policy.rho);

  SdpProblem prob;
  std::optional<VarRef> Yv, mu;
  if (!minimize_lambda_only) {
    Yv = prob.add_variable("Y", nx, nx, true);
    mu = prob.add_variable("mu", 1, 1, false);
  }
  VarRef X = prob.add_variable("X", nx, nx, true);
  VarRef Gh = prob.add_variable("Ghat", nx, ny, false);
  std::optional<VarRef> lam;
  if (!lambda_fixed) lam = prob.add_variable("lambda", 1, 1, false);

  const MatrixXd none;

  if (!minimize_lambda_only) {
    // mu - Tr(Y L^T L) >= 0.
    const int trace_blk = prob.add_block(1);
    prob.add_term(trace_blk, 0, 0, none, *mu, false, none);
    add_inner(prob, trace_blk, *Yv, L.transpose() * L, -1.0);

    // [ Y  I ; I  X ] >= 0.
    const int pair_blk = prob.add_block(2 * nx);
    prob.add_term(pair_blk, 0, 0, none, *Yv, false, none);
    prob.add_const_sym(pair_blk, 0, nx, MatrixXd::Identity(nx, nx));
    prob.add_term(pair_blk, nx, nx, none, X, false, none);
  } else {
    // X alone must remain positive definite.
    const int pos_blk = prob.add_block(nx);
    prob.add_term(pos_blk, 0, 0, none, X, false, none);
  }

  // H2 block: [ X  XA-GhC  XB-GhD ; *  X  0 ; *  *  I ].
  const int h2_blk = prob.add_block(2 * nx + nw);
  {
    prob.add_term(h2_blk, 0, 0, none, X, false, none);
    prob.add_term_sym(h2_blk, 0, nx, none, X, false, A);
    prob.add_term_sym(h2_blk, 0, nx, none, Gh, false, C, -1.0);
    prob.add_term_sym(h2_blk, 0, 2 * nx, none, X, false, B);
    prob.add_term_sym(h2_blk, 0, 2 * nx, none, Gh, false, D, -1.0);
    prob.add_term(h2_blk, nx, nx, none, X, false, none);
    prob.add_const(h2_blk, 2 * nx, 2 * nx, MatrixXd::Identity(nw, nw));
  }

  // Sensitivity block:
  // [ X  0        XA-GhC  GhCT ]
  // [ *  l/r^2 I  L       0    ]
  // [ *  *        X       0    ]
  // [ *  *        *       I    ]
  const int hinf_blk = prob.add_block(3 * nx + nz);
  {
    const int r1 = nx, r2 = nx + nz, r3 = 2 * nx + nz;
    prob.add_term(hinf_blk, 0, 0, none, X, false, none);
    prob.add_term_sym(hinf_blk, 0, r2, none, X, false, A);
    prob.add_term_sym(hinf_blk, 0, r2, none, Gh, false, C, -1.0);
    prob.add_term_sym(hinf_blk, 0, r3, none, Gh, false, CT);
    add_lambda_diag(prob, hinf_blk, r1, nz, inv_rho_sq, lam, lambda_fixed.value_or(0.0));
    prob.add_const_sym(hinf_blk, r1, r2, L);
    prob.add_term(hinf_blk, r2, r2, none, X, false, none);
    prob.add_const(hinf_blk, r3, r3, MatrixXd::Identity(nx, nx));
  }

  const double scale = 1.0 + A.norm() + B.norm() + L.norm();
  for (int b = 0; b < prob.block_count(); ++b) {
    if (prob.block_dim(b) > 1) prob.shift_block(b, options.strict_shift * scale);
  }

  if (minimize_lambda_only) {
    prob.add_objective_scalar(*lam, 1.0);
  } else {
    prob.add_objective_scalar(*mu, 1.0);
    if (lam) prob.add_objective_scalar(*lam, budget.kappa() * budget.kappa());
    if (options.dump_problem) prob.dump(*options.dump_problem);
  }

  SdpSolution sol = solve_sdp(prob, options.sdp);
  SynthesisResult res{FilterRealization::zero(nx, ny, nz)};
  res.solver_status = sol.status;
  res.newton_iterations = sol.newton_iterations;
  if (sol.status == SdpSolution::Status::kInfeasible ||
      sol.status == SdpSolution::Status::kFailure) {
    res.mu = res.lambda = res.objective = std::numeric_limits<double>::quiet_NaN();
    res.certificates["phase1_margin"] = MatrixXd::Constant(1, 1, sol.best_min_eig);
    return res;
  }

  const MatrixXd Xv = sol.values.at("X");
  const MatrixXd G = Xv.ldlt().solve(sol.values.at("Ghat"));
  res.filter = FilterRealization(A - G * C, G, L, MatrixXd::Zero(nz, ny));
  res.lambda = lambda_fixed ? *lambda_fixed : sol.values.at("lambda")(0, 0);
  res.mu = minimize_lambda_only ? std::numeric_limits<double>::quiet_NaN()
                                : sol.values.at("mu")(0, 0);
  res.objective = minimize_lambda_only
                      ? res.lambda
                      : res.mu + budget.kappa() * budget.kappa() * res.lambda;
  res.certificates = sol.values;
  if (!minimize_lambda_only) res.verified = verify_norms(res.filter, plant, L, policy);
  return res;
}

}  // namespace

SynthesisResult synth_unstable(const StateSpaceSystem& plant, const MatrixXd& L,
                               const AdjacencyPolicy& policy, const PrivacyBudget& budget,
                               const SynthesisOptions& options) {
  const int nx = static_cast<int>(plant.state_dim());
  if (L.cols() != nx) throw std::invalid_argument("synth_unstable: L must be n_z x n_x");
  if (!is_detectable(plant.A, plant.C))
    throw std::invalid_argument("synth_unstable: (A, C) must be detectable");
  if (!(policy.rho > 0.0)) throw std::domain_error("synth_unstable: rho must be positive");

  if (options.auto_cap) {
    SynthesisResult floor =
        solve_unstable_problem(plant, L, policy, budget, options, /*minimize_lambda_only=*/true,
                               std::nullopt);
    if (floor.solver_status != SdpSolution::Status::kOptimal &&
        floor.solver_status != SdpSolution::Status::kStalled) {
      return floor;
    }
    const double cap = (1.0 + options.auto_cap_margin) * floor.lambda;
    return solve_unstable_problem(plant, L, policy, budget, options,
                                  /*minimize_lambda_only=*/false, cap);
  }
  return solve_unstable_problem(plant, L, policy, budget, options,
                                /*minimize_lambda_only=*/false, options.lambda_cap);
}

VerificationReport verify_synthesis(const SynthesisResult& result, const StateSpaceSystem& plant,
                                    const MatrixXd& L, const AdjacencyPolicy& policy) {
  VerificationReport rep;
  const VerifiedNorms v = verify_norms(result.filter, plant, L, policy);
  rep.h2_sq = v.h2_sq;
  rep.hinf = v.hinf;
  rep.filter_stable = v.filter_spectral_radius < 1.0;
  const double tiny = 1e-12;
  rep.h2_slack = (result.mu - rep.h2_sq) / std::max(result.mu, tiny);
  const double weighted = policy.rho * policy.rho * rep.hinf * rep.hinf;
  rep.hinf_slack = (result.lambda - weighted) / std::max(result.lambda, tiny);
  rep.h2_ok = rep.h2_sq <= result.mu * (1.0 + 1e-4) + tiny;
  rep.hinf_ok = weighted <= result.lambda * (1.0 + 1e-4) + tiny;
  return rep;
}

}  // namespace dpf
