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

#include "dpf/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace dpf {

namespace {

Eigen::MatrixXd id_or(const Eigen::MatrixXd& M, int n) {
  if (M.size() == 0) return Eigen::MatrixXd::Identity(n, n);
  return M;
}

}  // namespace

VarRef SdpProblem::add_variable(const std::string& name, int rows, int cols, bool symmetric) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("sdp: variable dims must be positive");
  if (symmetric && rows != cols)
    throw std::invalid_argument("sdp: symmetric variable must be square");
  Var v;
  v.name = name;
  v.rows = rows;
  v.cols = cols;
  v.symmetric = symmetric;
  v.offset = total_scalars_;
  v.count = symmetric ? rows * (rows + 1) / 2 : rows * cols;
  total_scalars_ += v.count;
  vars_.push_back(v);
  objective_.conservativeResize(total_scalars_);
  objective_.tail(v.count).setZero();
  return VarRef{static_cast<int>(vars_.size()) - 1};
}

int SdpProblem::add_block(int dim) {
  Block b;
  b.dim = dim;
  b.F0 = Eigen::MatrixXd::Zero(dim, dim);
  blocks_.push_back(std::move(b));
  return static_cast<int>(blocks_.size()) - 1;
}

int SdpProblem::scalar_index(const Var& v, int r, int c) const {
  if (v.symmetric) {
    const int a = std::min(r, c), b = std::max(r, c);
    return v.offset + b * (b + 1) / 2 + a;
  }
  return v.offset + r * v.cols + c;
}

Eigen::MatrixXd& SdpProblem::coeff_slot(Block& blk, int k) {
  auto it = blk.coeff.find(k);
  if (it == blk.coeff.end()) {
    it = blk.coeff.emplace(k, Eigen::MatrixXd::Zero(blk.dim, blk.dim)).first;
  }
  return it->second;
}

void SdpProblem::add_term(int block, int row_off, int col_off, const Eigen::MatrixXd& L_in,
                          VarRef vref, bool transpose_v, const Eigen::MatrixXd& R_in,
                          double scale) {
  const Var& v = vars_.at(vref.id);
  Block& blk = blocks_.at(block);
  const int op_rows = transpose_v ? v.cols : v.rows;
  const int op_cols = transpose_v ? v.rows : v.cols;
  const Eigen::MatrixXd L = id_or(L_in, op_rows);
  const Eigen::MatrixXd R = id_or(R_in, op_cols);
  if (L.cols() != op_rows || R.rows() != op_cols)
    throw std::invalid_argument("sdp: term factor dimensions do not match variable");
  if (row_off + L.rows() > blk.dim || col_off + R.cols() > blk.dim)
    throw std::invalid_argument("sdp: term exceeds block bounds");

  // Entry (a,b) of V contributes L.col(i) R.row(j) with (i,j) the position
  // of V(a,b) inside op(V).
  for (int a = 0; a < v.rows; ++a) {
    for (int b = 0; b < v.cols; ++b) {
      const int i = transpose_v ? b : a;
      const int j = transpose_v ? a : b;
      Eigen::MatrixXd& M = coeff_slot(blk, scalar_index(v, a, b));
      M.block(row_off, col_off, L.rows(), R.cols()) += scale * (L.col(i) * R.row(j));
    }
  }
}

void SdpProblem::add_term_sym(int block, int row_off, int col_off, const Eigen::MatrixXd& L,
                              VarRef v, bool transpose_v, const Eigen::MatrixXd& R,
                              double scale) {
  if (row_off == col_off)
    throw std::invalid_argument("sdp: add_term_sym is for off-diagonal placements");
  add_term(block, row_off, col_off, L, v, transpose_v, R, scale);
  const Var& var = vars_.at(v.id);
  const int op_rows = transpose_v ? var.cols : var.rows;
  const int op_cols = transpose_v ? var.rows : var.cols;
  const Eigen::MatrixXd Lm = id_or(L, op_rows);
  const Eigen::MatrixXd Rm = id_or(R, op_cols);
  add_term(block, col_off, row_off, Rm.transpose(), v, !transpose_v, Lm.transpose(), scale);
}

void SdpProblem::add_const(int block, int row_off, int col_off, const Eigen::MatrixXd& M) {
  Block& blk = blocks_.at(block);
  if (row_off + M.rows() > blk.dim || col_off + M.cols() > blk.dim)
    throw std::invalid_argument("sdp: constant exceeds block bounds");
  blk.F0.block(row_off, col_off, M.rows(), M.cols()) += M;
}

void SdpProblem::add_const_sym(int block, int row_off, int col_off, const Eigen::MatrixXd& M) {
  if (row_off == col_off)
    throw std::invalid_argument("sdp: add_const_sym is for off-diagonal placements");
  add_const(block, row_off, col_off, M);
  add_const(block, col_off, row_off, M.transpose());
}

void SdpProblem::shift_block(int block, double shift) {
  Block& blk = blocks_.at(block);
  blk.F0 -= shift * Eigen::MatrixXd::Identity(blk.dim, blk.dim);
}

void SdpProblem::add_objective(VarRef vref, const Eigen::MatrixXd& W) {
  const Var& v = vars_.at(vref.id);
  if (W.rows() != v.rows || W.cols() != v.cols)
    throw std::invalid_argument("sdp: objective weight shape mismatch");
  for (int a = 0; a < v.rows; ++a)
    for (int b = 0; b < v.cols; ++b) objective_(scalar_index(v, a, b)) += W(a, b);
}

void SdpProblem::add_objective_scalar(VarRef v, double w) {
  add_objective(v, Eigen::MatrixXd::Constant(1, 1, w));
}

Eigen::MatrixXd SdpProblem::block_value(int b, const Eigen::VectorXd& x) const {
  const Block& blk = blocks_.at(b);
  Eigen::MatrixXd F = blk.F0;
  for (const auto& [k, M] : blk.coeff) F += x(k) * M;
  return F;
}

Eigen::MatrixXd SdpProblem::unpack(VarRef vref, const Eigen::VectorXd& x) const {
  const Var& v = vars_.at(vref.id);
  Eigen::MatrixXd M(v.rows, v.cols);
  for (int a = 0; a < v.rows; ++a)
    for (int b = 0; b < v.cols; ++b) M(a, b) = x(scalar_index(v, a, b));
  return M;
}

double SdpProblem::objective_value(const Eigen::VectorXd& x) const {
  return objective_.dot(x);
}

void SdpProblem::dump(std::ostream& os) const {
  os << "sdp-triplet 1\n";
  os << "vars " << vars_.size() << "\n";
  for (size_t i = 0; i < vars_.size(); ++i) {
    const Var& v = vars_[i];
    os << "var " << i << " " << v.name << " " << v.rows << " " << v.cols << " "
       << (v.symmetric ? 1 : 0) << " " << v.offset << " " << v.count << "\n";
  }
  os << "blocks " << blocks_.size() << "\n";
  for (size_t b = 0; b < blocks_.size(); ++b) os << "block " << b << " " << blocks_[b].dim << "\n";
  for (int k = 0; k < total_scalars_; ++k) {
    if (objective_(k) != 0.0) os << "obj " << k << " " << objective_(k) << "\n";
  }
  char buf[64];
  for (size_t b = 0; b < blocks_.size(); ++b) {
    const Block& blk = blocks_[b];
    for (int r = 0; r < blk.dim; ++r)
      for (int c = r; c < blk.dim; ++c)
        if (blk.F0(r, c) != 0.0) {
          std::snprintf(buf, sizeof buf, "%.17g", blk.F0(r, c));
          os << "f0 " << b << " " << r << " " << c << " " << buf << "\n";
        }
    for (const auto& [k, M] : blk.coeff) {
      for (int r = 0; r < blk.dim; ++r)
        for (int c = r; c < blk.dim; ++c)
          if (M(r, c) != 0.0) {
            std::snprintf(buf, sizeof buf, "%.17g", M(r, c));
            os << "entry " << b << " " << r << " " << c << " " << k << " " << buf << "\n";
          }
    }
  }
}

// ---------------------------------------------------------------------------
// Interior-point machinery.

namespace {

struct IBlock {
  int dim;
  Eigen::MatrixXd F0;
  std::vector<std::pair<int, Eigen::MatrixXd>> terms;
};

struct IProblem {
  int m = 0;
  Eigen::VectorXd c;
  std::vector<IBlock> blocks;
  int barrier_dim() const {
    int nu = 0;
    for (const auto& b : blocks) nu += b.dim;
    return nu;
  }
};

Eigen::MatrixXd assemble(const IBlock& b, const Eigen::VectorXd& x) {
  Eigen::MatrixXd F = b.F0;
  for (const auto& [k, M] : b.terms) F += x(k) * M;
  return F;
}

// Cholesky of every block; empty result when some block is not PD.
bool factor_all(const IProblem& p, const Eigen::VectorXd& x,
                std::vector<Eigen::LLT<Eigen::MatrixXd>>* llts) {
  llts->clear();
  llts->reserve(p.blocks.size());
  for (const auto& b : p.blocks) {
    Eigen::MatrixXd F = assemble(b, x);
    llts->emplace_back(F);
    if (llts->back().info() != Eigen::Success) return false;
    // Guard against semidefinite corner cases that LLT lets through.
    const auto& L = llts->back().matrixLLT();
    for (int i = 0; i < b.dim; ++i)
      if (!(L(i, i) > 0.0) || !std::isfinite(L(i, i))) return false;
  }
  return true;
}

double barrier_merit(const IProblem& p, double t, const Eigen::VectorXd& x,
                     const std::vector<Eigen::LLT<Eigen::MatrixXd>>& llts) {
  double phi = 0.0;
  for (size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& L = llts[b].matrixLLT();
    for (int i = 0; i < p.blocks[b].dim; ++i) phi -= 2.0 * std::log(L(i, i));
  }
  return t * p.c.dot(x) + phi;
}

struct CenterResult {
  bool ok = false;
  int newton_steps = 0;
};

// Damped Newton on t*c'x - sum log det F_b(x), keeping x strictly feasible.
CenterResult center(const IProblem& p, double t, Eigen::VectorXd* x, int max_inner,
                    int* newton_budget) {
  CenterResult res;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llts;
  if (!factor_all(p, *x, &llts)) return res;

  for (int it = 0; it < max_inner; ++it) {
    if (*newton_budget <= 0) return res;
    --*newton_budget;
    ++res.newton_steps;

    Eigen::VectorXd grad = t * p.c;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(p.m, p.m);
    for (size_t b = 0; b < p.blocks.size(); ++b) {
      const IBlock& blk = p.blocks[b];
      const auto& llt = llts[b];
      std::vector<std::pair<int, Eigen::MatrixXd>> S;
      S.reserve(blk.terms.size());
      for (const auto& [k, M] : blk.terms) {
        // S_k = L^-1 M L^-T is symmetric; grad_k of -logdet is -trace(S_k).
        Eigen::MatrixXd Sk = llt.matrixL().solve(M);
        Sk = llt.matrixL().solve(Sk.transpose()).transpose();
        grad(k) -= Sk.trace();
        S.emplace_back(k, std::move(Sk));
      }
      for (size_t i = 0; i < S.size(); ++i)
        for (size_t j = i; j < S.size(); ++j) {
          const double h = S[i].second.cwiseProduct(S[j].second).sum();
          H(S[i].first, S[j].first) += h;
          if (S[i].first != S[j].first) H(S[j].first, S[i].first) += h;
        }
    }
    const double ridge = 1e-13 * std::max(1.0, H.diagonal().maxCoeff());
    H.diagonal().array() += ridge;

    Eigen::VectorXd d = H.ldlt().solve(-grad);
    const double decrement = -grad.dot(d);
    if (!std::isfinite(decrement)) return res;
    if (decrement * 0.5 < 1e-10) {
      res.ok = true;
      return res;
    }

    const double merit0 = barrier_merit(p, t, *x, llts);
    double alpha = 1.0;
    bool stepped = false;
    std::vector<Eigen::LLT<Eigen::MatrixXd>> trial_llts;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd xt = *x + alpha * d;
      if (factor_all(p, xt, &trial_llts)) {
        const double merit = barrier_merit(p, t, xt, trial_llts);
        if (merit <= merit0 + 0.01 * alpha * grad.dot(d)) {
          *x = std::move(xt);
          llts = std::move(trial_llts);
          stepped = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!stepped) {
      // No progress possible at this centering accuracy.
      res.ok = decrement * 0.5 < 1e-6;
      return res;
    }
  }
  res.ok = true;  // loose centering is still usable by the outer loop
  return res;
}

double min_eig_sym(const Eigen::MatrixXd& F) {
  if (F.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (F + F.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

// Friend accessor: exposes the internal block structure to the solver.
struct SdpSolverAccess {
  static IProblem build(const SdpProblem& prob) {
    IProblem p;
    p.m = prob.total_scalars_;
    p.c = prob.objective_;
    const auto check_sym = [](const Eigen::MatrixXd& M) {
      if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + M.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("sdp: constraint block is not symmetric");
    };
    for (const auto& blk : prob.blocks_) {
      IBlock ib;
      ib.dim = blk.dim;
      ib.F0 = blk.F0;
      check_sym(ib.F0);
      for (const auto& [k, M] : blk.coeff) {
        check_sym(M);
        ib.terms.emplace_back(k, M);
      }
      p.blocks.push_back(std::move(ib));
    }
    return p;
  }
  static void fill_values(const SdpProblem& prob, const Eigen::VectorXd& x, SdpSolution* sol) {
    for (size_t i = 0; i < prob.vars_.size(); ++i) {
      sol->values[prob.vars_[i].name] = prob.unpack(VarRef{static_cast<int>(i)}, x);
    }
  }
};

namespace {

double typical_scale(const IProblem& p) {
  double s = 0.0;
  for (const auto& b : p.blocks) s += 1.0 + b.F0.norm() / b.dim;
  return s / std::max<size_t>(1, p.blocks.size());
}

// Phase I: maximize the uniform margin s with F_b(x) - s I PSD. Returns the
// attained margin and the point; stops early once `target` is reached.
struct Phase1Result {
  double margin = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd x;
  bool reached_target = false;
  int newton_steps = 0;
};

Phase1Result phase1(const IProblem& orig, double target, const SdpOptions& opt,
                    int* newton_budget, const Eigen::VectorXd* warm_start = nullptr) {
  IProblem p;
  p.m = orig.m + 1;
  const int si = orig.m;  // margin variable index
  p.c.setZero(p.m);
  p.c(si) = -1.0;  // maximize s
  for (const auto& b : orig.blocks) {
    IBlock ib;
    ib.dim = b.dim;
    ib.F0 = b.F0;
    ib.terms = b.terms;
    ib.terms.emplace_back(si, -Eigen::MatrixXd::Identity(b.dim, b.dim));
    p.blocks.push_back(std::move(ib));
  }
  const double scale = typical_scale(orig);
  const double s_cap = 10.0 * std::max(1.0, scale) + 10.0 * std::abs(target);
  IBlock capb;
  capb.dim = 1;
  capb.F0 = Eigen::MatrixXd::Constant(1, 1, s_cap);
  capb.terms.emplace_back(si, -Eigen::MatrixXd::Identity(1, 1));
  p.blocks.push_back(std::move(capb));

  // Box bounds keep the margin maximization bounded: without them the
  // barrier rewards runaway growth along feasible matrix-scaling rays
  // (nothing else penalizes the decision variables in phase I).
  const double box = 1e8 * std::max(1.0, scale);
  for (int k = 0; k < orig.m; ++k) {
    for (double sign : {1.0, -1.0}) {
      IBlock bound;
      bound.dim = 1;
      bound.F0 = Eigen::MatrixXd::Constant(1, 1, box);
      bound.terms.emplace_back(k, sign * Eigen::MatrixXd::Identity(1, 1));
      p.blocks.push_back(std::move(bound));
    }
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(p.m);
  if (warm_start && warm_start->size() == orig.m) {
    x.head(orig.m) = warm_start->cwiseMax(-0.9 * box).cwiseMin(0.9 * box);
  }
  double s0 = std::numeric_limits<double>::infinity();
  for (const auto& b : orig.blocks) s0 = std::min(s0, min_eig_sym(assemble(b, x.head(orig.m))));
  x(si) = s0 - 1.0 - 0.01 * scale;

  Phase1Result out;
  out.x = x.head(orig.m);
  out.margin = x(si);
  const int nu = p.barrier_dim();
  double t = 1.0 / std::max(1.0, scale);
  for (int outer = 0; outer < 60; ++outer) {
    CenterResult cr = center(p, t, &x, opt.max_newton_inner, newton_budget);
    out.newton_steps += cr.newton_steps;
    if (x(si) > out.margin) {
      out.margin = x(si);
      out.x = x.head(orig.m);
    }
    if (out.margin >= target) {
      out.reached_target = true;
      return out;
    }
    if (!cr.ok || *newton_budget <= 0) return out;
    if (nu / t < 1e-9 * (1.0 + std::abs(x(si)))) return out;  // converged
    t *= opt.barrier_mult;
  }
  return out;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options) {
  SdpSolution sol;
  IProblem p = SdpSolverAccess::build(problem);
  if (p.m == 0) {
    sol.status = SdpSolution::Status::kFailure;
    return sol;
  }
  int budget = options.max_newton_total;
  const double scale = typical_scale(p);
  const double target =
      options.phase1_target >= 0.0 ? options.phase1_target : 1e-7 * std::max(1.0, scale);

  Phase1Result ph1 = phase1(p, target, options, &budget);
  sol.newton_iterations += ph1.newton_steps;
  sol.best_min_eig = ph1.margin;
  if (!ph1.reached_target && ph1.margin <= 0.0) {
    sol.status = SdpSolution::Status::kInfeasible;
    sol.x = ph1.x;
    SdpSolverAccess::fill_values(problem, ph1.x, &sol);
    return sol;
  }

  Eigen::VectorXd x = ph1.x;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llts;
  if (!factor_all(p, x, &llts)) {
    // Phase I margin was positive but tiny; treat as numerical failure.
    sol.status = SdpSolution::Status::kFailure;
    sol.x = x;
    return sol;
  }

  const int nu = p.barrier_dim();
  double t = std::max(1.0, nu / (1.0 + std::abs(p.c.dot(x))));
  bool stalled = false;
  for (int outer = 0; outer < 80; ++outer) {
    CenterResult cr = center(p, t, &x, options.max_newton_inner, &budget);
    sol.newton_iterations += cr.newton_steps;
    const double gap = nu / t;
    const double obj = p.c.dot(x);
    if (gap <= options.gap_tol * (1.0 + std::abs(obj))) break;
    if (budget <= 0) {
      stalled = true;
      break;
    }
    if (!cr.ok) {
      stalled = true;
      break;
    }
    t *= options.barrier_mult;
  }

  sol.x = x;
  sol.objective = p.c.dot(x);
  sol.duality_gap_bound = nu / t;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& b : p.blocks) worst = std::min(worst, min_eig_sym(assemble(b, x)));
  sol.best_min_eig = worst;
  SdpSolverAccess::fill_values(problem, x, &sol);

  bool sound = true;
  for (const auto& b : p.blocks) {
    const Eigen::MatrixXd F = assemble(b, x);
    if (min_eig_sym(F) < -1e-7 * (1.0 + F.norm())) sound = false;
  }
  if (!sound) {
    sol.status = SdpSolution::Status::kFailure;
  } else {
    sol.status = stalled ? SdpSolution::Status::kStalled : SdpSolution::Status::kOptimal;
  }
  return sol;
}

FeasibilityReport check_feasibility(const SdpProblem& problem, double required_margin,
                                    const SdpOptions& options,
                                    const Eigen::VectorXd* warm_start) {
  IProblem p = SdpSolverAccess::build(problem);
  int budget = options.max_newton_total;
  Phase1Result ph1 = phase1(p, required_margin, options, &budget, warm_start);
  FeasibilityReport rep;
  rep.feasible = ph1.margin >= required_margin;
  rep.margin = ph1.margin;
  rep.x = ph1.x;
  return rep;
}

}  // namespace dpf
