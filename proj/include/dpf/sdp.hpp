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

#ifndef DPF_SDP_HPP_
#define DPF_SDP_HPP_

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dpf {

/// Handle to a named matrix decision variable.
struct VarRef {
  int id = -1;
};

struct SdpOptions {
  double gap_tol = 1e-6;           // relative duality-gap target
  int max_newton_total = 800;      // stall cap across all centering steps
  int max_newton_inner = 60;       // per centering problem
  double barrier_mult = 10.0;      // path-following multiplier on t
  double phase1_target = -1.0;     // interior margin to reach; <0 => automatic
};

/// Linear SDP over named matrix variables with block constraints
///   F_b(x) = F0_b + sum_k x_k Fk_b  required PSD for every block b,
/// minimizing a linear objective c^T x. Strict inequalities are encoded by
/// subtracting a small multiple of the identity into F0 (see shift_block).
class SdpProblem {
 public:
  VarRef add_variable(const std::string& name, int rows, int cols, bool symmetric);
  int add_block(int dim);

  /// block(row_off.., col_off..) += scale * L * op(V) * R, op = transpose or
  /// identity. Pass empty L/R for identity factors.
  void add_term(int block, int row_off, int col_off, const Eigen::MatrixXd& L, VarRef v,
                bool transpose_v, const Eigen::MatrixXd& R, double scale = 1.0);
  /// Same term mirrored into the transposed position (for off-diagonal
  /// placements of a symmetric constraint).
  void add_term_sym(int block, int row_off, int col_off, const Eigen::MatrixXd& L, VarRef v,
                    bool transpose_v, const Eigen::MatrixXd& R, double scale = 1.0);
  void add_const(int block, int row_off, int col_off, const Eigen::MatrixXd& M);
  void add_const_sym(int block, int row_off, int col_off, const Eigen::MatrixXd& M);
  /// F0_b -= shift * I (strictness slack).
  void shift_block(int block, double shift);

  /// objective += sum_ij W_ij * V_ij.
  void add_objective(VarRef v, const Eigen::MatrixXd& W);
  void add_objective_scalar(VarRef v, double w);

  int scalar_dim() const { return total_scalars_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  int block_dim(int b) const { return blocks_[b].dim; }

  /// Plain-text sparse triplet dump: variable table, objective triplets and
  /// per-block entry triplets (block, row, col, scalar-variable, coeff).
  void dump(std::ostream& os) const;

  /// Assembles F_b at a scalar assignment (used by the solver and tests).
  Eigen::MatrixXd block_value(int b, const Eigen::VectorXd& x) const;
  Eigen::MatrixXd unpack(VarRef v, const Eigen::VectorXd& x) const;
  double objective_value(const Eigen::VectorXd& x) const;
  const std::string& var_name(int id) const { return vars_[id].name; }

 private:
  friend struct SdpSolverAccess;
  struct Var {
    std::string name;
    int rows, cols;
    bool symmetric;
    int offset;  // first scalar index
    int count;
  };
  struct Block {
    int dim;
    Eigen::MatrixXd F0;
    // scalar index -> dense coefficient matrix (kept sparse by map).
    std::map<int, Eigen::MatrixXd> coeff;
  };
  Eigen::MatrixXd& coeff_slot(Block& blk, int scalar_index);
  int scalar_index(const Var& v, int r, int c) const;

  std::vector<Var> vars_;
  std::vector<Block> blocks_;
  Eigen::VectorXd objective_;
  int total_scalars_ = 0;
};

struct SdpSolution {
  enum class Status { kOptimal, kInfeasible, kStalled, kFailure };
  Status status = Status::kFailure;
  double objective = 0.0;
  Eigen::VectorXd x;
  std::map<std::string, Eigen::MatrixXd> values;
  int newton_iterations = 0;
  double duality_gap_bound = 0.0;
  /// Worst min-eigenvalue across blocks at the returned point; for
  /// infeasible problems this is the best margin phase I could attain.
  double best_min_eig = 0.0;

  bool ok() const { return status == Status::kOptimal; }
};

/// Barrier interior-point solve (phase I feasibility, then path following on
/// t * c^T x - sum_b log det F_b(x); the duality gap is bounded by
/// (total block dimension) / t).
SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options = {});

/// Phase I only: maximize the interior margin s with F_b(x) >= s I.
/// `warm_start` (when sized correctly) seeds the search; useful when probing
/// a family of nearby problems, e.g. bisection on a level parameter.
struct FeasibilityReport {
  bool feasible = false;
  double margin = 0.0;  // best attained min-eigenvalue bound
  Eigen::VectorXd x;
};
FeasibilityReport check_feasibility(const SdpProblem& problem, double required_margin,
                                    const SdpOptions& options = {},
                                    const Eigen::VectorXd* warm_start = nullptr);

}  // namespace dpf

#endif  // DPF_SDP_HPP_
