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

#ifndef DPF_SYNTHESIS_HPP_
#define DPF_SYNTHESIS_HPP_

#include <map>
#include <optional>
#include <string>

#include "dpf/filter.hpp"
#include "dpf/privacy.hpp"
#include "dpf/sdp.hpp"
#include "dpf/state_space.hpp"

namespace dpf {

struct SynthesisOptions {
  /// Fixed sensitivity budget: minimize mu subject to the sensitivity LMI at
  /// this lambda. Unset => joint objective mu + kappa^2 * lambda with lambda
  /// a decision variable.
  std::optional<double> lambda_cap;
  /// Unstable-case convenience: first minimize lambda alone, then re-solve
  /// with lambda capped at (1 + auto_cap_margin) times that floor. Overrides
  /// lambda_cap when set.
  bool auto_cap = false;
  double auto_cap_margin = 1.0;
  /// Stable case: allow the direct feedthrough term K. The default matches
  /// the predictor-form reference design (K = 0).
  bool feedthrough = false;
  /// Strictness slack on every LMI, relative to its constant-term scale.
  double strict_shift = 1e-8;
  /// When set, the assembled problem is written in the plain-text triplet
  /// format before solving (the capped problem, for auto_cap runs).
  std::ostream* dump_problem = nullptr;
  SdpOptions sdp;
};

struct VerifiedNorms {
  double h2_sq = 0.0;        // error-system H2 norm squared
  double hinf = 0.0;         // sensitivity-system H-infinity norm
  double filter_spectral_radius = 0.0;
};

struct SynthesisResult {
  FilterRealization filter;
  double mu = 0.0;      // certified H2^2 bound
  double lambda = 0.0;  // certified weighted sensitivity-squared bound
  double objective = 0.0;
  std::map<std::string, Eigen::MatrixXd> certificates;
  VerifiedNorms verified;
  SdpSolution::Status solver_status = SdpSolution::Status::kFailure;
  int newton_iterations = 0;
};

/// Filter synthesis for a Schur-stable plant: full-order filter (F,G,H,K)
/// minimizing the estimation-error H2 norm against the weighted
/// l2-sensitivity, through the change-of-variables LMIs in
/// (W, Z, Y, Fhat, Ghat, Hhat, Khat, mu, lambda).
SynthesisResult synth_stable(const StateSpaceSystem& plant, const Eigen::MatrixXd& L,
                             const AdjacencyPolicy& policy, const PrivacyBudget& budget,
                             const SynthesisOptions& options = {});

/// Observer-form synthesis valid for unstable plants: F = A - G C, H = L,
/// K = 0, with G the only design variable, through LMIs in (Y, X, Ghat).
SynthesisResult synth_unstable(const StateSpaceSystem& plant, const Eigen::MatrixXd& L,
                               const AdjacencyPolicy& policy, const PrivacyBudget& budget,
                               const SynthesisOptions& options = {});

/// Reconstructs (F, G, H, K) from the transformed certificate matrices with
/// the deterministic factorization U = Z^{-1}, V = Z - Y (so that
/// V U^T = I - Y Z^{-1}). Any nonsingular factorization yields a filter with
/// the same transfer function.
FilterRealization recover_filter(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Y,
                                 const Eigen::MatrixXd& Fhat, const Eigen::MatrixXd& Ghat,
                                 const Eigen::MatrixXd& Hhat, const Eigen::MatrixXd& Khat);

/// Same reconstruction with a caller-chosen factorization V U^T = I - Y Z^{-1}.
FilterRealization recover_filter_uv(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Fhat,
                                    const Eigen::MatrixXd& Ghat, const Eigen::MatrixXd& Hhat,
                                    const Eigen::MatrixXd& Khat, const Eigen::MatrixXd& U,
                                    const Eigen::MatrixXd& V);

struct VerificationReport {
  double h2_sq = 0.0;
  double hinf = 0.0;
  double h2_slack = 0.0;    // (mu - h2_sq) / max(mu, tiny)
  double hinf_slack = 0.0;  // (lambda - rho^2 hinf^2) / max(lambda, tiny)
  bool h2_ok = false;
  bool hinf_ok = false;
  bool filter_stable = false;

  bool pass(double tol = 1e-4) const { return h2_ok && hinf_ok; }
};

/// Recomputes both constraint norms from the recovered filter, independently
/// of the SDP certificates, and reports the slack against the claimed
/// (mu, lambda).
VerificationReport verify_synthesis(const SynthesisResult& result, const StateSpaceSystem& plant,
                                    const Eigen::MatrixXd& L, const AdjacencyPolicy& policy);

}  // namespace dpf

#endif  // DPF_SYNTHESIS_HPP_
