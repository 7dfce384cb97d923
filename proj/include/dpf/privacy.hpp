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

#ifndef DPF_PRIVACY_HPP_
#define DPF_PRIVACY_HPP_

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace dpf {

/// Gaussian upper tail Q(x) = P(N(0,1) > x). Absolute error below 1e-12.
double q_function(double x);

/// Inverse of q_function on (0, 1); monotone decreasing.
double q_inverse(double p);

/// An (epsilon, delta) differential-privacy budget with the derived noise
/// multiplier kappa = (K + sqrt(K^2 + 2 eps)) / (2 eps), K = Qinv(delta).
/// delta is restricted to (0, 0.5] so that K >= 0.
class PrivacyBudget {
 public:
  PrivacyBudget(double epsilon, double delta);

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  double kappa() const { return kappa_; }

 private:
  double epsilon_;
  double delta_;
  double kappa_;
};

double kappa(const PrivacyBudget& budget);

/// Minimal Gaussian-mechanism standard deviation kappa * sensitivity.
double gaussian_sigma(double sensitivity_l2, const PrivacyBudget& budget);

/// White-noise standard deviation for an output-perturbed aggregate of
/// per-participant channels: kappa * max_i(gain_i * b_i). Each entry pairs
/// a channel gain (H-infinity norm for linear channels, or a user-supplied
/// incremental gain) with the participant's deviation bound b_i.
double dynamic_mechanism_sigma(const std::vector<std::pair<double, double>>& channel_gains,
                               const PrivacyBudget& budget);

/// Predicted mean squared error of the two standard noise placements for a
/// sum of per-participant channels with a common input energy bound E:
///   input perturbation:  kappa^2 E sum_i h2_i^2
///   output perturbation: kappa^2 E max_i hinf_i^2
struct PerturbationMse {
  double input_scheme;
  double output_scheme;
};
PerturbationMse perturbation_mse(const std::vector<double>& h2_norms,
                                 const std::vector<double>& hinf_norms, double energy_bound,
                                 const PrivacyBudget& budget);

/// Worst-case slack of the privacy inequality over threshold events for the
/// scalar Gaussian mechanism with standard deviation sigma and query
/// sensitivity `sensitivity`:
///
///   margin = delta - sup_t [ Q((t - sensitivity)/sigma) - e^eps Q(t/sigma) ]
///
/// The supremum over half-lines [t, inf) is attained at the analytic
/// critical point t* = eps sigma^2 / sensitivity + sensitivity / 2 and is
/// additionally bracketed on a dense grid. A nonnegative margin certifies
/// the half-line event family.
double verify_dp_scalar(double sigma, double sensitivity, const PrivacyBudget& budget);

/// Per-participant deviation bound rho (l2 energy) together with the set of
/// protected state coordinates defining the diagonal 0/1 selection matrix.
struct AdjacencyPolicy {
  double rho = 0.0;
  std::vector<int> protected_coords;

  AdjacencyPolicy() = default;
  AdjacencyPolicy(double rho_in, std::vector<int> coords);

  /// Diagonal selection matrix of size n x n.
  Eigen::MatrixXd selection_matrix(Eigen::Index n) const;
};

}  // namespace dpf

#endif  // DPF_PRIVACY_HPP_
