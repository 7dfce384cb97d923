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

#include "dpf/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpf {

namespace {

const double kSqrt2 = std::sqrt(2.0);

}  // namespace

double q_function(double x) {
  if (std::isnan(x)) throw std::invalid_argument("q_function: x must be finite");
  // erfc is evaluated by the C library as a series / continued-fraction
  // hybrid with relative accuracy near machine precision, which keeps the
  // absolute error of Q well below 1e-12 on the whole real line.
  return 0.5 * std::erfc(x / kSqrt2);
}

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("q_inverse: p must lie in (0, 1)");
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (q_function(mid) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13 * (1.0 + std::abs(lo))) break;
  }
  double x = 0.5 * (lo + hi);
  // Newton polish: Q'(x) = -phi(x).
  for (int it = 0; it < 4; ++it) {
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::acos(-1.0));
    if (phi < 1e-300) break;
    x += (q_function(x) - p) / phi;
  }
  return x;
}

PrivacyBudget::PrivacyBudget(double epsilon, double delta) : epsilon_(epsilon), delta_(delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::domain_error("PrivacyBudget: epsilon must be positive and finite");
  if (!(delta > 0.0 && delta <= 0.5))
    throw std::domain_error(
        "PrivacyBudget: delta must lie in (0, 0.5] so that Qinv(delta) is nonnegative");
  const double K = q_inverse(delta);
  kappa_ = (K + std::sqrt(K * K + 2.0 * epsilon)) / (2.0 * epsilon);
}

double kappa(const PrivacyBudget& budget) { return budget.kappa(); }

double gaussian_sigma(double sensitivity_l2, const PrivacyBudget& budget) {
  if (!(sensitivity_l2 >= 0.0))
    throw std::domain_error("gaussian_sigma: sensitivity must be nonnegative");
  return budget.kappa() * sensitivity_l2;
}

double dynamic_mechanism_sigma(const std::vector<std::pair<double, double>>& channel_gains,
                               const PrivacyBudget& budget) {
  if (channel_gains.empty())
    throw std::invalid_argument("dynamic_mechanism_sigma: channel list must be nonempty");
  double worst = 0.0;
  for (const auto& [gain, bound] : channel_gains) {
    if (!(gain >= 0.0) || !(bound >= 0.0))
      throw std::domain_error("dynamic_mechanism_sigma: gains and bounds must be nonnegative");
    worst = std::max(worst, gain * bound);
  }
  return budget.kappa() * worst;
}

PerturbationMse perturbation_mse(const std::vector<double>& h2_norms,
                                 const std::vector<double>& hinf_norms, double energy_bound,
                                 const PrivacyBudget& budget) {
  if (h2_norms.size() != hinf_norms.size())
    throw std::invalid_argument("perturbation_mse: norm lists must have equal length");
  if (!(energy_bound >= 0.0))
    throw std::domain_error("perturbation_mse: energy bound must be nonnegative");
  double sum_h2_sq = 0.0;
  double max_hinf_sq = 0.0;
  for (size_t i = 0; i < h2_norms.size(); ++i) {
    if (!(h2_norms[i] >= 0.0) || !(hinf_norms[i] >= 0.0))
      throw std::domain_error("perturbation_mse: norms must be nonnegative");
    sum_h2_sq += h2_norms[i] * h2_norms[i];
    max_hinf_sq = std::max(max_hinf_sq, hinf_norms[i] * hinf_norms[i]);
  }
  const double k2E = budget.kappa() * budget.kappa() * energy_bound;
  return PerturbationMse{k2E * sum_h2_sq, k2E * max_hinf_sq};
}

double verify_dp_scalar(double sigma, double sensitivity, const PrivacyBudget& budget) {
  if (!(sigma > 0.0)) throw std::domain_error("verify_dp_scalar: sigma must be positive");
  if (!(sensitivity >= 0.0))
    throw std::domain_error("verify_dp_scalar: sensitivity must be nonnegative");
  // Limits t -> +-inf give sup >= max(0, 1 - e^eps) = 0.
  double sup = 0.0;
  if (sensitivity > 0.0) {
    const double eeps = std::exp(budget.epsilon());
    const auto slack = [&](double t) {
      return q_function((t - sensitivity) / sigma) - eeps * q_function(t / sigma);
    };
    // Interior critical point of the slack.
    const double tstar = budget.epsilon() * sigma * sigma / sensitivity + 0.5 * sensitivity;
    sup = std::max(sup, slack(tstar));
    const double lo = -10.0 * sigma;
    const double hi = 10.0 * sigma + sensitivity;
    const int kGrid = 4001;
    for (int k = 0; k < kGrid; ++k) {
      sup = std::max(sup, slack(lo + (hi - lo) * k / (kGrid - 1)));
    }
  }
  return budget.delta() - sup;
}

AdjacencyPolicy::AdjacencyPolicy(double rho_in, std::vector<int> coords)
    : rho(rho_in), protected_coords(std::move(coords)) {
  if (!(rho >= 0.0)) throw std::domain_error("AdjacencyPolicy: rho must be nonnegative");
}

Eigen::MatrixXd AdjacencyPolicy::selection_matrix(Eigen::Index n) const {
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int idx : protected_coords) {
    if (idx < 0 || idx >= n)
      throw std::invalid_argument("AdjacencyPolicy: protected coordinate out of range");
    T(idx, idx) = 1.0;
  }
  return T;
}

}  // namespace dpf
