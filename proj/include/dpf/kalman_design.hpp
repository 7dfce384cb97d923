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

#ifndef DPF_KALMAN_DESIGN_HPP_
#define DPF_KALMAN_DESIGN_HPP_

#include <vector>

#include "dpf/filter.hpp"
#include "dpf/privacy.hpp"
#include "dpf/riccati.hpp"
#include "dpf/state_space.hpp"

namespace dpf {

/// One participant's public model: dynamics, its contribution L to the
/// released quantity z = sum_i L_i x_i, and the public initial mean.
struct ParticipantModel {
  StateSpaceSystem system;
  Eigen::MatrixXd L;
  Eigen::VectorXd x0_mean;

  ParticipantModel(StateSpaceSystem sys, Eigen::MatrixXd L_in, Eigen::VectorXd x0);
};

/// Steady-state Kalman design for one participant. `predictor` releases
/// zf_t = L xhat_{t|t-1} (no feedthrough); `current` releases
/// zf_t = L xhat_{t|t} and uses y_t directly.
struct KalmanDesign {
  FilterRealization predictor;
  FilterRealization current;
  RiccatiSolution riccati;
  double mse_predictor = 0.0;  // L P L^T
  double mse_current = 0.0;    // L P_filtered L^T
};

KalmanDesign design_participant_kalman(const ParticipantModel& participant,
                                       double extra_meas_noise_std);

struct KalmanPlan {
  std::vector<KalmanDesign> designs;
  double predicted_mse = 0.0;          // predictor convention, summed
  double predicted_mse_current = 0.0;  // current-estimator convention
};

/// Independent participants: per-participant designs and the total MSE of
/// z = sum_i L_i x_i. `extra_meas_noise_std` augments each participant's
/// measurement noise covariance by std^2 I (used by compensated designs).
KalmanPlan design_kalman(const std::vector<ParticipantModel>& participants,
                         const std::vector<double>& extra_meas_noise_std);

enum class Scheme { kNaiveInput, kCompensatedInput, kOutputKalman, kOutputSynthesized };
const char* scheme_name(Scheme s);

/// A fully-specified privacy mechanism around a filter bank.
struct MechanismPlan {
  Scheme scheme;
  /// Input schemes: per-participant white noise std added to y_i.
  std::vector<double> input_noise_std;
  /// Output schemes: single noise std added to the released zf.
  double output_noise_std = 0.0;
  std::vector<FilterRealization> filters;  // released (predictor-convention) filters
  double predicted_mse = 0.0;
  /// Output schemes: per-participant sensitivities under both conventions.
  std::vector<double> gamma_predictor;
  std::vector<double> gamma_current;
  double gamma_weighted = 0.0;  // max_i gamma_i rho_i (predictor convention)
};

struct InputPerturbationPlans {
  MechanismPlan naive;
  MechanismPlan compensated;
};

/// Input noise injection: each participant adds white noise of std
/// kappa * rho_i * sigma_max(C_i T_i) to y_i. The naive variant keeps the
/// no-privacy Kalman filters; the compensated variant redesigns them with
/// the privacy noise treated as additional measurement noise.
InputPerturbationPlans input_perturbation_plan(const std::vector<ParticipantModel>& participants,
                                               const std::vector<AdjacencyPolicy>& policies,
                                               const PrivacyBudget& budget);

/// Output noise injection around the supplied per-participant filters
/// (predictor-convention): released sum gets white noise of std
/// kappa * max_i(gamma_i rho_i), gamma_i the H-infinity norm of the
/// sensitivity channel of participant i's composed filter.
MechanismPlan output_perturbation_plan(const std::vector<ParticipantModel>& participants,
                                       const std::vector<AdjacencyPolicy>& policies,
                                       const PrivacyBudget& budget,
                                       const std::vector<KalmanDesign>& designs);

}  // namespace dpf

#endif  // DPF_KALMAN_DESIGN_HPP_
