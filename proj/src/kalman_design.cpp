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

#include "dpf/kalman_design.hpp"

#include <cmath>
#include <stdexcept>

#include "dpf/lyapunov.hpp"
#include "dpf/norms.hpp"

namespace dpf {

namespace {

double sigma_max(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

}  // namespace

ParticipantModel::ParticipantModel(StateSpaceSystem sys, Eigen::MatrixXd L_in,
                                   Eigen::VectorXd x0)
    : system(std::move(sys)), L(std::move(L_in)), x0_mean(std::move(x0)) {
  if (L.cols() != system.state_dim())
    throw std::invalid_argument("ParticipantModel: L must have state_dim columns");
  if (x0_mean.size() != system.state_dim())
    throw std::invalid_argument("ParticipantModel: x0_mean must have state_dim entries");
  const Eigen::MatrixXd& D = system.D;
  if (D.rows() > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
    const auto& sv = svd.singularValues();
    if (D.rows() > D.cols() || sv(sv.size() - 1) <= 1e-10 * std::max(1.0, sv(0)))
      throw std::invalid_argument("ParticipantModel: D must be full row rank");
  }
  if (!is_detectable(system.A, system.C))
    throw std::invalid_argument("ParticipantModel: (A, C) must be detectable");
  if (!is_stabilizable(system.A, system.B))
    throw std::invalid_argument("ParticipantModel: (A, B) must be stabilizable");
}

KalmanDesign design_participant_kalman(const ParticipantModel& participant,
                                       double extra_meas_noise_std) {
  if (!(extra_meas_noise_std >= 0.0))
    throw std::domain_error("design_participant_kalman: extra noise std must be nonnegative");
  const StateSpaceSystem& s = participant.system;
  const Eigen::Index ny = s.output_dim();
  const Eigen::MatrixXd Q = s.B * s.B.transpose();
  const Eigen::MatrixXd R =
      s.D * s.D.transpose() +
      extra_meas_noise_std * extra_meas_noise_std * Eigen::MatrixXd::Identity(ny, ny);
  const Eigen::MatrixXd S = s.B * s.D.transpose();

  RiccatiSolution rs = solve_dare(s.A, s.C, Q, R, S);
  const Eigen::MatrixXd& L = participant.L;
  const Eigen::Index nz = L.rows();

  // Predictor: zf_t = L xhat_{t|t-1}.
  FilterRealization predictor(s.A - rs.gain * s.C, rs.gain, L,
                              Eigen::MatrixXd::Zero(nz, ny));
  // Current estimator on the same predictor state:
  // xhat_{t|t} = (I - Kf C) xhat_{t|t-1} + Kf y_t.
  const Eigen::MatrixXd IKC =
      Eigen::MatrixXd::Identity(s.state_dim(), s.state_dim()) - rs.gain_filtered * s.C;
  FilterRealization current(s.A - rs.gain * s.C, rs.gain, L * IKC, L * rs.gain_filtered);

  KalmanDesign out{std::move(predictor), std::move(current), std::move(rs)};
  out.mse_predictor = (L * out.riccati.P * L.transpose()).trace();
  out.mse_current = (L * out.riccati.P_filtered * L.transpose()).trace();
  return out;
}

KalmanPlan design_kalman(const std::vector<ParticipantModel>& participants,
                         const std::vector<double>& extra_meas_noise_std) {
  if (participants.empty()) throw std::invalid_argument("design_kalman: no participants");
  if (extra_meas_noise_std.size() != participants.size())
    throw std::invalid_argument("design_kalman: one extra-noise entry per participant required");
  KalmanPlan plan;
  for (size_t i = 0; i < participants.size(); ++i) {
    plan.designs.push_back(design_participant_kalman(participants[i], extra_meas_noise_std[i]));
    plan.predicted_mse += plan.designs.back().mse_predictor;
    plan.predicted_mse_current += plan.designs.back().mse_current;
  }
  return plan;
}

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kNaiveInput:
      return "naive-input";
    case Scheme::kCompensatedInput:
      return "compensated-input";
    case Scheme::kOutputKalman:
      return "output-kalman";
    case Scheme::kOutputSynthesized:
      return "output-synthesized";
  }
  return "unknown";
}

InputPerturbationPlans input_perturbation_plan(const std::vector<ParticipantModel>& participants,
                                               const std::vector<AdjacencyPolicy>& policies,
                                               const PrivacyBudget& budget) {
  if (participants.size() != policies.size())
    throw std::invalid_argument("input_perturbation_plan: one policy per participant required");

  std::vector<double> noise_std(participants.size());
  for (size_t i = 0; i < participants.size(); ++i) {
    const auto& s = participants[i].system;
    const Eigen::MatrixXd T = policies[i].selection_matrix(s.state_dim());
    noise_std[i] = budget.kappa() * policies[i].rho * sigma_max(s.C * T);
  }

  InputPerturbationPlans out{MechanismPlan{Scheme::kNaiveInput},
                             MechanismPlan{Scheme::kCompensatedInput}};
  out.naive.input_noise_std = noise_std;
  out.compensated.input_noise_std = noise_std;

  for (size_t i = 0; i < participants.size(); ++i) {
    const auto& s = participants[i].system;
    const Eigen::MatrixXd& L = participants[i].L;

    // Naive: filter designed for the clean model, evaluated under the true
    // (privacy-inflated) measurement noise through the closed error
    // dynamics e+ = (A - Kp C) e + (B - Kp D) w - sigma Kp nu.
    KalmanDesign clean = design_participant_kalman(participants[i], 0.0);
    const Eigen::MatrixXd& Kp = clean.riccati.gain;
    const Eigen::MatrixXd BKD = s.B - Kp * s.D;
    const Eigen::MatrixXd N =
        BKD * BKD.transpose() + noise_std[i] * noise_std[i] * Kp * Kp.transpose();
    const Eigen::MatrixXd Sig = solve_discrete_lyapunov(s.A - Kp * s.C, N);
    out.naive.predicted_mse += (L * Sig * L.transpose()).trace();
    out.naive.filters.push_back(clean.predictor);

    KalmanDesign comp = design_participant_kalman(participants[i], noise_std[i]);
    out.compensated.predicted_mse += comp.mse_predictor;
    out.compensated.filters.push_back(comp.predictor);
  }
  return out;
}

MechanismPlan output_perturbation_plan(const std::vector<ParticipantModel>& participants,
                                       const std::vector<AdjacencyPolicy>& policies,
                                       const PrivacyBudget& budget,
                                       const std::vector<KalmanDesign>& designs) {
  if (participants.size() != policies.size() || participants.size() != designs.size())
    throw std::invalid_argument("output_perturbation_plan: participant/policy/design mismatch");

  MechanismPlan plan{Scheme::kOutputKalman};
  double weighted = 0.0;
  for (size_t i = 0; i < participants.size(); ++i) {
    const auto& s = participants[i].system;
    if (!is_schur_stable(designs[i].predictor.F))
      throw std::domain_error("output_perturbation_plan: filter must be Schur stable");
    const Eigen::MatrixXd T = policies[i].selection_matrix(s.state_dim());
    const double g_pred = hinf_norm(build_sensitivity_system(designs[i].predictor, s.C, T));
    const double g_curr = hinf_norm(build_sensitivity_system(designs[i].current, s.C, T));
    plan.gamma_predictor.push_back(g_pred);
    plan.gamma_current.push_back(g_curr);
    weighted = std::max(weighted, g_pred * policies[i].rho);
    plan.filters.push_back(designs[i].predictor);
    plan.predicted_mse +=
        h2_norm_sq(build_error_system(s, participants[i].L, designs[i].predictor));
  }
  plan.gamma_weighted = weighted;
  plan.output_noise_std = budget.kappa() * weighted;
  plan.predicted_mse += plan.output_noise_std * plan.output_noise_std;
  return plan;
}

}  // namespace dpf
