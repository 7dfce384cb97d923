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

#include "dpf/filter.hpp"

#include <doctest.h>

#include "dpf/kalman_design.hpp"
#include "dpf/norms.hpp"
#include "dpf/traffic.hpp"
#include "oracles.hpp"

using namespace dpf;

TEST_CASE("zero filter leaves the plant output as the error") {
  std::mt19937 gen(3);
  const StateSpaceSystem plant = test::random_stable_system(gen);
  const Eigen::MatrixXd L = test::random_matrix(gen, 1, static_cast<int>(plant.state_dim()));
  const FilterRealization zero = FilterRealization::zero(
      plant.state_dim(), plant.output_dim(), 1);
  const StateSpaceSystem err = build_error_system(plant, L, zero);
  const StateSpaceSystem ref(plant.A, plant.B, L, Eigen::MatrixXd::Zero(1, plant.input_dim()));
  for (double w : {0.0, 0.7, 2.2, 3.1}) {
    CHECK((err.eval(w) - ref.eval(w)).norm() <= 1e-12);
  }
}

TEST_CASE("error-system H2 equals the Riccati mean squared error") {
  const ParticipantModel m = build_traffic_model(1.0, 1.0, 1.0);
  const KalmanDesign kd = design_participant_kalman(m, 0.0);

  // Predictor: error variance is L P L^T = 2.
  const StateSpaceSystem err_pred = build_error_system(m.system, m.L, kd.predictor);
  CHECK(h2_norm_sq(err_pred) == doctest::Approx(kd.mse_predictor).epsilon(1e-6));
  CHECK(kd.mse_predictor == doctest::Approx(2.0).epsilon(1e-9));

  // Current estimator: error variance is L P_filtered L^T = 1.
  const StateSpaceSystem err_curr = build_error_system(m.system, m.L, kd.current);
  CHECK(h2_norm_sq(err_curr) == doctest::Approx(kd.mse_current).epsilon(1e-6));
  CHECK(kd.mse_current == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("observer-form error system reduces to the single-state realization") {
  const ParticipantModel m = build_traffic_model(1.0, 1.0, 1.0);
  const KalmanDesign kd = design_participant_kalman(m, 0.0);
  const FilterRealization& f = kd.predictor;  // F = A - G C, H = L, K = 0
  const StateSpaceSystem full = build_error_system(m.system, m.L, f);
  const StateSpaceSystem reduced(f.F, m.system.B - f.G * m.system.D, m.L,
                                 Eigen::MatrixXd::Zero(1, m.system.input_dim()));
  for (int k = 1; k <= 16; ++k) {
    const double w = 3.14159265358979 * k / 17.0;  // avoid the plant pole at z = 1
    CHECK((full.eval(w) - reduced.eval(w)).norm() <= 1e-9);
  }
}

TEST_CASE("sensitivity system of the zero filter vanishes") {
  const FilterRealization zero = FilterRealization::zero(2, 1, 1);
  Eigen::MatrixXd C(1, 2);
  C << 1.0, 0.0;
  const StateSpaceSystem sens = build_sensitivity_system(zero, C, Eigen::MatrixXd::Identity(2, 2));
  CHECK(hinf_norm(sens) == doctest::Approx(0.0));
}

TEST_CASE("empty protection mask removes the input path") {
  const ParticipantModel m = build_traffic_model(1.0, 1.0, 1.0);
  const KalmanDesign kd = design_participant_kalman(m, 0.0);
  const StateSpaceSystem sens =
      build_sensitivity_system(kd.predictor, m.system.C, Eigen::MatrixXd::Zero(2, 2));
  CHECK(sens.B.norm() == 0.0);
  CHECK(hinf_norm(sens) == doctest::Approx(0.0));
}

TEST_CASE("traffic Kalman sensitivity peak") {
  const ParticipantModel m = build_traffic_model(1.0, 1.0, 1.0);
  const KalmanDesign kd = design_participant_kalman(m, 0.0);
  const Eigen::MatrixXd T = AdjacencyPolicy(100.0, {0}).selection_matrix(2);

  // Closed form for this model: the velocity-channel magnitude squared is
  // (1 - c) / (2 (c^2 - 1.875 c + 1.125)) at c = cos(w), maximized at
  // c = 1/2 with value 4/7. So the peak gain is 2/sqrt(7) and the channel
  // energy (H2 norm squared) is 1/3.
  const double peak = 2.0 / std::sqrt(7.0);
  const StateSpaceSystem sens_pred = build_sensitivity_system(kd.predictor, m.system.C, T);
  CHECK(hinf_norm(sens_pred) == doctest::Approx(peak).epsilon(1e-6));
  CHECK(test::hinf_sweep_oracle(sens_pred, 20001) == doctest::Approx(peak).epsilon(1e-6));
  CHECK(h2_norm_sq(sens_pred) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  // The current-estimator channel is z times the predictor channel, so the
  // peak magnitude is identical.
  const StateSpaceSystem sens_curr = build_sensitivity_system(kd.current, m.system.C, T);
  CHECK(hinf_norm(sens_curr) == doctest::Approx(peak).epsilon(1e-6));
}

TEST_CASE("dimension and mask validation") {
  const FilterRealization zero = FilterRealization::zero(2, 1, 1);
  Eigen::MatrixXd C(1, 2);
  C << 1.0, 0.0;
  CHECK_THROWS_AS(build_sensitivity_system(zero, C, Eigen::MatrixXd::Constant(2, 2, 0.5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_sensitivity_system(zero, Eigen::MatrixXd::Zero(2, 2),
                                           Eigen::MatrixXd::Identity(2, 2)),
                  std::invalid_argument);

  const ParticipantModel m = build_traffic_model(1.0, 1.0, 1.0);
  CHECK_THROWS_AS(build_error_system(m.system, Eigen::MatrixXd::Zero(1, 3), zero),
                  std::invalid_argument);
}
