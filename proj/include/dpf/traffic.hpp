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

#ifndef DPF_TRAFFIC_HPP_
#define DPF_TRAFFIC_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dpf/kalman_design.hpp"

namespace dpf {

constexpr double kKmhPerMs = 3.6;
inline double ms_to_kmh(double v) { return v * kKmhPerMs; }
inline double kmh_to_ms(double v) { return v / kKmhPerMs; }

/// Monte Carlo experiment description. Velocities are km/h, lengths meters,
/// the sampling period seconds; everything is converted to SI internally.
struct SimulationConfig {
  int n_participants = 200;
  int horizon = 600;
  int trials = 50;
  uint64_t seed = 1;
  double T_s = 1.0;
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double rho = 100.0;                     // meters
  double epsilon = 1.0986122886681098;    // ln 3
  double delta = 0.05;
  double mean_initial_velocity = 45.0;    // km/h
  std::vector<Scheme> schemes = {Scheme::kNaiveInput, Scheme::kCompensatedInput,
                                 Scheme::kOutputKalman, Scheme::kOutputSynthesized};
  double filter_init_velocity = 0.0;      // km/h (deliberate mis-initialization)
  double init_position_std = 50.0;        // m
  double init_velocity_std = 5.0;         // km/h
  double synth_cap_margin = 1.0;          // sensitivity cap = (1+margin) * floor
  int threads = 0;                        // 0 => hardware concurrency

  void validate() const;
};

/// Parses the JSON mirror of SimulationConfig; unknown or ill-typed fields
/// raise std::invalid_argument naming the field.
SimulationConfig parse_simulation_config(const std::string& json_text);

/// Double-integrator vehicle: position/velocity state driven by white
/// acceleration noise, GPS position measurements. L = [0, 1] (velocity);
/// the 1/n averaging weight is applied at aggregation. The protected
/// coordinate is the position.
ParticipantModel build_traffic_model(double T_s, double sigma1, double sigma2);

struct SchemeStats {
  Scheme scheme = Scheme::kNaiveInput;
  bool ok = false;
  std::string error;
  double mse = 0.0;          // empirical steady-state MSE, SI
  double mse_stderr = 0.0;   // standard error over trials
  double rmse_kmh = 0.0;
  double rmse_stderr_kmh = 0.0;
  double predicted_mse = 0.0;  // SI, from the mechanism plan
  double predicted_rmse_kmh = 0.0;
  double settling_mean_steps = 0.0;  // censored trials count as `horizon`
  int settling_censored = 0;
  double gamma = 0.0;          // predictor-convention sensitivity (output schemes)
  double gamma_current = 0.0;  // current-estimator convention
  double gamma_sq = 0.0;       // square of `gamma`
  double input_noise_std = 0.0;   // per-participant (input schemes), m
  double output_noise_std = 0.0;  // released-signal noise std, SI
};

struct SimulationResult {
  SimulationConfig config;
  double kappa = 0.0;
  double no_privacy_mse = 0.0;  // predictor-convention estimation floor, SI
  std::vector<Scheme> schemes;
  /// One matrix per trial: horizon rows, first column true average velocity,
  /// then one column per scheme; all km/h.
  std::vector<Eigen::MatrixXd> traces;
  std::vector<SchemeStats> stats;
};

/// Runs the Monte Carlo experiment. Deterministic for a fixed seed: all
/// randomness is drawn from counter-based streams addressed by
/// (trial, stream, index), so the thread count never changes the output.
SimulationResult run_simulation(const SimulationConfig& config);

struct SettlingReport {
  Scheme scheme;
  double mean_steps = 0.0;
  int censored_trials = 0;
};

/// Settling time per scheme: first step after which the released estimate
/// stays within twice the scheme's steady-state RMSE of the truth for 20
/// consecutive steps. Trials that never settle are censored at `horizon`.
std::vector<SettlingReport> convergence_report(const SimulationResult& result);

void write_traces_csv(const SimulationResult& result, std::ostream& os);
void write_summary_json(const SimulationResult& result, std::ostream& os);

Scheme scheme_from_name(const std::string& name);

}  // namespace dpf

#endif  // DPF_TRAFFIC_HPP_
