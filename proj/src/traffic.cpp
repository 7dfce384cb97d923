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

#include "dpf/traffic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "dpf/norms.hpp"
#include "dpf/rng.hpp"
#include "dpf/synthesis.hpp"

namespace dpf {

namespace {

// Stream tags for the counter-based generator; trajectories get one stream
// per participant, scheme noises are independent of them and of each other.
constexpr uint32_t kTagTrajectory = 0;
constexpr uint32_t kTagNaiveNoise = 1;
constexpr uint32_t kTagCompNoise = 2;
constexpr uint32_t kTagOutputKalman = 3;
constexpr uint32_t kTagOutputSynth = 4;
constexpr int kStreamStride = 8;

uint32_t stream_id(uint32_t tag, uint32_t participant) {
  return tag + kStreamStride * participant;
}

constexpr int kSettleWindow = 20;

struct SchemeRuntime {
  Scheme scheme;
  bool ok = false;
  std::string error;
  // Single filter applied to the averaged measurement (all participants are
  // identical, so averaging commutes with the filter bank).
  Eigen::Matrix2d F = Eigen::Matrix2d::Zero();
  Eigen::Vector2d G = Eigen::Vector2d::Zero();
  bool input_noise = false;     // add per-participant noise to measurements
  uint32_t noise_tag = 0;
  double input_noise_std = 0.0;   // per participant, m
  double output_noise_std = 0.0;  // on the released average, SI
  double predicted_mse = 0.0;     // aggregate, SI
  double gamma = 0.0;
  double gamma_current = 0.0;
};

void format_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

void SimulationConfig::validate() const {
  if (n_participants < 1) throw std::invalid_argument("config: n_participants must be >= 1");
  if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (!(T_s > 0.0)) throw std::invalid_argument("config: T_s must be positive");
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
    throw std::invalid_argument("config: sigma1 and sigma2 must be positive");
  if (!(rho >= 0.0)) throw std::invalid_argument("config: rho must be nonnegative");
  if (!(epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be positive");
  if (!(delta > 0.0 && delta <= 0.5))
    throw std::invalid_argument("config: delta must lie in (0, 0.5]");
  if (schemes.empty()) throw std::invalid_argument("config: schemes must be nonempty");
  if (!(init_position_std >= 0.0) || !(init_velocity_std >= 0.0))
    throw std::invalid_argument("config: initial-condition spreads must be nonnegative");
  if (!(synth_cap_margin >= 0.0))
    throw std::invalid_argument("config: synth_cap_margin must be nonnegative");
  if (threads < 0) throw std::invalid_argument("config: threads must be nonnegative");
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "naive-input") return Scheme::kNaiveInput;
  if (name == "compensated-input") return Scheme::kCompensatedInput;
  if (name == "output-kalman") return Scheme::kOutputKalman;
  if (name == "output-synthesized") return Scheme::kOutputSynthesized;
  throw std::invalid_argument("config: unknown scheme '" + name + "'");
}

SimulationConfig parse_simulation_config(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  SimulationConfig cfg;
  const auto get_num = [&](const char* key, auto& slot) {
    if (!j.contains(key)) return;
    if (!j[key].is_number())
      throw std::invalid_argument(std::string("config: field '") + key + "' must be numeric");
    slot = j[key].get<std::decay_t<decltype(slot)>>();
  };
  get_num("n_participants", cfg.n_participants);
  get_num("horizon", cfg.horizon);
  get_num("trials", cfg.trials);
  get_num("seed", cfg.seed);
  get_num("T_s", cfg.T_s);
  get_num("sigma1", cfg.sigma1);
  get_num("sigma2", cfg.sigma2);
  get_num("rho", cfg.rho);
  get_num("epsilon", cfg.epsilon);
  get_num("delta", cfg.delta);
  get_num("mean_initial_velocity", cfg.mean_initial_velocity);
  get_num("filter_init_velocity", cfg.filter_init_velocity);
  get_num("init_position_std", cfg.init_position_std);
  get_num("init_velocity_std", cfg.init_velocity_std);
  get_num("synth_cap_margin", cfg.synth_cap_margin);
  get_num("threads", cfg.threads);
  if (j.contains("schemes")) {
    if (!j["schemes"].is_array())
      throw std::invalid_argument("config: field 'schemes' must be an array of names");
    cfg.schemes.clear();
    for (const auto& s : j["schemes"]) {
      if (!s.is_string())
        throw std::invalid_argument("config: field 'schemes' must contain strings");
      cfg.schemes.push_back(scheme_from_name(s.get<std::string>()));
    }
  }
  static const char* known[] = {"n_participants", "horizon", "trials", "seed", "T_s",
                                "sigma1", "sigma2", "rho", "epsilon", "delta",
                                "mean_initial_velocity", "filter_init_velocity",
                                "init_position_std", "init_velocity_std",
                                "synth_cap_margin", "threads", "schemes"};
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (const char* k : known) found |= (key == k);
    if (!found) throw std::invalid_argument("config: unknown field '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

ParticipantModel build_traffic_model(double T_s, double sigma1, double sigma2) {
  if (!(T_s > 0.0) || !(sigma1 > 0.0) || !(sigma2 > 0.0))
    throw std::invalid_argument("build_traffic_model: T_s, sigma1, sigma2 must be positive");
  Eigen::MatrixXd A(2, 2), B(2, 2), C(1, 2), D(1, 2), L(1, 2);
  A << 1.0, T_s, 0.0, 1.0;
  B << sigma1 * T_s * T_s / 2.0, 0.0, sigma1 * T_s, 0.0;
  C << 1.0, 0.0;
  D << 0.0, sigma2;
  L << 0.0, 1.0;
  return ParticipantModel(StateSpaceSystem(A, B, C, D), L, Eigen::VectorXd::Zero(2));
}

namespace {

std::vector<SchemeRuntime> prepare_schemes(const SimulationConfig& cfg,
                                           const ParticipantModel& participant,
                                           const PrivacyBudget& budget,
                                           const AdjacencyPolicy& policy, double* no_privacy_mse) {
  const double n = static_cast<double>(cfg.n_participants);
  const KalmanDesign clean = design_participant_kalman(participant, 0.0);
  *no_privacy_mse = clean.mse_predictor / n;

  std::vector<SchemeRuntime> out;
  for (Scheme s : cfg.schemes) {
    SchemeRuntime rt;
    rt.scheme = s;
    try {
      switch (s) {
        case Scheme::kNaiveInput:
        case Scheme::kCompensatedInput: {
          const InputPerturbationPlans plans =
              input_perturbation_plan({participant}, {policy}, budget);
          const MechanismPlan& plan =
              (s == Scheme::kNaiveInput) ? plans.naive : plans.compensated;
          rt.input_noise = true;
          rt.noise_tag = (s == Scheme::kNaiveInput) ? kTagNaiveNoise : kTagCompNoise;
          rt.input_noise_std = plan.input_noise_std[0];
          rt.F = plan.filters[0].F;
          rt.G = plan.filters[0].G;
          rt.predicted_mse = plan.predicted_mse / n;
          break;
        }
        case Scheme::kOutputKalman: {
          const MechanismPlan plan =
              output_perturbation_plan({participant}, {policy}, budget, {clean});
          rt.noise_tag = kTagOutputKalman;
          rt.F = plan.filters[0].F;
          rt.G = plan.filters[0].G;
          rt.gamma = plan.gamma_predictor[0];
          rt.gamma_current = plan.gamma_current[0];
          // Aggregate: estimation error scales 1/n, the released-noise std
          // scales 1/n through L_i = [0, 1/n].
          const double est = plan.predicted_mse - plan.output_noise_std * plan.output_noise_std;
          rt.output_noise_std = plan.output_noise_std / n;
          rt.predicted_mse = est / n + rt.output_noise_std * rt.output_noise_std;
          break;
        }
        case Scheme::kOutputSynthesized: {
          SynthesisOptions opt;
          opt.auto_cap = true;
          opt.auto_cap_margin = cfg.synth_cap_margin;
          const SynthesisResult synth =
              synth_unstable(participant.system, participant.L, policy, budget, opt);
          if (synth.solver_status != SdpSolution::Status::kOptimal &&
              synth.solver_status != SdpSolution::Status::kStalled)
            throw std::runtime_error("synthesis infeasible or failed");
          rt.noise_tag = kTagOutputSynth;
          rt.F = synth.filter.F;
          rt.G = synth.filter.G;
          rt.gamma = synth.verified.hinf;
          {
            // Current-estimator reading of the same observer filter.
            const Eigen::MatrixXd T = policy.selection_matrix(2);
            FilterRealization curr(synth.filter.F, synth.filter.G,
                                   participant.L * synth.filter.F,
                                   participant.L * synth.filter.G);
            rt.gamma_current = hinf_norm(build_sensitivity_system(curr, participant.system.C, T));
          }
          rt.output_noise_std = budget.kappa() * rt.gamma * policy.rho / n;
          rt.predicted_mse =
              synth.verified.h2_sq / n + rt.output_noise_std * rt.output_noise_std;
          break;
        }
      }
      rt.ok = true;
    } catch (const std::exception& e) {
      rt.ok = false;
      rt.error = e.what();
    }
    out.push_back(std::move(rt));
  }
  return out;
}

}  // namespace

SimulationResult run_simulation(const SimulationConfig& cfg) {
  cfg.validate();
  SimulationResult result;
  result.config = cfg;
  result.schemes = cfg.schemes;

  const ParticipantModel participant = build_traffic_model(cfg.T_s, cfg.sigma1, cfg.sigma2);
  const PrivacyBudget budget(cfg.epsilon, cfg.delta);
  result.kappa = budget.kappa();
  const AdjacencyPolicy policy(cfg.rho, {0});

  std::vector<SchemeRuntime> schemes =
      prepare_schemes(cfg, participant, budget, policy, &result.no_privacy_mse);

  const int n = cfg.n_participants;
  const int H = cfg.horizon;
  const int S = static_cast<int>(schemes.size());
  const double inv_n = 1.0 / n;
  const Eigen::Matrix2d A = participant.system.A;
  const Eigen::Matrix2d B = participant.system.B;
  const Eigen::RowVector2d C = participant.system.C;
  const Eigen::RowVector2d D = participant.system.D;
  const double v_mean = kmh_to_ms(cfg.mean_initial_velocity);
  const double v_std = kmh_to_ms(cfg.init_velocity_std);
  const double p_std = cfg.init_position_std;
  const double v_filter0 = kmh_to_ms(cfg.filter_init_velocity);

  result.traces.assign(cfg.trials, Eigen::MatrixXd::Zero(H, 1 + S));
  // Per-trial steady-state squared-error means (SI), one entry per scheme.
  std::vector<Eigen::VectorXd> trial_mse(cfg.trials, Eigen::VectorXd::Zero(S));
  const int t0 = H / 2;  // steady-state window: last half of the horizon

  const auto run_trial = [&](int trial) {
    const uint32_t tr = static_cast<uint32_t>(trial);
    Eigen::MatrixXd& trace = result.traces[trial];

    // Vehicle pass: accumulate the true average velocity and the averaged
    // clean measurement; scheme noises are averaged separately so schemes
    // share identical vehicle trajectories (common random numbers).
    Eigen::VectorXd z_true = Eigen::VectorXd::Zero(H);
    Eigen::VectorXd y_avg = Eigen::VectorXd::Zero(H);
    for (int i = 0; i < n; ++i) {
      const rng::StreamId sid{tr, stream_id(kTagTrajectory, static_cast<uint32_t>(i))};
      Eigen::Vector2d x(p_std * rng::normal(cfg.seed, sid, 0),
                        v_mean + v_std * rng::normal(cfg.seed, sid, 1));
      for (int t = 0; t < H; ++t) {
        const Eigen::Vector2d w(rng::normal(cfg.seed, sid, 2 + 2 * static_cast<uint64_t>(t)),
                                rng::normal(cfg.seed, sid, 3 + 2 * static_cast<uint64_t>(t)));
        z_true(t) += x(1);
        y_avg(t) += C.dot(x) + D.dot(w);
        x = A * x + B * w;
      }
    }
    z_true *= inv_n;
    y_avg *= inv_n;
    for (int t = 0; t < H; ++t) trace(t, 0) = ms_to_kmh(z_true(t));

    for (int si = 0; si < S; ++si) {
      const SchemeRuntime& rt = schemes[si];
      if (!rt.ok) {
        trace.col(1 + si).setConstant(std::nan(""));
        continue;
      }
      // Averaged per-participant privacy noise (input schemes only).
      Eigen::VectorXd y_noise = Eigen::VectorXd::Zero(H);
      if (rt.input_noise && rt.input_noise_std > 0.0) {
        for (int i = 0; i < n; ++i) {
          const rng::StreamId sid{tr, stream_id(rt.noise_tag, static_cast<uint32_t>(i))};
          for (int t = 0; t < H; ++t)
            y_noise(t) += rng::normal(cfg.seed, sid, static_cast<uint64_t>(t));
        }
        y_noise *= rt.input_noise_std * inv_n;
      }

      const rng::StreamId out_sid{tr, stream_id(rt.noise_tag, 0)};
      Eigen::Vector2d xf(0.0, v_filter0);
      double acc = 0.0;
      for (int t = 0; t < H; ++t) {
        double zhat = xf(1);  // predictor convention: uses y up to t-1
        if (!rt.input_noise && rt.output_noise_std > 0.0) {
          zhat += rt.output_noise_std * rng::normal(cfg.seed, out_sid, static_cast<uint64_t>(t));
        }
        trace(t, 1 + si) = ms_to_kmh(zhat);
        const double err = zhat - z_true(t);
        if (t >= t0) acc += err * err;
        const double y = y_avg(t) + y_noise(t);
        xf = rt.F * xf + rt.G * y;
      }
      trial_mse[trial](si) = acc / (H - t0);
    }
  };

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const int nthreads =
      std::max(1, std::min<int>(cfg.threads > 0 ? cfg.threads : static_cast<int>(hw), cfg.trials));
  if (nthreads == 1) {
    for (int trial = 0; trial < cfg.trials; ++trial) run_trial(trial);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int k = 0; k < nthreads; ++k) {
      pool.emplace_back([&] {
        for (int trial = next.fetch_add(1); trial < cfg.trials; trial = next.fetch_add(1))
          run_trial(trial);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Aggregation in fixed trial order.
  for (int si = 0; si < S; ++si) {
    SchemeStats st;
    st.scheme = schemes[si].scheme;
    st.ok = schemes[si].ok;
    st.error = schemes[si].error;
    st.predicted_mse = schemes[si].predicted_mse;
    st.predicted_rmse_kmh = ms_to_kmh(std::sqrt(std::max(0.0, schemes[si].predicted_mse)));
    st.gamma = schemes[si].gamma;
    st.gamma_current = schemes[si].gamma_current;
    st.gamma_sq = schemes[si].gamma * schemes[si].gamma;
    st.input_noise_std = schemes[si].input_noise_std;
    st.output_noise_std = schemes[si].output_noise_std;
    if (st.ok) {
      double mean = 0.0;
      for (int trial = 0; trial < cfg.trials; ++trial) mean += trial_mse[trial](si);
      mean /= cfg.trials;
      double var = 0.0;
      for (int trial = 0; trial < cfg.trials; ++trial) {
        const double d = trial_mse[trial](si) - mean;
        var += d * d;
      }
      var = (cfg.trials > 1) ? var / (cfg.trials - 1) : 0.0;
      st.mse = mean;
      st.mse_stderr = std::sqrt(var / cfg.trials);
      st.rmse_kmh = ms_to_kmh(std::sqrt(mean));
      st.rmse_stderr_kmh =
          (mean > 0.0) ? ms_to_kmh(st.mse_stderr / (2.0 * std::sqrt(mean))) : 0.0;
    }
    result.stats.push_back(std::move(st));
  }

  const std::vector<SettlingReport> settling = convergence_report(result);
  for (int si = 0; si < S; ++si) {
    result.stats[si].settling_mean_steps = settling[si].mean_steps;
    result.stats[si].settling_censored = settling[si].censored_trials;
  }
  return result;
}

std::vector<SettlingReport> convergence_report(const SimulationResult& result) {
  const int S = static_cast<int>(result.schemes.size());
  const int H = result.config.horizon;
  std::vector<SettlingReport> out;
  for (int si = 0; si < S; ++si) {
    SettlingReport rep;
    rep.scheme = result.schemes[si];
    if (!result.stats[si].ok) {
      rep.mean_steps = static_cast<double>(H);
      rep.censored_trials = result.config.trials;
      out.push_back(rep);
      continue;
    }
    const double threshold = 2.0 * kmh_to_ms(result.stats[si].rmse_kmh);
    double total = 0.0;
    for (const Eigen::MatrixXd& trace : result.traces) {
      int settle = H;  // censored
      int run = 0;
      for (int t = 0; t < H; ++t) {
        const double err =
            std::abs(kmh_to_ms(trace(t, 1 + si)) - kmh_to_ms(trace(t, 0)));
        run = (err < threshold) ? run + 1 : 0;
        if (run >= kSettleWindow) {
          settle = t - kSettleWindow + 1;
          break;
        }
      }
      if (settle >= H) ++rep.censored_trials;
      total += std::min(settle, H);
    }
    rep.mean_steps = total / result.config.trials;
    out.push_back(rep);
  }
  return out;
}

void write_traces_csv(const SimulationResult& result, std::ostream& os) {
  std::string line = "trial,t,z_true";
  for (Scheme s : result.schemes) {
    line += ",";
    line += scheme_name(s);
  }
  line += "\n";
  os << line;
  const int H = result.config.horizon;
  for (int trial = 0; trial < result.config.trials; ++trial) {
    const Eigen::MatrixXd& trace = result.traces[trial];
    for (int t = 0; t < H; ++t) {
      line.clear();
      line += std::to_string(trial);
      line += ",";
      line += std::to_string(t);
      for (int c = 0; c < trace.cols(); ++c) {
        line += ",";
        format_double(line, trace(t, c));
      }
      line += "\n";
      os << line;
    }
  }
}

void write_summary_json(const SimulationResult& result, std::ostream& os) {
  std::string out = "{\n";
  out += "  \"kappa\": ";
  format_double(out, result.kappa);
  out += ",\n  \"seed\": " + std::to_string(result.config.seed);
  out += ",\n  \"trials\": " + std::to_string(result.config.trials);
  out += ",\n  \"horizon\": " + std::to_string(result.config.horizon);
  out += ",\n  \"n_participants\": " + std::to_string(result.config.n_participants);
  out += ",\n  \"no_privacy_mse\": ";
  format_double(out, result.no_privacy_mse);
  out += ",\n  \"schemes\": {";
  for (size_t si = 0; si < result.stats.size(); ++si) {
    const SchemeStats& st = result.stats[si];
    out += (si == 0) ? "\n" : ",\n";
    out += "    \"";
    out += scheme_name(st.scheme);
    out += "\": {";
    if (!st.ok) {
      out += "\"error\": \"" + st.error + "\"}";
      continue;
    }
    const auto field = [&](const char* name, double v, bool last = false) {
      out += "\n      \"";
      out += name;
      out += "\": ";
      format_double(out, v);
      if (!last) out += ",";
    };
    field("rmse_kmh", st.rmse_kmh);
    field("rmse_stderr_kmh", st.rmse_stderr_kmh);
    field("mse", st.mse);
    field("mse_stderr", st.mse_stderr);
    field("predicted_mse", st.predicted_mse);
    field("predicted_rmse_kmh", st.predicted_rmse_kmh);
    field("settling_time_steps", st.settling_mean_steps);
    out += "\n      \"settling_censored_trials\": " + std::to_string(st.settling_censored) + ",";
    field("gamma", st.gamma);
    field("gamma_current", st.gamma_current);
    field("gamma_sq", st.gamma_sq);
    field("input_noise_std", st.input_noise_std);
    field("output_noise_std", st.output_noise_std, /*last=*/true);
    out += "\n    }";
  }
  out += "\n  }\n}\n";
  os << out;
}

}  // namespace dpf
