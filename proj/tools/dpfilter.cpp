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
//
// Command-line front end: privacy calibration, system norms, Kalman design,
// privacy-aware filter synthesis, the traffic Monte Carlo experiment and the
// scalar mechanism verifier. Subcommands read JSON configs and write CSV
// traces plus a JSON summary; exit codes are 0 (success), 1 (validation
// error), 2 (numerical failure).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dpf/bounded_real.hpp"
#include "dpf/kalman_design.hpp"
#include "dpf/norms.hpp"
#include "dpf/privacy.hpp"
#include "dpf/synthesis.hpp"
#include "dpf/traffic.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  in >> j;  // parse errors carry byte/line diagnostics
  return j;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& field) {
  if (!j.contains(field)) throw std::invalid_argument("config: missing field '" + field + "'");
  const json& m = j[field];
  if (!m.is_array() || m.empty() || !m[0].is_array())
    throw std::invalid_argument("config: field '" + field + "' must be a matrix (array of rows)");
  const size_t rows = m.size();
  const size_t cols = m[0].size();
  Eigen::MatrixXd M(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (!m[r].is_array() || m[r].size() != cols)
      throw std::invalid_argument("config: field '" + field + "' has ragged rows");
    for (size_t c = 0; c < cols; ++c) {
      if (!m[r][c].is_number())
        throw std::invalid_argument("config: field '" + field + "' must be numeric");
      M(r, c) = m[r][c].get<double>();
    }
  }
  return M;
}

dpf::StateSpaceSystem system_from_json(const json& j) {
  return dpf::StateSpaceSystem(matrix_from_json(j, "A"), matrix_from_json(j, "B"),
                               matrix_from_json(j, "C"), matrix_from_json(j, "D"));
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(row);
  }
  return rows;
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream os(out_path);
    if (!os) throw std::invalid_argument("cannot write output file: " + out_path);
    os << j.dump(2) << "\n";
  }
}

int cmd_calibrate(double epsilon, double delta, double sensitivity, const std::string& out) {
  const dpf::PrivacyBudget budget(epsilon, delta);
  json j;
  j["epsilon"] = epsilon;
  j["delta"] = delta;
  j["kappa"] = budget.kappa();
  j["sensitivity"] = sensitivity;
  j["sigma"] = dpf::gaussian_sigma(sensitivity, budget);
  emit(j, out);
  return kExitOk;
}

int cmd_verify_dp(double sigma, double sensitivity, double epsilon, double delta,
                  const std::string& out) {
  const dpf::PrivacyBudget budget(epsilon, delta);
  const double margin = dpf::verify_dp_scalar(sigma, sensitivity, budget);
  json j;
  j["sigma"] = sigma;
  j["sensitivity"] = sensitivity;
  j["margin"] = margin;
  j["certified_half_line_family"] = margin >= 0.0;
  emit(j, out);
  return kExitOk;
}

int cmd_norms(const std::string& config, const std::string& out) {
  const json cfg = read_config(config);
  const dpf::StateSpaceSystem sys = system_from_json(cfg);
  json j;
  j["spectral_radius"] = dpf::spectral_radius(sys.A);
  j["h2"] = dpf::h2_norm(sys);
  j["hinf"] = dpf::hinf_norm(sys);
  j["hinf_certified"] = dpf::hinf_norm_bisection(sys);
  emit(j, out);
  return kExitOk;
}

dpf::ParticipantModel participant_from_json(const json& j) {
  const dpf::StateSpaceSystem sys = system_from_json(j);
  const Eigen::MatrixXd L = matrix_from_json(j, "L");
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(sys.state_dim());
  if (j.contains("x0_mean")) {
    const Eigen::MatrixXd m = matrix_from_json(j, "x0_mean");
    x0 = m.reshaped();
  }
  return dpf::ParticipantModel(sys, L, x0);
}

int cmd_kalman(const std::string& config, const std::string& out) {
  const json cfg = read_config(config);
  if (!cfg.contains("participants") || !cfg["participants"].is_array() ||
      cfg["participants"].empty())
    throw std::invalid_argument("config: field 'participants' must be a nonempty array");
  std::vector<dpf::ParticipantModel> parts;
  for (const auto& p : cfg["participants"]) parts.push_back(participant_from_json(p));
  std::vector<double> extra(parts.size(), 0.0);
  if (cfg.contains("extra_meas_noise_std")) {
    const auto& e = cfg["extra_meas_noise_std"];
    if (!e.is_array() || e.size() != parts.size())
      throw std::invalid_argument(
          "config: 'extra_meas_noise_std' needs one entry per participant");
    for (size_t i = 0; i < parts.size(); ++i) extra[i] = e[i].get<double>();
  }
  const dpf::KalmanPlan plan = dpf::design_kalman(parts, extra);
  json j;
  j["predicted_mse"] = plan.predicted_mse;
  j["predicted_mse_current"] = plan.predicted_mse_current;
  json filters = json::array();
  for (const auto& d : plan.designs) {
    json f;
    f["F"] = matrix_to_json(d.predictor.F);
    f["G"] = matrix_to_json(d.predictor.G);
    f["H"] = matrix_to_json(d.predictor.H);
    f["K"] = matrix_to_json(d.predictor.K);
    f["mse_predictor"] = d.mse_predictor;
    f["mse_current"] = d.mse_current;
    filters.push_back(f);
  }
  j["filters"] = filters;
  emit(j, out);
  return kExitOk;
}

int cmd_synth(const std::string& config, const std::string& out, const std::string& dump_sdp) {
  const json cfg = read_config(config);
  const dpf::StateSpaceSystem sys = system_from_json(cfg);
  const Eigen::MatrixXd L = matrix_from_json(cfg, "L");
  if (!cfg.contains("rho")) throw std::invalid_argument("config: missing field 'rho'");
  std::vector<int> coords;
  if (cfg.contains("protected_coords")) {
    for (const auto& c : cfg["protected_coords"]) coords.push_back(c.get<int>());
  } else {
    for (Eigen::Index i = 0; i < sys.state_dim(); ++i) coords.push_back(static_cast<int>(i));
  }
  const dpf::AdjacencyPolicy policy(cfg["rho"].get<double>(), coords);
  const dpf::PrivacyBudget budget(cfg.value("epsilon", 1.0), cfg.value("delta", 0.05));

  dpf::SynthesisOptions opt;
  if (cfg.contains("lambda_cap")) opt.lambda_cap = cfg["lambda_cap"].get<double>();
  if (cfg.contains("auto_cap_margin")) {
    opt.auto_cap = true;
    opt.auto_cap_margin = cfg["auto_cap_margin"].get<double>();
  }
  opt.feedthrough = cfg.value("feedthrough", false);
  std::ofstream dump_stream;
  if (!dump_sdp.empty()) {
    dump_stream.open(dump_sdp);
    if (!dump_stream) throw std::invalid_argument("cannot write sdp dump: " + dump_sdp);
    opt.dump_problem = &dump_stream;
  }

  const bool stable_route = dpf::is_schur_stable(sys.A);
  const dpf::SynthesisResult res = stable_route
                                       ? dpf::synth_stable(sys, L, policy, budget, opt)
                                       : dpf::synth_unstable(sys, L, policy, budget, opt);
  if (res.solver_status == dpf::SdpSolution::Status::kInfeasible) {
    json j;
    j["status"] = "infeasible";
    j["best_margin"] = res.certificates.at("phase1_margin")(0, 0);
    emit(j, out);
    return kExitNumerical;
  }
  if (res.solver_status == dpf::SdpSolution::Status::kFailure)
    throw std::runtime_error("synthesis: solver failure");

  const dpf::VerificationReport rep = dpf::verify_synthesis(res, sys, L, policy);
  json j;
  j["status"] = res.solver_status == dpf::SdpSolution::Status::kOptimal ? "optimal" : "stalled";
  j["route"] = stable_route ? "stable" : "unstable";
  j["mu"] = res.mu;
  j["lambda"] = res.lambda;
  j["objective"] = res.objective;
  j["filter"]["F"] = matrix_to_json(res.filter.F);
  j["filter"]["G"] = matrix_to_json(res.filter.G);
  j["filter"]["H"] = matrix_to_json(res.filter.H);
  j["filter"]["K"] = matrix_to_json(res.filter.K);
  j["verified"]["h2_sq"] = rep.h2_sq;
  j["verified"]["hinf"] = rep.hinf;
  j["verified"]["h2_ok"] = rep.h2_ok;
  j["verified"]["hinf_ok"] = rep.hinf_ok;
  j["verified"]["h2_slack"] = rep.h2_slack;
  j["verified"]["hinf_slack"] = rep.hinf_slack;
  j["verified"]["filter_spectral_radius"] = res.verified.filter_spectral_radius;
  emit(j, out);
  return kExitOk;
}

int cmd_simulate(const std::string& config, uint64_t seed_override, bool has_seed, int threads,
                 const std::string& out_dir) {
  std::ifstream in(config);
  if (!in) throw std::invalid_argument("cannot open config file: " + config);
  std::stringstream buf;
  buf << in.rdbuf();
  dpf::SimulationConfig cfg = dpf::parse_simulation_config(buf.str());
  if (has_seed) cfg.seed = seed_override;
  if (threads > 0) cfg.threads = threads;

  const dpf::SimulationResult result = dpf::run_simulation(cfg);

  const std::string traces_path = out_dir + "/traces.csv";
  const std::string summary_path = out_dir + "/summary.json";
  {
    std::ofstream os(traces_path, std::ios::binary);
    if (!os) throw std::invalid_argument("cannot write " + traces_path);
    dpf::write_traces_csv(result, os);
  }
  {
    std::ofstream os(summary_path, std::ios::binary);
    if (!os) throw std::invalid_argument("cannot write " + summary_path);
    dpf::write_summary_json(result, os);
  }

  bool any_failed = false;
  std::cout << "kappa " << fmt(result.kappa) << "\n";
  for (const auto& st : result.stats) {
    if (!st.ok) {
      any_failed = true;
      std::cout << dpf::scheme_name(st.scheme) << ": ERROR " << st.error << "\n";
      continue;
    }
    std::cout << dpf::scheme_name(st.scheme) << ": rmse " << fmt(st.rmse_kmh) << " km/h"
              << " (predicted " << fmt(st.predicted_rmse_kmh) << "), settling "
              << fmt(st.settling_mean_steps) << " steps\n";
  }
  std::cout << "wrote " << traces_path << " and " << summary_path << "\n";
  return any_failed ? kExitNumerical : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentially private filtering toolkit"};
  app.require_subcommand(1);

  double eps = 0.0, delta = 0.0, sens = 1.0, sigma = 0.0;
  std::string out, config, dump_sdp, out_dir = ".";

  auto* cal = app.add_subcommand("calibrate", "privacy noise calibration");
  cal->add_option("--epsilon", eps)->required();
  cal->add_option("--delta", delta)->required();
  cal->add_option("--sensitivity", sens);
  cal->add_option("--out", out);

  auto* vdp = app.add_subcommand("verify-dp", "scalar mechanism margin");
  vdp->add_option("--sigma", sigma)->required();
  vdp->add_option("--sensitivity", sens)->required();
  vdp->add_option("--epsilon", eps)->required();
  vdp->add_option("--delta", delta)->required();
  vdp->add_option("--out", out);

  auto* nrm = app.add_subcommand("norms", "H2 / H-infinity of a system file");
  nrm->add_option("--config", config)->required();
  nrm->add_option("--out", out);

  auto* kal = app.add_subcommand("kalman", "steady-state filter design");
  kal->add_option("--config", config)->required();
  kal->add_option("--out", out);

  auto* syn = app.add_subcommand("synth", "privacy-aware filter synthesis");
  syn->add_option("--config", config)->required();
  syn->add_option("--out", out);
  syn->add_option("--dump-sdp", dump_sdp);

  auto* sim = app.add_subcommand("simulate", "traffic Monte Carlo experiment");
  uint64_t seed = 0;
  int threads = 0;
  sim->add_option("--config", config)->required();
  auto* seed_opt = sim->add_option("--seed", seed);
  sim->add_option("--threads", threads);
  sim->add_option("--out-dir", out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*cal) return cmd_calibrate(eps, delta, sens, out);
    if (*vdp) return cmd_verify_dp(sigma, sens, eps, delta, out);
    if (*nrm) return cmd_norms(config, out);
    if (*kal) return cmd_kalman(config, out);
    if (*syn) return cmd_synth(config, out, dump_sdp);
    if (*sim) return cmd_simulate(config, seed, seed_opt->count() > 0, threads, out_dir);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitValidation;
}
