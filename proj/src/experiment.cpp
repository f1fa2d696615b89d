#include "qngrc/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "qngrc/block_encoding.hpp"
#include "qngrc/circuit_model.hpp"
#include "qngrc/errors.hpp"
#include "qngrc/io.hpp"
#include "qngrc/linalg.hpp"
#include "qngrc/metrics.hpp"
#include "qngrc/qsvt.hpp"

namespace qngrc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

bool finite(double x) { return std::isfinite(x); }

// Copies recognised keys of one section, rejecting anything else.
template <class F>
void read_section(const json& j, const std::string& name, const std::set<std::string>& keys, F&& apply) {
  if (!j.contains(name)) return;
  const json& s = j.at(name);
  require(s.is_object(), name, "must be an object");
  for (auto it = s.begin(); it != s.end(); ++it) {
    require(keys.count(it.key()) > 0, name + "." + it.key(), "unknown key");
    try {
      apply(it.key(), it.value());
    } catch (const json::exception& e) {
      throw ConfigError(name + "." + it.key() + ": " + e.what());
    }
  }
}

std::string path_in(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

Hamiltonian system_hamiltonian(const ExperimentConfig& cfg) {
  return build_tfim_hamiltonian(cfg.system.n_qubits, cfg.system.J, cfg.system.h);
}

double system_dt(const ExperimentConfig& cfg, const Hamiltonian& H) {
  return cfg.system.dt ? *cfg.system.dt : step_from_emax(H, cfg.system.dt_divisor);
}

// States with labels [first, first + count) of the trajectory from |0…0⟩, where label
// `first` sits at absolute step `start`.  Inputs come from stepping, targets from the spectrum.
TimeSeries stepped(const Hamiltonian& H, double dt, std::uint64_t start, std::int64_t first, std::int64_t count) {
  TimeSeries ts = evolve_series(propagator(H, dt), basis_state(H.n_qubits(), 0), static_cast<std::uint64_t>(count), start);
  ts.first_index = first;
  ts.n_qubits = H.n_qubits();
  ts.J = H.J();
  ts.h = H.h();
  ts.origin = "tfim |0...0>, inputs";
  return ts;
}

TimeSeries exact(const Hamiltonian& H, double dt, std::uint64_t start, std::int64_t first, std::int64_t count) {
  TimeSeries ts;
  const StateVector s0 = basis_state(H.n_qubits(), 0);
  ts.states.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i)
    ts.states.push_back(state_at(H, s0, static_cast<double>(start + static_cast<std::uint64_t>(i)) * dt));
  ts.dt = dt;
  ts.burn_in = start;
  ts.first_index = first;
  ts.n_qubits = H.n_qubits();
  ts.J = H.J();
  ts.h = H.h();
  ts.origin = "tfim |0...0>, exact targets";
  return ts;
}

json summary_json(const MetricsSummary& s) {
  return {{"steps", s.steps},
          {"min_fidelity", s.min_fidelity},
          {"mean_fidelity", s.mean_fidelity},
          {"final_fidelity", s.final_fidelity},
          {"rms_X0", s.rms_X0},
          {"rms_X0X1", s.rms_X0X1},
          {"max_raw_norm_drift", s.max_raw_norm_drift},
          {"max_amp_err_raw", s.max_amp_err_raw},
          {"max_amp_err_aligned", s.max_amp_err_aligned}};
}

json be_json(const BlockEncoding& be) {
  return {{"alpha", be.alpha},
          {"n_ancilla", be.n_ancilla},
          {"epsilon", be.epsilon},
          {"realized_ancillas", be.realized_ancillas},
          {"unitarity_residual", be.unitarity_residual()},
          {"cost", be.cost}};
}

void write_json(const std::string& path, const json& j) { io::write_text_atomically(path, j.dump(2) + "\n"); }

}  // namespace

FeatureConfig ExperimentConfig::feature_config() const {
  FeatureConfig f;
  f.m = training.m;
  f.p = training.p;
  f.delta = training.delta;
  f.tau = training.tau;
  f.lambda = training.lambda;
  return f;
}

void ExperimentConfig::validate() const {
  require(profile == "paper" || profile == "ci" || profile == "custom", "profile", "must be paper, ci or custom");
  require(system.n_qubits >= 1 && system.n_qubits <= 14, "system.n_qubits", "must lie in [1, 14]");
  require(finite(system.J) && finite(system.h), "system.J/h", "must be finite");
  require(system.dt_divisor > 0 && finite(system.dt_divisor), "system.dt_divisor", "must be positive");
  if (system.dt) require(*system.dt > 0 && finite(*system.dt), "system.dt", "must be positive");
  require(training.T >= 1, "training.T", "must be >= 1");
  require(training.tau >= 1, "training.tau", "must be >= 1");
  require(training.m >= 1, "training.m", "must be >= 1");
  require(training.p >= 1, "training.p", "must be >= 1");
  require(training.delta >= 1, "training.delta", "must be >= 1");
  require(training.lambda >= 0 && finite(training.lambda), "training.lambda", "must be finite and >= 0");
  try {
    feature_config().validate();
    feature_length(Eigen::Index{1} << system.n_qubits, training.m, training.p, training.layout);
  } catch (const Error& e) {
    throw ConfigError(std::string("training: ") + e.what());
  }
  require(prediction.T >= 1, "prediction.T", "must be >= 1");
  require(prediction.mode == "skip" || prediction.mode == "iterative", "prediction.mode", "must be skip or iterative");
  require(prediction.mode != "iterative" || training.tau == 1, "prediction.mode",
          "iterative prediction needs a model trained with training.tau = 1");
  if (quantum.enable) {
    require(quantum.d >= 1 && quantum.d <= 2, "quantum.d", "must lie in [1, 2]");
    require(quantum.T >= 1 && quantum.T <= 8, "quantum.T", "must lie in [1, 8]");
    require(quantum.delta_W > 0 && quantum.delta_W <= 1, "quantum.delta_W", "must lie in (0, 1]");
    require(quantum.delta > 0 && quantum.delta <= 1, "quantum.delta", "must lie in (0, 1]");
    require(quantum.lambda >= 0 && finite(quantum.lambda), "quantum.lambda", "must be finite and >= 0");
    require(quantum.tau >= 1, "quantum.tau", "must be >= 1");
    require(quantum.dt > 0 && finite(quantum.dt), "quantum.dt", "must be positive");
  }
  require(!out.empty(), "output.dir", "must not be empty");
}

json ExperimentConfig::to_json() const {
  json sys = {{"n_qubits", system.n_qubits}, {"J", system.J}, {"h", system.h}, {"dt_divisor", system.dt_divisor}};
  if (system.dt) sys["dt"] = *system.dt;
  return {{"profile", profile},
          {"system", sys},
          {"training",
           {{"T", training.T},
            {"tau", training.tau},
            {"m", training.m},
            {"p", training.p},
            {"delta", training.delta},
            {"lambda", training.lambda},
            {"burn_in", training.burn_in},
            {"layout", to_string(training.layout)}}},
          {"prediction", {{"T", prediction.T}, {"mode", prediction.mode}, {"gap", prediction.gap}}},
          {"quantum",
           {{"enable", quantum.enable},
            {"d", quantum.d},
            {"T", quantum.T},
            {"delta_W", quantum.delta_W},
            {"delta", quantum.delta},
            {"lambda", quantum.lambda},
            {"tau", quantum.tau},
            {"dt", quantum.dt}}},
          {"output", {{"dir", out}}},
          {"seed", seed}};
}

ExperimentConfig profile_config(const std::string& profile) {
  ExperimentConfig c;
  c.profile = profile;
  if (profile == "paper") {
    c.training.T = 20000;
    c.training.tau = 1000000;
    c.prediction.T = 40000;
    c.prediction.gap = 10000;
  } else if (profile == "ci") {
    c.training.T = 2000;
    c.training.tau = 10000;
    c.prediction.T = 2000;
    c.prediction.gap = 0;
  } else {
    throw ConfigError("profile: unknown profile '" + profile + "' (expected paper or ci)");
  }
  return c;
}

ExperimentConfig apply_config_json(ExperimentConfig c, const json& j) {
  require(j.is_object(), "config", "top level must be an object");
  static const std::set<std::string> top = {"profile", "system", "training", "prediction", "quantum", "output", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it) require(top.count(it.key()) > 0, it.key(), "unknown key");
  try {
    if (j.contains("profile")) c.profile = j.at("profile").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  read_section(j, "system", {"n_qubits", "J", "h", "dt_divisor", "dt"}, [&](const std::string& k, const json& v) {
    if (k == "n_qubits") c.system.n_qubits = v.get<int>();
    else if (k == "J") c.system.J = v.get<double>();
    else if (k == "h") c.system.h = v.get<double>();
    else if (k == "dt_divisor") c.system.dt_divisor = v.get<double>();
    else if (v.is_null()) c.system.dt.reset();
    else c.system.dt = v.get<double>();
  });
  read_section(j, "training", {"T", "tau", "m", "p", "delta", "lambda", "burn_in", "layout"},
               [&](const std::string& k, const json& v) {
                 if (k == "T") c.training.T = v.get<std::int64_t>();
                 else if (k == "tau") c.training.tau = v.get<std::int64_t>();
                 else if (k == "m") c.training.m = v.get<int>();
                 else if (k == "p") c.training.p = v.get<int>();
                 else if (k == "delta") c.training.delta = v.get<int>();
                 else if (k == "lambda") c.training.lambda = v.get<double>();
                 else if (k == "burn_in") c.training.burn_in = v.get<std::uint64_t>();
                 else {
                   try {
                     c.training.layout = layout_from_string(v.get<std::string>());
                   } catch (const Error& e) {
                     throw ConfigError(std::string("training.layout: ") + e.what());
                   }
                 }
               });
  read_section(j, "prediction", {"T", "mode", "gap"}, [&](const std::string& k, const json& v) {
    if (k == "T") c.prediction.T = v.get<std::int64_t>();
    else if (k == "mode") c.prediction.mode = v.get<std::string>();
    else c.prediction.gap = v.get<std::uint64_t>();
  });
  read_section(j, "quantum", {"enable", "d", "T", "delta_W", "delta", "lambda", "tau", "dt"},
               [&](const std::string& k, const json& v) {
                 if (k == "enable") c.quantum.enable = v.get<bool>();
                 else if (k == "d") c.quantum.d = v.get<int>();
                 else if (k == "T") c.quantum.T = v.get<std::int64_t>();
                 else if (k == "delta_W") c.quantum.delta_W = v.get<double>();
                 else if (k == "delta") c.quantum.delta = v.get<double>();
                 else if (k == "lambda") c.quantum.lambda = v.get<double>();
                 else if (k == "tau") c.quantum.tau = v.get<std::int64_t>();
                 else c.quantum.dt = v.get<double>();
               });
  read_section(j, "output", {"dir"}, [&](const std::string&, const json& v) { c.out = v.get<std::string>(); });
  return c;
}

ExperimentConfig load_config(const std::string& path, const std::string& profile) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  std::string base = profile;
  if (base.empty()) base = j.value("profile", std::string("ci"));
  if (base == "custom") base = "ci";
  ExperimentConfig c = apply_config_json(profile_config(base), j);
  if (!profile.empty()) c.profile = profile;
  return c;
}

std::uint64_t prediction_start(const ExperimentConfig& cfg) {
  return cfg.training.burn_in + static_cast<std::uint64_t>(cfg.training.T) + cfg.prediction.gap;
}

GeneratedData generate_data(const ExperimentConfig& cfg) {
  cfg.validate();
  const Hamiltonian H = system_hamiltonian(cfg);
  const double dt = system_dt(cfg, H);
  const std::int64_t hist = cfg.feature_config().history();
  const std::int64_t tau = cfg.training.tau;
  GeneratedData g;
  const std::uint64_t b = cfg.training.burn_in;
  g.train_inputs = stepped(H, dt, b, -hist, cfg.training.T + hist);
  g.train_targets = exact(H, dt, b + static_cast<std::uint64_t>(hist + tau), tau, cfg.training.T);
  const std::uint64_t P = prediction_start(cfg);
  g.predict_inputs = stepped(H, dt, P, -hist, cfg.prediction.T + hist);
  g.predict_targets = exact(H, dt, P + static_cast<std::uint64_t>(hist + tau), tau, cfg.prediction.T);
  return g;
}

void cmd_generate(const ExperimentConfig& cfg, const std::string& out_dir) {
  const GeneratedData g = generate_data(cfg);
  ensure_dir(out_dir);
  io::write_series(path_in(out_dir, "train_inputs.qts"), g.train_inputs);
  io::write_series(path_in(out_dir, "train_targets.qts"), g.train_targets);
  io::write_series(path_in(out_dir, "predict_inputs.qts"), g.predict_inputs);
  io::write_series(path_in(out_dir, "predict_targets.qts"), g.predict_targets);
  write_json(path_in(out_dir, "config.json"), cfg.to_json());
}

WeightModel cmd_train(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const TimeSeries in = io::read_series(path_in(out_dir, "train_inputs.qts"));
  const TimeSeries tg = io::read_series(path_in(out_dir, "train_targets.qts"));
  const FeatureConfig fc = cfg.feature_config();
  auto [X, Y] = assemble_training(in, tg, fc, cfg.training.layout);
  WeightModel model = train_weights(X, Y, fc);
  save_model(path_in(out_dir, "model.qwm"), model);
  return model;
}

PredictionRun run_prediction(const WeightModel& model, const GeneratedData& data, const std::string& mode,
                             std::int64_t n_steps) {
  PredictionRun r;
  const FeatureConfig& fc = model.config;
  if (data.predict_inputs.dim() != model.state_dim)
    throw DimensionMismatch("model expects states of dimension " + std::to_string(model.state_dim));
  if (mode == "skip") {
    r.predicted.first_index = fc.tau;
    for (std::int64_t k = 0; k < n_steps; ++k) {
      Prediction p = predict_skip(model, make_feature(data.predict_inputs, k, fc, model.layout));
      r.predicted.states.push_back(std::move(p.state));
      r.raw_norms.push_back(p.raw_norm);
      r.targets.push_back(data.predict_targets.at(k + fc.tau));
    }
  } else if (mode == "iterative") {
    if (fc.tau != 1) throw ConfigError("prediction.mode: iterative prediction needs a model with tau = 1, got " + std::to_string(fc.tau));
    std::vector<StateVector> seed;
    for (std::int64_t k = -fc.history(); k <= 0; ++k) seed.push_back(data.predict_inputs.at(k));
    RolloutResult rr = predict_iterative(model, seed, static_cast<std::uint64_t>(n_steps));
    r.predicted = std::move(rr.series);
    r.raw_norms = std::move(rr.raw_norms);
    // The rollout's label j is the state one step after input label j − 1, i.e. target label j.
    for (std::int64_t j = 1; j <= n_steps; ++j) r.targets.push_back(data.predict_targets.at(j));
  } else {
    throw ConfigError("prediction.mode: must be skip or iterative");
  }
  r.predicted.dt = data.predict_inputs.dt;
  r.predicted.n_qubits = data.predict_inputs.n_qubits;
  r.predicted.J = data.predict_inputs.J;
  r.predicted.h = data.predict_inputs.h;
  r.predicted.burn_in = data.predict_inputs.burn_in;
  r.predicted.origin = "prediction (" + mode + ")";
  return r;
}

json cmd_predict(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const WeightModel model = load_model(path_in(out_dir, "model.qwm"));
  GeneratedData data;
  data.predict_inputs = io::read_series(path_in(out_dir, "predict_inputs.qts"));
  data.predict_targets = io::read_series(path_in(out_dir, "predict_targets.qts"));
  const PredictionRun r = run_prediction(model, data, cfg.prediction.mode, cfg.prediction.T);
  const auto rows = evaluate_predictions(r.predicted.states, r.raw_norms, r.targets, r.predicted.first_index);
  write_metrics_csv(path_in(out_dir, "metrics.csv"), rows);
  io::write_series(path_in(out_dir, "predicted.qts"), r.predicted);
  json j = summary_json(summarize(rows));
  j["mode"] = cfg.prediction.mode;
  return j;
}

json cmd_verify_quantum(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  if (!cfg.quantum.enable) throw ConfigError("quantum.enable: verification needs the quantum section enabled");
  const QuantumConfig& q = cfg.quantum;
  const CircuitDims dims = circuit_dims(q.d, q.T);
  const std::int64_t tau = q.tau;
  // One trajectory: training labels [−1, T−1+τ], prediction labels offset by `base`.
  const std::int64_t base = q.T + tau;
  const TimeSeries s = toy_series(q.d, 2 * (q.T + tau) + 1, q.dt, cfg.seed, -1);
  json rep;
  rep["config"] = cfg.to_json()["quantum"];
  rep["dims"] = {{"d", dims.d}, {"D", dims.D}, {"t", dims.t}, {"T", dims.T}, {"r", dims.r()},
                 {"w", dims.w},  {"w_prime", dims.w_prime}};

  // Classical reference with the padded layout the circuits produce.
  FeatureConfig fc;
  fc.tau = tau;
  fc.lambda = q.lambda;
  const Eigen::Index L = static_cast<Eigen::Index>(feature_length(dims.D, 2, 2, Layout::padded));
  Matrix X(L, q.T), Y(dims.D, q.T);
  for (std::int64_t k = 0; k < q.T; ++k) {
    X.col(k) = make_feature(s, k, fc, Layout::padded);
    Y.col(k) = s.at(k + tau);
  }
  const WeightModel classical = train_weights(X, Y, q.lambda);

  const std::vector<DataOracle> train_oracles = {oracle_from_series(s, 0, q.T, cfg.seed),
                                                 oracle_from_series(s, -1, q.T, cfg.seed)};
  const Circuit u_f = build_u_f(build_u_lin(train_oracles, 2), 2);
  const BlockEncoding be_X = feature_block_encoding(u_f, dims);
  const RealVector sx = linalg::singular_values(be_X.alpha * be_X.block());
  const Eigen::Index rx = linalg::numerical_rank(sx);
  const double kappa = kappa_regularized(sx(0) / sx(rx - 1), sx(0), q.lambda);

  const DataOracle o_tau = oracle_from_series(s, tau, q.T, cfg.seed);
  const double delta_Y = q.delta_W / (8.0 * kappa);
  const BlockEncoding be_Y = target_block_encoding(o_tau, dims, delta_Y);
  const WeightEncoding we = build_weight_encoding(be_X, be_Y, q.lambda, q.delta_W, dims);
  const Matrix W_q = unscaled_weights(we, dims.D, L);

  rep["stages"] = {
      {"feature", be_json(be_X)},
      {"target", be_json(be_Y)},
      {"weights", be_json(we.encoding)},
  };
  rep["stages"]["feature"]["residual"] = verify_encoding(be_X, X);
  rep["stages"]["target"]["residual"] = verify_encoding(be_Y, Y);
  rep["stages"]["weights"]["residual"] = verify_encoding(we.encoding, classical.W);
  rep["weights"] = {{"error", linalg::spectral_norm(W_q - classical.W)},
                    {"delta_W", q.delta_W},
                    {"norm_W", classical.norm_W},
                    {"kappa", we.kappa},
                    {"kappa_X", we.kappa_X},
                    {"norm_X", we.norm_X},
                    {"norm_Y", we.norm_Y},
                    {"delta_X", we.delta_X},
                    {"delta_Y", we.delta_Y},
                    {"composed_error", we.composed_error}};
  rep["costs"] = {we.cost.to_json(), we.cost_simplified.to_json()};

  // The prediction phase needs δ_W ≤ δ‖W‖/(4κ_W); tighten the weight encoding when the
  // configured δ_W is too loose for it.
  const RealVector sw = linalg::singular_values(classical.W);
  const double kW = sw(0) / sw(linalg::numerical_rank(sw) - 1);
  const double dW_pred = std::min(q.delta_W, 0.9 * q.delta * sw(0) / (4.0 * kW));
  const WeightEncoding we_p = dW_pred < q.delta_W
                                  ? build_weight_encoding(be_X, target_block_encoding(o_tau, dims, dW_pred / (8.0 * kappa)),
                                                          q.lambda, dW_pred, dims)
                                  : we;
  const std::vector<DataOracle> pred_oracles = {oracle_from_series(s, base, q.T, cfg.seed),
                                                oracle_from_series(s, base - 1, q.T, cfg.seed)};
  const PredictionOutput po = prediction_circuit(we_p.encoding, pred_oracles, dims, q.delta);
  json preds = json::array();
  double min_fid = 1.0;
  for (std::int64_t k = 0; k < q.T; ++k) {
    const Prediction cp = predict_skip(classical, make_feature(s, base + k, fc, Layout::padded));
    const double f = fidelity(po.states[static_cast<std::size_t>(k)], cp.state);
    const double f_exact = fidelity(po.states[static_cast<std::size_t>(k)], s.at(base + k + tau));
    min_fid = std::min(min_fid, f);
    preds.push_back({{"k", k},
                     {"fidelity_vs_classical", f},
                     {"fidelity_vs_exact", f_exact},
                     {"success_probability", po.probabilities[static_cast<std::size_t>(k)]}});
  }
  rep["prediction"] = {{"delta", q.delta},
                       {"delta_W", dW_pred},
                       {"kappa_W", po.kappa_W},
                       {"norm_W", po.norm_W},
                       {"min_fidelity_vs_classical", min_fid},
                       {"passes", min_fid >= 1.0 - q.delta},
                       {"steps", preds},
                       {"cost", po.cost.to_json()}};
  rep["ancillas"] = {{"w", dims.w},
                     {"w_prime", dims.w_prime},
                     {"feature", be_X.n_ancilla},
                     {"target", be_Y.n_ancilla},
                     {"weights", we.encoding.n_ancilla}};
  rep["circuits"] = {{"feature", feature_encoding_circuit(u_f, dims).to_json()},
                     {"target", target_encoding_circuit(o_tau, dims).to_json()}};
  ensure_dir(out_dir);
  write_json(path_in(out_dir, "verify_quantum.json"), rep);
  return rep;
}

json cmd_report(const std::vector<std::string>& metric_files, const std::string& out_path) {
  if (metric_files.empty()) throw InvalidArgument("report needs at least one metrics file");
  json rep;
  rep["runs"] = json::array();
  json table = json::array();
  for (const auto& f : metric_files) {
    const auto rows = read_metrics_csv(f);
    if (rows.empty()) throw IoError("metrics file '" + f + "' has no rows");
    const MetricsSummary s = summarize(rows);
    json run = summary_json(s);
    run["file"] = f;
    rep["runs"].push_back(run);
    // Plot-ready: fidelity per step for every run, in input order.
    json col = json::array();
    for (const auto& r : rows) col.push_back(r.fidelity);
    table.push_back({{"file", f}, {"step0", rows.front().step}, {"fidelity", col}});
  }
  rep["comparison"] = table;
  if (!out_path.empty()) write_json(out_path, rep);
  return rep;
}

}  // namespace qngrc
