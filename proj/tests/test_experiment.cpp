#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qngrc/errors.hpp"
#include "qngrc/experiment.hpp"
#include "qngrc/io.hpp"
#include "qngrc/metrics.hpp"
#include "qngrc/ngrc.hpp"

using namespace qngrc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qngrc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small enough to run in well under a second.
ExperimentConfig small_config(const std::string& out) {
  ExperimentConfig c = profile_config("ci");
  c.profile = "custom";
  c.system.n_qubits = 2;
  c.training.T = 60;
  c.training.tau = 5;
  c.training.burn_in = 100;
  c.prediction.T = 20;
  c.prediction.gap = 3;
  c.out = out;
  return c;
}

std::string config_error(const json& j) {
  try {
    apply_config_json(profile_config("ci"), j).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("profiles") {
  const ExperimentConfig p = profile_config("paper");
  CHECK(p.training.T == 20000);
  CHECK(p.training.tau == 1000000);
  CHECK(p.prediction.T == 40000);
  CHECK(p.prediction.gap == 10000);
  CHECK(p.training.burn_in == 10000);
  CHECK(p.training.lambda == 0.0);
  CHECK(p.training.layout == Layout::concatenated);
  CHECK(p.seed == 7);
  CHECK(prediction_start(p) == 40000);
  const ExperimentConfig c = profile_config("ci");
  CHECK(c.training.T == 2000);
  CHECK(c.training.tau == 10000);
  CHECK(c.prediction.T == 2000);
  CHECK(prediction_start(c) == 12000);
  CHECK_THROWS_AS(profile_config("huge"), ConfigError);
  p.validate();
  c.validate();
}

TEST_CASE("config parsing names the offending field") {
  CHECK(config_error({{"colour", 1}}).find("colour") != std::string::npos);
  CHECK(config_error({{"training", {{"bogus", 1}}}}).find("training.bogus") != std::string::npos);
  CHECK(config_error({{"training", {{"T", "many"}}}}).find("training.T") != std::string::npos);
  CHECK(config_error({{"training", {{"m", 0}}}}).find("training.m") != std::string::npos);
  CHECK(config_error({{"training", {{"layout", "spiral"}}}}).find("training.layout") != std::string::npos);
  CHECK(config_error({{"prediction", {{"mode", "iterative"}}}}).find("prediction.mode") != std::string::npos);
  CHECK(config_error({{"quantum", {{"enable", true}, {"T", 64}}}}).find("quantum.T") != std::string::npos);
  CHECK(config_error({{"system", {{"n_qubits", 3}, {"h", 1.0}}}}).empty());

  const ExperimentConfig c = apply_config_json(profile_config("ci"), {{"training", {{"lambda", 0.25}}}, {"seed", 3}});
  CHECK(c.training.lambda == 0.25);
  CHECK(c.seed == 3);
  CHECK(c.training.T == 2000);
  const ExperimentConfig back = apply_config_json(profile_config("paper"), c.to_json());
  CHECK(back.to_json() == c.to_json());
}

TEST_CASE("config files") {
  const std::string dir = scratch("cfgfile");
  const std::string path = dir + "/c.json";
  std::ofstream(path) << R"({"profile": "paper", "training": {"T": 10}})";
  const ExperimentConfig c = load_config(path, "");
  CHECK(c.training.T == 10);
  CHECK(c.training.tau == 1000000);
  CHECK(load_config(path, "ci").training.tau == 10000);
  CHECK_THROWS_AS(load_config(dir + "/missing.json", ""), IoError);
  std::ofstream(dir + "/bad.json") << "{ not json";
  CHECK_THROWS_AS(load_config(dir + "/bad.json", ""), ConfigError);
}

TEST_CASE("generated data carries consistent labels") {
  const ExperimentConfig cfg = small_config(scratch("gen"));
  const GeneratedData g = generate_data(cfg);
  CHECK(g.train_inputs.first_index == -1);
  CHECK(g.train_inputs.size() == 61);
  CHECK(g.train_targets.first_index == 5);
  CHECK(g.train_targets.size() == 60);
  CHECK(g.predict_inputs.first_index == -1);
  CHECK(g.predict_inputs.size() == 21);
  CHECK(g.predict_targets.first_index == 5);
  // Inputs and targets share one time axis within each phase.
  for (std::int64_t k = 5; k < 60; k += 7) CHECK((g.train_targets.at(k) - g.train_inputs.at(k)).norm() < 1e-9);
  for (std::int64_t k = 5; k < 20; k += 3) CHECK((g.predict_targets.at(k) - g.predict_inputs.at(k)).norm() < 1e-9);
  // Prediction label 0 is absolute step burn-in + T + gap + (m−1)Δ; training label L is burn-in + (m−1)Δ + L.
  const Hamiltonian H = build_tfim_hamiltonian(2, 0.5, 5.0);
  const double dt = step_from_emax(H);
  const StateVector s0 = basis_state(2, 0);
  CHECK((g.predict_inputs.at(0) - state_at(H, s0, (100 + 60 + 3 + 1) * dt)).norm() < 1e-9);
  CHECK((g.train_inputs.at(-1) - state_at(H, s0, 100 * dt)).norm() < 1e-9);

  const GeneratedData again = generate_data(cfg);
  for (std::size_t i = 0; i < g.train_inputs.size(); ++i) CHECK((g.train_inputs.states[i] - again.train_inputs.states[i]).norm() == 0.0);
}

TEST_CASE("generate, train and predict through files") {
  const std::string dir = scratch("pipeline");
  const ExperimentConfig cfg = small_config(dir);
  cmd_generate(cfg, dir);
  const std::string first = slurp(dir + "/train_inputs.qts");
  cmd_generate(cfg, dir);
  CHECK(slurp(dir + "/train_inputs.qts") == first);
  CHECK(json::parse(slurp(dir + "/config.json")) == cfg.to_json());

  const WeightModel m = cmd_train(cfg, dir);
  const WeightModel loaded = load_model(dir + "/model.qwm");
  CHECK((m.W - loaded.W).norm() == 0.0);
  CHECK(loaded.config.tau == 5);

  const json summary = cmd_predict(cfg, dir);
  const auto rows = read_metrics_csv(dir + "/metrics.csv");
  REQUIRE(rows.size() == 20);
  CHECK(summary["steps"] == 20);
  CHECK(rows.front().step == 5);

  // Offline recomputation from the written series and model.
  const TimeSeries in = io::read_series(dir + "/predict_inputs.qts");
  const TimeSeries tg = io::read_series(dir + "/predict_targets.qts");
  for (std::int64_t k = 0; k < 20; ++k) {
    const Prediction p = predict_skip(loaded, make_feature(in, k, loaded.config, loaded.layout));
    CHECK(rows[static_cast<std::size_t>(k)].fidelity == doctest::Approx(fidelity(p.state, tg.at(k + 5))).epsilon(1e-14));
  }
  const TimeSeries predicted = io::read_series(dir + "/predicted.qts");
  CHECK(predicted.size() == 20);
  CHECK(predicted.first_index == 5);
}

TEST_CASE("single prediction step and mode checks") {
  const std::string dir = scratch("single");
  ExperimentConfig cfg = small_config(dir);
  cfg.prediction.T = 1;
  cmd_generate(cfg, dir);
  cmd_train(cfg, dir);
  CHECK(cmd_predict(cfg, dir)["steps"] == 1);

  const GeneratedData g = generate_data(cfg);
  const WeightModel model = load_model(dir + "/model.qwm");
  CHECK_THROWS_AS(run_prediction(model, g, "iterative", 3), ConfigError);
  CHECK_THROWS_AS(run_prediction(model, g, "sideways", 3), ConfigError);
}

TEST_CASE("iterative mode lines predictions up with targets") {
  const std::string dir = scratch("iter");
  ExperimentConfig cfg = small_config(dir);
  cfg.training.tau = 1;
  cfg.prediction.mode = "iterative";
  cfg.training.lambda = 1e-6;
  cmd_generate(cfg, dir);
  cmd_train(cfg, dir);
  const GeneratedData g = generate_data(cfg);
  const PredictionRun r = run_prediction(load_model(dir + "/model.qwm"), g, "iterative", 10);
  REQUIRE(r.targets.size() == 10);
  CHECK(r.predicted.first_index == 1);
  CHECK((r.targets[0] - g.predict_inputs.at(1)).norm() < 1e-9);
  CHECK(fidelity(r.predicted.states[0], r.targets[0]) > 0.99);
}

TEST_CASE("verify-quantum at desk scale") {
  const std::string dir = scratch("vq");
  ExperimentConfig cfg = small_config(dir);
  cfg.quantum.enable = true;
  const json rep = cmd_verify_quantum(cfg, dir);
  CHECK(rep["weights"]["error"].get<double>() <= 1e-2);
  CHECK(rep["weights"]["composed_error"].get<double>() <= 1e-2);
  CHECK(rep["dims"]["w"] == 12);
  CHECK(rep["dims"]["w_prime"] == 12);
  CHECK(rep["ancillas"]["weights"] == 12);
  CHECK(rep["ancillas"]["feature"] == 5);
  CHECK(rep["ancillas"]["target"] == 6);
  CHECK(rep["prediction"]["passes"] == true);
  CHECK(rep["prediction"]["steps"].size() == 4);
  CHECK(fs::exists(dir + "/verify_quantum.json"));
  cfg.quantum.enable = false;
  CHECK_THROWS_AS(cmd_verify_quantum(cfg, dir), ConfigError);
}

TEST_CASE("report aggregates runs") {
  const std::string dir = scratch("report");
  ExperimentConfig cfg = small_config(dir);
  cmd_generate(cfg, dir);
  cmd_train(cfg, dir);
  cmd_predict(cfg, dir);
  fs::copy_file(dir + "/metrics.csv", dir + "/m2.csv");
  const json rep = cmd_report({dir + "/metrics.csv", dir + "/m2.csv"}, dir + "/report.json");
  REQUIRE(rep["runs"].size() == 2);
  CHECK(rep["runs"][0]["mean_fidelity"] == rep["runs"][1]["mean_fidelity"]);
  CHECK(rep["comparison"][1]["fidelity"].size() == 20);
  CHECK(json::parse(slurp(dir + "/report.json")) == rep);
  CHECK_THROWS_AS(cmd_report({}, ""), InvalidArgument);
  CHECK_THROWS_AS(cmd_report({dir + "/nope.csv"}, ""), IoError);
}

TEST_CASE("command-line driver") {
  const char* cli = std::getenv("QNGRC_CLI");
  if (!cli) {
    MESSAGE("QNGRC_CLI not set; skipping");
    return;
  }
  const std::string dir = scratch("cli");
  std::ofstream(dir + "/c.json") << small_config(dir).to_json().dump();
  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(cli) + " " + args + " > " + dir + "/stdout 2> " + dir + "/stderr";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  CHECK(run("generate --config " + dir + "/c.json") == 0);
  CHECK(run("train --config " + dir + "/c.json") == 0);
  CHECK(json::parse(slurp(dir + "/stdout")).contains("kappa_W"));
  CHECK(run("predict --config " + dir + "/c.json") == 0);
  CHECK(json::parse(slurp(dir + "/stdout"))["steps"] == 20);
  CHECK(run("report " + dir + "/metrics.csv --out " + dir + "/r.json") == 0);
  CHECK(fs::exists(dir + "/r.json"));

  CHECK(run("teleport") == 2);
  CHECK(json::parse(slurp(dir + "/stderr"))["error"] == "usage");
  CHECK(run("generate --config " + dir + "/absent.json") == 1);
  CHECK(json::parse(slurp(dir + "/stderr"))["error"] == "io");
  std::ofstream(dir + "/bad.json") << R"({"training": {"zeta": 1}})";
  CHECK(run("generate --config " + dir + "/bad.json") == 1);
  const json err = json::parse(slurp(dir + "/stderr"));
  CHECK(err["error"] == "config");
  CHECK(err["message"].get<std::string>().find("training.zeta") != std::string::npos);
}
