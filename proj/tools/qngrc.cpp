// Command-line driver: generate, train, predict, verify-quantum, report.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qngrc/errors.hpp"
#include "qngrc/experiment.hpp"

namespace {

int fail(const std::string& kind, const std::string& message, int code = 1) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum next-generation reservoir computing experiments"};
  app.require_subcommand(1);

  std::string config_path, profile, out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> metric_files;
  std::string report_out;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--profile", profile, "Base profile")->check(CLI::IsMember({"paper", "ci"}));
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Seed for every stochastic choice");
  };
  auto* gen = app.add_subcommand("generate", "Write training and prediction series");
  auto* train = app.add_subcommand("train", "Fit the weight matrix");
  auto* pred = app.add_subcommand("predict", "Predict and write per-step metrics");
  auto* vq = app.add_subcommand("verify-quantum", "Run the block-encoding pipeline at desk scale");
  for (auto* s : {gen, train, pred, vq}) common(s);
  auto* rep = app.add_subcommand("report", "Aggregate metrics files");
  rep->add_option("files", metric_files, "metrics.csv files")->required();
  rep->add_option("--out", report_out, "Report path (default: stdout only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (rep->parsed()) {
      std::cout << qngrc::cmd_report(metric_files, report_out).dump(2) << "\n";
      return 0;
    }
    qngrc::ExperimentConfig cfg = config_path.empty() ? qngrc::profile_config(profile.empty() ? "ci" : profile)
                                                      : qngrc::load_config(config_path, profile);
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out = out_dir;
    cfg.validate();
    if (gen->parsed()) {
      qngrc::cmd_generate(cfg, cfg.out);
      std::cout << nlohmann::json{{"generated", cfg.out}}.dump() << "\n";
    } else if (train->parsed()) {
      const auto m = qngrc::cmd_train(cfg, cfg.out);
      std::cout << nlohmann::json{{"kappa_X", m.kappa_X}, {"kappa", m.kappa}, {"kappa_W", m.kappa_W},
                                  {"norm_X", m.norm_X},   {"norm_Y", m.norm_Y}, {"norm_W", m.norm_W},
                                  {"rank_X", m.rank_X}}
                       .dump()
                << "\n";
    } else if (pred->parsed()) {
      std::cout << qngrc::cmd_predict(cfg, cfg.out).dump(2) << "\n";
    } else if (vq->parsed()) {
      const auto r = qngrc::cmd_verify_quantum(cfg, cfg.out);
      std::cout << nlohmann::json{{"weights", r["weights"]}, {"prediction_min_fidelity", r["prediction"]["min_fidelity_vs_classical"]}}.dump(2) << "\n";
    }
    return 0;
  } catch (const qngrc::Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
}
