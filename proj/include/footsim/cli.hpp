#pragma once

#include <cstdint>
#include <exception>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "footsim/commands.hpp"
#include "footsim/config.hpp"
#include "footsim/errors.hpp"

namespace footsim {

// Exit codes: 0 success, 2 input/config error, 3 domain error (e.g. unknown
// team), 4 internal invariant violation.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Forecast football match outcomes by simulating shot quantity "
               "and quality distributions fitted to team ratings"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  app.add_option("--config", config_path, "Run configuration file (key=value lines)");
  app.add_option("--seed", seed, "Override the configured random seed");
  app.add_option("--out", out_dir, "Override the configured output directory");

  CLI::App* train = app.add_subcommand("train", "Fit rating and shot models");

  std::string home_team, away_team;
  std::size_t sims = 0;
  CLI::App* forecast =
      app.add_subcommand("forecast", "Simulate one fixture and print market "
                                     "probabilities as JSON");
  forecast->add_option("--home", home_team, "Home team name")->required();
  forecast->add_option("--away", away_team, "Away team name")->required();
  forecast->add_option("--sims", sims, "Override the number of simulations");

  int strategy = 0;
  std::size_t runs = 1;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score holdout forecasts and backtest betting strategies");
  evaluate->add_option("--strategy", strategy, "Betting strategy (1 or 2)")
      ->check(CLI::Range(1, 2));
  evaluate->add_option("--runs", runs, "Number of seeds to average over");

  CLI::App* bias_scan = app.add_subcommand(
      "bias-scan", "Scan draw-probability multipliers for the lowest mean RPS");

  for (CLI::App* sub : {train, forecast, evaluate, bias_scan})
    sub->fallthrough();

  std::vector<const char*> argv;
  argv.push_back("footsim");
  for (const std::string& arg : args) argv.push_back(arg.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg =
        config_path.empty() ? RunConfig{} : load_config(config_path);
    if (app.count("--seed") > 0) cfg.seed = seed;
    if (app.count("--out") > 0) cfg.out = out_dir;
    if (forecast->count("--sims") > 0) {
      if (sims == 0) throw InputError("--sims must be at least 1");
      cfg.n_simulations = sims;
    }
    if (evaluate->count("--strategy") > 0) cfg.strategy = strategy;

    if (train->parsed()) {
      cmd_train(cfg, err);
    } else if (forecast->parsed()) {
      cmd_forecast(cfg, home_team, away_team, out);
    } else if (evaluate->parsed()) {
      cmd_evaluate(cfg, runs, out, err);
    } else if (bias_scan->parsed()) {
      cmd_bias_scan(cfg, out, err);
    }
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace footsim
