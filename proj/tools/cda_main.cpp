#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cda/cli.hpp"

namespace {

void add_model_options(CLI::App* cmd, cda::cli::ExperimentConfig& cfg) {
  cmd->add_option("--N,--prices", cfg.num_prices, "price grid size N");
  cmd->add_option("--n,--jump", cfg.max_jump, "limit-order jump cut-off n");
  cmd->add_option("--rho", cfg.rho, "traffic intensity lambda/mu");
  cmd->add_option("--mu", cfg.mu, "market-order rate per side");
}

void add_output_options(CLI::App* cmd, cda::cli::ExperimentConfig& cfg) {
  cmd->add_option("--output-dir,-o", cfg.output_dir, "output directory");
  cmd->add_option("--basename", cfg.basename,
                  "output file basename (e.g. fig1, table1)");
  cmd->add_option("--format", cfg.format, "tabular output format (csv)");
  cmd->add_option("--seed", cfg.seed, "master seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous double auction simulator and low-traffic chain analysis"};
  app.set_config("--config", "", "read options from a key=value file");
  app.require_subcommand(1);

  cda::cli::ExperimentConfig cfg;

  CLI::App* chain = app.add_subcommand(
      "chain", "emit the low-traffic transition matrix and its invariant distribution");
  add_model_options(chain, cfg);
  add_output_options(chain, cfg);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo price-frequency histogram vs. the low-traffic distribution");
  add_model_options(simulate, cfg);
  add_output_options(simulate, cfg);
  simulate->add_option("--events", cfg.events, "run length in order arrivals");
  simulate->add_option("--trades", cfg.trades, "run length in recorded trades");
  simulate->add_option("--burn-in", cfg.burn_in,
                       "events (or trades) discarded before counting; default length/10");
  simulate->add_option("--opening", cfg.opening, "opening price (default median)");

  CLI::App* fpt = app.add_subcommand(
      "fpt", "first-passage times to price 1 or N from the median start");
  add_model_options(fpt, cfg);
  add_output_options(fpt, cfg);
  fpt->add_option("--replicates", cfg.replicates, "Monte Carlo replicates");
  fpt->add_option("--ks-replicates", cfg.ks_replicates,
                  "permutation replicates for the KS p-value");
  fpt->add_option("--event-cap", cfg.event_cap,
                  "censoring cap on order arrivals per replicate");
  fpt->add_option("--bins", cfg.bins, "histogram bins (default Freedman-Diaconis)");
  fpt->add_option("--threads", cfg.threads, "worker threads (default hardware)");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "mean first-passage table over a (N, n) x rho grid");
  add_output_options(sweep, cfg);
  sweep->add_option("--mu", cfg.mu, "market-order rate per side");
  std::vector<std::string> cell_specs;
  sweep->add_option("--cell", cell_specs, "grid cell as N:n (repeatable)")
      ->required();
  sweep->add_option("--rho", cfg.rhos, "traffic intensity (repeatable)")->required();
  sweep->add_option("--replicates", cfg.replicates, "Monte Carlo replicates per cell");
  sweep->add_option("--event-cap", cfg.event_cap,
                    "censoring cap on order arrivals per replicate");
  sweep->add_option("--threads", cfg.threads, "worker threads (default hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << '\n';
    return e.get_exit_code();
  }

  try {
    if (chain->parsed()) {
      const auto out = cda::cli::cmd_chain(cfg);
      std::printf("wrote %s\n", out.matrix_csv.c_str());
      std::printf("wrote %s\n", out.pi_csv.c_str());
      std::printf("stationarity residual: %.3e\n", out.residual);
    } else if (simulate->parsed()) {
      const auto out = cda::cli::cmd_simulate(cfg);
      std::printf("wrote %s\n", out.hist_csv.c_str());
      std::printf("total variation vs low-traffic pi: %.6f\n", out.tv);
    } else if (fpt->parsed()) {
      const auto out = cda::cli::cmd_fpt(cfg);
      std::printf("wrote %s\n", out.samples_csv.c_str());
      std::printf("mean T: %.6g (se %.3g), chain mean: %.6g, censored: %llu\n",
                  out.time_summary.mean, out.time_summary.std_error,
                  out.chain_mean,
                  static_cast<unsigned long long>(out.censored));
      if (out.ks)
        std::printf("KS statistic %.4f, permutation p-value %.4f\n",
                    out.ks->statistic, out.ks->p_value);
    } else if (sweep->parsed()) {
      for (const std::string& spec : cell_specs) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos)
          throw std::invalid_argument("cell must be N:n, got: " + spec);
        cfg.cells.emplace_back(std::stoi(spec.substr(0, colon)),
                               std::stoi(spec.substr(colon + 1)));
      }
      const auto out = cda::cli::cmd_sweep(cfg);
      std::printf("wrote %s\n", out.csv.c_str());
      for (const auto& r : out.rows)
        if (r.status != "ok")
          std::fprintf(stderr, "cell (%d,%d,rho=%g) failed: %s\n",
                       r.num_prices, r.max_jump, r.rho, r.status.c_str());
    }
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << '\n';
    return 2;
  }
  return 0;
}
