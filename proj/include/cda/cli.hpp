#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cda/chain.hpp"
#include "cda/csv.hpp"
#include "cda/fpt_approx.hpp"
#include "cda/model.hpp"
#include "cda/simulator.hpp"
#include "cda/stats.hpp"

namespace cda::cli {

inline constexpr const char* kArtifactVersion = "cda 0.1.0";
inline constexpr std::uint64_t kAutoBurnIn = ~0ULL;

// Replicate streams occupy [0, replicates); auxiliary generators (mixture
// sampling, KS permutations) use fixed offsets in a disjoint block.
inline constexpr std::uint64_t kAuxStreamBase = 1ULL << 32;

struct ExperimentConfig {
  int num_prices = 10;
  int max_jump = 1;
  double rho = 0.01;
  double mu = 1.0;
  std::uint64_t events = 0;
  std::uint64_t trades = 0;
  std::uint64_t burn_in = kAutoBurnIn;
  int replicates = 10000;
  int ks_replicates = 10000;
  std::uint64_t seed = 1;
  std::uint64_t event_cap = kDefaultFptEventCap;
  int opening = 0;  // 0 selects the median price
  int bins = 0;     // 0 selects Freedman-Diaconis
  unsigned threads = 0;
  std::string output_dir = ".";
  std::string basename;  // empty selects the command name
  std::string format = "csv";
  std::vector<std::pair<int, int>> cells;  // sweep grid rows (N, n)
  std::vector<double> rhos;                // sweep grid columns

  ModelParams params() const {
    return ModelParams::from_traffic(num_prices, max_jump, rho, mu);
  }

  Price opening_or_median() const {
    return opening > 0 ? opening : (num_prices + 1) / 2;
  }

  void validate_common() const {
    if (format != "csv")
      throw std::invalid_argument("unsupported format: " + format);
    if (opening != 0 && (opening < 1 || opening > num_prices))
      throw std::invalid_argument("opening price outside the grid");
  }
};

namespace detail {

inline nlohmann::json config_echo(const ExperimentConfig& c) {
  return {{"N", c.num_prices},       {"n", c.max_jump},
          {"rho", c.rho},            {"mu", c.mu},
          {"events", c.events},      {"trades", c.trades},
          {"burn_in", c.burn_in == kAutoBurnIn ? nlohmann::json("auto")
                                               : nlohmann::json(c.burn_in)},
          {"replicates", c.replicates},
          {"ks_replicates", c.ks_replicates},
          {"seed", c.seed},          {"event_cap", c.event_cap},
          {"opening", c.opening},    {"bins", c.bins},
          {"output_dir", c.output_dir}, {"basename", c.basename},
          {"format", c.format}};
}

class RunRecord {
 public:
  RunRecord(const ExperimentConfig& config, const std::string& command)
      : start_(std::chrono::steady_clock::now()) {
    json_["version"] = kArtifactVersion;
    json_["command"] = command;
    json_["config"] = config_echo(config);
    json_["seeds"] = {{"master_seed", config.seed},
                      {"replicate_streams", {{"start", 0}, {"count", config.replicates}}},
                      {"aux_stream_base", kAuxStreamBase}};
  }

  nlohmann::json& payload() { return json_["payload"]; }
  void add_file(const std::string& path) { json_["files"].push_back(path); }

  void write(const std::string& path) {
    const auto elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start_);
    json_["wall_seconds"] = elapsed.count();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << json_.dump(2) << '\n';
  }

 private:
  nlohmann::json json_;
  std::chrono::steady_clock::time_point start_;
};

inline std::string out_path(const ExperimentConfig& c,
                            const std::string& fallback_base,
                            const std::string& suffix) {
  const std::string base = c.basename.empty() ? fallback_base : c.basename;
  std::filesystem::create_directories(c.output_dir);
  return (std::filesystem::path(c.output_dir) / (base + suffix)).string();
}

}  // namespace detail

struct ChainOutput {
  std::string matrix_csv;
  std::string pi_csv;
  std::string run_json;
  PriceDistribution pi;
  double residual = 0.0;
};

// Writes the low-traffic transition matrix and its invariant distribution.
inline ChainOutput cmd_chain(const ExperimentConfig& config) {
  config.validate_common();
  const ModelParams params = config.params();
  cda::detail::check_chain_params(params);

  detail::RunRecord record(config, "chain");
  ChainOutput out;
  out.matrix_csv = detail::out_path(config, "chain", "_matrix.csv");
  out.pi_csv = detail::out_path(config, "chain", "_pi.csv");
  out.run_json = detail::out_path(config, "chain", "_run.json");

  const TransitionMatrix m = transition_matrix(params);
  out.pi = invariant_distribution(m);
  out.residual = stationarity_residual(m, out.pi);

  CsvWriter matrix(out.matrix_csv);
  matrix.row("N", "n", "from", "to", "prob");
  for (int p = 1; p <= m.size; ++p)
    for (int q = 1; q <= m.size; ++q)
      matrix.row(params.num_prices, params.max_jump, p, q, m.at(p, q));
  matrix.close();

  CsvWriter pi(out.pi_csv);
  pi.row("N", "n", "price", "prob");
  for (int p = 1; p <= m.size; ++p)
    pi.row(params.num_prices, params.max_jump, p,
           out.pi[static_cast<std::size_t>(p) - 1]);
  pi.close();

  record.payload() = {{"stationarity_residual", out.residual}};
  record.add_file(out.matrix_csv);
  record.add_file(out.pi_csv);
  record.write(out.run_json);
  return out;
}

struct SimulateOutput {
  std::string hist_csv;
  std::string run_json;
  PriceDistribution empirical;
  PriceDistribution low_traffic;
  double tv = 0.0;
};

// Monte Carlo price-frequency histogram next to the low-traffic invariant
// distribution. The run length is given either in order arrivals (--events)
// or in recorded trades (--trades).
inline SimulateOutput cmd_simulate(const ExperimentConfig& config) {
  config.validate_common();
  const ModelParams params = config.params();
  cda::detail::check_chain_params(params);
  if ((config.events == 0) == (config.trades == 0))
    throw std::invalid_argument("specify exactly one of events or trades");

  detail::RunRecord record(config, "simulate");
  SimulateOutput out;
  out.hist_csv = detail::out_path(config, "simulate", ".csv");
  out.run_json = detail::out_path(config, "simulate", "_run.json");

  Rng rng(RngSpec{config.seed, 0});
  const Price opening = config.opening_or_median();
  if (config.events > 0) {
    const std::uint64_t burn =
        config.burn_in == kAutoBurnIn ? config.events / 10 : config.burn_in;
    out.empirical =
        equilibrium_histogram(params, opening, config.events, burn, rng);
  } else {
    const std::uint64_t burn =
        config.burn_in == kAutoBurnIn ? config.trades / 10 : config.burn_in;
    out.empirical =
        trade_driven_histogram(params, opening, config.trades, burn, rng);
  }
  out.low_traffic = invariant_distribution(transition_matrix(params));
  out.tv = total_variation(out.empirical, out.low_traffic);

  CsvWriter hist(out.hist_csv);
  hist.row("price", "frequency", "pi_lowtraffic");
  for (int p = 1; p <= params.num_prices; ++p)
    hist.row(p, out.empirical[static_cast<std::size_t>(p) - 1],
             out.low_traffic[static_cast<std::size_t>(p) - 1]);
  hist.close();

  record.payload() = {{"total_variation", out.tv}};
  record.add_file(out.hist_csv);
  record.write(out.run_json);
  return out;
}

struct FptOutput {
  std::string samples_csv;
  std::string hist_csv;
  std::string ecdf_csv;  // empty when the mixture does not apply
  std::string run_json;
  SampleSummary time_summary;
  SampleSummary log_summary;
  std::uint64_t censored = 0;
  double chain_mean = 0.0;
  std::optional<KsResult> ks;
};

// First-passage experiment: per-replicate samples, log histogram with a
// moment normal fit, and (for odd N, max_jump 1) the mixture comparison with
// ECDF pairs and a permutation KS test.
inline FptOutput cmd_fpt(const ExperimentConfig& config) {
  config.validate_common();
  const ModelParams params = config.params();
  if (params.num_prices < 3)
    throw std::invalid_argument("fpt requires N >= 3");
  if (config.replicates < 1)
    throw std::invalid_argument("replicates must be >= 1");

  detail::RunRecord record(config, "fpt");
  FptOutput out;
  out.samples_csv = detail::out_path(config, "fpt", "_samples.csv");
  out.hist_csv = detail::out_path(config, "fpt", "_log_hist.csv");
  out.run_json = detail::out_path(config, "fpt", "_run.json");

  const auto samples =
      first_passage_batch(params, config.replicates, RngSpec{config.seed, 0},
                          config.event_cap, config.threads);

  CsvWriter sc(out.samples_csv);
  sc.row("replicate", "hit_time", "events", "hit_price", "censored");
  std::vector<double> times;
  times.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const FptSample& s = samples[i];
    sc.row(static_cast<std::uint64_t>(i), s.hit_time, s.events, s.hit_price,
           s.censored ? 1 : 0);
    if (s.censored) ++out.censored;
    else times.push_back(s.hit_time);
  }
  sc.close();
  if (times.empty()) throw std::runtime_error("all replicates censored");

  std::vector<double> log_times;
  log_times.reserve(times.size());
  for (double t : times) log_times.push_back(std::log(t));
  out.time_summary = summarize(times);
  out.log_summary = summarize(log_times);
  out.chain_mean = mean_fpt_continuous(params);

  const int bins = config.bins > 0 ? config.bins : freedman_diaconis_bins(log_times);
  const HistogramResult hist = histogram(log_times, bins);
  CsvWriter hc(out.hist_csv);
  hc.row("bin_lo", "bin_hi", "count");
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    hc.row(hist.edges[i], hist.edges[i + 1], hist.counts[i]);
  hc.close();

  record.payload() = {
      {"mean_time", out.time_summary.mean},
      {"mean_time_se", out.time_summary.std_error},
      {"mean_log_time", out.log_summary.mean},
      {"mean_log_time_se", out.log_summary.std_error},
      {"log_skewness", out.log_summary.skewness},
      {"chain_mean_fpt", out.chain_mean},
      {"censored", out.censored},
      {"hist_fit", {{"mean", hist.fit_mean}, {"sd", hist.fit_sd}}}};

  const bool mixture_applies =
      params.max_jump == 1 && params.num_prices % 2 == 1;
  if (mixture_applies) {
    const MixtureApprox approx(params);
    const auto mix = mixture_batch(approx, params.num_prices,
                                   config.replicates,
                                   RngSpec{config.seed, kAuxStreamBase});
    std::vector<double> log_mix;
    log_mix.reserve(mix.size());
    for (double t : mix) log_mix.push_back(std::log(t));

    out.ecdf_csv = detail::out_path(config, "fpt", "_ecdf.csv");
    CsvWriter ec(out.ecdf_csv);
    ec.row("series", "log_t", "cdf");
    const Ecdf sim_ecdf(log_times);
    const Ecdf mix_ecdf(log_mix);
    for (std::size_t i = 0; i < sim_ecdf.sorted().size(); ++i)
      ec.row("simulated", sim_ecdf.sorted()[i],
             static_cast<double>(i + 1) / static_cast<double>(sim_ecdf.sorted().size()));
    for (std::size_t i = 0; i < mix_ecdf.sorted().size(); ++i)
      ec.row("mixture", mix_ecdf.sorted()[i],
             static_cast<double>(i + 1) / static_cast<double>(mix_ecdf.sorted().size()));
    ec.close();
    record.add_file(out.ecdf_csv);

    Rng ks_rng(RngSpec{config.seed, kAuxStreamBase + 1});
    out.ks = ks_two_sample(log_times, log_mix, config.ks_replicates, ks_rng);
    record.payload()["mixture"] = {
        {"mean", mixture_mean(approx, params.num_prices)},
        {"sample_mean", summarize(mix).mean},
        {"ks_statistic", out.ks->statistic},
        {"ks_p_value", out.ks->p_value},
        {"ks_sim_above", out.ks->d_a_above},
        {"ks_mixture_above", out.ks->d_b_above},
        {"ks_replicates", out.ks->replicates}};
  }

  record.add_file(out.samples_csv);
  record.add_file(out.hist_csv);
  record.write(out.run_json);
  return out;
}

struct SweepRow {
  int num_prices = 0;
  int max_jump = 0;
  double rho = 0.0;
  double t_bar = 0.0;
  double t_bar_se = 0.0;
  double mu_t = 0.0;
  double delta_pct = 0.0;
  std::uint64_t censored = 0;
  std::string status = "ok";
};

struct SweepOutput {
  std::string csv;
  std::string run_json;
  std::vector<SweepRow> rows;
};

// Table-shaped sweep over (N, n) cells and traffic intensities: Monte Carlo
// mean, analytic low-traffic mean, and the approximation's relative error
// delta_pct = (mu_T - T_bar) / T_bar * 100. Cell failures are recorded and
// the sweep continues.
inline SweepOutput cmd_sweep(const ExperimentConfig& config) {
  config.validate_common();
  if (config.cells.empty() || config.rhos.empty())
    throw std::invalid_argument("sweep needs at least one cell and one rho");
  if (config.replicates < 1)
    throw std::invalid_argument("replicates must be >= 1");

  detail::RunRecord record(config, "sweep");
  SweepOutput out;
  out.csv = detail::out_path(config, "sweep", ".csv");
  out.run_json = detail::out_path(config, "sweep", "_run.json");

  std::uint64_t cell_index = 0;
  for (const auto& [N, n] : config.cells) {
    for (double rho : config.rhos) {
      SweepRow row;
      row.num_prices = N;
      row.max_jump = n;
      row.rho = rho;
      try {
        const ModelParams params = ModelParams::from_traffic(N, n, rho, config.mu);
        cda::detail::check_chain_params(params);
        const auto samples = first_passage_batch(
            params, config.replicates,
            RngSpec{config.seed, cell_index * (kAuxStreamBase << 1)},
            config.event_cap, config.threads);
        std::vector<double> times;
        for (const auto& s : samples) {
          if (s.censored) ++row.censored;
          else times.push_back(s.hit_time);
        }
        if (times.empty()) throw std::runtime_error("all replicates censored");
        const SampleSummary summary = summarize(times);
        row.t_bar = summary.mean;
        row.t_bar_se = summary.std_error;
        row.mu_t = mean_fpt_continuous(params);
        row.delta_pct = (row.mu_t - row.t_bar) / row.t_bar * 100.0;
      } catch (const std::exception& e) {
        row.status = e.what();
      }
      out.rows.push_back(std::move(row));
      ++cell_index;
    }
  }

  CsvWriter sc(out.csv);
  sc.row("N", "n", "rho", "t_bar", "t_bar_se", "mu_t", "delta_pct",
         "replicates", "censored", "status");
  for (const SweepRow& r : out.rows)
    sc.row(r.num_prices, r.max_jump, r.rho, r.t_bar, r.t_bar_se, r.mu_t,
           r.delta_pct, config.replicates, r.censored, r.status);
  sc.close();

  nlohmann::json cells = nlohmann::json::array();
  for (const SweepRow& r : out.rows)
    cells.push_back({{"N", r.num_prices},
                     {"n", r.max_jump},
                     {"rho", r.rho},
                     {"status", r.status}});
  record.payload() = {{"cells", cells}};
  record.add_file(out.csv);
  record.write(out.run_json);
  return out;
}

}  // namespace cda::cli
