#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cda/cli.hpp"

using namespace cda;
using cda::cli::ExperimentConfig;

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("cda_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& dir) {
  const std::string cmd = std::string(CDA_CLI_PATH) + " " + args + " > " +
                          (dir / "stdout.txt").string() + " 2> " +
                          (dir / "stderr.txt").string();
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("chain command reproduces the frozen matrix and distribution") {
  const auto dir = fresh_dir("chain");
  ExperimentConfig cfg;
  cfg.num_prices = 10;
  cfg.max_jump = 2;
  cfg.output_dir = dir.string();
  const auto out = cli::cmd_chain(cfg);

  const auto matrix_table = read_csv(out.matrix_csv);
  REQUIRE(matrix_table.header ==
          std::vector<std::string>{"N", "n", "from", "to", "prob"});
  REQUIRE(matrix_table.rows.size() == 100);
  const auto exact = transition_matrix(cfg.params());
  for (const auto& row : matrix_table.rows) {
    const int p = std::stoi(row[2]);
    const int q = std::stoi(row[3]);
    REQUIRE(std::abs(std::stod(row[4]) - exact.at(p, q)) < 1e-12);
  }

  const auto pi_table = read_csv(out.pi_csv);
  REQUIRE(pi_table.rows.size() == 10);
  const std::vector<double> reference = {0.1171, 0.0895, 0.1,    0.0961, 0.0974,
                                       0.0974, 0.0961, 0.1,    0.0895, 0.1171};
  for (std::size_t i = 0; i < pi_table.rows.size(); ++i)
    REQUIRE(std::abs(std::stod(pi_table.rows[i][3]) - reference[i]) < 1e-3);
}

TEST_CASE("chain command gives the uniform distribution for n=1") {
  const auto dir = fresh_dir("chain_uniform");
  ExperimentConfig cfg;
  cfg.num_prices = 50;
  cfg.max_jump = 1;
  cfg.output_dir = dir.string();
  const auto out = cli::cmd_chain(cfg);
  const auto pi_table = read_csv(out.pi_csv);
  REQUIRE(pi_table.rows.size() == 50);
  for (const auto& row : pi_table.rows)
    REQUIRE(std::abs(std::stod(row[3]) - 0.02) < 1e-14);
}

TEST_CASE("invalid parameters produce no files") {
  const auto dir = fresh_dir("chain_invalid");
  ExperimentConfig cfg;
  cfg.num_prices = 10;
  cfg.max_jump = 0;
  cfg.output_dir = dir.string();
  REQUIRE_THROWS_AS(cli::cmd_chain(cfg), std::invalid_argument);
  REQUIRE(fs::is_empty(dir));
}

TEST_CASE("matrix csv round-trips through the invariant solver") {
  const auto dir = fresh_dir("roundtrip");
  ExperimentConfig cfg;
  cfg.num_prices = 17;
  cfg.max_jump = 4;
  cfg.output_dir = dir.string();
  const auto out = cli::cmd_chain(cfg);

  const auto table = read_csv(out.matrix_csv);
  TransitionMatrix reloaded(cfg.num_prices);
  for (const auto& row : table.rows)
    reloaded.at(std::stoi(row[2]), std::stoi(row[3])) = std::stod(row[4]);
  const auto pi = invariant_distribution(reloaded);

  const auto pi_table = read_csv(out.pi_csv);
  for (std::size_t i = 0; i < pi_table.rows.size(); ++i)
    REQUIRE(std::abs(std::stod(pi_table.rows[i][3]) - pi[i]) < 1e-9);
}

TEST_CASE("simulate command is deterministic in its payload bytes") {
  ExperimentConfig cfg;
  cfg.num_prices = 10;
  cfg.max_jump = 2;
  cfg.rho = 0.3;
  cfg.trades = 2000;
  cfg.seed = 99;

  const auto dir1 = fresh_dir("sim1");
  cfg.output_dir = dir1.string();
  const auto out1 = cli::cmd_simulate(cfg);

  const auto dir2 = fresh_dir("sim2");
  cfg.output_dir = dir2.string();
  const auto out2 = cli::cmd_simulate(cfg);

  REQUIRE(slurp(out1.hist_csv) == slurp(out2.hist_csv));
  REQUIRE(out1.tv == out2.tv);

  const auto table = read_csv(out1.hist_csv);
  REQUIRE(table.header ==
          std::vector<std::string>{"price", "frequency", "pi_lowtraffic"});
  double total = 0.0;
  for (const auto& row : table.rows) total += std::stod(row[1]);
  REQUIRE(total == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("simulate command requires exactly one run-length setting") {
  ExperimentConfig cfg;
  cfg.output_dir = fresh_dir("sim_bad").string();
  cfg.events = 0;
  cfg.trades = 0;
  REQUIRE_THROWS_AS(cli::cmd_simulate(cfg), std::invalid_argument);
  cfg.events = 10;
  cfg.trades = 10;
  REQUIRE_THROWS_AS(cli::cmd_simulate(cfg), std::invalid_argument);
}

TEST_CASE("fpt command emits samples, histogram, ecdf and ks") {
  const auto dir = fresh_dir("fpt");
  ExperimentConfig cfg;
  cfg.num_prices = 11;
  cfg.max_jump = 1;
  cfg.rho = 0.1;
  cfg.replicates = 1500;
  cfg.ks_replicates = 500;
  cfg.seed = 7;
  cfg.output_dir = dir.string();
  const auto out = cli::cmd_fpt(cfg);

  const auto samples = read_csv(out.samples_csv);
  REQUIRE(samples.rows.size() == 1500);
  REQUIRE(samples.header ==
          std::vector<std::string>{"replicate", "hit_time", "events",
                                   "hit_price", "censored"});
  for (const auto& row : samples.rows) {
    const int hit = std::stoi(row[3]);
    REQUIRE((hit == 1 || hit == 11));
    REQUIRE(row[4] == "0");
  }
  REQUIRE(out.censored == 0);
  REQUIRE(out.ks.has_value());

  const auto ecdf = read_csv(out.ecdf_csv);
  std::size_t sim_rows = 0;
  std::size_t mix_rows = 0;
  for (const auto& row : ecdf.rows) {
    if (row[0] == "simulated") ++sim_rows;
    if (row[0] == "mixture") ++mix_rows;
  }
  REQUIRE(sim_rows == 1500);
  REQUIRE(mix_rows == 1500);

  const auto record = nlohmann::json::parse(slurp(out.run_json));
  REQUIRE(record["command"] == "fpt");
  REQUIRE(record["payload"].contains("mixture"));
  REQUIRE(record["payload"]["censored"] == 0);

  const auto hist = read_csv(out.hist_csv);
  std::uint64_t count = 0;
  for (const auto& row : hist.rows) count += std::stoull(row[2]);
  REQUIRE(count == 1500);
}

TEST_CASE("fpt command skips the mixture off its domain") {
  const auto dir = fresh_dir("fpt_even");
  ExperimentConfig cfg;
  cfg.num_prices = 10;
  cfg.max_jump = 5;
  cfg.rho = 0.5;
  cfg.replicates = 1500;
  cfg.seed = 8;
  cfg.output_dir = dir.string();
  const auto out = cli::cmd_fpt(cfg);
  REQUIRE(!out.ks.has_value());
  REQUIRE(out.ecdf_csv.empty());
  REQUIRE(out.chain_mean == Catch::Approx(5.46).margin(0.01));
  // sample mean sits near the Monte Carlo reference value, well above the
  // low-traffic prediction at this traffic intensity
  REQUIRE(std::abs(out.time_summary.mean - 8.72) <=
          3.0 * out.time_summary.std_error);
}

TEST_CASE("simulate command accepts an event-driven run length") {
  const auto dir = fresh_dir("sim_events");
  ExperimentConfig cfg;
  cfg.num_prices = 10;
  cfg.max_jump = 2;
  cfg.rho = 0.9;
  cfg.events = 200000;
  cfg.seed = 12;
  cfg.output_dir = dir.string();
  const auto out = cli::cmd_simulate(cfg);
  REQUIRE(fs::exists(out.hist_csv));
  REQUIRE(out.tv > 0.0);
  REQUIRE(out.tv < 0.5);
}

TEST_CASE("fpt command reports fully censored runs as an error") {
  ExperimentConfig cfg;
  cfg.num_prices = 51;
  cfg.max_jump = 1;
  cfg.rho = 0.1;
  cfg.replicates = 20;
  cfg.event_cap = 5;
  cfg.output_dir = fresh_dir("fpt_censored").string();
  REQUIRE_THROWS_AS(cli::cmd_fpt(cfg), std::runtime_error);
}

TEST_CASE("sweep command fills the grid and survives bad cells") {
  const auto dir = fresh_dir("sweep");
  ExperimentConfig cfg;
  cfg.cells = {{10, 5}, {10, 0}};  // second cell is invalid
  cfg.rhos = {0.5};
  cfg.replicates = 400;
  cfg.seed = 5;
  cfg.output_dir = dir.string();
  const auto out = cli::cmd_sweep(cfg);
  REQUIRE(out.rows.size() == 2);
  REQUIRE(out.rows[0].status == "ok");
  REQUIRE(out.rows[0].mu_t == Catch::Approx(5.46).margin(0.01));
  REQUIRE(out.rows[0].delta_pct ==
          Catch::Approx((out.rows[0].mu_t - out.rows[0].t_bar) /
                        out.rows[0].t_bar * 100.0));
  REQUIRE(out.rows[1].status != "ok");

  const auto table = read_csv(out.csv);
  REQUIRE(table.rows.size() == 2);
  REQUIRE(table.header[0] == "N");
}

TEST_CASE("cli binary: happy path, validation failure, help") {
  const auto dir = fresh_dir("bin");
  REQUIRE(run_cli("chain --N 10 --n 2 -o " + (dir / "out").string(), dir) == 0);
  REQUIRE(fs::exists(dir / "out" / "chain_matrix.csv"));
  REQUIRE(fs::exists(dir / "out" / "chain_pi.csv"));
  REQUIRE(fs::exists(dir / "out" / "chain_run.json"));

  REQUIRE(run_cli("--help", dir) == 0);

  const int rc = run_cli("chain --N 10 --n 0 -o " + (dir / "bad").string(), dir);
  REQUIRE(rc != 0);
  const auto err = nlohmann::json::parse(slurp((dir / "stderr.txt").string()));
  REQUIRE(err.contains("error"));
  REQUIRE(!fs::exists(dir / "bad" / "chain_matrix.csv"));
}

TEST_CASE("cli binary: basename option names the artifact") {
  const auto dir = fresh_dir("basename");
  REQUIRE(run_cli("simulate --N 10 --n 2 --rho 0.3 --trades 500 --seed 3 "
                  "--basename fig1 -o " + dir.string(), dir) == 0);
  REQUIRE(fs::exists(dir / "fig1.csv"));
  REQUIRE(fs::exists(dir / "fig1_run.json"));
}

TEST_CASE("cli binary: config file with flag override") {
  const auto dir = fresh_dir("config");
  {
    std::ofstream cfg(dir / "run.ini");
    cfg << "[simulate]\n"
        << "N=10\n"
        << "n=2\n"
        << "rho=0.9\n"
        << "seed=4\n";
  }
  REQUIRE(run_cli("--config " + (dir / "run.ini").string() +
                  " simulate --trades 500 -o " + dir.string(), dir) == 0);
  const auto record = nlohmann::json::parse(slurp((dir / "simulate_run.json").string()));
  REQUIRE(record["config"]["rho"] == 0.9);
  REQUIRE(record["config"]["trades"] == 500);
}
