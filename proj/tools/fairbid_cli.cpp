#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "fairbid/config_io.hpp"
#include "fairbid/coverage.hpp"
#include "fairbid/errors.hpp"
#include "fairbid/outer_solver.hpp"
#include "fairbid/simulator.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

LogLevel g_log_level = LogLevel::Info;

void init_log_level() {
  const char* env = std::getenv("FAIRBID_LOG");
  if (!env) return;
  const std::string v(env);
  if (v == "debug")
    g_log_level = LogLevel::Debug;
  else if (v == "info")
    g_log_level = LogLevel::Info;
  else if (v == "warn")
    g_log_level = LogLevel::Warn;
  else if (v == "error")
    g_log_level = LogLevel::Error;
}

void log_msg(LogLevel level, const std::string& msg) {
  static std::mutex mu;
  if (level < g_log_level) return;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples;
};

fairbid::RunConfig load_with_overrides(const CommonOpts& opts) {
  fairbid::RunConfig cfg = fairbid::load_run_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.samples) cfg.samples = *opts.samples;
  return cfg;
}

const fairbid::MarketInstance& require_market(const fairbid::RunConfig& cfg) {
  if (!cfg.market) throw fairbid::ConfigError("config has no market section");
  return *cfg.market;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(row);
  }
  return rows;
}

void write_json_file(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw fairbid::ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

fairbid::OuterSolverConfig solver_config(const fairbid::RunConfig& cfg,
                                         const std::string& trace_path) {
  fairbid::OuterSolverConfig sc;
  sc.epsilon = cfg.solver.epsilon;
  sc.gamma = cfg.solver.gamma;
  sc.xi = cfg.solver.xi;
  sc.max_iters = cfg.solver.max_iters;
  sc.trace_path = trace_path;
  return sc;
}

int cmd_solve(const CommonOpts& opts) {
  const fairbid::RunConfig cfg = load_with_overrides(opts);
  const auto& market = require_market(cfg);
  const fairbid::FairnessSpec spec =
      cfg.fairness ? *cfg.fairness
                   : fairbid::FairnessSpec::unconstrained(market.n, market.m);
  fs::create_directories(opts.out_dir);
  const fs::path out(opts.out_dir);

  const fairbid::OuterResult result =
      fairbid::solve(market, spec, solver_config(cfg, (out / "trace.csv").string()));
  for (const auto& w : result.estimates.warnings) log_msg(LogLevel::Warn, w);

  fairbid::save_alpha(result.alpha, (out / "alpha.json").string());
  fairbid::save_coverage(result.q, (out / "coverage.json").string());
  fairbid::save_summary(result, (out / "summary.json").string());
  std::ostringstream os;
  os << "revenue " << result.revenue << " after " << result.iters << " iterations ("
     << (result.converged ? "converged" : "iteration cap") << ")";
  log_msg(LogLevel::Info, os.str());
  std::cout << result.revenue << '\n';
  return 0;
}

int cmd_simulate(const CommonOpts& opts, const std::string& alpha_path) {
  const fairbid::RunConfig cfg = load_with_overrides(opts);
  const auto& market = require_market(cfg);
  const fairbid::ShiftMatrix alpha =
      alpha_path.empty() ? fairbid::ShiftMatrix::zero(market.n, market.m)
                         : fairbid::load_alpha(alpha_path);
  const fairbid::SimulationReport rep =
      fairbid::simulate(market, alpha, cfg.samples, cfg.seed);
  fs::create_directories(opts.out_dir);

  json j;
  j["schema_version"] = fairbid::kSchemaVersion;
  j["samples"] = rep.samples;
  j["seed"] = rep.seed;
  j["empirical_q"] = matrix_json(rep.empirical_q);
  j["empirical_q_stderr"] = matrix_json(rep.empirical_q_stderr);
  j["revenue_mean"] = rep.revenue_mean;
  j["revenue_stderr"] = rep.revenue_stderr;
  if (rep.has_payment_revenue) {
    j["payment_revenue_mean"] = rep.payment_revenue_mean;
    j["payment_revenue_stderr"] = rep.payment_revenue_stderr;
  }
  write_json_file(j, fs::path(opts.out_dir) / "simulation.json");
  std::cout << rep.revenue_mean << '\n';
  return 0;
}

int cmd_validate(const CommonOpts& opts) {
  const fairbid::RunConfig cfg = fairbid::load_run_config(opts.config_path);
  const auto& market = require_market(cfg);
  fairbid::ValidationReport rep =
      cfg.fairness ? fairbid::validate(market, *cfg.fairness) : fairbid::validate(market);
  for (const auto& w : rep.warnings) log_msg(LogLevel::Warn, w);
  if (!rep.ok) {
    for (const auto& e : rep.errors) std::cerr << e << '\n';
    return 2;
  }
  std::cout << "ok\n";
  return 0;
}

int cmd_ingest(const CommonOpts& opts) {
  const fairbid::RunConfig cfg = fairbid::load_run_config(opts.config_path);
  if (cfg.log_path.empty())
    throw fairbid::ConfigError("config has no ingest.log_path");
  const fairbid::BidLog log = fairbid::parse_log(cfg.log_path, cfg.log_format);
  for (const auto& w : log.warnings) log_msg(LogLevel::Warn, w);
  const auto pairs = fairbid::pair_keywords(log, cfg.fit_spec.thresholds);
  fs::create_directories(opts.out_dir);

  int emitted = 0;
  for (const auto& pair : pairs) {
    try {
      const fairbid::MarketInstance market = fairbid::fit_market(log, pair, cfg.fit_spec);
      const std::string name =
          "market_" + pair.keyword_a + "_" + pair.keyword_b + ".json";
      fairbid::save_market(market, (fs::path(opts.out_dir) / name).string());
      ++emitted;
    } catch (const std::exception& e) {
      log_msg(LogLevel::Warn, "skipping pair " + pair.keyword_a + "/" + pair.keyword_b +
                                  ": " + e.what());
    }
  }
  if (emitted == 0)
    log_msg(LogLevel::Warn, "no keyword pair produced a usable market");
  std::cout << emitted << '\n';
  return 0;
}

struct SweepRow {
  double ell = 0.0;
  bool ok = false;
  std::string status = "ok";
  double kappa = 0.0, d_tv = 0.0, slift = 0.0;
  double revenue_f = 0.0, revenue_m = 0.0;
  int solver_iters = 0;
  double sim_kappa = 0.0, sim_d_tv = 0.0, sim_slift = 0.0;
};

int cmd_sweep(const CommonOpts& opts, int grid_points, int jobs) {
  const fairbid::RunConfig cfg = load_with_overrides(opts);
  const auto& market = require_market(cfg);
  if (market.m != 2)
    log_msg(LogLevel::Warn,
            "sweep is defined for 2-type markets; applying the same bound to all types");
  if (grid_points < 2) throw fairbid::ConfigError("--ell-grid must be at least 2");
  fs::create_directories(opts.out_dir);

  const fairbid::ShiftMatrix alpha0 = fairbid::ShiftMatrix::zero(market.n, market.m);
  const double revenue_m = fairbid::revenue_of_shift(market, alpha0);
  const fairbid::CoverageMatrix q_m = fairbid::coverage_of_shift(market, alpha0);
  const fairbid::SimulationReport sim_m =
      fairbid::simulate(market, alpha0, cfg.samples, cfg.seed);

  std::vector<SweepRow> rows(grid_points);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= grid_points) return;
      SweepRow& row = rows[k];
      row.ell = 0.5 * k / (grid_points - 1.0);
      try {
        fairbid::FairnessSpec spec = fairbid::FairnessSpec::unconstrained(market.n, market.m);
        spec.lower.setConstant(row.ell);
        spec.upper.setConstant(1.0);
        spec.constrained.setConstant(true);

        fairbid::RunConfig point_cfg = cfg;
        const fairbid::OuterResult res =
            fairbid::solve(market, spec, solver_config(point_cfg, ""));
        const fairbid::FairnessMetrics exact =
            fairbid::metrics(q_m, revenue_m, res.q, res.revenue);
        const fairbid::SimulationReport sim_f =
            fairbid::simulate(market, res.alpha, cfg.samples, cfg.seed + 1 + k);
        const fairbid::FairnessMetrics simm = fairbid::metrics(sim_m, sim_f);

        row.kappa = exact.kappa;
        row.d_tv = exact.d_tv;
        row.slift = exact.slift;
        row.revenue_f = res.revenue;
        row.revenue_m = revenue_m;
        row.solver_iters = res.iters;
        row.sim_kappa = simm.kappa;
        row.sim_d_tv = simm.d_tv;
        row.sim_slift = simm.slift;
        row.ok = true;
      } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
        log_msg(LogLevel::Warn, "sweep point ell=" + std::to_string(row.ell) +
                                    " failed: " + e.what());
      }
    }
  };
  jobs = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const fs::path csv_path = fs::path(opts.out_dir) / "sweep.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw fairbid::ConfigError("cannot write " + csv_path.string());
  csv << "ell,kappa,d_tv,slift,revenue_F,revenue_M,solver_iters,"
         "sim_kappa,sim_d_tv,sim_slift,status\n";
  for (const auto& row : rows) {
    csv << row.ell << ',';
    if (row.ok) {
      csv << row.kappa << ',' << row.d_tv << ',' << row.slift << ',' << row.revenue_f
          << ',' << row.revenue_m << ',' << row.solver_iters << ',' << row.sim_kappa
          << ',' << row.sim_d_tv << ',' << row.sim_slift << ',';
    } else {
      csv << ",,,,,,,,,";
    }
    // commas inside error text would break the row
    std::string status = row.status;
    for (auto& ch : status)
      if (ch == ',' || ch == '\n') ch = ';';
    csv << '"' << status << '"' << '\n';
  }
  log_msg(LogLevel::Info, "wrote " + csv_path.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_log_level();
  CLI::App app{"fairness-constrained revenue-optimal auction toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string alpha_path;
  int grid_points = 11;
  int jobs = 1;

  auto add_common = [&](CLI::App* sub, bool needs_out = true) {
    sub->add_option("--config", opts.config_path, "JSON run config")->required();
    if (needs_out) sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", [&](const std::vector<std::string>& v) {
      opts.seed = std::stoull(v.at(0));
      return true;
    }, "RNG seed override");
    sub->add_option("--samples", [&](const std::vector<std::string>& v) {
      opts.samples = std::stoll(v.at(0));
      return true;
    }, "simulation sample count override");
  };

  CLI::App* solve = app.add_subcommand("solve", "run the constrained solver");
  add_common(solve);
  CLI::App* sweep = app.add_subcommand("sweep", "sweep the lower fairness bound");
  add_common(sweep);
  sweep->add_option("--ell-grid", grid_points, "number of grid points from 0 to 0.5");
  sweep->add_option("--jobs", jobs, "parallel solver runs");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo a shift matrix");
  add_common(simulate);
  simulate->add_option("--alpha", alpha_path, "shift matrix JSON (default: zero shifts)");
  CLI::App* ingest = app.add_subcommand("ingest", "fit markets from a bid log");
  add_common(ingest);
  CLI::App* validate_cmd = app.add_subcommand("validate", "check a config");
  add_common(validate_cmd, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(opts);
    if (sweep->parsed()) return cmd_sweep(opts, grid_points, jobs);
    if (simulate->parsed()) return cmd_simulate(opts, alpha_path);
    if (ingest->parsed()) return cmd_ingest(opts);
    if (validate_cmd->parsed()) return cmd_validate(opts);
  } catch (const fairbid::ConfigError& e) {
    log_msg(LogLevel::Error, e.what());
    return 1;
  } catch (const fairbid::StructuralError& e) {
    log_msg(LogLevel::Error, e.what());
    return 1;
  } catch (const fairbid::DomainError& e) {
    log_msg(LogLevel::Error, e.what());
    return 1;
  } catch (const fairbid::InfeasibleError& e) {
    log_msg(LogLevel::Error, e.what());
    return 2;
  } catch (const std::exception& e) {
    log_msg(LogLevel::Error, e.what());
    return 3;
  }
  return 0;
}
