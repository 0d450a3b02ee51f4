#pragma once

// Command-line front end: estimate, dim and simulate subcommands.
//
// Exit codes: 0 success, 2 unreadable or malformed input, 3 estimation
// failure, 64 usage error.

#include "samm/csv.hpp"
#include "samm/error.hpp"
#include "samm/estimator.hpp"
#include "samm/simgen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace samm::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int
{
  ok = 0,
  input_error = 2,
  runtime_error = 3,
  usage_error = 64,
};

/// Usage problems detected after CLI11 parsing (bad values, bad combinations).
class UsageError : public Error
{
  using Error::Error;
};

struct RunConfig
{
  std::string command;
  std::string input;
  std::string output; // empty: standard output
  std::string format; // json or csv; empty picks the command default
  Eigen::Index m_star = 0;
  double tol = 1e-6;
  std::size_t max_iter = 5000;
  std::string kernel = "linear_decay";
  std::string solver = "barrier";
  std::string max_freq = "full";
  std::optional<double> h1;
  std::optional<double> ridge;
  double drop_ratio = 0.35;
  bool quiet = false;
  unsigned threads = 1;

  int example = 1;
  std::optional<Eigen::Index> n;
  std::optional<Eigen::Index> d;
  std::optional<double> sigma;
  std::size_t reps = 50;
  std::uint64_t seed = 1;
  std::string dataset_out;
  std::size_t rep = 0;
};

inline unsigned default_threads()
{
  if (const char* env = std::getenv("SAMM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0)
        return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline SammOptions estimator_options(const RunConfig& cfg)
{
  SammOptions opt;
  try {
    opt.kernel = kernel_from_string(cfg.kernel);
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  if (cfg.solver == "barrier")
    opt.solver.method = MaxMinMethod::barrier;
  else if (cfg.solver == "subgradient")
    opt.solver.method = MaxMinMethod::smoothed_subgradient;
  else
    throw UsageError("--solver must be 'barrier' or 'subgradient'");
  opt.solver.tol = cfg.tol;
  opt.solver.max_iter = cfg.max_iter;
  if (cfg.max_freq != "full") {
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(cfg.max_freq, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != cfg.max_freq.size() || v < 1)
      throw UsageError("--max-freq must be a positive integer or 'full'");
    opt.max_freq = static_cast<std::size_t>(v);
  }
  opt.h1 = cfg.h1;
  opt.ridge = cfg.ridge;
  return opt;
}

inline nlohmann::json matrix_rows(const Matrix& m)
{
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json config_json(const RunConfig& cfg)
{
  nlohmann::json j;
  j["command"] = cfg.command;
  if (cfg.command == "simulate") {
    j["example"] = cfg.example;
    j["reps"] = cfg.reps;
    j["seed"] = cfg.seed;
  } else {
    j["input"] = cfg.input;
  }
  if (cfg.command == "estimate")
    j["m_star"] = cfg.m_star;
  if (cfg.command == "dim")
    j["drop_ratio"] = cfg.drop_ratio;
  j["tol"] = cfg.tol;
  j["max_iter"] = cfg.max_iter;
  j["kernel"] = cfg.kernel;
  j["solver"] = cfg.solver;
  j["max_freq"] = cfg.max_freq;
  j["h1"] = cfg.h1 ? nlohmann::json(*cfg.h1) : nlohmann::json(nullptr);
  j["ridge"] = cfg.ridge ? nlohmann::json(*cfg.ridge) : nlohmann::json(nullptr);
  return j;
}

/// Opens the destination, or returns the fallback stream for an empty path.
class OutputSink
{
public:
  OutputSink(const std::string& path, std::ostream& fallback)
    : path_(path), stream_(&fallback)
  {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_)
        throw ParseError(0, "cannot open output file '" + path + "'");
      stream_ = &file_;
    }
  }

  std::ostream& stream() { return *stream_; }

  void finish()
  {
    stream_->flush();
    if (!*stream_)
      throw ParseError(0, "failed writing output" + (path_.empty() ? std::string() : " '" + path_ + "'"));
  }

private:
  std::string path_;
  std::ofstream file_;
  std::ostream* stream_;
};

inline int cmd_estimate(const RunConfig& cfg, std::ostream& out)
{
  const SammOptions opt = estimator_options(cfg);
  if (cfg.format != "json" && cfg.format != "csv")
    throw UsageError("--format must be 'json' or 'csv'");
  const NamedDataset input = read_csv_file(cfg.input);
  const EstimateResult res = estimate(input.data, cfg.m_star, opt);

  OutputSink sink(cfg.output, out);
  if (cfg.format == "csv") {
    for (Eigen::Index i = 0; i < res.pi_hat.rows(); ++i)
      for (Eigen::Index j = 0; j < res.pi_hat.cols(); ++j)
        sink.stream() << format_double(res.pi_hat(i, j)) << (j + 1 == res.pi_hat.cols() ? '\n' : ',');
    sink.finish();
    return ok;
  }

  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = config_json(cfg);
  j["predictors"] = input.predictor_names;
  const Schedule& s = res.schedule;
  j["schedule"] = {{"h1", *s.h1},         {"rho1", s.rho1},       {"a_h", s.a_h},
                   {"a_rho", s.a_rho},     {"h_max", s.h_max},     {"rho_min", s.rho_min},
                   {"m_star", s.m_star},   {"d", s.d},             {"iterations", res.iterations.size()}};
  j["pi_hat"] = matrix_rows(res.pi_hat);
  auto basis = nlohmann::json::array();
  for (Eigen::Index c = 0; c < res.basis_vectors.cols(); ++c) {
    auto v = nlohmann::json::array();
    for (Eigen::Index r = 0; r < res.basis_vectors.rows(); ++r)
      v.push_back(res.basis_vectors(r, c));
    basis.push_back(std::move(v));
  }
  j["basis_vectors"] = std::move(basis);
  if (!cfg.quiet) {
    auto iters = nlohmann::json::array();
    for (const auto& it : res.iterations)
      iters.push_back({{"k", it.k},
                       {"h", it.h},
                       {"rho", it.rho},
                       {"objective", it.report.objective},
                       {"gap", it.report.gap},
                       {"certified", it.report.certified}});
    j["iterations"] = std::move(iters);
  }
  sink.stream() << j.dump(2) << '\n';
  sink.finish();
  return ok;
}

inline int cmd_dim(const RunConfig& cfg, std::ostream& out)
{
  const SammOptions opt = estimator_options(cfg);
  if (cfg.format != "json" && cfg.format != "csv")
    throw UsageError("--format must be 'json' or 'csv'");
  if (!(cfg.drop_ratio > 0.0 && cfg.drop_ratio < 1.0))
    throw UsageError("--drop-ratio must lie in (0, 1)");
  const NamedDataset input = read_csv_file(cfg.input);
  const BetaMatrix betas = first_step_betas(input.data, opt);
  const DimensionScan scan = dimension_scan(betas, cfg.tol, cfg.drop_ratio, opt.solver);

  OutputSink sink(cfg.output, out);
  if (cfg.format == "csv") {
    sink.stream() << "m,R\n0," << format_double(scan.R0) << '\n';
    for (Eigen::Index m = 0; m < scan.R.size(); ++m)
      sink.stream() << m + 1 << ',' << format_double(scan.R(m)) << '\n';
    sink.stream() << "m_hat," << scan.m_hat << '\n';
  } else {
    nlohmann::json j;
    j["version"] = kVersion;
    j["config"] = config_json(cfg);
    j["R"] = std::vector<double>(scan.R.data(), scan.R.data() + scan.R.size());
    j["R0"] = scan.R0;
    j["m_hat"] = scan.m_hat;
    sink.stream() << j.dump(2) << '\n';
  }
  sink.finish();
  return ok;
}

inline SimSpec sim_spec(const RunConfig& cfg)
{
  SimSpec spec;
  try {
    spec = SimSpec::defaults(example_from_int(cfg.example));
    if (cfg.n)
      spec.n = *cfg.n;
    if (cfg.d)
      spec.d = *cfg.d;
    if (cfg.sigma)
      spec.sigma = *cfg.sigma;
    spec.reps = cfg.reps;
    spec.seed = cfg.seed;
    spec.validate();
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  return spec;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
  const SimSpec spec = sim_spec(cfg);
  const SammOptions opt = estimator_options(cfg);
  if (cfg.format != "json" && cfg.format != "csv")
    throw UsageError("--format must be 'json' or 'csv'");

  if (!cfg.dataset_out.empty()) {
    const SimSample sample = generate(spec, cfg.rep);
    OutputSink sink(cfg.dataset_out, out);
    write_csv(sink.stream(), sample.data);
    sink.finish();
    return ok;
  }

  const SimSummary sum = run_campaign(spec, opt, cfg.threads);
  OutputSink sink(cfg.output, out);
  if (cfg.format == "csv") {
    auto& o = sink.stream();
    o << "rep,loss_first,loss_final\n";
    for (std::size_t r = 0; r < sum.loss_first.size(); ++r)
      o << r << ',' << format_double(sum.loss_first[r]) << ',' << format_double(sum.loss_final[r]) << '\n';
    o << "mean," << format_double(sum.mean_loss_first) << ',' << format_double(sum.mean_loss_final) << '\n';
    o << "std," << format_double(sum.std_first) << ',' << format_double(sum.std_final) << '\n';
  } else {
    nlohmann::json j;
    j["version"] = kVersion;
    j["config"] = config_json(cfg);
    j["spec"] = {{"example", cfg.example}, {"n", spec.n}, {"d", spec.d}, {"sigma", spec.sigma},
                 {"reps", spec.reps},      {"seed", spec.seed}, {"m_star", spec.m_star()}};
    j["loss_first"] = sum.loss_first;
    j["loss_final"] = sum.loss_final;
    j["mean_loss_first"] = sum.mean_loss_first;
    j["mean_loss_final"] = sum.mean_loss_final;
    j["std_first"] = sum.std_first;
    j["std_final"] = sum.std_final;
    sink.stream() << j.dump(2) << '\n';
  }
  sink.finish();
  if (!cfg.quiet)
    err << "simulate: " << spec.reps << " replications in " << sum.runtime << " s\n";
  return ok;
}

inline void add_solver_flags(CLI::App& cmd, RunConfig& cfg)
{
  cmd.add_option("--tol", cfg.tol, "Max-min solver tolerance")->check(CLI::PositiveNumber);
  cmd.add_option("--max-iter", cfg.max_iter, "Max-min iteration budget")->check(CLI::PositiveNumber);
  cmd.add_option("--kernel", cfg.kernel, "Kernel family")->check(CLI::IsMember({"linear_decay", "quartic"}));
  cmd.add_option("--solver", cfg.solver, "Max-min solver")->check(CLI::IsMember({"barrier", "subgradient"}));
  cmd.add_option("--max-freq", cfg.max_freq, "Basis frequency cap per coordinate, or 'full'");
  cmd.add_option("--h1", cfg.h1, "Initial bandwidth (default: nearest-neighbour rule)")->check(CLI::PositiveNumber);
  cmd.add_option("--ridge", cfg.ridge, "Local-linear ridge (default 1/n)")->check(CLI::NonNegativeNumber);
}

inline void add_output_flags(CLI::App& cmd, RunConfig& cfg)
{
  cmd.add_option("-o,--output", cfg.output, "Output file (default: standard output)");
  cmd.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

/// Entry point shared by the executable and the tests.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Structural adaptation via maximum minimization: EDR subspace estimation"};
  app.name("samm");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunConfig cfg;
  cfg.threads = default_threads();

  auto* est = app.add_subcommand("estimate", "Estimate the EDR projector from a CSV dataset");
  est->add_option("-i,--input", cfg.input, "Input CSV (column 'y' is the response)")->required();
  est->add_option("-m,--m", cfg.m_star, "Structural dimension m*")->required()->check(CLI::PositiveNumber);
  est->add_flag("-q,--quiet", cfg.quiet, "Omit the iteration trace");
  add_solver_flags(*est, cfg);
  add_output_flags(*est, cfg);

  auto* dim = app.add_subcommand("dim", "Scan R(m) over m = 1..d and suggest m*");
  dim->add_option("-i,--input", cfg.input, "Input CSV (column 'y' is the response)")->required();
  dim->add_option("--drop-ratio", cfg.drop_ratio, "R(m) / R(m-1) below which the drop into m counts as sharp");
  add_solver_flags(*dim, cfg);
  add_output_flags(*dim, cfg);

  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo campaign on a synthetic example");
  sim->add_option("--example", cfg.example, "Example 1..4")->required()->check(CLI::Range(1, 4));
  sim->add_option("--n", cfg.n, "Sample size")->check(CLI::PositiveNumber);
  sim->add_option("--d", cfg.d, "Dimension")->check(CLI::PositiveNumber);
  sim->add_option("--sigma", cfg.sigma, "Noise level")->check(CLI::NonNegativeNumber);
  sim->add_option("--reps", cfg.reps, "Replications")->check(CLI::PositiveNumber);
  sim->add_option("--seed", cfg.seed, "Campaign seed");
  sim->add_option("--threads", cfg.threads, "Worker threads (default: $SAMM_THREADS)")->check(CLI::PositiveNumber);
  sim->add_option("--dataset-out", cfg.dataset_out, "Write the dataset of one replication as CSV and exit");
  sim->add_option("--rep", cfg.rep, "Replication index for --dataset-out");
  sim->add_flag("-q,--quiet", cfg.quiet, "Do not report the runtime");
  add_solver_flags(*sim, cfg);
  add_output_flags(*sim, cfg);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  try {
    if (est->parsed()) {
      cfg.command = "estimate";
      if (cfg.format.empty())
        cfg.format = "json";
      return cmd_estimate(cfg, out);
    }
    if (cfg.format.empty())
      cfg.format = "csv";
    if (dim->parsed()) {
      cfg.command = "dim";
      return cmd_dim(cfg, out);
    }
    cfg.command = "simulate";
    return cmd_simulate(cfg, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return usage_error;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return input_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return runtime_error;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i)
    args.emplace_back(argv[i]);
  return run(args, out, err);
}

} // namespace samm::cli
