#include "samm/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace samm;
namespace fs = std::filesystem;

namespace {

struct CliResult
{
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args)
{
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path tmp_path(const std::string& name)
{
  const fs::path dir = fs::path(SAMM_TEST_TMPDIR);
  fs::create_directories(dir);
  return dir / name;
}

std::string write_dataset(const std::string& name, const Dataset& data)
{
  const fs::path p = tmp_path(name);
  std::ofstream f(p);
  write_csv(f, data);
  return p.string();
}

std::string slurp(const fs::path& p)
{
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Matrix json_matrix(const nlohmann::json& rows)
{
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
  return m;
}

Dataset linear_fixture()
{
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1, 1);
  Dataset data;
  data.X.resize(100, 3);
  for (Eigen::Index i = 0; i < 100; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      data.X(i, j) = u(rng);
  data.Y = data.X * Vector((Vector(3) << 2, -1, 0.5).finished());
  return data;
}

Dataset sim_dataset(Example ex, Eigen::Index n, std::uint64_t seed, double sigma = -1)
{
  SimSpec s = SimSpec::defaults(ex);
  s.n = n;
  s.seed = seed;
  if (sigma >= 0)
    s.sigma = sigma;
  return generate(s, 0).data;
}

void expect_cli_matches_library(const std::string& name, const Dataset& data, Eigen::Index m)
{
  const std::string in = write_dataset(name + ".csv", data);
  const fs::path out = tmp_path(name + ".json");
  const CliResult r = run_cli({"estimate", "--input", in, "--m", std::to_string(m), "--output", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(out));
  // the CLI sees the data after a CSV round trip, which is exact
  const EstimateResult lib = estimate(read_csv_file(in).data, m);
  EXPECT_EQ(json_matrix(j["pi_hat"]), lib.pi_hat) << name;
  EXPECT_EQ(json_matrix(j["basis_vectors"]).transpose(), lib.basis_vectors) << name;
  ASSERT_EQ(j["iterations"].size(), lib.iterations.size());
  for (std::size_t k = 0; k < lib.iterations.size(); ++k) {
    EXPECT_EQ(j["iterations"][k]["objective"].get<double>(), lib.iterations[k].report.objective);
    EXPECT_EQ(j["iterations"][k]["h"].get<double>(), lib.iterations[k].h);
  }
  EXPECT_EQ(j["schedule"]["h1"].get<double>(), *lib.schedule.h1);
  EXPECT_EQ(j["config"]["m_star"].get<int>(), m);
  EXPECT_EQ(j["version"].get<std::string>(), cli::kVersion);
}

} // namespace

TEST(Csv, RoundTripIsExact)
{
  SimSpec s = SimSpec::defaults(Example::ex4);
  const SimSample sample = generate(s, 2);
  std::stringstream ss;
  write_csv(ss, sample.data);
  const NamedDataset back = read_csv(ss);
  EXPECT_EQ(back.data.X, sample.data.X);
  EXPECT_EQ(back.data.Y, sample.data.Y);
  EXPECT_EQ(back.predictor_names, (std::vector<std::string>{"x1", "x2", "x3", "x4", "x5", "x6"}));
}

TEST(Csv, ResponseColumnAnywhere)
{
  std::stringstream ss("a, y ,b\n1,2,3\n\n4,5,6\n");
  const NamedDataset d = read_csv(ss);
  EXPECT_EQ(d.predictor_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.data.X, (Matrix(2, 2) << 1, 3, 4, 6).finished());
  EXPECT_EQ(d.data.Y, (Vector(2) << 2, 5).finished());
}

TEST(Csv, ErrorsCarryLineNumbers)
{
  auto line_of = [](const std::string& text) {
    std::stringstream ss(text);
    try {
      read_csv(ss);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{999};
  };
  EXPECT_EQ(line_of("x,y\n1,2\n3,abc\n"), 3u);
  EXPECT_EQ(line_of("x,y\n1,2\n3\n"), 3u);
  EXPECT_EQ(line_of("x,z\n1,2\n"), 1u);
  EXPECT_EQ(line_of("y\n1\n"), 1u);
  EXPECT_EQ(line_of(""), 0u);
  EXPECT_EQ(line_of("x,y\n1,2e\n"), 2u);
}

TEST(Csv, ShortestRoundTripFormatting)
{
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.0), "-2");
  const double v = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(CliEstimate, GoldenLinearFixture)
{
  const Dataset data = linear_fixture();
  expect_cli_matches_library("linear", data, 1);
  const auto j = nlohmann::json::parse(slurp(tmp_path("linear.json")));
  Vector theta = (Vector(3) << 2, -1, 0.5).finished().normalized();
  const Matrix pi = json_matrix(j["pi_hat"]);
  EXPECT_LE(((Matrix::Identity(3, 3) - pi) * theta * theta.transpose()).trace(), 1e-6);
}

TEST(CliEstimate, GoldenExampleOneFixture)
{
  expect_cli_matches_library("ex1", sim_dataset(Example::ex1, 400, 1), 1);
}

TEST(CliEstimate, GoldenExampleFourFixture)
{
  expect_cli_matches_library("ex4", sim_dataset(Example::ex4, 200, 3), 3);
}

TEST(CliEstimate, QuietAndCsvOutput)
{
  const std::string in = write_dataset("linear_q.csv", linear_fixture());
  const CliResult q = run_cli({"estimate", "-i", in, "-m", "1", "--quiet"});
  ASSERT_EQ(q.code, 0) << q.err;
  const auto j = nlohmann::json::parse(q.out);
  EXPECT_FALSE(j.contains("iterations"));
  EXPECT_TRUE(j.contains("pi_hat"));

  const CliResult c = run_cli({"estimate", "-i", in, "-m", "1", "--format", "csv"});
  ASSERT_EQ(c.code, 0) << c.err;
  std::stringstream ss(c.out);
  std::string line;
  int rows = 0;
  while (std::getline(ss, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 2);
  }
  EXPECT_EQ(rows, 3);
}

TEST(CliEstimate, OptionsReachTheLibrary)
{
  const Dataset data = sim_dataset(Example::ex1, 150, 5);
  const std::string in = write_dataset("opts.csv", data);
  const CliResult r = run_cli({"estimate", "-i", in, "-m", "1", "--kernel", "quartic", "--max-freq", "4",
                               "--tol", "1e-5", "--h1", "1.2", "--ridge", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  SammOptions opt;
  opt.kernel = KernelFamily::quartic;
  opt.max_freq = 4;
  opt.solver.tol = 1e-5;
  opt.h1 = 1.2;
  opt.ridge = 0.01;
  const EstimateResult lib = estimate(read_csv_file(in).data, 1, opt);
  EXPECT_EQ(json_matrix(nlohmann::json::parse(r.out)["pi_hat"]), lib.pi_hat);
}

TEST(CliEstimate, MissingFileNamesPath)
{
  const std::string path = tmp_path("does_not_exist.csv").string();
  const CliResult r = run_cli({"estimate", "--input", path, "--m", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(path), std::string::npos);
}

TEST(CliEstimate, ParseFailureReportsLine)
{
  const fs::path p = tmp_path("bad.csv");
  std::ofstream(p) << "x1,x2,y\n1,2,3\n4,five,6\n";
  const CliResult r = run_cli({"estimate", "--input", p.string(), "--m", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST(CliEstimate, EstimationFailureExitsThree)
{
  const std::string in = write_dataset("linear_m.csv", linear_fixture());
  EXPECT_EQ(run_cli({"estimate", "-i", in, "-m", "3"}).code, 3);
  const fs::path p = tmp_path("tiny.csv");
  std::ofstream(p) << "x1,x2,y\n1,2,3\n4,5,6\n";
  EXPECT_EQ(run_cli({"estimate", "-i", p.string(), "-m", "1"}).code, 3);
}

TEST(CliUsage, InvalidFlagsExitSixtyFour)
{
  const std::string in = write_dataset("linear_u.csv", linear_fixture());
  EXPECT_EQ(run_cli({}).code, 64);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 64);
  EXPECT_EQ(run_cli({"estimate", "-i", in}).code, 64);
  EXPECT_EQ(run_cli({"estimate", "-i", in, "-m", "1", "--bogus"}).code, 64);
  EXPECT_EQ(run_cli({"estimate", "-i", in, "-m", "1", "--kernel", "gauss"}).code, 64);
  EXPECT_EQ(run_cli({"estimate", "-i", in, "-m", "1", "--max-freq", "0"}).code, 64);
  EXPECT_EQ(run_cli({"estimate", "-i", in, "-m", "1", "--max-freq", "lots"}).code, 64);
  EXPECT_EQ(run_cli({"estimate", "-i", in, "-m", "1", "--tol", "-1"}).code, 64);
  EXPECT_EQ(run_cli({"simulate", "--example", "9"}).code, 64);
  EXPECT_EQ(run_cli({"simulate", "--example", "1", "--d", "4"}).code, 64);
  EXPECT_EQ(run_cli({"dim", "-i", in, "--drop-ratio", "2"}).code, 64);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({"--version"}).code, 0);
}

TEST(CliSimulate, TableShape)
{
  const fs::path out = tmp_path("sim1.csv");
  const CliResult r = run_cli(
    {"simulate", "--example", "1", "--n", "400", "--reps", "50", "--seed", "7", "--output", out.string(), "--quiet"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::stringstream ss(slurp(out));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(ss, line))
    lines.push_back(line);
  ASSERT_EQ(lines.size(), 53u);
  EXPECT_EQ(lines[0], "rep,loss_first,loss_final");
  EXPECT_EQ(lines[1].rfind("0,", 0), 0u);
  EXPECT_EQ(lines[50].rfind("49,", 0), 0u);
  EXPECT_EQ(lines[51].rfind("mean,", 0), 0u);
  EXPECT_EQ(lines[52].rfind("std,", 0), 0u);
}

TEST(CliSimulate, SameFlagsSameBytes)
{
  const fs::path a = tmp_path("sim_a.csv"), b = tmp_path("sim_b.csv");
  const std::vector<std::string> base{"simulate", "--example", "3", "--n", "100", "--reps", "4", "--seed", "11", "-q"};
  auto with_out = [&](const fs::path& p, const std::string& threads) {
    auto args = base;
    args.insert(args.end(), {"--output", p.string(), "--threads", threads});
    return run_cli(args).code;
  };
  ASSERT_EQ(with_out(a, "1"), 0);
  ASSERT_EQ(with_out(b, "3"), 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(CliSimulate, ExampleTwoMeanWithinBand)
{
  const CliResult r = run_cli({"simulate", "--example", "2", "--d", "4", "--reps", "50", "--format", "json", "-q"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["loss_final"].size(), 50u);
  EXPECT_LE(j["mean_loss_final"].get<double>(), 0.10);
  EXPECT_EQ(j["spec"]["n"].get<int>(), 300);
}

TEST(CliSimulate, DatasetOutMatchesGenerator)
{
  const fs::path p = tmp_path("ex2_rep3.csv");
  const CliResult r =
    run_cli({"simulate", "--example", "2", "--d", "6", "--seed", "5", "--rep", "3", "--dataset-out", p.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  SimSpec s = SimSpec::defaults(Example::ex2);
  s.d = 6;
  s.seed = 5;
  const SimSample sample = generate(s, 3);
  const NamedDataset back = read_csv_file(p.string());
  EXPECT_EQ(back.data.X, sample.data.X);
  EXPECT_EQ(back.data.Y, sample.data.Y);
}

TEST(CliSimulate, ThreadsFromEnvironment)
{
  ::setenv("SAMM_THREADS", "5", 1);
  EXPECT_EQ(cli::default_threads(), 5u);
  ::setenv("SAMM_THREADS", "zero", 1);
  EXPECT_GE(cli::default_threads(), 1u);
  ::unsetenv("SAMM_THREADS");
}

TEST(CliDim, RankTwoNoiseless)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  Dataset data;
  data.X.resize(200, 4);
  data.Y.resize(200);
  for (Eigen::Index i = 0; i < 200; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j)
      data.X(i, j) = u(rng);
    data.Y(i) = std::sin(2 * data.X(i, 0)) + data.X(i, 1) * data.X(i, 1);
  }
  const std::string in = write_dataset("rank2.csv", data);
  const CliResult r = run_cli({"dim", "-i", in, "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["m_hat"].get<int>(), 2);
  EXPECT_EQ(j["R"].size(), 4u);
}

TEST(CliDim, SingleIndex)
{
  const std::string in = write_dataset("single.csv", linear_fixture());
  // noiseless linear data leaves no residual once the ridge bias is removed
  const CliResult r = run_cli({"dim", "-i", in, "--ridge", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("m_hat,1\n"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.rfind("m,R\n0,", 0), 0u);
}

TEST(CliDim, NoisySingleIndex)
{
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::string in = write_dataset("ex1_dim.csv", sim_dataset(Example::ex1, 400, seed));
    const CliResult r = run_cli({"dim", "-i", in, "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    hits += nlohmann::json::parse(r.out)["m_hat"].get<int>() == 1;
  }
  EXPECT_GE(hits, 9);
}

TEST(CliDim, ExampleThreeRecoversThree)
{
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const std::string in = write_dataset("ex3_dim.csv", sim_dataset(Example::ex3, 250, seed, 1.0));
    const CliResult r = run_cli({"dim", "-i", in, "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    hits += nlohmann::json::parse(r.out)["m_hat"].get<int>() == 3;
  }
  EXPECT_GE(hits, 45);
}
