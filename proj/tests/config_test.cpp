#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "salp/config.hpp"
#include "salp/csvio.hpp"

using namespace salp;

TEST_CASE("key tree parsing, comments, and errors") {
  const KeyTree t = KeyTree::parse(
      "# experiment\n"
      "chain.link_length_m = 0.27\n"
      "\n"
      "gait.omega_hz = 0.1666  # trailing comment\n"
      "sim.cycles = 12\n");
  CHECK(t.has("chain.link_length_m"));
  CHECK(t.get_double("chain.link_length_m") == doctest::Approx(0.27));
  CHECK(t.get("sim.cycles") == "12");
  CHECK(!t.has("nope"));
  CHECK_THROWS_AS(t.get("nope"), ConfigError);
  CHECK_THROWS_AS(KeyTree::parse("no equals sign here\n"), ConfigError);

  // Round trip through serialize.
  const KeyTree back = KeyTree::parse(t.serialize());
  REQUIRE(back.entries.size() == t.entries.size());
  for (size_t i = 0; i < t.entries.size(); ++i) CHECK(back.entries[i] == t.entries[i]);
}

TEST_CASE("config defaults, unit conversion, and unknown-key rejection") {
  const ExperimentConfig def = default_config();
  CHECK(def.chain.n_units == 3);
  CHECK(def.cycles == 10);
  CHECK(def.lowpass_hz == 0.0);

  const ExperimentConfig cfg = parse_config(
      "chain.beta_deg = -57, -130, -57\n"
      "gait.omega_hz = 0.25\n"
      "sim.seed = 7\n"
      "gait.desired_velocity_mps = 0.005, 0\n");
  CHECK(cfg.chain.beta[1] == doctest::Approx(-130.0 * M_PI / 180.0));
  CHECK(cfg.omega_hz == 0.25);
  CHECK(cfg.seed == 7);
  CHECK(cfg.desired[0] == doctest::Approx(0.005));

  CHECK_THROWS_AS(parse_config("chain.bogus_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("gait.omega_hz = not_a_number\n"), ConfigError);
}

TEST_CASE("resolved echo contains every key and reproduces the config") {
  const ExperimentConfig cfg = parse_config("sim.cycles = 4\ngait.cost = power\n");
  const KeyTree echo = cfg.resolved();
  CHECK(echo.has("sim.cycles"));
  CHECK(echo.get("sim.cycles") == "4");
  CHECK(echo.get("gait.cost") == "power");
  CHECK(echo.has("chain.link_length_m"));
  CHECK(echo.has("identify.lambda"));
  // The echo re-parses into an identical echo (fixed point).
  const ExperimentConfig cfg2 = parse_config(echo.serialize());
  CHECK(cfg2.resolved().serialize() == echo.serialize());
}

TEST_CASE("metric artifact round trip") {
  const LocalMetric m = default_test_metric();
  const LocalMetric back = metric_from_tree(metric_to_tree(m));
  CHECK((back.diagonal() - m.diagonal()).norm() == 0.0);
}

TEST_CASE("g17 formatting round trips doubles exactly") {
  for (double v : {0.1, 1.0 / 3.0, M_PI, -2.5e-17, 1e17, 0.0}) {
    const std::string s = format_g17(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("trajectory CSV header and bit-exact round trip") {
  TrajectoryRun run;
  run.rate = 100.0;
  const int n = 25;
  run.shapes.resize(n, 2);
  run.commands.resize(n, 3);
  run.forces.resize(n, 3);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int k = 0; k < n; ++k) {
    run.poses.push_back(Pose(d(rng), d(rng), d(rng)));
    for (int j = 0; j < 2; ++j) run.shapes(k, j) = d(rng);
    for (int j = 0; j < 3; ++j) {
      run.commands(k, j) = d(rng);
      run.forces(k, j) = d(rng);
    }
  }
  const std::string text = trajectory_csv(run);
  const std::string header = text.substr(0, text.find('\n'));
  CHECK(header == "t, x, y, theta, alpha_1, alpha_2, u_1, u_2, u_3, f_1, f_2, f_3");

  const std::string path = (std::filesystem::temp_directory_path() / "salp_traj_test.csv").string();
  write_trajectory_csv(path, run);
  const TrajectoryRun back = read_trajectory_csv(path);
  CHECK(back.rate == run.rate);
  REQUIRE(back.samples() == n);
  for (int k = 0; k < n; ++k) {
    CHECK(back.poses[k].x == run.poses[k].x);
    CHECK(back.poses[k].theta == run.poses[k].theta);
    CHECK(back.shapes(k, 1) == run.shapes(k, 1));
    CHECK(back.forces(k, 2) == run.forces(k, 2));
  }
  std::remove(path.c_str());
}

TEST_CASE("malformed CSV errors name the offending location") {
  namespace fs = std::filesystem;
  const std::string path = (fs::temp_directory_path() / "salp_bad_test.csv").string();
  {
    std::ofstream f(path);
    f << "t, x, y, theta, alpha_1, alpha_2, u_1, u_2, u_3, f_1, f_2, f_3\n";
    f << "0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0\n";
    f << "0.01, 0, bad, 0, 0, 0, 0, 0, 0, 0, 0, 0\n";
  }
  bool caught = false;
  try {
    read_trajectory_csv(path);
  } catch (const std::runtime_error& e) {
    caught = true;
    const std::string msg = e.what();
    CHECK(msg.find("3") != std::string::npos);  // line number
  }
  CHECK(caught);
  {
    std::ofstream f(path);
    f << "time, x, y\n0, 0, 0\n";
  }
  CHECK_THROWS_AS(read_trajectory_csv(path), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("atomic write replaces content completely") {
  namespace fs = std::filesystem;
  const std::string path = (fs::temp_directory_path() / "salp_atomic_test.txt").string();
  atomic_write(path, "first version, long content string\n");
  atomic_write(path, "short\n");
  std::ifstream f(path);
  std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(content == "short\n");
  std::remove(path.c_str());
  CHECK_THROWS_AS(atomic_write("/nonexistent_dir_zz/file.txt", "x"), std::runtime_error);
}
