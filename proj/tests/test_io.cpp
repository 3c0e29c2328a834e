#include <doctest.h>

#include "wanco/commands.hpp"
#include "wanco/io.hpp"
#include "wanco/problems.hpp"
#include "wanco/rng.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wanco;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("wanco_test_io_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

Json tiny_gl() {
  return Json::parse(R"({
    "preset": "gl_desk",
    "networks": {"u": {"depth": 1, "width": 6}, "lambda": {"width": 4}},
    "train": {"iterations": 12, "record_every": 5},
    "sampler": {"n_interior": 128}
  })");
}

std::string config_error(const Json& tree) {
  try {
    parse_run_config(tree);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("format_double round trips") {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 123456789.123456789}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("every preset expands to a valid configuration") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    CHECK_NOTHROW(parse_run_config(Json{{"preset", name}}));
  }
  CHECK(preset_names().size() >= 12);
}

TEST_CASE("preset values") {
  const RunConfig gl = parse_run_config(Json{{"preset", "gl"}});
  CHECK(gl.train.iterations == 5000);
  CHECK(gl.train.inner_steps == std::vector<int>{2, 2});
  CHECK(gl.train.schedules[0].alpha == 1.0003);
  CHECK(gl.sampler.n_interior == 40000);
  const RunConfig fl = parse_run_config(Json{{"preset", "fluid_solid_example1"}});
  CHECK(fl.train.inner_steps == std::vector<int>{3, 1, 1, 1});
  CHECK(fl.train.schedules[2].beta0 == 1000.0);
  const RunConfig ob = parse_run_config(Json{{"preset", "obstacle_psi3_desk"}});
  CHECK(ob.train.iterations == 3000);
  CHECK(ob.sampler.n_interior == 1024);
}

TEST_CASE("configuration errors name the key") {
  Json t = tiny_gl();
  t["train"]["bogus"] = 1;
  CHECK(config_error(t).find("train.bogus") != std::string::npos);
  t = tiny_gl();
  t["problem"]["epsilonn"] = 1;
  CHECK(config_error(t).find("problem.epsilonn") != std::string::npos);
  t = tiny_gl();
  t["train"]["beta0"]["volume"] = 1;
  CHECK(config_error(t).find("train.beta0.volume") != std::string::npos);
  t = tiny_gl();
  t["extra"] = true;
  CHECK(config_error(t).find("extra") != std::string::npos);
  t = tiny_gl();
  t["networks"]["u"]["activation"] = "softmax";
  CHECK(config_error(t).find("networks.u.activation") != std::string::npos);
  t = tiny_gl();
  t["preset"] = "nope";
  CHECK(config_error(t).find("nope") != std::string::npos);
  Json bare = preset_tree("gl");
  bare["train"].erase("iterations");
  CHECK(config_error(bare).find("train.iterations") != std::string::npos);
}

TEST_CASE("history csv schema") {
  const RunConfig run = parse_run_config(tiny_gl());
  const TrainResult r = train(*run.problem, run.train, run.sampler);
  std::ostringstream out;
  write_history_csv(out, r.history);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == kCsvSchema);
  std::getline(in, line);
  CHECK(line ==
        "iteration,loss,objective,mass_achieved,mass_residual,mass_rel_error,lambda,beta_mass,lr_primal,lr_adversarial");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("parameters round trip bit-exactly") {
  const auto dir = scratch("params");
  const RunConfig run = parse_run_config(tiny_gl());
  const TrainResult r = run_and_write(run, dir, true);
  CHECK(std::filesystem::exists(dir / "history.csv"));
  CHECK(std::filesystem::exists(dir / "summary.txt"));
  CHECK(std::filesystem::file_size(dir / "params.bin") == 8 * r.params.size());

  const StoredParams stored = read_params(dir / "params.bin");
  const RunConfig again = parse_run_config(stored.manifest["config"]);
  const ParamStore back = bind_params(*again.problem, stored);
  const auto& net = run.problem->networks()[0].resnet();
  const auto& net2 = again.problem->networks()[0].resnet();
  const CounterRng rng(17);
  for (int i = 0; i < 100; ++i) {
    const double x[] = {rng.uniform(2 * i), rng.uniform(2 * i + 1)};
    CHECK(net.eval(run.problem->networks()[0].params(r.params), x)(0) ==
          net2.eval(again.problem->networks()[0].params(back), x)(0));
  }

  // a manifest for a different architecture is rejected
  Json other = tiny_gl();
  other["networks"]["u"]["width"] = 7;
  const RunConfig mismatch = parse_run_config(other);
  CHECK_THROWS_AS(bind_params(*mismatch.problem, stored), ConfigError);
}

TEST_CASE("grid export") {
  const auto x = grid_points(Box::unit(2), {3, 2});
  CHECK(x.cols() == 6);
  CHECK(x(0, 1) == 0.0);
  CHECK(x(1, 1) == 1.0);
  CHECK(x(0, 2) == 0.5);
  CHECK(parse_grid("1000x1000") == std::vector<int>{1000, 1000});
  CHECK(parse_grid("11") == std::vector<int>{11});
  CHECK_THROWS_AS(parse_grid("10xx"), ConfigError);
  CHECK(coordinate_names(1) == std::vector<std::string>{"x"});
  CHECK(coordinate_names(3) == std::vector<std::string>{"x1", "x2", "x3"});

  PartitionSpec spec;
  spec.n = 3;
  const PartitionProblem p(spec, NetShape{1, 4, Activation::Tanh3}, MultiplierShape{3, Activation::Tanh3});
  const ParamStore s = p.make_params(1);
  std::ostringstream out;
  write_grid_csv(out, coordinate_names(2), x, p.grid_columns(), p.grid_values(s, x));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line == "x,y,u1,u2,u3,phase");
}
