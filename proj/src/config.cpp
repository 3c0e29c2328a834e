#include "wanco/config.hpp"

#include "wanco/problems.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

namespace wanco {

namespace {

using Keys = std::initializer_list<std::string_view>;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_object(const Json& obj, const std::string& path) {
  if (!obj.is_object()) throw ConfigError("'" + path + "' must be an object");
}

void check_keys(const Json& obj, Keys allowed, const std::string& path) {
  check_object(obj, path);
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + join(path, key) + "'");
    }
  }
}

const Json& required(const Json& obj, const std::string& key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError("missing key '" + join(path, key) + "'");
  return *it;
}

double number(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = required(obj, key, path);
  if (!v.is_number()) throw ConfigError("'" + join(path, key) + "' must be a number");
  return v.get<double>();
}

double number_or(const Json& obj, const std::string& key, const std::string& path, double fallback) {
  return obj.contains(key) ? number(obj, key, path) : fallback;
}

long integer(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = required(obj, key, path);
  if (!v.is_number_integer()) throw ConfigError("'" + join(path, key) + "' must be an integer");
  return v.get<long>();
}

long integer_or(const Json& obj, const std::string& key, const std::string& path, long fallback) {
  return obj.contains(key) ? integer(obj, key, path) : fallback;
}

std::string text(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = required(obj, key, path);
  if (!v.is_string()) throw ConfigError("'" + join(path, key) + "' must be a string");
  return v.get<std::string>();
}

template <class F>
auto wrap(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

NetShape resnet_shape(const Json& networks, const std::string& name) {
  const std::string path = "networks." + name;
  const Json& n = required(networks, name, "networks");
  check_keys(n, {"depth", "width", "activation"}, path);
  NetShape shape;
  shape.depth = static_cast<int>(integer(n, "depth", path));
  shape.width = static_cast<int>(integer(n, "width", path));
  if (shape.depth < 1 || shape.width < 1) throw ConfigError("'" + path + "' depth and width must be >= 1");
  shape.activation = wrap(path + ".activation", [&] { return parse_activation(text(n, "activation", path)); });
  return shape;
}

MultiplierShape scalar_shape(const Json& networks, const std::string& name) {
  const std::string path = "networks." + name;
  const Json& n = required(networks, name, "networks");
  check_keys(n, {"width", "activation"}, path);
  MultiplierShape shape;
  shape.width = static_cast<int>(integer(n, "width", path));
  if (shape.width < 1) throw ConfigError("'" + path + ".width' must be >= 1");
  shape.activation = wrap(path + ".activation", [&] { return parse_activation(text(n, "activation", path)); });
  return shape;
}

Json gl_preset() {
  return Json::parse(R"({
    "problem": {"family": "gl", "epsilon": 0.05, "V": -0.5, "C0": 400, "method": "wanco"},
    "networks": {"u": {"depth": 4, "width": 50, "activation": "tanh3"},
                 "lambda": {"width": 10, "activation": "tanh3"}},
    "train": {"iterations": 5000, "record_every": 50, "lr_primal": 0.016, "lr_adversarial": 0.016,
              "milestones": [0.5, 0.75, 0.9], "inner_steps": {"u": 2, "lambda": 2},
              "beta0": {"mass": 100000}, "alpha": {"mass": 1.0003}},
    "sampler": {"kind": "hammersley", "n_interior": 40000},
    "seed": 1,
    "output_dir": "runs/gl"
  })");
}

Json partition_preset() {
  return Json::parse(R"({
    "problem": {"family": "partition", "epsilon": 0.05, "n": 2, "d": 2, "bc": "dirichlet", "C0": 100},
    "networks": {"u": {"depth": 8, "width": 120, "activation": "tanh3"},
                 "lambda": {"width": 10, "activation": "tanh3"}},
    "train": {"iterations": 20000, "record_every": 50, "lr_primal": 0.016, "lr_adversarial": 0.016,
              "milestones": [0.5, 0.75, 0.9], "inner_steps": {"u": 1, "lambda": 1},
              "beta0": {"mass": 10000}, "alpha": {"mass": 1.0003}},
    "sampler": {"kind": "uniform", "n_interior": 10000},
    "seed": 1,
    "output_dir": "runs/partition"
  })");
}

Json fluid_preset() {
  return Json::parse(R"({
    "problem": {"family": "fluid_solid", "epsilon": 0.01, "alpha0": 250000, "C_alpha": 100, "C_eps": 10,
                "C_V": 0.5, "length": 1.0, "bc": "example1"},
    "networks": {"u": {"depth": 4, "width": 50, "activation": "tanh3"},
                 "p": {"depth": 4, "width": 50, "activation": "tanh3"},
                 "lambda1": {"width": 10, "activation": "tanh3"},
                 "lambda2": {"depth": 4, "width": 50, "activation": "tanh3"}},
    "train": {"iterations": 5000, "record_every": 50, "lr_primal": 0.016, "lr_adversarial": 0.016,
              "milestones": [0.5, 0.75, 0.9], "inner_steps": {"u": 3, "p": 1, "lambda1": 1, "lambda2": 1},
              "beta0": {"div": 100, "volume": 100, "boundary": 1000},
              "alpha": {"div": 1.0003, "volume": 1.0003, "boundary": 1.0003}},
    "sampler": {"kind": "uniform", "n_interior": 40000, "n_per_face": 1000},
    "seed": 1,
    "output_dir": "runs/fluid_solid"
  })");
}

Json obstacle_preset(const std::string& id) {
  const ObstacleSpec spec = ObstacleSpec::defaults(parse_obstacle(id));
  Json tree = Json::parse(R"({
    "problem": {"family": "obstacle", "C0": 100},
    "networks": {"u": {"depth": 6, "width": 80, "activation": "tanh3"},
                 "lambda": {"depth": 6, "width": 80, "activation": "tanh3"}},
    "train": {"iterations": 5000, "record_every": 50, "lr_primal": 0.016, "lr_adversarial": 0.016,
              "milestones": [0.5, 0.75, 0.9], "inner_steps": {"u": 2, "lambda": 2},
              "beta0": {"obstacle": 1000}, "alpha": {"obstacle": 1.0003}},
    "sampler": {"kind": "uniform", "n_interior": 2000},
    "seed": 1
  })");
  tree["problem"]["obstacle"] = id;
  tree["problem"]["g0"] = spec.g0;
  tree["problem"]["g1"] = spec.g1;
  tree["output_dir"] = "runs/obstacle_" + id;
  return tree;
}

const std::map<std::string, Json (*)()>& preset_table() {
  static const std::map<std::string, Json (*)()> table = {
      {"gl", [] { return gl_preset(); }},
      {"gl_desk", [] {
         return merge_config(gl_preset(), Json::parse(R"({
           "networks": {"u": {"depth": 3, "width": 24}},
           "train": {"iterations": 2000},
           "sampler": {"n_interior": 4096},
           "output_dir": "runs/gl_desk"})"));
       }},
      {"partition_dirichlet", [] { return partition_preset(); }},
      {"partition_periodic", [] {
         return merge_config(partition_preset(), Json::parse(R"({
           "problem": {"epsilon": 0.04, "bc": "periodic", "C0": 2500},
           "networks": {"u": {"depth": 3, "width": 50}},
           "train": {"iterations": 5000, "inner_steps": {"u": 2, "lambda": 2}, "beta0": {"mass": 100000}},
           "sampler": {"kind": "hammersley", "n_interior": 10000},
           "output_dir": "runs/partition_periodic"})"));
       }},
      {"partition_desk", [] {
         return merge_config(partition_preset(), Json::parse(R"({
           "networks": {"u": {"depth": 4, "width": 48}},
           "train": {"iterations": 4000},
           "sampler": {"kind": "hammersley", "n_interior": 4096},
           "output_dir": "runs/partition_desk"})"));
       }},
      {"fluid_solid_example1", [] { return fluid_preset(); }},
      {"fluid_solid_example2", [] {
         return merge_config(fluid_preset(), Json::parse(R"({
           "problem": {"C_V": 0.3333333333333333, "length": 1.5, "bc": "example2"},
           "networks": {"u": {"depth": 6, "width": 80}, "p": {"depth": 6, "width": 80}},
           "output_dir": "runs/fluid_solid_example2"})"));
       }},
      {"fluid_solid_desk", [] {
         return merge_config(fluid_preset(), Json::parse(R"({
           "networks": {"u": {"depth": 3, "width": 32}, "p": {"depth": 3, "width": 32},
                        "lambda2": {"depth": 3, "width": 32}},
           "train": {"iterations": 2000},
           "sampler": {"n_interior": 4096, "n_per_face": 256},
           "output_dir": "runs/fluid_solid_desk"})"));
       }},
      {"obstacle_psi1", [] { return obstacle_preset("psi1"); }},
      {"obstacle_psi2", [] { return obstacle_preset("psi2"); }},
      {"obstacle_psi3", [] { return obstacle_preset("psi3"); }},
      {"obstacle_psi1_desk", [] {
         return merge_config(obstacle_preset("psi1"), Json::parse(R"({"train": {"iterations": 3000}, "sampler": {"n_interior": 1024}})"));
       }},
      {"obstacle_psi2_desk", [] {
         return merge_config(obstacle_preset("psi2"), Json::parse(R"({"train": {"iterations": 3000}, "sampler": {"n_interior": 1024}})"));
       }},
      {"obstacle_psi3_desk", [] {
         return merge_config(obstacle_preset("psi3"), Json::parse(R"({"train": {"iterations": 3000}, "sampler": {"n_interior": 1024}})"));
       }},
  };
  return table;
}

std::shared_ptr<const Problem> build_gl(const Json& p, const Json& nets) {
  check_keys(p, {"family", "epsilon", "V", "C0", "method"}, "problem");
  check_keys(nets, {"u", "lambda"}, "networks");
  GlSpec spec;
  spec.epsilon = number(p, "epsilon", "problem");
  spec.V = number(p, "V", "problem");
  spec.C0 = number(p, "C0", "problem");
  spec.method = wrap("problem.method", [&] { return parse_gl_method(text(p, "method", "problem")); });
  const NetShape u = resnet_shape(nets, "u");
  const MultiplierShape lambda = scalar_shape(nets, "lambda");
  return wrap("problem", [&] { return std::make_shared<const GlProblem>(spec, u, lambda); });
}

std::shared_ptr<const Problem> build_partition(const Json& p, const Json& nets) {
  check_keys(p, {"family", "epsilon", "n", "d", "bc", "C0"}, "problem");
  check_keys(nets, {"u", "lambda"}, "networks");
  PartitionSpec spec;
  spec.epsilon = number(p, "epsilon", "problem");
  spec.n = static_cast<int>(integer(p, "n", "problem"));
  spec.d = static_cast<int>(integer(p, "d", "problem"));
  spec.C0 = number(p, "C0", "problem");
  const std::string bc = text(p, "bc", "problem");
  if (bc == "dirichlet") {
    spec.bc = PartitionBc::Dirichlet;
  } else if (bc == "periodic") {
    spec.bc = PartitionBc::Periodic;
  } else {
    throw ConfigError("'problem.bc' must be dirichlet or periodic");
  }
  const NetShape u = resnet_shape(nets, "u");
  const MultiplierShape lambda = scalar_shape(nets, "lambda");
  return wrap("problem", [&] { return std::make_shared<const PartitionProblem>(spec, u, lambda); });
}

std::shared_ptr<const Problem> build_fluid(const Json& p, const Json& nets) {
  check_keys(p, {"family", "epsilon", "alpha0", "C_alpha", "C_eps", "C_V", "length", "bc"}, "problem");
  check_keys(nets, {"u", "p", "lambda1", "lambda2"}, "networks");
  FluidSolidSpec spec;
  spec.epsilon = number(p, "epsilon", "problem");
  spec.alpha0 = number(p, "alpha0", "problem");
  spec.C_alpha = number(p, "C_alpha", "problem");
  spec.C_eps = number(p, "C_eps", "problem");
  spec.C_V = number(p, "C_V", "problem");
  spec.length = number(p, "length", "problem");
  const std::string bc = text(p, "bc", "problem");
  if (bc == "example1") {
    spec.bc = FluidBc::Example1;
    if (spec.length != 1.0) throw ConfigError("'problem.length' must be 1 for bc example1");
  } else if (bc == "example2") {
    spec.bc = FluidBc::Example2;
  } else {
    throw ConfigError("'problem.bc' must be example1 or example2");
  }
  const NetShape u = resnet_shape(nets, "u");
  const NetShape pr = resnet_shape(nets, "p");
  const MultiplierShape l1 = scalar_shape(nets, "lambda1");
  const NetShape l2 = resnet_shape(nets, "lambda2");
  return wrap("problem", [&] { return std::make_shared<const FluidSolidProblem>(spec, u, pr, l1, l2); });
}

std::shared_ptr<const Problem> build_obstacle(const Json& p, const Json& nets) {
  check_keys(p, {"family", "obstacle", "g0", "g1", "C0"}, "problem");
  check_keys(nets, {"u", "lambda"}, "networks");
  const ObstacleId id = wrap("problem.obstacle", [&] { return parse_obstacle(text(p, "obstacle", "problem")); });
  ObstacleSpec spec = ObstacleSpec::defaults(id);
  spec.g0 = number_or(p, "g0", "problem", spec.g0);
  spec.g1 = number_or(p, "g1", "problem", spec.g1);
  spec.C0 = number(p, "C0", "problem");
  const NetShape u = resnet_shape(nets, "u");
  const NetShape lambda = resnet_shape(nets, "lambda");
  return std::make_shared<const ObstacleProblem>(spec, u, lambda);
}

TrainConfig parse_train(const Json& t, const Problem& problem, const Json& networks) {
  const std::string path = "train";
  check_keys(t, {"iterations", "record_every", "lr_primal", "lr_adversarial", "milestones", "inner_steps", "beta0",
                 "alpha"},
             path);
  TrainConfig cfg;
  cfg.iterations = integer(t, "iterations", path);
  cfg.record_every = integer_or(t, "record_every", path, 50);
  cfg.lr_primal = number(t, "lr_primal", path);
  cfg.lr_adversarial = number(t, "lr_adversarial", path);
  if (t.contains("milestones")) {
    const Json& m = t["milestones"];
    if (!m.is_array()) throw ConfigError("'train.milestones' must be an array");
    cfg.milestones.clear();
    for (const auto& v : m) {
      if (!v.is_number()) throw ConfigError("'train.milestones' entries must be numbers");
      cfg.milestones.push_back(v.get<double>());
    }
  }

  const Json& steps = required(t, "inner_steps", path);
  check_object(steps, "train.inner_steps");
  for (const auto& [key, value] : steps.items()) {
    if (!networks.contains(key)) throw ConfigError("unknown key 'train.inner_steps." + key + "'");
  }
  for (const auto& slot : problem.networks()) {
    cfg.inner_steps.push_back(static_cast<int>(integer(steps, slot.name, "train.inner_steps")));
  }

  const Json& beta0 = required(t, "beta0", path);
  const Json& alpha = required(t, "alpha", path);
  check_object(beta0, "train.beta0");
  check_object(alpha, "train.alpha");
  const auto channels = problem.channels();
  for (const Json* tree : {&beta0, &alpha}) {
    const std::string sub = tree == &beta0 ? "train.beta0" : "train.alpha";
    for (const auto& [key, value] : tree->items()) {
      const bool known = std::any_of(channels.begin(), channels.end(), [&](const auto& c) { return c.name == key; });
      if (!known) throw ConfigError("unknown key '" + sub + "." + key + "'");
    }
  }
  for (const auto& ch : channels) {
    cfg.schedules.push_back({number(beta0, ch.name, "train.beta0"), number(alpha, ch.name, "train.alpha")});
  }
  wrap(path, [&] {
    cfg.validate(problem);
    return 0;
  });
  return cfg;
}

SamplerConfig parse_sampler(const Json& s) {
  check_keys(s, {"kind", "n_interior", "n_per_face"}, "sampler");
  SamplerConfig cfg;
  const std::string kind = text(s, "kind", "sampler");
  if (kind == "uniform") {
    cfg.kind = SamplerKind::Uniform;
  } else if (kind == "hammersley") {
    cfg.kind = SamplerKind::Hammersley;
  } else {
    throw ConfigError("'sampler.kind' must be uniform or hammersley");
  }
  const long n = integer(s, "n_interior", "sampler");
  const long nf = integer_or(s, "n_per_face", "sampler", 256);
  if (n < 1) throw ConfigError("'sampler.n_interior' must be >= 1");
  if (nf < 1) throw ConfigError("'sampler.n_per_face' must be >= 1");
  cfg.n_interior = static_cast<std::size_t>(n);
  cfg.n_per_face = static_cast<std::size_t>(nf);
  return cfg;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : preset_table()) out.push_back(name);
  return out;
}

Json preset_tree(const std::string& name) {
  const auto& table = preset_table();
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown preset '" + name + "'");
  return it->second();
}

Json merge_config(Json base, const Json& overrides) {
  if (!base.is_object() || !overrides.is_object()) return overrides;
  for (const auto& [key, value] : overrides.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object()) {
      base[key] = merge_config(base[key], value);
    } else {
      base[key] = value;
    }
  }
  return base;
}

Json expand_config(const Json& user) {
  check_object(user, "<root>");
  if (!user.contains("preset")) return user;
  const Json& name = user["preset"];
  if (!name.is_string()) throw ConfigError("'preset' must be a string");
  Json rest = user;
  rest.erase("preset");
  return merge_config(preset_tree(name.get<std::string>()), rest);
}

std::shared_ptr<const Problem> build_problem(const Json& problem, const Json& networks) {
  check_object(problem, "problem");
  check_object(networks, "networks");
  const std::string family = text(problem, "family", "problem");
  if (family == "gl") return build_gl(problem, networks);
  if (family == "partition") return build_partition(problem, networks);
  if (family == "fluid_solid") return build_fluid(problem, networks);
  if (family == "obstacle") return build_obstacle(problem, networks);
  throw ConfigError("'problem.family' must be gl, partition, fluid_solid or obstacle");
}

RunConfig parse_run_config(const Json& user) {
  RunConfig run;
  run.tree = expand_config(user);
  const Json& tree = run.tree;
  check_keys(tree, {"problem", "networks", "train", "sampler", "seed", "output_dir"}, "");
  run.problem = build_problem(required(tree, "problem", ""), required(tree, "networks", ""));
  run.train = parse_train(required(tree, "train", ""), *run.problem, tree["networks"]);
  run.sampler = parse_sampler(required(tree, "sampler", ""));
  const Json& seed = required(tree, "seed", "");
  if (!seed.is_number_integer() || seed.get<long long>() < 0) throw ConfigError("'seed' must be a non-negative integer");
  run.train.seed = seed.get<std::uint64_t>();
  run.output_dir = tree.contains("output_dir") ? text(tree, "output_dir", "") : std::string("runs/out");
  return run;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_json_file(path)); }

}  // namespace wanco
