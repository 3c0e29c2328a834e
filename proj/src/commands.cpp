#include "wanco/commands.hpp"

#include "wanco/io.hpp"
#include "wanco/oracles.hpp"
#include "wanco/problems.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace wanco {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void log_record(const HistoryRecord& r, const RunHistory* names) {
  std::clog << "iter " << r.iteration << " loss " << format_double(r.loss);
  for (std::size_t i = 0; i < r.residual.size(); ++i) {
    std::clog << ' ' << (names ? names->constraint_names[i] : "c" + std::to_string(i)) << ' '
              << format_double(r.relative[i]);
  }
  std::clog << '\n';
}

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NonFiniteError& e) {
    std::cerr << "non-finite failure: " << e.what() << '\n';
    return kNonFinite;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
}

RunConfig with_overrides(RunConfig run, const TrainOptions& options) {
  if (options.seed) {
    run.train.seed = *options.seed;
    run.tree["seed"] = *options.seed;
  }
  if (options.out) {
    run.output_dir = options.out->string();
    run.tree["output_dir"] = run.output_dir;
  }
  return run;
}

}  // namespace

TrainResult run_and_write(const RunConfig& run, const std::filesystem::path& dir, bool quiet) {
  RunHistory names;
  for (const auto& ch : run.problem->channels()) {
    for (const auto& c : ch.components) names.constraint_names.push_back(c);
  }
  RecordCallback cb;
  if (!quiet) cb = [&](const HistoryRecord& r) { log_record(r, &names); };
  TrainResult result = train(*run.problem, run.train, run.sampler, cb);
  std::filesystem::create_directories(dir);
  write_history_csv(dir / "history.csv", result.history);
  write_params(dir / "params.bin", result.params, run.tree);
  write_summary(dir / "summary.txt", *run.problem, result);
  return result;
}

int cmd_train(const TrainOptions& options) {
  return guarded([&] {
    const RunConfig run = with_overrides(load_run_config(options.config), options);
    run_and_write(run, run.output_dir, options.quiet);
    if (!options.quiet) std::clog << "wrote " << run.output_dir << '\n';
    return kOk;
  });
}

std::vector<int> parse_grid(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(part, &used);
      if (used != part.size() || n < 2) throw std::invalid_argument(part);
      out.push_back(n);
    } catch (const std::exception&) {
      throw ConfigError("bad grid '" + text + "': expected sizes >= 2 like 1000x1000");
    }
  }
  if (out.empty() || text.back() == 'x') throw ConfigError("bad grid '" + text + "'");
  return out;
}

std::vector<std::string> coordinate_names(int d) {
  if (d == 1) return {"x"};
  if (d == 2) return {"x", "y"};
  std::vector<std::string> out;
  for (int k = 1; k <= d; ++k) out.push_back("x" + std::to_string(k));
  return out;
}

Matrix grid_points(const Box& box, const std::vector<int>& nodes) {
  const int d = box.dim();
  if (static_cast<int>(nodes.size()) != d) throw ConfigError("grid needs one size per axis");
  Eigen::Index total = 1;
  for (int n : nodes) total *= n;
  Matrix x(d, total);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (Eigen::Index b = 0; b < total; ++b) {
    for (int k = 0; k < d; ++k) x(k, b) = box.lo[k] + (box.hi[k] - box.lo[k]) * idx[k] / (nodes[k] - 1);
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < nodes[k]) break;
      idx[k] = 0;
    }
  }
  return x;
}

int cmd_eval_grid(const GridOptions& options) {
  return guarded([&] {
    const StoredParams stored = read_params(options.params);
    if (!stored.manifest.contains("config")) throw ConfigError("parameter manifest carries no configuration");
    const RunConfig run = parse_run_config(stored.manifest["config"]);
    const ParamStore params = bind_params(*run.problem, stored);
    const Box box = run.problem->domain();
    std::vector<int> nodes = options.grid;
    if (nodes.size() == 1) nodes.assign(static_cast<std::size_t>(box.dim()), nodes[0]);
    const Matrix x = grid_points(box, nodes);
    const Matrix values = run.problem->grid_values(params, x);
    auto out = open_out(options.out);
    write_grid_csv(out, coordinate_names(box.dim()), x, run.problem->grid_columns(), values);
    return kOk;
  });
}

int cmd_compare(const TrainOptions& options) {
  return guarded([&] {
    const Json cfg = read_json_file(options.config);
    if (!cfg.is_object()) throw ConfigError("compare config must be an object");
    for (const auto& [key, value] : cfg.items()) {
      if (key != "base" && key != "variants" && key != "output_dir") throw ConfigError("unknown key '" + key + "'");
    }
    if (!cfg.contains("base")) throw ConfigError("missing key 'base'");
    if (!cfg.contains("variants") || !cfg["variants"].is_array() || cfg["variants"].empty()) {
      throw ConfigError("'variants' must be a non-empty array");
    }
    std::filesystem::path root = cfg.value("output_dir", std::string("runs/compare"));
    if (options.out) root = *options.out;
    const Json base = expand_config(cfg["base"]);

    struct Row {
      std::string name;
      TrainResult result;
      std::vector<std::string> constraints;
    };
    std::vector<Row> rows;
    std::string family;
    for (std::size_t i = 0; i < cfg["variants"].size(); ++i) {
      const Json& v = cfg["variants"][i];
      const std::string path = "variants[" + std::to_string(i) + "]";
      if (!v.is_object() || !v.contains("name") || !v["name"].is_string()) {
        throw ConfigError("'" + path + ".name' must be a string");
      }
      for (const auto& [key, value] : v.items()) {
        if (key != "name" && key != "overrides") throw ConfigError("unknown key '" + path + "." + key + "'");
      }
      const std::string name = v["name"].get<std::string>();
      Json tree = merge_config(base, v.value("overrides", Json::object()));
      tree["output_dir"] = (root / name).string();
      TrainOptions variant_options = options;
      variant_options.out.reset();
      const RunConfig run = with_overrides(parse_run_config(tree), variant_options);
      if (family.empty()) family = std::string(run.problem->family());
      if (family != run.problem->family()) throw ConfigError("'" + path + "' changes the problem family");
      if (!options.quiet) std::clog << "variant " << name << '\n';
      Row row{name, run_and_write(run, run.output_dir, options.quiet), {}};
      row.constraints = row.result.history.constraint_names;
      rows.push_back(std::move(row));
    }

    auto out = open_out(root / "compare.csv");
    out << kCsvSchema << '\n' << "variant,objective,constraint,achieved,target,error,error_kind\n";
    for (const auto& row : rows) {
      const Evaluation& e = row.result.final_eval;
      for (std::size_t c = 0; c < e.constraints.size(); ++c) {
        const auto rel = relative_constraint_error(e.constraints[c].achieved, e.constraints[c].target);
        out << row.name << ',' << format_double(e.objective) << ',' << row.constraints[c] << ','
            << format_double(e.constraints[c].achieved) << ',' << format_double(e.constraints[c].target) << ','
            << format_double(rel.value) << ',' << (rel.absolute ? "absolute" : "relative") << '\n';
      }
    }
    return kOk;
  });
}

namespace {

struct Integrand {
  std::string name;
  int dim;
  double (*f)(std::span<const double>);
  double exact;
};

const std::vector<Integrand>& integrands() {
  static const std::vector<Integrand> table = {
      {"sin", 1, [](std::span<const double> x) { return std::sin(x[0]); }, 1.0 - std::cos(1.0)},
      {"cubic", 1, [](std::span<const double> x) { return x[0] * x[0] * x[0]; }, 0.25},
      {"gauss2d", 2, [](std::span<const double> x) { return std::exp(-x[0] * x[0] - x[1] * x[1]); },
       0.25 * std::numbers::pi * std::erf(1.0) * std::erf(1.0)},
  };
  return table;
}

}  // namespace

int cmd_oracle(const OracleOptions& o) {
  return guarded([&] {
    std::ostringstream csv;
    csv << kCsvSchema << '\n';
    if (o.kind == "psor") {
      const ObstacleSpec spec = ObstacleSpec::defaults(parse_obstacle(o.obstacle));
      if (o.n < 3) throw ConfigError("psor needs n >= 3");
      std::vector<double> psi(static_cast<std::size_t>(o.n));
      for (int i = 0; i < o.n; ++i) psi[i] = obstacle_psi(spec.obstacle, i / (o.n - 1.0));
      const Grid1D u = obstacle_psor(psi, spec.g0, spec.g1);
      csv << "x,u,psi\n";
      for (int i = 0; i < o.n; ++i) {
        csv << format_double(u.x(i)) << ',' << format_double(u.values[i]) << ',' << format_double(psi[i]) << '\n';
      }
      std::cout << "psor " << o.obstacle << ": " << o.n << " nodes, complementarity residual "
                << format_double(complementarity_residual(u, psi)) << '\n';
    } else if (o.kind == "radius") {
      const double r = gl_sharp_interface_radius(o.V);
      csv << "V,radius\n" << format_double(o.V) << ',' << format_double(r) << '\n';
      std::cout << format_double(r) << '\n';
    } else if (o.kind == "quadrature") {
      const Integrand* pick = nullptr;
      for (const auto& in : integrands()) {
        if (in.name == o.integrand) pick = &in;
      }
      if (!pick) throw ConfigError("unknown integrand '" + o.integrand + "' (sin, cubic, gauss2d)");
      const std::vector<int> nodes(static_cast<std::size_t>(pick->dim), o.nodes);
      const double value = quadrature_reference(pick->f, nodes, Box::unit(pick->dim));
      csv << "integrand,nodes,value,exact,error\n"
          << pick->name << ',' << o.nodes << ',' << format_double(value) << ',' << format_double(pick->exact) << ','
          << format_double(value - pick->exact) << '\n';
      std::cout << pick->name << ": " << format_double(value) << " error " << format_double(value - pick->exact)
                << '\n';
    } else {
      throw ConfigError("unknown oracle '" + o.kind + "' (psor, radius, quadrature)");
    }
    if (o.out) {
      auto out = open_out(*o.out);
      out << csv.str();
    }
    return kOk;
  });
}

}  // namespace wanco
