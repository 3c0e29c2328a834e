// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.
#include "wanco/commands.hpp"
#include "wanco/config.hpp"
#include "wanco/diffcore.hpp"
#include "wanco/io.hpp"
#include "wanco/netarch.hpp"
#include "wanco/oracles.hpp"
#include "wanco/problems.hpp"
#include "wanco/rng.hpp"
#include "wanco/sampling.hpp"
#include "wanco/trainer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

using namespace wanco;
namespace fs = std::filesystem;

namespace {

struct Check {
  std::string what;
  bool pass;
};

struct Outcome {
  std::vector<Check> checks;
  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
  void add(bool ok, const std::string& what) { checks.push_back({what, ok}); }
};

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

fs::path g_out;

RunConfig config_for(const std::string& preset, const Json& overrides = Json::object()) {
  return parse_run_config(merge_config(Json{{"preset", preset}}, overrides));
}

TrainResult run(const RunConfig& cfg, const std::string& name) {
  const auto start = std::chrono::steady_clock::now();
  TrainResult r = run_and_write(cfg, g_out / name, true);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::clog << "  [" << name << ": " << cfg.train.iterations << " iterations, " << num(secs) << " s]\n";
  return r;
}

std::size_t column(const RunHistory& h, const std::string& name) {
  const auto it = std::find(h.constraint_names.begin(), h.constraint_names.end(), name);
  if (it == h.constraint_names.end()) throw std::logic_error("no constraint " + name);
  return static_cast<std::size_t>(it - h.constraint_names.begin());
}

const HistoryRecord& record_at(const RunHistory& h, long iteration) {
  for (const auto& r : h.records) {
    if (r.iteration == iteration) return r;
  }
  throw std::logic_error("no record at iteration " + std::to_string(iteration));
}

/// Grid values of the trained fields on a Simpson grid over the domain.
struct GridField {
  std::vector<int> nodes;
  Matrix x;
  Matrix values;  // one row per grid column
  Box box;

  double integrate(const std::function<double(Eigen::Index)>& f) const {
    std::vector<double> v(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index i = 0; i < x.cols(); ++i) v[static_cast<std::size_t>(i)] = f(i);
    return quadrature_reference(v, nodes, box);
  }
};

GridField grid_field(const Problem& p, const ParamStore& params, int n) {
  GridField g;
  g.box = p.domain();
  g.nodes.assign(static_cast<std::size_t>(g.box.dim()), n);
  g.x = grid_points(g.box, g.nodes);
  g.values = p.grid_values(params, g.x);
  return g;
}

// ---------------------------------------------------------------- criterion 1

double family_grad_error(const Problem& p, std::vector<double> betas) {
  ParamStore s = p.make_params(7);
  for (std::size_t i = 0; i < s.size(); ++i) s.values()[i] += 0.05 * std::sin(1.3 * static_cast<double>(i) + 0.2);
  SamplerConfig sampler;
  sampler.n_interior = 64;
  sampler.n_per_face = 16;
  const Batches b = make_batches(p, sampler, 3, 0);
  const GradMask all(p.networks().size(), true);
  const GradMask none(p.networks().size(), false);
  const LossFunction f = [&](const ParamStore& ps, AdjointAccumulator* adj) {
    return p.evaluate(ps, b, betas, adj ? all : none, adj).loss;
  };
  const auto acc = backprop_loss(f, s);
  const auto fd = finite_diff_grad([&](const ParamStore& ps) { return f(ps, nullptr); }, s, 1e-5);
  return relative_l2(acc.grad(), fd);
}

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const NetShape net{2, 8, Activation::Tanh3};
  const MultiplierShape mul{6, Activation::Tanh3};
  Outcome o;
  auto check = [&](const std::string& name, double err) { o.add(err < 1e-4, name + " " + num(err) + " < 1e-4"); };
  check("gl", family_grad_error(GlProblem(GlSpec{}, net, mul), {100.0}));
  PartitionSpec ps;
  ps.n = 3;
  check("partition", family_grad_error(PartitionProblem(ps, net, mul), {100.0}));
  ps.bc = PartitionBc::Periodic;
  check("partition_periodic", family_grad_error(PartitionProblem(ps, net, mul), {100.0}));
  FluidSolidSpec fs;
  fs.alpha0 = 100.0;
  check("fluid_solid", family_grad_error(FluidSolidProblem(fs, net, net, mul, net), {10.0, 10.0, 100.0}));
  check("obstacle", family_grad_error(ObstacleProblem(ObstacleSpec::defaults(ObstacleId::Psi3), net, net), {100.0}));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.add(secs < 60.0, "runtime " + num(secs) + " s < 60 s");
  return o;
}

// ---------------------------------------------------------------- criterion 2

double input_grad_error(const ResNet& net, std::uint64_t seed) {
  ParamStore s;
  declare_segments(s, "n", net.layout());
  net.init_params(s.values(), seed);
  for (std::size_t i = 0; i < s.size(); ++i) s.values()[i] += 0.05 * std::cos(1.7 * static_cast<double>(i));
  const int d = net.config().d_in;
  const CounterRng rng(seed + 101);
  const double h = 1e-5;
  double worst = 0.0;
  for (int p = 0; p < 100; ++p) {
    std::vector<double> x(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) x[static_cast<std::size_t>(k)] = 0.02 + 0.96 * rng.uniform(static_cast<std::uint64_t>(p * d + k));
    const SpatialJet jet = net.eval_with_input_grad(s.values(), x);
    Matrix fd(jet.jacobian.rows(), d);
    for (int k = 0; k < d; ++k) {
      auto xp = x, xm = x;
      xp[static_cast<std::size_t>(k)] += h;
      xm[static_cast<std::size_t>(k)] -= h;
      fd.col(k) = (net.eval(s.values(), xp) - net.eval(s.values(), xm)) / (2 * h);
    }
    worst = std::max(worst, (jet.jacobian - fd).norm() / std::max(fd.norm(), 1e-3));
  }
  return worst;
}

Outcome criterion2() {
  struct Case {
    std::string name;
    ResNetConfig cfg;
  };
  std::vector<Case> cases;
  for (Activation a : {Activation::Tanh3, Activation::Tanh, Activation::Sigmoid, Activation::Relu3}) {
    const std::string act(to_string(a));
    cases.push_back({act + "/identity", {2, 1, 2, 8, a}});
    cases.push_back({act + "/hard_dirichlet_gl",
                     {2, 1, 2, 8, a, InputTransform::Identity, OutputTransform::hard_dirichlet_gl()}});
    cases.push_back({act + "/partition_nonneg_dirichlet",
                     {2, 3, 2, 8, a, InputTransform::Identity, OutputTransform::partition_nonneg_dirichlet()}});
    cases.push_back({act + "/periodic_embed+nonneg",
                     {3, 2, 2, 8, a, InputTransform::PeriodicEmbed, OutputTransform::nonneg()}});
    cases.push_back({act + "/obstacle_affine",
                     {1, 1, 3, 8, a, InputTransform::Identity, OutputTransform::obstacle_affine(5.0, 10.0)}});
    cases.push_back({act + "/nonpos", {1, 1, 2, 8, a, InputTransform::Identity, OutputTransform::nonpos()}});
    cases.push_back({act + "/fluid 2->3", {2, 3, 3, 8, a}});
    cases.push_back({act + "/4d", {4, 2, 1, 8, a}});
  }
  Outcome o;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& c : cases) {
    const double e = input_grad_error(ResNet(c.cfg), 5);
    if (e >= 1e-6) o.add(false, c.name + " " + num(e));
    if (e >= worst) {
      worst = e;
      worst_name = c.name;
    }
  }
  o.add(worst < 1e-6, std::to_string(cases.size()) + " combinations, worst " + worst_name + " " + num(worst) +
                          " < 1e-6");
  return o;
}

// ------------------------------------------------------------- criteria 3, 5

struct GlRun {
  RunConfig cfg;
  TrainResult result;
  double mass = 0.0;
  double relative = 0.0;
  double radius = 0.0;
};

GlRun gl_run(const RunConfig& cfg, const std::string& name) {
  GlRun g{cfg, run(cfg, name)};
  const GridField f = grid_field(*cfg.problem, g.result.params, 401);
  g.mass = f.integrate([&](Eigen::Index i) { return f.values(0, i); });
  const double V = cfg.tree["problem"]["V"].get<double>();
  g.relative = std::abs((V - g.mass) / V);
  const double area = f.integrate([&](Eigen::Index i) { return f.values(0, i) > 0.0 ? 1.0 : 0.0; });
  g.radius = std::sqrt(area / std::numbers::pi);
  return g;
}

std::optional<GlRun> g_gl;

// criterion 5 reads the residual trajectory, so record every iteration
RunConfig gl_desk_config() { return config_for("gl_desk", {{"train", {{"record_every", 1}}}}); }

const GlRun& gl_desk() {
  if (!g_gl) g_gl = gl_run(gl_desk_config(), "c3_gl_desk");
  return *g_gl;
}

Outcome criterion3() {
  const GlRun& g = gl_desk();
  const double r0 = gl_sharp_interface_radius(g.cfg.tree["problem"]["V"].get<double>());
  Outcome o;
  o.add(g.relative < 0.02, "relative mass error on 401^2 Simpson grid " + num(g.relative) + " < 0.02 (int u = " +
                               num(g.mass) + ")");
  const double dev = std::abs(g.radius - r0) / r0;
  o.add(dev < 0.15, "zero-level radius " + num(g.radius) + " vs " + num(r0) + ", deviation " + num(dev) + " < 0.15");
  return o;
}

Outcome criterion5() {
  const GlRun& g = gl_desk();
  const auto& recs = g.result.history.records;
  int sign_changes = 0;
  long first_flip = -1;
  for (std::size_t i = 1; i < recs.size(); ++i) {
    if ((recs[i].multipliers[0] > 0) != (recs[i - 1].multipliers[0] > 0)) {
      if (sign_changes++ == 0) first_flip = recs[i].iteration;
    }
  }
  long crossing = -1;
  const double r0 = recs.front().residual[0];
  for (const auto& r : recs) {
    if (r.residual[0] * r0 <= 0.0) {
      crossing = r.iteration;
      break;
    }
  }
  const long half = g.cfg.train.iterations / 2;
  Outcome o;
  o.add(sign_changes >= 1, "multiplier sign changes " + std::to_string(sign_changes) + " >= 1 (from " +
                               num(recs.front().multipliers[0]) + " to " + num(recs.back().multipliers[0]) + ")");
  o.add(crossing >= 0 && crossing < half,
        "first residual zero crossing at iteration " + std::to_string(crossing) + " < " + std::to_string(half));
  o.add(first_flip >= 0 && crossing >= 0 && first_flip <= crossing,
        "first multiplier sign change at iteration " + std::to_string(first_flip) + " <= first crossing");
  return o;
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion4() {
  const Json beta = {{"train", {{"beta0", {{"mass", 1000.0}}}}}};
  const GlRun w = gl_run(config_for("gl_desk", beta), "c4_wanco");
  const GlRun p = gl_run(config_for("gl_desk", merge_config(beta, {{"problem", {{"method", "drm_p"}}}})), "c4_drm_p");
  Outcome o;
  o.add(w.relative < p.relative, "beta0 = 1000: WANCO " + num(w.relative) + " < DRM-P " + num(p.relative));
  o.add(w.relative < 0.05, "WANCO relative mass error " + num(w.relative) + " < 0.05");
  return o;
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion6() {
  Outcome o;
  for (int n : {2, 3}) {
    const RunConfig cfg = config_for("partition_desk", {{"problem", {{"n", n}}}});
    const TrainResult r = run(cfg, "c6_partition_n" + std::to_string(n));
    const GridField f = grid_field(*cfg.problem, r.params, 201);
    const std::string tag = "n=" + std::to_string(n) + ": ";
    double worst_mass = 0.0, worst_overlap = 0.0, min_value = 0.0;
    for (int i = 0; i < n; ++i) {
      const double m = f.integrate([&](Eigen::Index k) { return f.values(i, k) * f.values(i, k); });
      worst_mass = std::max(worst_mass, std::abs(m - 1.0));
      min_value = std::min(min_value, f.values.row(i).minCoeff());
      for (int j = i + 1; j < n; ++j) {
        const double ov = f.integrate([&](Eigen::Index k) {
          return f.values(i, k) * f.values(i, k) * f.values(j, k) * f.values(j, k);
        });
        worst_overlap = std::max(worst_overlap, ov);
      }
    }
    o.add(worst_mass < 0.05, tag + "max |int u_i^2 - 1| " + num(worst_mass) + " < 0.05");
    o.add(worst_overlap < 0.1, tag + "max int u_i^2 u_j^2 " + num(worst_overlap) + " < 0.1");
    o.add(min_value >= 0.0, tag + "min output on grid " + num(min_value) + " >= 0");
    const BoundaryBatch edge = sample_boundary_box(cfg.problem->domain(), 256, 17);
    const Matrix on_edge = cfg.problem->grid_values(r.params, edge.points);
    o.add(on_edge.topRows(n).cwiseAbs().maxCoeff() == 0.0,
          tag + "outputs on " + std::to_string(edge.size()) + " boundary samples exactly 0");
  }
  for (int d : {3, 4}) {
    const RunConfig cfg = config_for("partition_desk", {{"problem", {{"d", d}}}, {"train", {{"iterations", 500}}}});
    const TrainResult r = run(cfg, "c6_smoke_d" + std::to_string(d));
    bool finite = std::isfinite(r.final_eval.loss);
    bool monotone = true;
    const auto& recs = r.history.records;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      finite = finite && std::isfinite(recs[i].loss);
      if (i > 0) monotone = monotone && recs[i].betas[0] > recs[i - 1].betas[0];
    }
    o.add(finite && monotone, "d=" + std::to_string(d) + " smoke: 500 iterations, finite losses, increasing beta");
  }
  return o;
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion7() {
  Outcome o;
  for (ObstacleId id : {ObstacleId::Psi1, ObstacleId::Psi2, ObstacleId::Psi3}) {
    const std::string name(to_string(id));
    const RunConfig cfg = config_for("obstacle_" + name + "_desk");
    const TrainResult r = run(cfg, "c7_obstacle_" + name);
    const int n = 1001;
    const GridField f = grid_field(*cfg.problem, r.params, n);
    std::vector<double> psi(n);
    for (int i = 0; i < n; ++i) psi[static_cast<std::size_t>(i)] = f.values(1, i);
    const ObstacleSpec spec = ObstacleSpec::defaults(id);
    const Grid1D ref = obstacle_psor(psi, spec.g0, spec.g1);
    double linf = 0.0, violation = 0.0;
    for (int i = 0; i < n; ++i) {
      linf = std::max(linf, std::abs(f.values(0, i) - ref.values[static_cast<std::size_t>(i)]));
      violation = std::max(violation, psi[static_cast<std::size_t>(i)] - f.values(0, i));
    }
    o.add(linf < 0.2, name + ": L-inf distance to PSOR " + num(linf) + " < 0.2");
    o.add(violation < 0.01, name + ": max(psi - u) on grid " + num(violation) + " < 0.01");
    o.add(f.values(0, 0) == spec.g0 && f.values(0, n - 1) == spec.g1,
          name + ": boundary values " + num(f.values(0, 0)) + ", " + num(f.values(0, n - 1)) + " exact");
  }
  return o;
}

// ---------------------------------------------------------------- criterion 8

std::optional<TrainResult> g_fluid;

Outcome criterion8() {
  Outcome o;
  const std::vector<int> line{100001};
  const Box unit_y{{0.0}, {1.0}};
  const double inflow = quadrature_reference(
      [](std::span<const double> y) {
        const double x[] = {0.0, y[0]};
        return bc_example1(x)[0];
      },
      line, unit_y);
  const double outflow = quadrature_reference(
      [](std::span<const double> y) {
        const double x[] = {1.0, y[0]};
        return bc_example1(x)[0];
      },
      line, unit_y);
  const double target = 1.0 / std::numbers::pi;
  o.add(std::abs(inflow - target) < 1e-9 && std::abs(outflow - target) < 1e-9,
        "example 1 inflow " + num(inflow) + " = outflow " + num(outflow) + " = 1/pi");

  const RunConfig cfg = config_for("fluid_solid_desk");
  g_fluid = run(cfg, "c8_fluid_solid");
  const TrainResult& r = *g_fluid;
  const GridField f = grid_field(*cfg.problem, r.params, 201);
  const double area = cfg.problem->domain().volume();
  const double C_V = cfg.tree["problem"]["C_V"].get<double>();
  const double phi = f.integrate([&](Eigen::Index i) { return f.values(2, i); });
  const double vol_err = std::abs(phi - C_V * area) / area;
  o.add(vol_err < 0.05, "|int phi - C_V|D|| / |D| on 201^2 grid " + num(vol_err) + " < 0.05");

  const RunHistory& h = r.history;
  const std::size_t div = column(h, "div_sq"), bnd = column(h, "boundary_sq");
  const double div100 = record_at(h, 100).achieved[div];
  const double div_final = r.final_eval.constraints[div].achieved;
  o.add(div_final < 0.25 * div100,
        "mean (div u)^2 final " + num(div_final) + " < 25% of iteration-100 value " + num(div100));
  const double b0 = record_at(h, 0).achieved[bnd];
  const double b_final = r.final_eval.constraints[bnd].achieved;
  o.add(b_final * 10.0 <= b0, "boundary mismatch " + num(b0) + " -> " + num(b_final) + ", reduction " +
                                  num(b0 / b_final) + "x >= 10x");
  return o;
}

// ---------------------------------------------------------------- criterion 9

Outcome criterion9() {
  gl_desk();
  const RunConfig cfg = gl_desk_config();
  run(cfg, "c9_gl_desk_repeat");
  auto bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string a = bytes(g_out / "c3_gl_desk" / "history.csv");
  const std::string b = bytes(g_out / "c9_gl_desk_repeat" / "history.csv");
  Outcome o;
  o.add(!a.empty() && a == b, "history.csv of two seed-" + std::to_string(cfg.train.seed) + " runs byte-identical (" +
                                  std::to_string(a.size()) + " bytes)");
  return o;
}

// --------------------------------------------------------------- criterion 10

Outcome criterion10() {
  Outcome o;
  auto check = [&](const std::string& name, const RunConfig& cfg, const TrainResult& r) {
    const auto channels = cfg.problem->channels();
    for (std::size_t c = 0; c < channels.size(); ++c) {
      const auto& s = cfg.train.schedules[c];
      const double want = s.beta0 * std::pow(s.alpha, static_cast<double>(cfg.train.iterations));
      const double rel = std::abs(r.final_betas[c] - want) / want;
      o.add(rel <= 1e-12, name + " " + channels[c].name + ": beta " + num(r.final_betas[c]) + " vs beta0*alpha^N " +
                              num(want) + ", rel " + num(rel));
    }
  };
  const RunConfig gl = gl_desk_config();
  check("gl_desk", gl, gl_desk().result);
  if (g_fluid) check("fluid_solid_desk", config_for("fluid_solid_desk"), *g_fluid);
  // schedule alone at N = 5000, beta0 = 1e4, alpha = 1.0003
  const ConstraintChannel ch{"c", {"c"}};
  const double b = beta_at({10000.0, 1.0003}, ch, 5000);
  const double want = 10000.0 * std::pow(1.0003, 5000.0);
  o.add(std::abs(b - want) / want <= 1e-12, "10000 * 1.0003^5000 = " + num(b));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string out = "acceptance_runs";
  std::vector<int> only;
  app.add_option("--out", out, "directory for run artifacts");
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  g_out = out;
  fs::create_directories(g_out);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {5, criterion5}, {9, criterion9},
      {4, criterion4}, {6, criterion6}, {7, criterion7}, {8, criterion8}, {10, criterion10},
  };
  const std::set<int> selected(only.begin(), only.end());
  std::map<int, Outcome> results;
  for (const auto& [id, fn] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    std::clog << "criterion " << id << " ...\n";
    try {
      results[id] = fn();
    } catch (const std::exception& e) {
      results[id].add(false, std::string("error: ") + e.what());
    }
    for (const auto& c : results[id].checks) std::clog << "  " << (c.pass ? "ok   " : "FAIL ") << c.what << '\n';
  }

  int failed = 0;
  std::cout << "\n";
  for (const auto& [id, o] : results) {
    std::cout << "criterion " << std::setw(2) << id << ": " << (o.pass() ? "PASS" : "FAIL");
    std::string sep = "  ";
    for (const auto& c : o.checks) {
      std::cout << sep << (c.pass ? "" : "[fail] ") << c.what;
      sep = "; ";
    }
    std::cout << '\n';
    if (!o.pass()) ++failed;
  }
  std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " criteria pass\n";
  return failed == 0 ? 0 : 1;
}
