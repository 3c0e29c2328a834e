#include "wanco/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Augmented-Lagrangian adversarial training for constrained variational problems"};
  app.require_subcommand(1);

  wanco::TrainOptions train;
  std::string train_out;
  std::uint64_t seed = 0;
  auto* cmd_train = app.add_subcommand("train", "train a configuration; writes history.csv, params.bin, summary.txt");
  cmd_train->add_option("--config", train.config, "run configuration (JSON)")->required();
  cmd_train->add_option("--out", train_out, "output directory (overrides output_dir)");
  auto* train_seed = cmd_train->add_option("--seed-override", seed, "replace the configured seed");
  cmd_train->add_flag("--quiet", train.quiet, "no progress lines");

  wanco::GridOptions grid;
  std::string grid_text = "1000";
  auto* cmd_grid = app.add_subcommand("eval-grid", "evaluate stored parameters on a uniform grid");
  cmd_grid->add_option("--params", grid.params, "params.bin written by train")->required();
  cmd_grid->add_option("--grid", grid_text, "nodes per axis, e.g. 1000x1000 or 1001");
  cmd_grid->add_option("--out", grid.out, "output CSV")->required();

  wanco::TrainOptions compare;
  std::string compare_out;
  std::uint64_t compare_seed = 0;
  auto* cmd_compare = app.add_subcommand("compare", "train several variants of one problem; writes compare.csv");
  cmd_compare->add_option("--config", compare.config, "compare configuration (JSON)")->required();
  cmd_compare->add_option("--out", compare_out, "output directory");
  auto* compare_seed_opt = cmd_compare->add_option("--seed-override", compare_seed, "replace every variant's seed");
  cmd_compare->add_flag("--quiet", compare.quiet, "no progress lines");

  wanco::OracleOptions oracle;
  std::string oracle_out;
  auto* cmd_oracle = app.add_subcommand("oracle", "reference solutions: psor, radius, quadrature");
  cmd_oracle->add_option("kind", oracle.kind, "psor | radius | quadrature")->required();
  cmd_oracle->add_option("--obstacle", oracle.obstacle, "psi1 | psi2 | psi3 (psor)");
  cmd_oracle->add_option("--n", oracle.n, "grid nodes (psor)");
  cmd_oracle->add_option("--V", oracle.V, "mass target (radius)");
  cmd_oracle->add_option("--integrand", oracle.integrand, "sin | cubic | gauss2d (quadrature)");
  cmd_oracle->add_option("--nodes", oracle.nodes, "odd node count per axis (quadrature)");
  cmd_oracle->add_option("--out", oracle_out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : wanco::kConfigError;
  }

  try {
    if (*cmd_train) {
      if (!train_out.empty()) train.out = train_out;
      if (*train_seed) train.seed = seed;
      return wanco::cmd_train(train);
    }
    if (*cmd_grid) {
      grid.grid = wanco::parse_grid(grid_text);
      return wanco::cmd_eval_grid(grid);
    }
    if (*cmd_compare) {
      if (!compare_out.empty()) compare.out = compare_out;
      if (*compare_seed_opt) compare.seed = compare_seed;
      return wanco::cmd_compare(compare);
    }
    if (!oracle_out.empty()) oracle.out = oracle_out;
    return wanco::cmd_oracle(oracle);
  } catch (const wanco::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return wanco::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
