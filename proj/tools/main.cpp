#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "shapeopt/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Shape optimization of a closed planar interface"};
  app.require_subcommand(1);

  std::string config;
  std::string output;
  std::uint64_t seed = 0;
  bool dry_run = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "configuration file")->required();
    sub->add_flag("--dry-run", dry_run, "validate the configuration and mesh generation only");
    sub->add_option("--output", output, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "random seed (overrides run.seed)");
  };
  CLI::App* run = app.add_subcommand("run", "run the configured optimization");
  add_common(run);
  CLI::App* check = app.add_subcommand("check-derivative", "compare surface, volume and FD derivatives");
  add_common(check);
  CLI::App* info = app.add_subcommand("mesh-info", "generate the initial mesh and report its quality");
  add_common(info);

  CLI::App* validate = app.add_subcommand("validate", "check a curve file, optionally against a second one");
  std::string curve;
  std::string other;
  double equiv = 0.0;
  validate->add_option("curve", curve, "curve file")->required();
  validate->add_option("other", other, "second curve file");
  CLI::Option* equiv_opt = validate->add_option("--equiv", equiv, "Hausdorff tolerance for equivalence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  shapeopt::CommandOptions opts;
  opts.dry_run = dry_run;
  for (CLI::App* sub : {run, check, info}) {
    if (!sub->parsed()) continue;
    if (sub->count("--output")) opts.output_dir = output;
    if (sub->count("--seed")) opts.seed = seed;
  }

  if (run->parsed()) return shapeopt::cmd_run(config, opts, std::cout, std::cerr);
  if (check->parsed()) return shapeopt::cmd_check_derivative(config, opts, std::cout, std::cerr);
  if (info->parsed()) return shapeopt::cmd_mesh_info(config, opts, std::cout, std::cerr);
  return shapeopt::cmd_validate(curve, other.empty() ? std::nullopt : std::optional<std::string>(other),
                                equiv_opt->count() ? std::optional<double>(equiv) : std::nullopt, std::cout,
                                std::cerr);
}
