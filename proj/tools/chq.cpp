#include <CLI11.hpp>

#include <iostream>

#include "chq/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Finite-difference solver and checks for complex Hessian quotient equations"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  for (const auto& name : chq::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "seed for randomized checks (overrides the config)");
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : chq::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();

  chq::RunConfig cfg;
  try {
    cfg = chq::load_config(config_path, command);
  } catch (const chq::ConfigError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << config_path << ": " << d.describe() << '\n';
    return chq::kExitConfig;
  }
  if (sub->count("--seed")) cfg.seed = seed;
  if (sub->count("--out")) cfg.output.dir = out_dir;

  const chq::RunOutcome out = chq::run(cfg);
  try {
    const auto report = chq::write_outputs(cfg, out);
    if (cfg.output.verbosity > 0) std::cout << out.table << (out.table.ends_with('\n') ? "" : "\n");
    std::cout << "report: " << report.string() << '\n';
  } catch (const chq::Error& e) {
    std::cerr << e.what() << '\n';
    return chq::kExitConfig;
  }
  if (out.exit_code != chq::kExitOk && out.report.contains("error"))
    std::cerr << out.report["error"]["message"].get<std::string>() << '\n';
  return out.exit_code;
}
