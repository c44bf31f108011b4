// dispersim synth|fit|dispersion|reproduce --config <path> [--out <dir>] [--paper-grid]
//
// Exit codes: 0 success, 2 validation error (bad config or input file),
// 3 numerical failure (including a reproduction whose checks fail).

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dispersim/error.hpp"
#include "dispersim/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dispersion curves from data-driven models of simulated beam FRFs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  bool paper_grid = false;
  std::string id;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "scenario config (TOML subset)")->required();
    cmd->add_option("--out", out, "output directory (default: the config's output_dir)");
    cmd->add_flag("--paper-grid", paper_grid, "synthesize on the fine grid (paper_resolution, 0.25 Hz)");
  };
  CLI::App* synth = app.add_subcommand("synth", "synthesize FRF datasets with the spectral element model");
  CLI::App* fit = app.add_subcommand("fit", "fit rational models to the synthesized datasets");
  CLI::App* dispersion = app.add_subcommand("dispersion", "estimate dispersion curves from the fitted models");
  CLI::App* reproduce = app.add_subcommand("reproduce", "regenerate one table or figure and check it");
  for (CLI::App* cmd : {synth, fit, dispersion, reproduce}) add_common(cmd);
  reproduce->add_option("id", id, "table1, table2, fig4, fig6 or fig8")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "fig4", "fig6", "fig8"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const dispersim::ScenarioConfig config = dispersim::load_config(config_path);
    dispersim::RunOptions options;
    options.out_dir = out;
    options.paper_grid = paper_grid;
    options.log = &std::cerr;

    dispersim::Summary summary;
    if (synth->parsed()) summary = dispersim::cmd_synth(config, options);
    else if (fit->parsed()) summary = dispersim::cmd_fit(config, options);
    else if (dispersion->parsed()) summary = dispersim::cmd_dispersion(config, options);
    else summary = dispersim::cmd_reproduce(id, config, options);

    for (const auto& f : summary.files) std::cout << "wrote " << f.string() << "\n";
    std::cout << dispersim::format_summary(summary);
    return summary.passed() ? 0 : 3;
  } catch (const dispersim::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const dispersim::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
