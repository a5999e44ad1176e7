#include "serpentine/config.hpp"
#include "serpentine/runner.hpp"

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"serpentine: coupled 0D/2D channel solver with equilibrated-flux "
               "error estimation"};
  std::string config_path;
  std::string out_dir;
  bool quiet = false;
  app.add_option("config", config_path, "experiment configuration file")->required();
  app.add_option("--out", out_dir, "override the output directory");
  app.add_flag("--quiet", quiet, "suppress per-row stdout echo");
  CLI11_PARSE(app, argc, argv);

  try {
    const serpentine::ExperimentConfig cfg = serpentine::parse_config_file(config_path);
    return serpentine::run_experiment(cfg, out_dir, quiet);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
