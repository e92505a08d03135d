#include <CLI11.hpp>

#include "mixgel/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mixgel: mixed-norm Gelfand width experiments"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  std::string plot_path;
  long long seed_override = -1;
  int threads = 1;

  app.add_option("--config", config_path, "JSON run configuration")
      ->required();
  app.add_option("--out", out_path, "output file path")->required();
  app.add_option("--seed", seed_override, "seed override (>= 0)");
  app.add_option("--format", format, "output format: csv or json");
  app.add_option("--plot", plot_path,
                 "also write a long-format (series,x,y) CSV here");
  app.add_option("--threads", threads, "worker threads for sweeps")
      ->check(CLI::PositiveNumber);

  // Subcommand names mirror the config's "subcommand" field; when given on
  // the command line they must agree with the config.
  std::string request;
  for (const char* name : {"norm", "bounds", "packing", "width", "recover",
                           "phase", "besov-rate", "verify"}) {
    auto* sub = app.add_subcommand(name, "");
    sub->callback([&request, name]() { request = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const mixgel::RunConfig config = mixgel::load_config(
        config_path, out_path, format, seed_override, threads);
    if (request == "verify") {
      // checks an existing output against the original run's config
      return mixgel::verify_output(config);
    }
    if (!request.empty() && request != config.subcommand) {
      std::fprintf(stderr, "subcommand %s does not match config (%s)\n",
                   request.c_str(), config.subcommand.c_str());
      return mixgel::kConfigError;
    }
    return mixgel::dispatch(config);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return mixgel::kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return mixgel::kRuntimeError;
  }
}
