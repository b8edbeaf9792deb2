// hubflow command line: batch pipeline, read-only server, scenario generator.
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hubflow/error.hpp"
#include "hubflow/pipeline.hpp"
#include "hubflow/service.hpp"
#include "hubflow/synth.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitPartial = 3;

int run_pipeline(const std::string& config_path) {
  const auto config = hubflow::load_pipeline_config(config_path);
  const auto summary = hubflow::pipeline_run(config);
  std::cout << summary.to_json().dump(2) << '\n';
  if (!summary.errors.empty()) {
    for (const auto& e : summary.errors) std::cerr << "error: " << e << '\n';
    return kExitPartial;
  }
  return 0;
}

int run_server(const std::string& workspace, const std::string& bind) {
  const hubflow::Service service(workspace);
  std::cerr << "serving " << workspace << " (" << service.config_hash() << ") on " << bind
            << '\n';
  if (!hubflow::serve(service, bind)) {
    std::cerr << "cannot bind " << bind << '\n';
    return 1;
  }
  return 0;
}

int run_generate(const std::string& scenario_path, const std::string& out_dir) {
  const auto config = scenario_path.empty() ? hubflow::synth::ScenarioConfig::defaults()
                                            : hubflow::synth::load_scenario(scenario_path);
  const auto output = hubflow::synth::generate(config);
  hubflow::synth::write_scenario(config, output, out_dir);
  std::cout << "wrote " << output.record_count << " probe records for "
            << output.generated_dates.size() << " days to " << out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hub traffic flow analytics"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Compute the analysis bundle described by a config");
  run->add_option("config", config_path, "Run config (JSON)")->required();

  std::string workspace;
  std::string bind = "127.0.0.1:8080";
  auto* serve = app.add_subcommand("serve", "Serve a computed bundle over HTTP");
  serve->add_option("workspace", workspace, "Bundle directory")->required();
  serve->add_option("--bind", bind, "host:port")->capture_default_str();

  std::string scenario_path;
  std::string out_dir = "scenario";
  auto* gen = app.add_subcommand("gen", "Generate a synthetic scenario");
  gen->add_option("scenario", scenario_path, "Scenario file (JSON); defaults if omitted");
  gen->add_option("--out", out_dir, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_pipeline(config_path);
    if (*serve) return run_server(workspace, bind);
    if (*gen) return run_generate(scenario_path, out_dir);
  } catch (const hubflow::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const hubflow::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const hubflow::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const hubflow::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
