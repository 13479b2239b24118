#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "nlheat/app.hpp"
#include "nlheat/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectral null-control synthesis and certification for the non-local heat equation"};
  std::string verb;
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::string> positional;
  std::string horizon;
  std::string n;
  int threads = 0;

  std::string verbs;
  for (const auto& v : nlheat::command_verbs()) verbs += (verbs.empty() ? "" : ", ") + v;
  app.add_option("verb", verb, "One of: " + verbs)->required();
  app.add_option("overrides", positional, "Config overrides as key=value (T and N accepted as short keys)");
  app.add_option("-c,--config", config_path, "Experiment config file")->required();
  app.add_option("--T", horizon, "Override time.T");
  app.add_option("--N", n, "Override basis.N");
  app.add_option("--set", sets, "Override any config key: --set section.key=value");
  app.add_option("--threads", threads, "Worker count (default: $NLHEAT_NUM_THREADS or all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::vector<std::string> overrides = positional;
  overrides.insert(overrides.end(), sets.begin(), sets.end());
  if (app.count("--T") > 0) overrides.push_back("time.T=" + horizon);
  if (app.count("--N") > 0) overrides.push_back("basis.N=" + n);
  if (threads > 0) nlheat::set_worker_count(threads);

  try {
    const nlheat::ExperimentConfig config = nlheat::load_config(config_path, overrides);
    return nlheat::run_command(verb, config, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return nlheat::exit_code_for(e);
  }
}
