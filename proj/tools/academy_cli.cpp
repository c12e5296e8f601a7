// Command-line front end over the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "academy.h"

namespace {

int report_failure(aa_status status) {
  std::cerr << "error: " << aa_last_error() << '\n';
  return status == AA_E_CONFIG_ERROR || status == AA_E_INVALID_ARGUMENT ? 2 : 1;
}

int run_command(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::int64_t> ticks,
                const std::string& transcript, const std::string& report_path) {
  aa_config* config = nullptr;
  aa_status st = config_path.empty() ? aa_config_default(&config) : aa_config_load(config_path.c_str(), &config);
  if (st != AA_OK) return report_failure(st);
  if (seed) aa_config_set_seed(config, *seed);
  if (ticks && (st = aa_config_set_ticks(config, *ticks)) != AA_OK) {
    aa_config_free(config);
    return report_failure(st);
  }
  aa_result* result = nullptr;
  st = aa_simulation_run(config, transcript.empty() ? nullptr : transcript.c_str(), &result);
  aa_config_free(config);
  if (st != AA_OK) return report_failure(st);
  std::string report = aa_result_report(result);
  aa_result_free(result);
  std::cout << report;
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
    out << report;
    if (!out) {
      std::cerr << "error: cannot write " << report_path << '\n';
      return 1;
    }
  }
  return 0;
}

int mine_command(const std::string& log, const std::string& location) {
  aa_repository* repo = nullptr;
  aa_status st = aa_repository_open(log.c_str(), &repo);
  if (st != AA_OK) return report_failure(st);
  char* tree = nullptr;
  char* rules = nullptr;
  st = aa_repository_mine(repo, location.c_str(), &tree, &rules);
  aa_repository_close(repo);
  if (st != AA_OK) return report_failure(st);
  std::cout << "tree:\n" << tree << "rules:\n" << rules;
  aa_string_free(tree);
  aa_string_free(rules);
  return 0;
}

int inspect_command(const std::string& log) {
  aa_repository* repo = nullptr;
  aa_status st = aa_repository_open(log.c_str(), &repo);
  if (st != AA_OK) return report_failure(st);
  char* summary = nullptr;
  st = aa_repository_summary(repo, &summary);
  aa_repository_close(repo);
  if (st != AA_OK) return report_failure(st);
  std::cout << summary;
  aa_string_free(summary);
  return 0;
}

int replay_command(const std::string& transcript) {
  aa_status st = aa_replay_transcript(transcript.c_str());
  if (st != AA_OK) return report_failure(st);
  std::cout << "transcript " << transcript << " replays identically\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent academy: closed-loop agent retraining on the O3RTAA alert scenario"};
  app.require_subcommand(1);

  std::string config_path, transcript, report_path, log, location;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> ticks;

  auto* run = app.add_subcommand("run", "Run the simulation and print the per-epoch report");
  run->add_option("--config", config_path, "Scenario configuration (default: built-in O3RTAA config)");
  run->add_option("--seed", seed, "Override the configured seed");
  run->add_option("--ticks", ticks, "Override the configured tick count");
  run->add_option("--transcript", transcript, "Write the message transcript here");
  run->add_option("--report", report_path, "Also write the report here");

  auto* mine = app.add_subcommand("mine", "Induce the decision tree and rules for one location of a log");
  mine->add_option("--log", log, "Repository log")->required();
  mine->add_option("--location", location, "Location symbol")->required();

  auto* inspect = app.add_subcommand("inspect", "Summarize a repository log");
  inspect->add_option("--log", log, "Repository log")->required();

  auto* replay = app.add_subcommand("replay", "Verify a transcript against recomputation");
  replay->add_option("--transcript", transcript, "Transcript file")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run) return run_command(config_path, seed, ticks, transcript, report_path);
  if (*mine) return mine_command(log, location);
  if (*inspect) return inspect_command(log);
  return replay_command(transcript);
}
