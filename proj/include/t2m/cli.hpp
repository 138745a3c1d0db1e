#pragma once

// Command-line driver. Subcommands:
//
//   eval-physical     physical_report.{json,csv}
//   eval-semantic     semantic_report.{json,csv}
//   eval-finegrained  finegrained_report.json, finegrained_table.csv
//   judge             judge_results.json, judge_quarantine.json, judge_table.csv
//   judge-gap         judge_gap.json
//   score-select      selection_{physical,semantic}.{json,csv}, radar.csv
//
// Exit codes: 0 ok, 1 configuration, 2 data (some clip or case failed; the
// report still covers the rest), 3 network.

#include "t2m/contact.hpp"
#include "t2m/error.hpp"
#include "t2m/physical.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace t2m::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kDataError = 2, kNetworkError = 3 };

int exit_code_for(Errc code) noexcept;

/// Declarative run configuration (JSON). Relative paths resolve against the
/// config file's directory.
///
///   {
///     "corpus": "manifest.json",
///     "targets": ["root_move.json", "body_part.json"],
///     "feature_stats": {"mean": "mean.npy", "std": "std.npy"},
///     "text_embeddings": "text_embeddings.json",
///     "judge_results": "judge_results.json",      score-select / judge-gap input
///     "human_scores": "human_scores.json",        judge-gap input
///     "seed": 0, "bootstrap_replicates": 1000, "strict": false, "out": "out",
///     "contact": {"contact_height": 0.05, ...}, "ground_mode": "penetration",
///     "semantic": {"pool_size": 32, "mm_pairs": 10, "diversity_draws": 300,
///                  "asr_threshold": 0.6, "space": "embedding", "joint_frames": 196},
///     "finegrained": {"window": 30, "yaw_channel_scale": 1.0},
///     "judge": {"endpoint": "...", "model": "...", "concurrency": 4,
///               "timeout_seconds": 60, "max_attempts": 5, "base_delay_ms": 1000}
///   }
struct RunConfig {
  std::filesystem::path corpus;
  std::vector<std::filesystem::path> targets;
  std::optional<std::filesystem::path> stats_mean;
  std::optional<std::filesystem::path> stats_std;
  std::optional<std::filesystem::path> text_embeddings;
  std::optional<std::filesystem::path> judge_results;
  std::optional<std::filesystem::path> human_scores;
  std::uint64_t seed = 0;
  std::size_t bootstrap_replicates = 1000;
  bool strict = false;
  std::filesystem::path out = "out";
  int jobs = 1;  // never written into reports

  contact::ContactConfig contact;
  physical::GroundMode ground_mode = physical::GroundMode::Penetration;

  std::size_t pool_size = 32;
  std::size_t mm_pairs = 10;
  std::size_t diversity_draws = 300;
  double asr_threshold = 0.6;
  bool joint_space = false;  // multimodality/diversity on flattened joints
  std::size_t joint_frames = 196;

  std::size_t window = 30;
  double yaw_channel_scale = 1.0;

  std::string judge_endpoint;
  std::string judge_model;
  std::size_t judge_concurrency = 4;
  double judge_timeout_seconds = 60.0;
  int judge_max_attempts = 5;
  long long judge_base_delay_ms = 1000;
};

/// Reads and validates a config file; Config errors on bad values, MissingFile
/// on absent referenced paths.
RunConfig load_config(const std::filesystem::path& path);

/// Entry point shared by tools/t2m_eval and the tests.
int run(int argc, char** argv);

}  // namespace t2m::cli
