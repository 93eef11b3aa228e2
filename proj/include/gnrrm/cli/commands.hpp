#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gnrrm/cli/run_config.hpp"
#include "gnrrm/terrain/dem.hpp"

namespace gnrrm::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct DelineateOptions {
  std::filesystem::path dem, out;
  terrain::Cell outlet;
};

struct SynthOptions {
  std::filesystem::path config, out_dir;
};

struct TrainOptions {
  std::filesystem::path graph, forcing, out;
  std::optional<std::filesystem::path> config, history;
  std::vector<std::string> overrides;
  std::optional<int> threads;
};

struct EvalOptions {
  std::filesystem::path ckpt, graph, forcing;
  std::string range;  // START/END, or train / val / test as stored in the checkpoint
  std::optional<std::filesystem::path> out;
  int threads = 1;
};

struct CorrelateOptions {
  std::filesystem::path forcing;
  std::optional<std::filesystem::path> out;
  double threshold = 0.7;
  int threads = 1;
};

struct PredictOptions {
  std::filesystem::path ckpt, graph, forcing, out;
  std::optional<std::string> range;
  int threads = 1;
};

void cmd_delineate(const DelineateOptions& o, std::ostream& out);
void cmd_synth(const SynthOptions& o, std::ostream& out);
void cmd_train(const TrainOptions& o, std::ostream& out);
void cmd_eval(const EvalOptions& o, std::ostream& out);
void cmd_correlate(const CorrelateOptions& o, std::ostream& out);
void cmd_predict(const PredictOptions& o, std::ostream& out);

// Parses argv, runs one subcommand and maps failures to exit codes:
// ValidationError and usage errors → 2, other errors → 1.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Chronological 50/25/25 split of the samples, used when no ranges are configured.
dataset::SplitRanges default_ranges(const std::vector<dataset::Sample>& samples);

terrain::Cell parse_cell(const std::string& text);

}  // namespace gnrrm::cli
