#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gnrrm/dataset/windows.hpp"
#include "gnrrm/models/model.hpp"
#include "gnrrm/training/trainer.hpp"

namespace gnrrm::cli {

// Settings merged from a key=value file and command-line overrides.
// Overrides always win over the file. Unknown keys are rejected.
class RunConfig {
 public:
  static const std::vector<std::string>& known_keys();

  // Later calls replace earlier values (file first, then overrides).
  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  models::ModelConfig model() const;
  training::TrainConfig train() const;
  dataset::SplitRanges ranges() const;

 private:
  std::map<std::string, std::string> values_;
};

RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

// Applies `key=value` overrides. The same key given twice with different
// values is an error.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides);

bool parse_bool(const std::string& key, const std::string& value);

}  // namespace gnrrm::cli
