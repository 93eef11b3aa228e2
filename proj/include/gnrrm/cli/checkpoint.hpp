#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "gnrrm/dataset/windows.hpp"
#include "gnrrm/models/model.hpp"

namespace gnrrm::cli {

inline constexpr const char* kCheckpointTag = "gnrrm-checkpoint";
inline constexpr int kCheckpointVersion = 1;

// Text layout:
//   gnrrm-checkpoint 1
//   config <key> <value>          one per ModelConfig field
//   graph <nodes> <outlet> <max_distance> <hash>
//   split <train|val|test> START/END   ranges used in training, optional
//   normalizer <n> <mean…> <scale…>
//   output_scale <scale> <offset>
//   param <name> <rank> <dims…>
//   <values, row-major, 17 significant digits>
//   end
std::string format_checkpoint(const models::Model& model, const dataset::SplitRanges& ranges = {});

struct LoadedCheckpoint {
  std::unique_ptr<models::Model> model;
  dataset::SplitRanges ranges;
};

// Rebuilds the model on `bundle`; a different graph fingerprint or format
// version is a ValidationError.
LoadedCheckpoint parse_checkpoint(const std::string& text, const terrain::GraphBundle& bundle,
                                  const std::string& source = "<checkpoint>");

void save_checkpoint(const models::Model& model, const dataset::SplitRanges& ranges, const std::filesystem::path& path);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path, const terrain::GraphBundle& bundle);

}  // namespace gnrrm::cli
