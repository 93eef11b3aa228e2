#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gnrrm/models/model.hpp"

namespace gnrrm::training {

struct HydrographRow {
  HourStamp time = 0;
  double observed = 0.0;
  double predicted = 0.0;

  friend bool operator==(const HydrographRow&, const HydrographRow&) = default;
};

std::vector<HydrographRow> predict_series(const models::Model& model, const dataset::ForcingSet& forcing,
                                          std::span<const dataset::Sample> samples, int threads = 1);

// CSV with header timestamp,observed_cms,predicted_cms.
std::string format_hydrograph(const std::vector<HydrographRow>& rows);
std::vector<HydrographRow> parse_hydrograph(const std::string& text, const std::string& source = "<hydrograph>");

}  // namespace gnrrm::training
