#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gnrrm/dataset/forcing.hpp"

namespace gnrrm::dataset {

inline constexpr std::size_t kDefaultWindow = 72;

// A training instance: rows [t_index − L + 1, t_index] of a feature matrix,
// with the outlet discharge at t_index as the target.
struct Sample {
  std::size_t t_index = 0;
  double y = 0.0;
  HourStamp time = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

std::vector<Sample> make_windows(const ForcingSet& f, std::size_t window = kDefaultWindow);

// Window rows of `features` for one sample, oldest first.
inline auto window_of(const RowMatrix& features, const Sample& s, std::size_t window) {
  return features.middleRows(static_cast<Eigen::Index>(s.t_index + 1 - window), static_cast<Eigen::Index>(window));
}

struct SplitRanges {
  std::optional<TimeRange> train, val, test;
};

struct Split {
  std::vector<Sample> train, val, test;
};

// Assigns each sample by its target time; samples outside every range are
// dropped. Ranges are [start, end). Throws ValidationError on overlap.
Split split_by_ranges(std::span<const Sample> samples, const SplitRanges& ranges);
std::vector<Sample> select_range(std::span<const Sample> samples, const TimeRange& range);

enum class LumpedWeighting { Area, Simple };

const char* to_string(LumpedWeighting w);
LumpedWeighting parse_lumped_weighting(const std::string& name);

// Watershed-average rain for each window row.
Eigen::VectorXd lumped_view(const RowMatrix& window, std::span<const double> areas_km2,
                            LumpedWeighting weighting = LumpedWeighting::Area);
// Same over the whole series, as a T × 1 feature matrix.
RowMatrix lumped_series(const RowMatrix& rain, std::span<const double> areas_km2,
                        LumpedWeighting weighting = LumpedWeighting::Area);

// Per-feature standardization fitted on the rows covered by training windows.
// Features whose standard deviation is below 1e-12 pass through unchanged.
struct Normalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Normalizer identity(std::size_t features);
  std::size_t features() const { return static_cast<std::size_t>(mean.size()); }
  RowMatrix apply(const RowMatrix& features) const;
  double apply(std::size_t feature, double value) const { return (value - mean[feature]) / scale[feature]; }

  friend bool operator==(const Normalizer& a, const Normalizer& b) { return a.mean == b.mean && a.scale == b.scale; }
};

// `pooled` fits one statistic shared by every column, for inputs that feed a
// shared channel.
Normalizer fit_normalizer(const RowMatrix& features, std::span<const Sample> train, std::size_t window, bool pooled);

}  // namespace gnrrm::dataset
