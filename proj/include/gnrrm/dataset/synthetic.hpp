#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gnrrm/dataset/forcing.hpp"
#include "gnrrm/terrain/dem.hpp"
#include "gnrrm/terrain/graph.hpp"

namespace gnrrm::dataset {

struct SyntheticConfig {
  int grid_rows = 10;
  int grid_cols = 4;
  double cell_km = 4.0;
  std::uint64_t seed = 1;
  int n_storms = 120;
  double storm_sigma_cells = 1.5;
  double storm_speed_cells_per_hr = 0.5;
  double k_res_hr = 3.0;
  int lag_hr = 1;
  double baseflow_cms = 5.0;
  double noise_sd = 0.0;
  int hours = 4000;
  int min_watershed_cells = 1;

  friend bool operator==(const SyntheticConfig&, const SyntheticConfig&) = default;
};

void validate(const SyntheticConfig& cfg);
// key=value lines, `#` comments. Unknown keys are rejected.
SyntheticConfig parse_synthetic_config(const std::string& text, const std::string& source = "<synthetic config>");
std::string format_synthetic_config(const SyntheticConfig& cfg);

struct SyntheticWatershed {
  terrain::DemGrid dem;
  terrain::Cell outlet;
  terrain::GraphBundle graph;
  ForcingSet forcing;
};

// Hourly ordinates of an exponential (linear reservoir) unit hydrograph:
// u(τ) = exp(−τ/k) − exp(−(τ+1)/k), truncated once the tail drops below 1e-12.
std::vector<double> unit_hydrograph(double k_res_hr);

// Noise-free outlet discharge: baseflow plus, for each node, its rain delayed
// by lag·hop and convolved with the unit hydrograph, scaled by area/3.6
// (1 mm/hr over 1 km² is 1/3.6 m³/s). Rain before the first row counts as zero.
Eigen::VectorXd routed_discharge(const RowMatrix& rain, const terrain::GraphBundle& graph, double k_res_hr,
                                 int lag_hr, double baseflow_cms);

// Tilted plane draining to the middle of the southern edge plus smooth random
// bumps; moving Gaussian storms; routed discharge with Gaussian noise.
// Throws ValidationError when fewer than min_watershed_cells drain to the outlet.
SyntheticWatershed gen_synthetic(const SyntheticConfig& cfg);

}  // namespace gnrrm::dataset
