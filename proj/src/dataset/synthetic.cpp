#include "gnrrm/dataset/synthetic.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "gnrrm/error.hpp"
#include "gnrrm/rng.hpp"
#include "gnrrm/text.hpp"
#include "gnrrm/terrain/flow_direction.hpp"

namespace gnrrm::dataset {

namespace {

// Start of water year 2013; any fixed hour works.
constexpr HourStamp kSyntheticEpoch = 374736;  // 2012-10-01T00:00:00

struct Key {
  std::function<void(SyntheticConfig&, double)> set;
  std::function<double(const SyntheticConfig&)> get;
  bool integer;
};

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> k = {
      {"grid_rows", {[](auto& c, double v) { c.grid_rows = int(v); }, [](auto& c) { return double(c.grid_rows); }, true}},
      {"grid_cols", {[](auto& c, double v) { c.grid_cols = int(v); }, [](auto& c) { return double(c.grid_cols); }, true}},
      {"cell_km", {[](auto& c, double v) { c.cell_km = v; }, [](auto& c) { return c.cell_km; }, false}},
      {"seed", {[](auto& c, double v) { c.seed = static_cast<std::uint64_t>(v); }, [](auto& c) { return double(c.seed); }, true}},
      {"n_storms", {[](auto& c, double v) { c.n_storms = int(v); }, [](auto& c) { return double(c.n_storms); }, true}},
      {"storm_sigma_cells", {[](auto& c, double v) { c.storm_sigma_cells = v; }, [](auto& c) { return c.storm_sigma_cells; }, false}},
      {"storm_speed_cells_per_hr",
       {[](auto& c, double v) { c.storm_speed_cells_per_hr = v; }, [](auto& c) { return c.storm_speed_cells_per_hr; }, false}},
      {"k_res_hr", {[](auto& c, double v) { c.k_res_hr = v; }, [](auto& c) { return c.k_res_hr; }, false}},
      {"lag_hr", {[](auto& c, double v) { c.lag_hr = int(v); }, [](auto& c) { return double(c.lag_hr); }, true}},
      {"baseflow_cms", {[](auto& c, double v) { c.baseflow_cms = v; }, [](auto& c) { return c.baseflow_cms; }, false}},
      {"noise_sd", {[](auto& c, double v) { c.noise_sd = v; }, [](auto& c) { return c.noise_sd; }, false}},
      {"hours", {[](auto& c, double v) { c.hours = int(v); }, [](auto& c) { return double(c.hours); }, true}},
      {"min_watershed_cells",
       {[](auto& c, double v) { c.min_watershed_cells = int(v); }, [](auto& c) { return double(c.min_watershed_cells); }, true}},
  };
  return k;
}

}  // namespace

void validate(const SyntheticConfig& c) {
  auto fail = [](const std::string& what) { throw ValidationError("synthetic config: " + what); };
  if (c.grid_rows < 1 || c.grid_cols < 1) fail("grid_rows and grid_cols must be positive");
  if (!(c.cell_km > 0.0)) fail("cell_km must be positive");
  if (c.n_storms < 0) fail("n_storms must be >= 0");
  if (!(c.storm_sigma_cells > 0.0)) fail("storm_sigma_cells must be positive");
  if (!(c.storm_speed_cells_per_hr >= 0.0)) fail("storm_speed_cells_per_hr must be >= 0");
  if (!(c.k_res_hr > 0.0)) fail("k_res_hr must be positive");
  if (c.lag_hr < 0) fail("lag_hr must be >= 0");
  if (!(c.baseflow_cms >= 0.0)) fail("baseflow_cms must be >= 0");
  if (!(c.noise_sd >= 0.0)) fail("noise_sd must be >= 0");
  if (c.hours < 1) fail("hours must be positive");
  if (c.min_watershed_cells < 1) fail("min_watershed_cells must be positive");
}

SyntheticConfig parse_synthetic_config(const std::string& text, const std::string& source) {
  SyntheticConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string uncommented = line.substr(0, line.find('#'));
    auto body = trim(uncommented);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected key=value");
    const std::string key(trim(body.substr(0, eq)));
    const auto value = trim(body.substr(eq + 1));
    auto it = keys().find(key);
    if (it == keys().end()) throw ParseError(source, line_no, "unknown key '" + key + "'");
    if (seen.count(key)) throw ParseError(source, line_no, "duplicate key '" + key + "'");
    seen[key] = line_no;
    auto v = parse_real(value);
    if (!v || !std::isfinite(*v)) throw ParseError(source, line_no, "non-numeric value for '" + key + "'");
    if (it->second.integer && (*v != std::floor(*v) || *v < 0))
      throw ParseError(source, line_no, "'" + key + "' must be a non-negative integer");
    it->second.set(cfg, *v);
  }
  validate(cfg);
  return cfg;
}

std::string format_synthetic_config(const SyntheticConfig& cfg) {
  std::string out;
  for (const auto& [name, key] : keys()) {
    const double v = key.get(cfg);
    out += name + "=" + (key.integer ? std::to_string(static_cast<long long>(v)) : format_real(v)) + "\n";
  }
  return out;
}

std::vector<double> unit_hydrograph(double k_res_hr) {
  if (!(k_res_hr > 0.0)) throw ValidationError("k_res must be positive");
  std::vector<double> u;
  for (int tau = 0;; ++tau) {
    const double head = std::exp(-tau / k_res_hr);
    if (head < 1e-12) break;
    u.push_back(head - std::exp(-(tau + 1) / k_res_hr));
  }
  return u;
}

Eigen::VectorXd routed_discharge(const RowMatrix& rain, const terrain::GraphBundle& graph, double k_res_hr,
                                 int lag_hr, double baseflow_cms) {
  const auto u = unit_hydrograph(k_res_hr);
  const auto steps = rain.rows();
  Eigen::VectorXd q = Eigen::VectorXd::Constant(steps, baseflow_cms);
  for (const auto& node : graph.graph.nodes) {
    const double a = node.area_km2 / 3.6;
    const auto delay = static_cast<Eigen::Index>(lag_hr) * static_cast<Eigen::Index>(graph.hops.distance[node.id]);
    const auto col = static_cast<Eigen::Index>(node.id);
    for (Eigen::Index src = 0; src < steps; ++src) {
      const double p = rain(src, col);
      if (p == 0.0) continue;
      for (std::size_t tau = 0; tau < u.size(); ++tau) {
        const Eigen::Index t = src + delay + static_cast<Eigen::Index>(tau);
        if (t >= steps) break;
        q[t] += a * u[tau] * p;
      }
    }
  }
  return q;
}

SyntheticWatershed gen_synthetic(const SyntheticConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  const int rows = cfg.grid_rows, cols = cfg.grid_cols;
  const terrain::Cell outlet{rows - 1, cols / 2};

  // Plane falling 2 m per row toward the southern edge and 1 m per column
  // toward the outlet column. Bumps stay well below the plane relief.
  terrain::DemGrid dem(rows, cols, cfg.cell_km * 1000.0);
  const int n_bumps = std::max(1, rows * cols / 16);
  struct Bump {
    double r, c, amp, sigma;
  };
  std::vector<Bump> bumps;
  for (int i = 0; i < n_bumps; ++i)
    bumps.push_back({rng.uniform(0, rows), rng.uniform(0, cols), rng.uniform(-0.4, 0.4), rng.uniform(1.0, 2.0)});
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double z = 100.0 + 2.0 * (rows - 1 - r) + 1.0 * std::abs(c - outlet.col);
      for (const auto& b : bumps) {
        const double d2 = (r - b.r) * (r - b.r) + (c - b.c) * (c - b.c);
        z += b.amp * std::exp(-d2 / (2.0 * b.sigma * b.sigma));
      }
      dem.set(r, c, z);
    }

  auto fd = terrain::compute_d8(dem);
  auto cells = terrain::delineate(fd, outlet);
  if (cells.size() < static_cast<std::size_t>(cfg.min_watershed_cells))
    throw ValidationError("synthetic watershed has " + std::to_string(cells.size()) + " cells, fewer than min_watershed_cells=" +
                          std::to_string(cfg.min_watershed_cells));
  auto bundle = terrain::make_bundle(terrain::build_graph(fd, cells, outlet, dem.default_cell_areas_km2()));
  const auto n = static_cast<Eigen::Index>(bundle.graph.size());

  ForcingSet f;
  f.timestamps.resize(cfg.hours);
  for (int t = 0; t < cfg.hours; ++t) f.timestamps[t] = kSyntheticEpoch + t;
  f.rain = RowMatrix::Zero(cfg.hours, n);
  const double two_sigma2 = 2.0 * cfg.storm_sigma_cells * cfg.storm_sigma_cells;
  for (int s = 0; s < cfg.n_storms; ++s) {
    const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.hours)));
    const int duration = 2 + static_cast<int>(rng.below(9));
    const double peak = rng.uniform(2.0, 12.0);
    const double r0 = rng.uniform(0, rows), c0 = rng.uniform(0, cols);
    const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double vr = cfg.storm_speed_cells_per_hr * std::sin(heading);
    const double vc = cfg.storm_speed_cells_per_hr * std::cos(heading);
    for (int k = 0; k < duration && start + k < cfg.hours; ++k) {
      const double rc = r0 + vr * k, cc = c0 + vc * k;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& node = bundle.graph.nodes[static_cast<std::size_t>(i)];
        const double d2 = (node.row - rc) * (node.row - rc) + (node.col - cc) * (node.col - cc);
        f.rain(start + k, i) += peak * std::exp(-d2 / two_sigma2);
      }
    }
  }

  f.discharge = routed_discharge(f.rain, bundle, cfg.k_res_hr, cfg.lag_hr, cfg.baseflow_cms);
  if (cfg.noise_sd > 0.0)
    for (Eigen::Index t = 0; t < f.discharge.size(); ++t)
      f.discharge[t] = std::max(0.0, f.discharge[t] + cfg.noise_sd * rng.normal());
  finalize_forcing(f);

  return SyntheticWatershed{std::move(dem), outlet, std::move(bundle), std::move(f)};
}

}  // namespace gnrrm::dataset
