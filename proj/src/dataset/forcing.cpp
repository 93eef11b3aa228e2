#include "gnrrm/dataset/forcing.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "gnrrm/error.hpp"
#include "gnrrm/text.hpp"

namespace gnrrm::dataset {

void finalize_forcing(ForcingSet& f) {
  const std::size_t t = f.timestamps.size();
  if (static_cast<std::size_t>(f.rain.rows()) != t || static_cast<std::size_t>(f.discharge.size()) != t)
    throw ValidationError("forcing arrays have inconsistent lengths");
  f.segment_starts.clear();
  for (std::size_t i = 0; i < t; ++i) {
    if (i == 0 || f.timestamps[i] != f.timestamps[i - 1] + 1) f.segment_starts.push_back(i);
    if (i > 0 && f.timestamps[i] <= f.timestamps[i - 1])
      throw ValidationError("timestamps are not strictly increasing at " + format_iso_hour(f.timestamps[i]));
  }
  if ((f.rain.array() < 0.0).any() || !f.rain.allFinite()) throw ValidationError("rain must be finite and >= 0");
  if ((f.discharge.array() < 0.0).any() || !f.discharge.allFinite())
    throw ValidationError("discharge must be finite and >= 0");
}

ForcingSet parse_forcing(const std::string& text, std::size_t node_count, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty forcing file");
  ++line_no;

  // Map every CSV column to a role: timestamp, discharge, or a node id.
  constexpr long kTime = -1, kDischarge = -2;
  std::vector<long> role;
  std::vector<int> node_seen(node_count, 0);
  int time_cols = 0, discharge_cols = 0;
  for (auto name : split(trim(line), ',')) {
    name = trim(name);
    if (name == "timestamp") {
      role.push_back(kTime);
      ++time_cols;
    } else if (name == "discharge") {
      role.push_back(kDischarge);
      ++discharge_cols;
    } else if (name.substr(0, 5) == "node_") {
      auto id = parse_integer(name.substr(5));
      if (!id || *id < 0) throw ParseError(source, 1, "bad node column '" + std::string(name) + "'");
      if (static_cast<std::size_t>(*id) >= node_count)
        throw ValidationError(source + ": column node_" + std::to_string(*id) + " does not match any graph node");
      if (node_seen[*id]++) throw ValidationError(source + ": duplicate column node_" + std::to_string(*id));
      role.push_back(*id);
    } else {
      throw ParseError(source, 1, "unexpected column '" + std::string(name) + "'");
    }
  }
  if (time_cols != 1) throw ParseError(source, 1, "expected exactly one 'timestamp' column");
  if (discharge_cols != 1) throw ParseError(source, 1, "expected exactly one 'discharge' column");
  for (std::size_t id = 0; id < node_count; ++id)
    if (!node_seen[id]) throw ValidationError(source + ": missing column node_" + std::to_string(id));

  std::vector<HourStamp> stamps;
  std::vector<double> rain, discharge;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(trim(line), ',');
    if (cells.size() != role.size())
      throw ParseError(source, line_no, "expected " + std::to_string(role.size()) + " fields, found " + std::to_string(cells.size()));
    const std::size_t row_base = rain.size();
    rain.resize(row_base + node_count, 0.0);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto cell = trim(cells[k]);
      if (role[k] == kTime) {
        auto h = parse_iso_hour(cell);
        if (!h) throw ParseError(source, line_no, "bad hourly timestamp '" + std::string(cell) + "'");
        if (!stamps.empty() && *h <= stamps.back())
          throw ValidationError(source + ":" + std::to_string(line_no) + ": timestamps are not strictly increasing");
        stamps.push_back(*h);
        continue;
      }
      auto v = parse_real(cell);
      if (!v || !std::isfinite(*v)) throw ParseError(source, line_no, "bad value '" + std::string(cell) + "'");
      if (*v < 0.0)
        throw ValidationError(source + ":" + std::to_string(line_no) + ": negative " +
                              (role[k] == kDischarge ? std::string("discharge") : "rain for node_" + std::to_string(role[k])));
      if (role[k] == kDischarge) discharge.push_back(*v);
      else rain[row_base + role[k]] = *v;
    }
  }

  ForcingSet f;
  f.timestamps = std::move(stamps);
  f.rain = Eigen::Map<RowMatrix>(rain.data(), static_cast<Eigen::Index>(f.timestamps.size()),
                                 static_cast<Eigen::Index>(node_count));
  f.discharge = Eigen::Map<Eigen::VectorXd>(discharge.data(), static_cast<Eigen::Index>(discharge.size()));
  finalize_forcing(f);
  return f;
}

ForcingSet load_forcing(const std::filesystem::path& path, const terrain::FlowGraph& graph) {
  return parse_forcing(read_file(path), graph.size(), path.string());
}

std::string format_forcing(const ForcingSet& f) {
  std::string out = "timestamp";
  for (std::size_t i = 0; i < f.nodes(); ++i) out += ",node_" + std::to_string(i);
  out += ",discharge\n";
  for (std::size_t t = 0; t < f.steps(); ++t) {
    out += format_iso_hour(f.timestamps[t]);
    for (std::size_t i = 0; i < f.nodes(); ++i) {
      out += ',';
      out += format_real(f.rain(t, i));
    }
    out += ',';
    out += format_real(f.discharge[t]);
    out += '\n';
  }
  return out;
}

void write_forcing(const ForcingSet& f, const std::filesystem::path& path) { write_file(path, format_forcing(f)); }

}  // namespace gnrrm::dataset
