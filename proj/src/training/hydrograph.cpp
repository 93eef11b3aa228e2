#include "gnrrm/training/hydrograph.hpp"

#include "gnrrm/error.hpp"
#include "gnrrm/text.hpp"

namespace gnrrm::training {

std::vector<HydrographRow> predict_series(const models::Model& model, const dataset::ForcingSet& forcing,
                                          std::span<const dataset::Sample> samples, int threads) {
  const auto pred = model.predict(model.features(forcing), samples, threads);
  std::vector<HydrographRow> rows;
  rows.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k)
    rows.push_back({samples[k].time, samples[k].y, pred[static_cast<Eigen::Index>(k)]});
  return rows;
}

std::string format_hydrograph(const std::vector<HydrographRow>& rows) {
  std::string out = "timestamp,observed_cms,predicted_cms\n";
  for (const auto& r : rows) out += format_iso_hour(r.time) + "," + format_real(r.observed) + "," + format_real(r.predicted) + "\n";
  return out;
}

std::vector<HydrographRow> parse_hydrograph(const std::string& text, const std::string& source) {
  std::vector<HydrographRow> rows;
  std::size_t line_no = 0;
  bool header = true;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string line(trim(raw));
    if (line.empty()) continue;
    if (header) {
      if (line != "timestamp,observed_cms,predicted_cms") throw ParseError(source, line_no, "unexpected hydrograph header");
      header = false;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 3) throw ParseError(source, line_no, "expected 3 fields");
    const auto t = parse_iso_hour(trim(f[0]));
    const auto o = parse_real(trim(f[1])), p = parse_real(trim(f[2]));
    if (!t) throw ParseError(source, line_no, "bad timestamp '" + std::string(f[0]) + "'");
    if (!o || !p) throw ParseError(source, line_no, "bad number");
    rows.push_back({*t, *o, *p});
  }
  return rows;
}

}  // namespace gnrrm::training
