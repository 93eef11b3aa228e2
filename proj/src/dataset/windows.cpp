#include "gnrrm/dataset/windows.hpp"

#include <algorithm>
#include <cmath>

#include "gnrrm/error.hpp"
#include "gnrrm/text.hpp"

namespace gnrrm::dataset {

std::vector<Sample> make_windows(const ForcingSet& f, std::size_t window) {
  if (window < 1) throw ValidationError("window length must be >= 1");
  std::vector<Sample> out;
  for (std::size_t k = 0; k < f.segment_count(); ++k) {
    const std::size_t begin = f.segment_starts[k];
    const std::size_t end = f.segment_end(k);
    for (std::size_t t = begin + window - 1; t < end; ++t) out.push_back(Sample{t, f.discharge[t], f.timestamps[t]});
  }
  return out;
}

std::vector<Sample> select_range(std::span<const Sample> samples, const TimeRange& range) {
  std::vector<Sample> out;
  for (const auto& s : samples)
    if (range.contains(s.time)) out.push_back(s);
  return out;
}

Split split_by_ranges(std::span<const Sample> samples, const SplitRanges& ranges) {
  const std::optional<TimeRange>* all[3] = {&ranges.train, &ranges.val, &ranges.test};
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (*all[a] && *all[b] && (*all[a])->overlaps(**all[b]))
        throw ValidationError("split ranges overlap: " + format_time_range(**all[a]) + " and " +
                              format_time_range(**all[b]));
  Split split;
  if (ranges.train) split.train = select_range(samples, *ranges.train);
  if (ranges.val) split.val = select_range(samples, *ranges.val);
  if (ranges.test) split.test = select_range(samples, *ranges.test);
  return split;
}

namespace {

std::vector<double> lumping_weights(std::span<const double> areas, LumpedWeighting weighting) {
  std::vector<double> w(areas.size());
  double total = 0.0;
  for (std::size_t i = 0; i < areas.size(); ++i) {
    if (!(areas[i] > 0.0)) throw ValidationError("lumped average needs positive areas");
    w[i] = weighting == LumpedWeighting::Area ? areas[i] : 1.0;
    total += w[i];
  }
  for (auto& x : w) x /= total;
  return w;
}

double weighted_row(const double* row, const std::vector<double>& w) {
  // When every value is identical the weighted mean is that value; returning
  // it directly keeps uniform rain exact instead of Σw·p with Σw ≈ 1.
  bool uniform = true;
  for (std::size_t i = 1; i < w.size() && uniform; ++i) uniform = row[i] == row[0];
  if (uniform) return w.empty() ? 0.0 : row[0];
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * row[i];
  return s;
}

}  // namespace

const char* to_string(LumpedWeighting w) { return w == LumpedWeighting::Area ? "area" : "simple"; }

LumpedWeighting parse_lumped_weighting(const std::string& name) {
  const std::string n = to_lower(trim(name));
  if (n == "area") return LumpedWeighting::Area;
  if (n == "simple") return LumpedWeighting::Simple;
  throw ValidationError("unknown lumped weighting '" + name + "' (expected area or simple)");
}

Eigen::VectorXd lumped_view(const RowMatrix& window, std::span<const double> areas_km2, LumpedWeighting weighting) {
  if (static_cast<std::size_t>(window.cols()) != areas_km2.size())
    throw ValidationError("lumped_view: area count does not match window width");
  const auto w = lumping_weights(areas_km2, weighting);
  Eigen::VectorXd out(window.rows());
  for (Eigen::Index t = 0; t < window.rows(); ++t) out[t] = weighted_row(window.row(t).data(), w);
  return out;
}

RowMatrix lumped_series(const RowMatrix& rain, std::span<const double> areas_km2, LumpedWeighting weighting) {
  RowMatrix out(rain.rows(), 1);
  out.col(0) = lumped_view(rain, areas_km2, weighting);
  return out;
}

Normalizer Normalizer::identity(std::size_t features) {
  return Normalizer{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(features)),
                    Eigen::VectorXd::Ones(static_cast<Eigen::Index>(features))};
}

RowMatrix Normalizer::apply(const RowMatrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != this->features())
    throw ValidationError("normalizer width does not match feature matrix");
  RowMatrix out(features.rows(), features.cols());
  for (Eigen::Index t = 0; t < features.rows(); ++t)
    for (Eigen::Index j = 0; j < features.cols(); ++j) out(t, j) = (features(t, j) - mean[j]) / scale[j];
  return out;
}

Normalizer fit_normalizer(const RowMatrix& features, std::span<const Sample> train, std::size_t window, bool pooled) {
  if (train.empty()) throw ValidationError("cannot fit a normalizer on an empty training set");
  // Each time row counts once, however many windows cover it.
  std::vector<std::uint8_t> used(static_cast<std::size_t>(features.rows()), 0);
  for (const auto& s : train) {
    if (s.t_index + 1 < window || s.t_index >= used.size()) throw ValidationError("sample window outside feature rows");
    for (std::size_t t = s.t_index + 1 - window; t <= s.t_index; ++t) used[t] = 1;
  }
  const Eigen::Index cols = features.cols();
  Normalizer n = Normalizer::identity(static_cast<std::size_t>(cols));

  auto fit = [&](Eigen::Index first, Eigen::Index last, double& mean, double& scale) {
    double sum = 0.0, count = 0.0;
    for (std::size_t t = 0; t < used.size(); ++t) {
      if (!used[t]) continue;
      for (Eigen::Index j = first; j < last; ++j) sum += features(static_cast<Eigen::Index>(t), j);
      count += static_cast<double>(last - first);
    }
    const double mu = sum / count;
    double ss = 0.0;
    for (std::size_t t = 0; t < used.size(); ++t) {
      if (!used[t]) continue;
      for (Eigen::Index j = first; j < last; ++j) {
        const double d = features(static_cast<Eigen::Index>(t), j) - mu;
        ss += d * d;
      }
    }
    const double sd = std::sqrt(ss / count);
    if (sd < 1e-12) {
      mean = 0.0;
      scale = 1.0;
    } else {
      mean = mu;
      scale = sd;
    }
  };

  if (pooled) {
    double mean, scale;
    fit(0, cols, mean, scale);
    n.mean.setConstant(mean);
    n.scale.setConstant(scale);
  } else {
    for (Eigen::Index j = 0; j < cols; ++j) fit(j, j + 1, n.mean[j], n.scale[j]);
  }
  return n;
}

}  // namespace gnrrm::dataset
