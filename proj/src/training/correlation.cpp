#include "gnrrm/training/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gnrrm/error.hpp"
#include "gnrrm/runtime.hpp"
#include "gnrrm/text.hpp"

namespace gnrrm::training {

CorrelationReport pairwise_correlation(const dataset::RowMatrix& rain, double threshold, int threads) {
  if (rain.rows() < 2) throw ValidationError("correlation needs at least two time steps");
  const Eigen::Index N = rain.cols();
  CorrelationReport rep;
  rep.threshold = threshold;
  rep.r = Eigen::MatrixXd::Constant(N, N, std::numeric_limits<double>::quiet_NaN());

  Eigen::MatrixXd centered = rain.rowwise() - rain.colwise().mean();
  Eigen::VectorXd norm = centered.colwise().norm();
  std::vector<bool> keep(static_cast<std::size_t>(N));
  for (Eigen::Index i = 0; i < N; ++i) {
    keep[static_cast<std::size_t>(i)] = norm[i] > 0.0;
    if (!keep[static_cast<std::size_t>(i)]) rep.excluded.push_back(static_cast<std::size_t>(i));
    rep.r(i, i) = 1.0;
  }

  parallel_for(static_cast<std::size_t>(N), threads, [&](std::size_t i) {
    if (!keep[i]) return;
    const auto a = static_cast<Eigen::Index>(i);
    for (Eigen::Index b = a + 1; b < N; ++b) {
      if (!keep[static_cast<std::size_t>(b)]) continue;
      double r = centered.col(a).dot(centered.col(b)) / (norm[a] * norm[b]);
      r = std::clamp(r, -1.0, 1.0);
      rep.r(a, b) = r;
      rep.r(b, a) = r;
    }
  });
  for (Eigen::Index a = 0; a < N; ++a)
    for (Eigen::Index b = a + 1; b < N; ++b) {
      if (std::isnan(rep.r(a, b))) continue;
      ++rep.pairs;
      if (rep.r(a, b) > threshold) ++rep.above;
    }
  return rep;
}

std::string format_correlation_csv(const CorrelationReport& c) {
  std::string out = "node";
  for (Eigen::Index j = 0; j < c.r.cols(); ++j) out += ",node_" + std::to_string(j);
  out += "\n";
  for (Eigen::Index i = 0; i < c.r.rows(); ++i) {
    out += "node_" + std::to_string(i);
    for (Eigen::Index j = 0; j < c.r.cols(); ++j) out += "," + (std::isnan(c.r(i, j)) ? std::string("nan") : format_real(c.r(i, j)));
    out += "\n";
  }
  return out;
}

}  // namespace gnrrm::training
