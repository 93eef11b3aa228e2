#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gnrrm/dataset/forcing.hpp"

namespace gnrrm::training {

struct CorrelationReport {
  Eigen::MatrixXd r;                  // N × N; rows and columns of excluded nodes are NaN off the diagonal
  std::vector<std::size_t> excluded;  // zero-variance columns
  std::size_t pairs = 0;              // upper-triangle pairs among retained columns
  std::size_t above = 0;              // pairs with r > threshold
  double threshold = 0.7;

  double fraction() const { return pairs ? static_cast<double>(above) / static_cast<double>(pairs) : 0.0; }
};

// Pearson correlation between every pair of node rain series.
CorrelationReport pairwise_correlation(const dataset::RowMatrix& rain, double threshold = 0.7, int threads = 1);

std::string format_correlation_csv(const CorrelationReport& c);

}  // namespace gnrrm::training
