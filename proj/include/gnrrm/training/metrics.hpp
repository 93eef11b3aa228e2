#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace gnrrm::training {

// Undefined scores (zero observed variance, zero observed mean) are nullopt.
std::optional<double> nse(const Eigen::VectorXd& observed, const Eigen::VectorXd& simulated);
double rmse(const Eigen::VectorXd& observed, const Eigen::VectorXd& simulated);
std::optional<double> pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Kling–Gupta efficiency, 2009 form; standard deviations are population.
struct KgeParts {
  std::optional<double> r, alpha, beta, kge;
};
KgeParts kge(const Eigen::VectorXd& observed, const Eigen::VectorXd& simulated);

struct MetricsReport {
  std::optional<double> kge, nse;
  double rmse = 0.0;
  KgeParts parts;
  std::size_t n_samples = 0;
  Eigen::VectorXd observed, predicted;
};

MetricsReport compute_metrics(const Eigen::VectorXd& observed, const Eigen::VectorXd& predicted);
std::string metrics_json(const MetricsReport& m, const std::string& label = "");
std::string format_score(const std::optional<double>& v);

}  // namespace gnrrm::training
