#include "gnrrm/training/metrics.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "gnrrm/error.hpp"
#include "gnrrm/text.hpp"

namespace gnrrm::training {

namespace {

void check_pair(const Eigen::VectorXd& o, const Eigen::VectorXd& s) {
  if (o.size() == 0) throw ValidationError("metrics: no samples");
  if (o.size() != s.size()) throw ValidationError("metrics: observed and simulated lengths differ");
}

double mean(const Eigen::VectorXd& v) { return v.mean(); }

double population_sd(const Eigen::VectorXd& v) {
  return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size()));
}

}  // namespace

std::optional<double> nse(const Eigen::VectorXd& o, const Eigen::VectorXd& s) {
  check_pair(o, s);
  const double denom = (o.array() - mean(o)).square().sum();
  if (!(denom > 0.0)) return std::nullopt;
  return 1.0 - (o - s).squaredNorm() / denom;
}

double rmse(const Eigen::VectorXd& o, const Eigen::VectorXd& s) {
  check_pair(o, s);
  return std::sqrt((o - s).squaredNorm() / static_cast<double>(o.size()));
}

std::optional<double> pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  check_pair(a, b);
  const Eigen::ArrayXd da = a.array() - mean(a), db = b.array() - mean(b);
  const double saa = da.square().sum(), sbb = db.square().sum();
  if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
  return (da * db).sum() / std::sqrt(saa * sbb);
}

KgeParts kge(const Eigen::VectorXd& o, const Eigen::VectorXd& s) {
  check_pair(o, s);
  KgeParts k;
  k.r = pearson(s, o);
  const double so = population_sd(o);
  if (so > 0.0) k.alpha = population_sd(s) / so;
  if (mean(o) != 0.0) k.beta = mean(s) / mean(o);
  if (k.r && k.alpha && k.beta)
    k.kge = 1.0 - std::sqrt((*k.r - 1) * (*k.r - 1) + (*k.alpha - 1) * (*k.alpha - 1) + (*k.beta - 1) * (*k.beta - 1));
  return k;
}

MetricsReport compute_metrics(const Eigen::VectorXd& observed, const Eigen::VectorXd& predicted) {
  MetricsReport m;
  m.nse = nse(observed, predicted);
  m.parts = kge(observed, predicted);
  m.kge = m.parts.kge;
  m.rmse = rmse(observed, predicted);
  m.n_samples = static_cast<std::size_t>(observed.size());
  m.observed = observed;
  m.predicted = predicted;
  return m;
}

std::string format_score(const std::optional<double>& v) { return v ? format_real(*v) : "undefined"; }

std::string metrics_json(const MetricsReport& m, const std::string& label) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::ordered_json j;
  if (!label.empty()) j["range"] = label;
  j["n_samples"] = m.n_samples;
  j["kge"] = opt(m.kge);
  j["nse"] = opt(m.nse);
  j["rmse_cms"] = m.rmse;
  j["kge_r"] = opt(m.parts.r);
  j["kge_alpha"] = opt(m.parts.alpha);
  j["kge_beta"] = opt(m.parts.beta);
  return j.dump(2) + "\n";
}

}  // namespace gnrrm::training
