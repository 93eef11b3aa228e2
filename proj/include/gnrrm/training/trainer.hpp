#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gnrrm/dataset/windows.hpp"
#include "gnrrm/models/model.hpp"
#include "gnrrm/training/metrics.hpp"

namespace gnrrm::training {

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 200;
  std::size_t patience = 20;  // epochs without a better validation RMSE before stopping
  std::uint64_t seed = 1;
  bool shuffle = true;
  // Fit the output affine to the training target mean and standard deviation.
  bool target_scaling = true;
  int threads = 1;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;  // mean squared error over the epoch's batches, (m³/s)²
  double val_rmse = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_rmse = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Fits the normalizer and output scaling on split.train, then runs Adam on
// the training MSE. The model is left holding the best-validation parameters.
TrainResult train(models::Model& model, const dataset::ForcingSet& forcing, const dataset::Split& split,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

MetricsReport evaluate(const models::Model& model, const dataset::ForcingSet& forcing,
                       std::span<const dataset::Sample> samples, int threads = 1);

std::string format_history(const std::vector<EpochRecord>& h);

}  // namespace gnrrm::training
