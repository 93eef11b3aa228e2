#include "gnrrm/training/trainer.hpp"

#include <cmath>
#include <limits>

#include "gnrrm/error.hpp"
#include "gnrrm/nn/adam.hpp"
#include "gnrrm/runtime.hpp"
#include "gnrrm/text.hpp"

namespace gnrrm::training {

using dataset::Sample;

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("lr must be positive");
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  if (max_epochs == 0) throw ValidationError("max_epochs must be positive");
  if (patience > max_epochs) throw ValidationError("patience must not exceed max_epochs");
  if (threads < 1) throw ValidationError("threads must be at least 1");
}

namespace {

struct ChunkResult {
  nn::Gradients grads;
  double sq_error = 0.0;
};

// Loss and gradient of the batch MSE. Chunks are fixed slices of the batch,
// so the reduction order is the same for every thread count.
double batch_step(const models::Model& model, const dataset::RowMatrix& x, std::span<const Sample> batch,
                  int threads, nn::Gradients& grads) {
  const std::size_t chunks = (batch.size() + models::kChunkSize - 1) / models::kChunkSize;
  std::vector<ChunkResult> parts(chunks);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t lo = c * models::kChunkSize, n = std::min(models::kChunkSize, batch.size() - lo);
    const auto slice = batch.subspan(lo, n);
    auto pass = model.forward(model.params(), x, slice);
    nn::Vector residual(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) residual[static_cast<Eigen::Index>(k)] = pass.pred[static_cast<Eigen::Index>(k)] - slice[k].y;
    parts[c].sq_error = residual.squaredNorm();
    parts[c].grads = model.params().zero_gradients();
    model.backward(model.params(), *pass.trace, 2.0 * inv_n * residual, parts[c].grads);
  });
  grads = std::move(parts[0].grads);
  double sq = parts[0].sq_error;
  for (std::size_t c = 1; c < chunks; ++c) {
    nn::accumulate(grads, parts[c].grads);
    sq += parts[c].sq_error;
  }
  return sq;
}

double validation_rmse(const models::Model& model, const dataset::RowMatrix& x, std::span<const Sample> val,
                       int threads) {
  const auto pred = model.predict(x, val, threads);
  double sq = 0.0;
  for (std::size_t k = 0; k < val.size(); ++k) {
    const double d = pred[static_cast<Eigen::Index>(k)] - val[k].y;
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(val.size()));
}

}  // namespace

TrainResult train(models::Model& model, const dataset::ForcingSet& forcing, const dataset::Split& split,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  retain_heap_memory();
  if (split.train.empty()) throw ValidationError("training split is empty");
  if (split.val.empty()) throw ValidationError("validation split is empty");

  model.fit_normalizer(forcing, split.train);
  if (cfg.target_scaling) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(split.train.size()));
    for (std::size_t k = 0; k < split.train.size(); ++k) y[static_cast<Eigen::Index>(k)] = split.train[k].y;
    const double mean = y.mean();
    const double sd = std::sqrt((y.array() - mean).square().mean());
    model.set_output_scale({sd > 1e-12 ? sd : 1.0, mean});
  } else {
    model.set_output_scale({});
  }
  const auto x = model.features(forcing);

  nn::AdamConfig adam;
  adam.lr = cfg.lr;
  auto state = nn::make_adam(model.params(), adam);
  Rng rng(cfg.seed);
  std::vector<Sample> order = split.train;

  TrainResult result;
  result.best_val_rmse = std::numeric_limits<double>::infinity();
  std::vector<double> best = model.params().flat_values();
  nn::Gradients grads;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (cfg.shuffle) rng.shuffle(order);
    double sq = 0.0;
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
      const auto batch = std::span<const Sample>(order).subspan(lo, std::min(cfg.batch_size, order.size() - lo));
      const double batch_sq = batch_step(model, x, batch, cfg.threads, grads);
      if (!std::isfinite(batch_sq))
        throw Error("training diverged: non-finite loss in epoch " + std::to_string(epoch) + " at batch starting " +
                    format_iso_hour(batch.front().time));
      sq += batch_sq;
      model.params().set_grads(grads);
      nn::adam_step(model.params(), state);
    }

    EpochRecord rec{epoch, sq / static_cast<double>(order.size()), validation_rmse(model, x, split.val, cfg.threads)};
    if (!std::isfinite(rec.val_rmse))
      throw Error("training diverged: non-finite validation RMSE in epoch " + std::to_string(epoch));
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.val_rmse < result.best_val_rmse) {
      result.best_val_rmse = rec.val_rmse;
      result.best_epoch = epoch;
      best = model.params().flat_values();
    }
    if (epoch - result.best_epoch >= cfg.patience) break;
  }
  model.params().set_flat_values(best);
  return result;
}

MetricsReport evaluate(const models::Model& model, const dataset::ForcingSet& forcing,
                       std::span<const Sample> samples, int threads) {
  if (samples.empty()) throw ValidationError("evaluation range contains no samples");
  const auto pred = model.predict(model.features(forcing), samples, threads);
  Eigen::VectorXd obs(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t k = 0; k < samples.size(); ++k) obs[static_cast<Eigen::Index>(k)] = samples[k].y;
  return compute_metrics(obs, pred);
}

std::string format_history(const std::vector<EpochRecord>& h) {
  std::string out = "epoch,train_loss,val_rmse\n";
  for (const auto& r : h) out += std::to_string(r.epoch) + "," + format_real(r.train_loss) + "," + format_real(r.val_rmse) + "\n";
  return out;
}

}  // namespace gnrrm::training
