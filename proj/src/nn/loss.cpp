#include "gnrrm/nn/loss.hpp"

#include "gnrrm/error.hpp"

namespace gnrrm::nn {

LossResult mse_loss(const Vector& pred, const Vector& target) {
  if (pred.size() != target.size() || pred.size() == 0) throw Error("mse: size mismatch or empty input");
  const Vector diff = pred - target;
  const double n = static_cast<double>(diff.size());
  return LossResult{diff.squaredNorm() / n, 2.0 * diff / n};
}

}  // namespace gnrrm::nn
