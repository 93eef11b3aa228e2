#include "gnrrm/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "gnrrm/error.hpp"

namespace gnrrm::nn {

GradCheckReport grad_check(std::span<double> theta, const std::function<double()>& f,
                           std::span<const double> analytic, double rtol, double eps) {
  if (theta.size() != analytic.size()) throw Error("grad_check: analytic gradient has the wrong length");
  GradCheckReport report;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double saved = theta[k];
    theta[k] = saved + eps;
    const double up = f();
    theta[k] = saved - eps;
    const double down = f();
    theta[k] = saved;
    const double fd = (up - down) / (2.0 * eps);
    const double err = std::abs(analytic[k] - fd) / std::max(1.0, std::abs(fd));
    if (!(err <= rtol)) report.passed = false;
    if (!(err <= report.max_error)) {
      report.max_error = err;
      report.worst_index = k;
    }
    ++report.checked;
  }
  return report;
}

GradCheckReport grad_check(ParamStore& store, const std::function<double(const ParamStore&)>& loss,
                           const Gradients& analytic, double rtol, double eps) {
  GradCheckReport total;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < store.size(); ++i) {
    Matrix& value = store.value(i);
    std::span<double> theta(value.data(), static_cast<std::size_t>(value.size()));
    std::span<const double> a(analytic[i].data(), static_cast<std::size_t>(analytic[i].size()));
    auto r = grad_check(theta, [&] { return loss(store); }, a, rtol, eps);
    if (!r.passed) total.passed = false;
    if (!(r.max_error <= total.max_error)) {
      total.max_error = r.max_error;
      total.worst_index = offset + r.worst_index;
      total.worst_name = store[i].name + "[" + std::to_string(r.worst_index) + "]";
    }
    total.checked += r.checked;
    offset += r.checked;
  }
  return total;
}

}  // namespace gnrrm::nn
